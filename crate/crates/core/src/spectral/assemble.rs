use super::mesh::{ConformalMesh, Piece, VertexTag};
use super::sparse::{rcm, SymSparse};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::surface::{Evaluator, SurfaceSpec};
use rayon::prelude::*;

/// Degree-4 rule on the reference triangle: barycentric points and weights
/// (weights sum to one).
const QUAD: [([f64; 3], f64); 6] = {
    const A: f64 = 0.445_948_490_915_965;
    const WA: f64 = 0.223_381_589_678_011;
    const B: f64 = 0.091_576_213_509_771;
    const WB: f64 = 0.109_951_743_655_322;
    [
        ([A, A, 1.0 - 2.0 * A], WA),
        ([A, 1.0 - 2.0 * A, A], WA),
        ([1.0 - 2.0 * A, A, A], WA),
        ([B, B, 1.0 - 2.0 * B], WB),
        ([B, 1.0 - 2.0 * B, B], WB),
        ([1.0 - 2.0 * B, B, B], WB),
    ]
};

pub fn triangle_area(p: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
        .abs()
}

/// P1 stiffness matrix (cotangent formula).
pub fn stiffness(p: &[[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        let (a, b, c) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let cot = (u[0] * v[0] + u[1] * v[1]) / (u[0] * v[1] - u[1] * v[0]).abs();
        let (j, l) = ((i + 1) % 3, (i + 2) % 3);
        k[j][l] -= 0.5 * cot;
        k[l][j] -= 0.5 * cot;
        k[j][j] += 0.5 * cot;
        k[l][l] += 0.5 * cot;
    }
    k
}

/// `int V phi_i phi_j` with the degree-4 rule; `v` takes local coordinates.
pub fn potential_mass(
    p: &[[f64; 2]; 3],
    v: impl Fn([f64; 2]) -> Result<f64>,
) -> Result<[[f64; 3]; 3]> {
    let area = triangle_area(p);
    let mut m = [[0.0; 3]; 3];
    for (l, w) in QUAD {
        let x = [
            l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
            l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
        ];
        let val = area * w * v(x)?;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += val * l[i] * l[j];
            }
        }
    }
    Ok(m)
}

/// Positive weight `u` at a point: the end weights near punctures, capped
/// at one elsewhere.
pub fn weight(mesh: &ConformalMesh, p: Point) -> f64 {
    let Point::Finite(z) = p else { return 0.0 };
    let mut u: f64 = 1.0;
    for piece in &mesh.pieces {
        if let Piece::Collar {
            puncture, order, ..
        } = piece
        {
            let t = match puncture {
                Point::Infinity => 1.0 / z.norm(),
                Point::Finite(c) => (z - c).norm(),
            };
            let lg = (1.0 / t).ln();
            let w = if *order <= 1 {
                let l = lg.max(std::f64::consts::E);
                1.0 / (l * l.ln())
            } else {
                let m1 = (*order - 1) as f64;
                t.powf(m1) / (m1 * lg.max(1.0))
            };
            u = u.min(w);
        }
    }
    u
}

/// Jacobi form `A` (stiffness plus potential mass) and lumped weighted mass
/// `B` on the free (non-Dirichlet) vertices.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub a: SymSparse,
    /// Diagonal of the lumped `u^2 e^{2 lambda}` mass.
    pub b_diag: Vec<f64>,
    /// Mesh vertex of each row.
    pub vertex: Vec<usize>,
    /// Elimination order over rows (`order[new] = row`).
    pub order: Vec<usize>,
}

struct Element {
    a: [[f64; 3]; 3],
    b: [f64; 3],
}

pub fn assemble(s: &SurfaceSpec, mesh: &ConformalMesh) -> Result<Assembled> {
    let ev = Evaluator::new(s)?;
    let elements: Vec<Element> = mesh
        .triangles
        .par_iter()
        .map(|t| {
            let piece = &mesh.pieces[t.piece];
            let pot = |x: [f64; 2]| -> Result<f64> {
                let (pos, scale) = piece.chart(x);
                let v = ev.local(pos, scale)?.potential;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::AssemblyError(format!("non-finite potential at {pos:?}")))
                }
            };
            let k = stiffness(&t.xi);
            let m = potential_mass(&t.xi, pot)?;
            let mut a = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    a[i][j] = k[i][j] + m[i][j];
                }
            }
            let area = triangle_area(&t.xi);
            let mut b = [0.0; 3];
            for i in 0..3 {
                let (pos, scale) = piece.chart(t.xi[i]);
                let e2l = ev.local(pos, scale)?.e2l;
                let u = weight(mesh, mesh.positions[t.v[i]]);
                b[i] = area / 3.0 * u * u * e2l;
            }
            Ok(Element { a, b })
        })
        .collect::<Result<_>>()?;

    let mut row = vec![usize::MAX; mesh.n_vertices()];
    let mut vertex = Vec::new();
    for v in 0..mesh.n_vertices() {
        if !mesh.dirichlet[v] {
            row[v] = vertex.len();
            vertex.push(v);
        }
    }
    let n = vertex.len();
    let mut trip = Vec::with_capacity(6 * mesh.triangles.len());
    let mut b_diag = vec![0.0; n];
    for (t, e) in mesh.triangles.iter().zip(&elements) {
        for i in 0..3 {
            let ri = row[t.v[i]];
            if ri == usize::MAX {
                continue;
            }
            b_diag[ri] += e.b[i];
            for j in 0..3 {
                let rj = row[t.v[j]];
                if rj != usize::MAX && rj <= ri {
                    trip.push((ri, rj, e.a[i][j]));
                }
            }
        }
    }
    let a = SymSparse::from_triplets(n, &trip);
    let core: Vec<bool> = vertex
        .iter()
        .map(|&v| !matches!(mesh.tags[v], VertexTag::Collar { .. }))
        .collect();
    let mut order = rcm(&a, &core);
    order.extend((0..n).filter(|&r| !core[r]));
    Ok(Assembled {
        a,
        b_diag,
        vertex,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_potential_row_sums() {
        let p = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let m = potential_mass(&p, |_| Ok(-3.0)).unwrap();
        for row in m {
            let s: f64 = row.iter().sum();
            assert!((s - 0.5 * -3.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn quadrature_is_degree_four() {
        // int x^4 over the unit right triangle is 1/30.
        let mut acc = 0.0;
        for (l, w) in QUAD {
            let x = l[1];
            acc += 0.5 * w * x.powi(4);
        }
        assert!((acc - 1.0 / 30.0).abs() < 1e-12);
    }

    #[test]
    fn stiffness_rows_vanish_and_match_reference() {
        let p = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let k = stiffness(&p);
        for row in k {
            assert!(row.iter().sum::<f64>().abs() < 1e-15);
        }
        assert!((k[0][0] - 1.0).abs() < 1e-15);
        assert!((k[1][1] - 0.5).abs() < 1e-15);
        assert!((k[1][2]).abs() < 1e-15);
    }
}
