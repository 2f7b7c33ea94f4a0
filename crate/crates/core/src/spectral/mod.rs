//! Morse index estimates: conformal meshes of truncated surfaces, P1
//! assembly of the Jacobi form, and inertia counts.
//!
//! On a truncation with Dirichlet conditions the index equals the number of
//! negative eigenvalues of `A = K + M_V`, where `K` is the flat stiffness
//! matrix in conformal coordinates and `M_V` the mass matrix of the potential
//! `2 K e^{2 lambda}`. Meshes for growing `R` at fixed `h` are nested, so counts
//! are nondecreasing in `R`.

mod assemble;
mod inertia;
mod mesh;
mod sparse;

pub use assemble::{assemble, potential_mass, stiffness, triangle_area, weight, Assembled};
pub use inertia::{
    bunch_kaufman_inertia, inertia, inertia_dense_oracle, Inertia, Skyline, DENSE_LIMIT, ZERO_BAND,
};
pub use mesh::{
    build_mesh, min_angle_deg, truncation_radius, ConformalMesh, MeshTriangle, Piece, VertexTag,
    MAX_GLUE_RADIUS,
};
pub use sparse::{profile, rcm, SymSparse};

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::surface::{fundamental_divisor, index_bound, Bound, ChartPos, Sidedness, SurfaceSpec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexRun {
    #[serde(rename = "R")]
    pub r: f64,
    pub h: f64,
    pub n_vertices: usize,
    pub inertia_minus: usize,
    pub inertia_zero: usize,
    pub bound: String,
    pub bound_ceiling: i64,
    pub verdict: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexReport {
    pub surface: String,
    pub runs: Vec<IndexRun>,
    /// Count shared by the last two `R` and last two `h` levels.
    pub estimate: Option<usize>,
    pub converged: bool,
    /// Fixed-`h` pairs where the count decreased with `R`.
    pub monotonicity_violations: Vec<String>,
    pub bound: Bound,
}

impl IndexReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("R,h,n_vertices,inertia_minus,inertia_zero,bound,bound_ceiling,verdict\n");
        for r in &self.runs {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.r, r.h, r.n_vertices, r.inertia_minus, r.inertia_zero, r.bound, r.bound_ceiling, r.verdict
            );
        }
        s
    }

    /// The converged estimate, or `NotConverged` with the run trace.
    pub fn require(&self) -> Result<usize> {
        match (self.converged, self.estimate) {
            (true, Some(e)) => Ok(e),
            _ => Err(Error::NotConverged(self.to_csv())),
        }
    }
}

/// Lower bound from the fundamental divisor for the scene's sidedness.
pub fn divisor_bound(s: &SurfaceSpec) -> Result<Bound> {
    index_bound(s.genus(), &fundamental_divisor(s)?, s.sidedness)
}

/// Negative and zero counts of the Jacobi form on one truncation.
pub fn index_run(s: &SurfaceSpec, r: f64, h: f64) -> Result<(ConformalMesh, Inertia)> {
    let mesh = build_mesh(s, r, h)?;
    let asm = assemble(s, &mesh)?;
    let inr = inertia(&asm.a, &asm.order)?;
    Ok((mesh, inr))
}

/// Index estimate over the schedule `rs x hs` (both in increasing refinement
/// order: `R` growing, `h` shrinking).
pub fn estimate_index(s: &SurfaceSpec, rs: &[f64], hs: &[f64]) -> Result<IndexReport> {
    if s.sidedness == Sidedness::OneSided {
        return Err(Error::Unsupported(
            "spectral estimates for one-sided surfaces".into(),
        ));
    }
    if rs.is_empty() || hs.is_empty() {
        return Err(Error::Scene("empty R or h schedule".into()));
    }
    let bound = divisor_bound(s)?;
    let mut runs = Vec::new();
    let mut counts = vec![vec![0usize; rs.len()]; hs.len()];
    for (hi, &h) in hs.iter().enumerate() {
        for (ri, &r) in rs.iter().enumerate() {
            let (mesh, inr) = index_run(s, r, h)?;
            counts[hi][ri] = inr.negative;
            runs.push(IndexRun {
                r,
                h,
                n_vertices: mesh.n_vertices(),
                inertia_minus: inr.negative,
                inertia_zero: inr.zero,
                bound: bound.value.to_string(),
                bound_ceiling: bound.ceiling,
                verdict: if inr.negative as i64 >= bound.ceiling {
                    "ok"
                } else {
                    "below-bound"
                },
            });
        }
    }
    let mut violations = Vec::new();
    for (hi, row) in counts.iter().enumerate() {
        for ri in 1..row.len() {
            if row[ri] < row[ri - 1] {
                violations.push(format!(
                    "h={}: count {} at R={} after {} at R={}",
                    hs[hi], row[ri], rs[ri], row[ri - 1], rs[ri - 1]
                ));
            }
        }
    }
    let hl = hs.len().saturating_sub(2);
    let rl = rs.len().saturating_sub(2);
    let block: Vec<usize> = counts[hl..].iter().flat_map(|row| row[rl..].to_vec()).collect();
    let stable = block.iter().all(|c| *c == block[0]);
    // Stability needs at least two levels in each direction.
    let converged = stable && violations.is_empty() && rs.len() >= 2 && hs.len() >= 2;
    Ok(IndexReport {
        surface: s.name.clone(),
        runs,
        estimate: converged.then_some(block[0]),
        converged,
        monotonicity_violations: violations,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub estimate: usize,
    pub bound: String,
    pub ceiling: i64,
    /// `estimate - ceiling`.
    pub margin: i64,
    pub holds: bool,
}

pub fn compare_bound(estimate: usize, bound: &Bound) -> BoundCheck {
    let margin = estimate as i64 - bound.ceiling;
    BoundCheck {
        estimate,
        bound: bound.value.to_string(),
        ceiling: bound.ceiling,
        margin,
        holds: margin >= 0,
    }
}

/// `Q(eta)` for the logarithmic cutoff `eta` that is one outside the
/// glue disks `|t| < a` and falls linearly in `log |t|` to zero over a
/// length `l`: `Q = int |grad eta|^2 + V eta^2`. Negative values certify
/// index at least one.
pub fn log_cutoff_rayleigh(s: &SurfaceSpec, l: f64, tol: f64) -> Result<f64> {
    let ev = s.evaluator()?;
    let total_v = 2.0 * crate::repr::total_curvature(s, tol)?;
    let punct = s.punctures();
    let mut q = total_v;
    for (k, p) in punct.iter().enumerate() {
        let others = punct
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .filter_map(|(_, q)| q.as_finite());
        let a = match p {
            crate::point::Point::Finite(c) => {
                let d = others.map(|q| (q - c).norm()).fold(f64::INFINITY, f64::min);
                MAX_GLUE_RADIUS.min(0.4 * d)
            }
            crate::point::Point::Infinity => {
                let reach = others.map(|q| q.norm() + 0.5).fold(0.0, f64::max);
                MAX_GLUE_RADIUS.min(0.5 / reach.max(1e-300))
            }
        };
        let la = a.ln();
        let lb = la - l;
        // V in log-polar coordinates t = e^{s + i theta}.
        let dens = |sv: f64, th: f64| -> Result<f64> {
            let t = C64::new(sv, th).exp();
            let (pos, scale) = match p {
                crate::point::Point::Infinity => (ChartPos::W(t), t),
                crate::point::Point::Finite(c) => (ChartPos::Z(c + t), t),
            };
            Ok(ev.local(pos, scale)?.potential)
        };
        let ring = |lo: f64, hi: f64, cut: &dyn Fn(f64) -> f64| -> Result<f64> {
            let v = integrate(
                |sv| {
                    let w = cut(sv);
                    let inner = integrate(|th| Ok([C64::new(dens(sv, th)?, 0.0)]), 0.0, 2.0 * PI, tol)?;
                    Ok([inner[0] * w])
                },
                lo,
                hi,
                tol,
            )?;
            Ok(v[0].re)
        };
        let removed = ring(lb - 60.0, lb, &|_| 1.0)?
            + ring(lb, la, &|sv| {
                let e = (sv - lb) / l;
                1.0 - e * e
            })?;
        q += -removed + 2.0 * PI / l;
    }
    Ok(q)
}

/// Smallest `k` eigenvalues of `A v = mu B v` (lumped `B`) by inverse subspace
/// iteration on `A + c B`, with `c` raised until the shifted form is
/// positive definite.
pub fn smallest_generalized_eigenvalues(asm: &Assembled, k: usize, iters: usize) -> Result<Vec<f64>> {
    let n = asm.a.n;
    if n == 0 || k == 0 {
        return Ok(vec![]);
    }
    let p = (2 * k + 8).min(n);
    let b = &asm.b_diag;
    let diag_b = SymSparse::from_triplets(n, &(0..n).map(|i| (i, i, b[i])).collect::<Vec<_>>());
    let try_shift = |c: f64| -> Option<Skyline> {
        let shifted = asm.a.add_scaled(c, &diag_b);
        let norm = shifted.norm_inf();
        Skyline::factor(&shifted, &asm.order, 0.0, 1e-14 * norm)
            .ok()
            .filter(|f| f.negative_pivots() == 0)
    };
    // Bracket, then bisect, the smallest shift making A + cB definite.
    let (mut lo, mut hi) = (0.0, 1e-6);
    while try_shift(hi).is_none() {
        lo = hi;
        hi *= 4.0;
        if hi > 1e30 {
            return Err(Error::NotConverged("no positive shift found".into()));
        }
    }
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        if try_shift(mid).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let c = 1.02 * hi + 1e-6;
    let fac = try_shift(c).ok_or_else(|| Error::NotConverged("shift lost definiteness".into()))?;
    let mut x = DMatrix::from_fn(n, p, |i, j| ((i * 7919 + j * 104729) % 1000) as f64 / 1000.0 - 0.5);
    let mut prev = vec![f64::INFINITY; p];
    let mut vals = vec![0.0; p];
    for _ in 0..iters {
        // y = (A + cB)^{-1} B x
        let mut y = DMatrix::zeros(n, p);
        for j in 0..p {
            let bx: Vec<f64> = (0..n).map(|i| b[i] * x[(i, j)]).collect();
            y.set_column(j, &DVector::from_vec(fac.solve(&bx)));
        }
        // Rayleigh-Ritz for (A + cB, B) on span(y).
        let mut ay = DMatrix::zeros(n, p);
        for j in 0..p {
            let col: Vec<f64> = y.column(j).iter().cloned().collect();
            let mut v = asm.a.mul_vec(&col);
            for i in 0..n {
                v[i] += c * b[i] * col[i];
            }
            ay.set_column(j, &DVector::from_vec(v));
        }
        let by = DMatrix::from_fn(n, p, |i, j| b[i] * y[(i, j)]);
        let ka = y.transpose() * &ay;
        let kb = y.transpose() * &by;
        let ka = (&ka + ka.transpose()) * 0.5;
        let kb = (&kb + kb.transpose()) * 0.5;
        let chol = kb
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotConverged("subspace lost rank".into()))?;
        let linv = chol
            .l()
            .try_inverse()
            .ok_or_else(|| Error::NotConverged("subspace lost rank".into()))?;
        let red = &linv * ka * linv.transpose();
        let red = (&red + red.transpose()) * 0.5;
        let eig = red.symmetric_eigen();
        let mut idx: Vec<usize> = (0..p).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let coef = linv.transpose() * &eig.eigenvectors;
        let mut nx = DMatrix::zeros(n, p);
        for (jj, &j) in idx.iter().enumerate() {
            nx.set_column(jj, &(&y * coef.column(j)));
            vals[jj] = eig.eigenvalues[j] - c;
        }
        x = nx;
        let done = (0..k).all(|j| (vals[j] - prev[j]).abs() <= 1e-9 * (1.0 + vals[j].abs()));
        prev.copy_from_slice(&vals);
        if done {
            return Ok(vals[..k].to_vec());
        }
    }
    Err(Error::NotConverged(format!(
        "subspace iteration after {iters} steps: {:?}",
        &vals[..k]
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use std::collections::BTreeMap;

    fn spec(name: &str) -> SurfaceSpec {
        builtin(name, &BTreeMap::new()).unwrap().surface
    }

    #[test]
    fn plane_has_index_zero() {
        let (_, i) = index_run(&spec("plane"), 5.0, 0.3).unwrap();
        assert_eq!(i.negative, 0);
    }

    #[test]
    fn torus_has_one_null_direction() {
        let (_, i) = index_run(&spec("torus"), 5.0, 0.1).unwrap();
        assert_eq!((i.negative, i.zero), (0, 1));
    }

    #[test]
    fn catenoid_coarse_run() {
        let (m, i) = index_run(&spec("catenoid"), 5.0, 0.3).unwrap();
        assert_eq!(i.negative, 1, "{} vertices", m.n_vertices());
    }

    #[test]
    fn sparse_inertia_agrees_with_eigen_oracle() {
        let s = spec("enneper");
        let mesh = build_mesh(&s, 5.0, 0.3).unwrap();
        let asm = assemble(&s, &mesh).unwrap();
        assert!(asm.a.n > 100);
        let a = inertia(&asm.a, &asm.order).unwrap();
        let o = inertia_dense_oracle(&asm.a);
        assert_eq!((a.negative, a.zero), (o.negative, o.zero));
        let f = Skyline::factor(&asm.a, &asm.order, 0.0, 0.0).unwrap();
        assert_eq!(f.negative_pivots(), o.negative);
    }

    #[test]
    fn catenoid_log_cutoff_is_negative() {
        let q = log_cutoff_rayleigh(&spec("catenoid"), 20.0, 1e-8).unwrap();
        assert!(q < 0.0);
        assert!((q / (-8.0 * PI) - 1.0).abs() < 0.05, "{q}");
    }

    #[test]
    fn generalized_eigenvalues_match_inertia() {
        let s = spec("catenoid");
        let mesh = build_mesh(&s, 5.0, 0.3).unwrap();
        let asm = assemble(&s, &mesh).unwrap();
        let ev = smallest_generalized_eigenvalues(&asm, 3, 500).unwrap();
        let neg = ev.iter().filter(|v| **v < 0.0).count();
        assert_eq!(neg, inertia(&asm.a, &asm.order).unwrap().negative);
    }
}
