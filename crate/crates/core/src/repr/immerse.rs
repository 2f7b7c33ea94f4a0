use super::bryant_position;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::quadrature::segment_integral;
use crate::spectral::ConformalMesh;
use crate::surface::{phi, SurfaceSpec};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Minimal surface in R^3.
    Euclidean,
    /// Bryant surface in the Poincare ball.
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImmersedMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    /// Vertices that could not be placed (and their faces).
    pub dropped: usize,
    /// Faces re-emitted with their own vertices because they straddle a period.
    pub split_faces: usize,
}

impl ImmersedMesh {
    pub fn to_obj(&self) -> String {
        crate::export::obj(&self.vertices, &self.faces)
    }
}

/// `Re int Phi` along the straight edge between two local coordinates of a
/// mesh piece.
fn edge_integral(
    s: &SurfaceSpec,
    ev: &crate::surface::Evaluator,
    mesh: &ConformalMesh,
    piece: usize,
    a: [f64; 2],
    b: [f64; 2],
    tol: f64,
) -> Result<[f64; 3]> {
    let phase = C64::from_polar(1.0, s.phase);
    let pc = &mesh.pieces[piece];
    let v = segment_integral(
        |xi| {
            let (pos, scale) = pc.chart([xi.re, xi.im]);
            let (g, _, eta) = ev.gauss_data(pos)?;
            Ok(phi(g, eta, phase).map(|c| c * scale))
        },
        C64::new(a[0], a[1]),
        C64::new(b[0], b[1]),
        tol,
    )?;
    Ok(v.map(|c| c.re))
}

fn euclidean(s: &SurfaceSpec, mesh: &ConformalMesh, tol: f64) -> Result<ImmersedMesh> {
    let ev = s.evaluator()?;
    // Directed edges (i < j) with the piece coordinates of both ends.
    let mut edges: BTreeMap<(usize, usize), (usize, [f64; 2], [f64; 2])> = BTreeMap::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            let (i, j) = (t.v[k], t.v[(k + 1) % 3]);
            let (a, b) = (t.xi[k], t.xi[(k + 1) % 3]);
            let key = if i < j { ((i, j), (a, b)) } else { ((j, i), (b, a)) };
            edges.entry(key.0).or_insert((t.piece, key.1 .0, key.1 .1));
        }
    }
    let list: Vec<_> = edges.into_iter().collect();
    let vals: Vec<[f64; 3]> = list
        .par_iter()
        .map(|(_, (piece, a, b))| edge_integral(s, &ev, mesh, *piece, *a, *b, tol))
        .collect::<Result<_>>()?;
    let n = mesh.n_vertices();
    let mut adj: Vec<Vec<(usize, [f64; 3])>> = vec![vec![]; n];
    let mut delta: BTreeMap<(usize, usize), [f64; 3]> = BTreeMap::new();
    for (((i, j), _), d) in list.iter().zip(&vals) {
        adj[*i].push((*j, *d));
        adj[*j].push((*i, d.map(|x| -x)));
        delta.insert((*i, *j), *d);
    }
    let step = |i: usize, j: usize| -> [f64; 3] {
        if i < j {
            delta[&(i, j)]
        } else {
            delta[&(j, i)].map(|x| -x)
        }
    };
    let mut x: Vec<Option<[f64; 3]>> = vec![None; n];
    for root in 0..n {
        if x[root].is_some() || adj[root].is_empty() {
            continue;
        }
        x[root] = Some([0.0; 3]);
        let mut q = VecDeque::from([root]);
        while let Some(i) = q.pop_front() {
            let xi = x[i].unwrap();
            for &(j, d) in &adj[i] {
                if x[j].is_none() {
                    x[j] = Some([xi[0] + d[0], xi[1] + d[1], xi[2] + d[2]]);
                    q.push_back(j);
                }
            }
        }
    }
    let mut vertices: Vec<[f64; 3]> = x.iter().map(|p| p.unwrap_or([0.0; 3])).collect();
    let extent = vertices
        .iter()
        .flat_map(|v| v.iter())
        .fold(1.0f64, |m, c| m.max(c.abs()));
    let mut faces = Vec::with_capacity(mesh.triangles.len());
    let mut split = 0;
    for t in &mesh.triangles {
        let [a, b, c] = t.v;
        let xa = vertices[a];
        let add = |p: [f64; 3], d: [f64; 3]| [p[0] + d[0], p[1] + d[1], p[2] + d[2]];
        let xb = add(xa, step(a, b));
        let xc = add(xa, step(a, c));
        let off = |p: [f64; 3], q: [f64; 3]| (0..3).map(|k| (p[k] - q[k]).abs()).fold(0.0, f64::max);
        if off(xb, vertices[b]) > 1e-6 * extent || off(xc, vertices[c]) > 1e-6 * extent {
            let base = vertices.len();
            vertices.extend([xa, xb, xc]);
            faces.push([base, base + 1, base + 2]);
            split += 1;
        } else {
            faces.push(t.v);
        }
    }
    Ok(ImmersedMesh {
        vertices,
        faces,
        dropped: 0,
        split_faces: split,
    })
}

fn ball(s: &SurfaceSpec, mesh: &ConformalMesh) -> Result<ImmersedMesh> {
    let placed: Vec<Option<[f64; 3]>> = mesh
        .positions
        .par_iter()
        .map(|p| match p {
            Point::Finite(z) => bryant_position(s, *z).ok().map(|h| h.ball),
            Point::Infinity => None,
        })
        .collect();
    if placed.iter().all(|p| p.is_none()) {
        return Err(Error::Unsupported(format!(
            "no hyperbolic frame available for `{}`",
            s.name
        )));
    }
    let mut index = vec![usize::MAX; placed.len()];
    let mut vertices = Vec::new();
    for (k, p) in placed.iter().enumerate() {
        if let Some(b) = p {
            index[k] = vertices.len();
            vertices.push(*b);
        }
    }
    let faces = mesh
        .triangles
        .iter()
        .filter_map(|t| {
            let f = t.v.map(|v| index[v]);
            f.iter().all(|i| *i != usize::MAX).then_some(f)
        })
        .collect();
    Ok(ImmersedMesh {
        dropped: placed.len() - vertices.len(),
        vertices,
        faces,
        split_faces: 0,
    })
}

/// Image of a conformal mesh under the Euclidean immersion (integrated
/// along mesh edges from the first vertex) or the hyperbolic one.
pub fn immerse_mesh(
    s: &SurfaceSpec,
    mesh: &ConformalMesh,
    model: Model,
    tol: f64,
) -> Result<ImmersedMesh> {
    match model {
        Model::Euclidean => euclidean(s, mesh, tol),
        Model::Ball => ball(s, mesh),
    }
}
