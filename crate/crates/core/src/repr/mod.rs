//! Euclidean and hyperbolic realizations of surface data, intrinsic sampling,
//! the Lawson correspondence and pointwise residual checks.

mod bryant;
mod immerse;
mod lawson;
mod ros;

pub use bryant::{
    bryant_position, d_omega_closed_form, frame_source, hyperbolic_sample, null_check,
    omega_from_jets, omega_matrix, FrameSource, HyperbolicSample,
};
pub use immerse::{immerse_mesh, ImmersedMesh, Model};
pub use lawson::{
    develop_along, lawson_bryant_to_min, lawson_min_to_bryant, LocalDevelopment,
};
pub use ros::{gauss_residual, observed_order, ros_identity_residual, HarmonicForm, RosResidual};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, path_integral};
use crate::surface::{monodromy_report, phi, singular_points, ChartPos, SurfaceSpec};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImmersionSample {
    pub z: C64,
    pub x: [f64; 3],
    /// Set when the Gauss map has nontrivial monodromy, so positions depend on
    /// the homotopy class of the path and not only on its periods.
    pub non_framed_ambiguity: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntrinsicSample {
    pub z: C64,
    pub e2l: f64,
    pub curvature: f64,
    pub sigma: C64,
}

fn clearance(a: C64, b: C64, p: C64) -> f64 {
    let d = b - a;
    let t = if d.norm_sqr() == 0.0 {
        0.0
    } else {
        (((p - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0)
    };
    (a + d * t - p).norm()
}

/// Polyline from `a` to `b` that keeps away from `avoid`, detouring
/// sideways around any point closer than `margin` to the straight segment.
pub fn auto_path(a: C64, b: C64, avoid: &[C64], margin: f64) -> Result<Vec<C64>> {
    for p in avoid {
        if (a - p).norm() < 1e-12 || (b - p).norm() < 1e-12 {
            return Err(Error::PathThroughSingularity(format!("endpoint at singular point {p}")));
        }
    }
    let mut path = vec![a, b];
    for _ in 0..16 {
        let mut changed = false;
        let mut i = 0;
        while i + 1 < path.len() {
            let (u, v) = (path[i], path[i + 1]);
            let hit = avoid.iter().find(|p| {
                let m = margin.min(0.45 * (u - **p).norm()).min(0.45 * (v - **p).norm());
                clearance(u, v, **p) < m
            });
            if let Some(p) = hit {
                let dir = (v - u) / (v - u).norm();
                let r = margin.min(0.45 * (u - p).norm()).min(0.45 * (v - p).norm()) * 2.0;
                let side = C64::new(0.0, 1.0) * dir * r;
                path.insert(i + 1, p - dir * r + side);
                path.insert(i + 2, p + dir * r + side);
                changed = true;
                i += 3;
            } else {
                i += 1;
            }
        }
        if !changed {
            return Ok(path);
        }
    }
    Err(Error::PathThroughSingularity(format!("no clear path from {a} to {b}")))
}

/// `Re int_{z0}^{z} Phi`, along `path` if given or an automatic detour path.
pub fn minimal_immersion(
    s: &SurfaceSpec,
    z0: C64,
    z: C64,
    path: Option<&[C64]>,
    tol: f64,
) -> Result<ImmersionSample> {
    let (g, eta) = s.weierstrass_pair()?;
    let avoid = singular_points(s);
    let owned;
    let path = match path {
        Some(p) => {
            for w in p.windows(2) {
                if let Some(q) = avoid.iter().find(|q| clearance(w[0], w[1], **q) < 1e-9) {
                    return Err(Error::PathThroughSingularity(format!("path meets {q}")));
                }
            }
            p
        }
        None => {
            owned = auto_path(z0, z, &avoid, 0.05)?;
            &owned
        }
    };
    let phase = C64::from_polar(1.0, s.phase);
    let v = path_integral(|w| Ok(phi(g.eval(w)?, eta.eval(w)?, phase)), path, tol)?;
    let framed = if s.punctures().is_empty() {
        true
    } else {
        monodromy_report(s, 256).map(|r| r.framed).unwrap_or(false)
    };
    Ok(ImmersionSample {
        z,
        x: v.map(|c| c.re),
        non_framed_ambiguity: !framed,
    })
}

/// `e^{2 lambda}` at `z`.
pub fn metric_factor(s: &SurfaceSpec, z: C64) -> Result<f64> {
    Ok(s.evaluator()?.at(z)?.e2l)
}

pub fn gauss_curvature(s: &SurfaceSpec, z: C64) -> Result<f64> {
    Ok(s.evaluator()?.at(z)?.curvature)
}

pub fn intrinsic_sample(s: &SurfaceSpec, z: C64) -> Result<IntrinsicSample> {
    let l = s.evaluator()?.at(z)?;
    Ok(IntrinsicSample {
        z,
        e2l: l.e2l,
        curvature: l.curvature,
        sigma: l.sigma,
    })
}

/// Samples at many points in parallel; output order follows `pts`.
pub fn intrinsic_samples(s: &SurfaceSpec, pts: &[C64]) -> Result<Vec<IntrinsicSample>> {
    let ev = s.evaluator()?;
    pts.par_iter()
        .map(|&z| {
            let l = ev.at(z)?;
            Ok(IntrinsicSample {
                z,
                e2l: l.e2l,
                curvature: l.curvature,
                sigma: l.sigma,
            })
        })
        .collect()
}

pub fn associated_family(s: &SurfaceSpec, theta: f64) -> SurfaceSpec {
    s.associated_family(theta)
}

/// Coefficients `a_k` with `dx_k = Re(a_k dz)`.
pub fn harmonic_forms(s: &SurfaceSpec, z: C64) -> Result<[C64; 3]> {
    let (g, eta) = s.weierstrass_pair()?;
    Ok(phi(g.eval(z)?, eta.eval(z)?, C64::from_polar(1.0, s.phase)))
}

/// `int K dA` over the whole sphere (both charts), or over a fundamental
/// domain of a torus.
pub fn total_curvature(s: &SurfaceSpec, tol: f64) -> Result<f64> {
    let ev = s.evaluator()?;
    if let crate::surface::Topology::Torus { omega1, omega2 } = s.topology {
        let area = (omega1.conj() * omega2).im.abs();
        let v = integrate(
            |u| {
                integrate(
                    |t| {
                        let z = omega1 * u + omega2 * t;
                        Ok([C64::new(0.5 * ev.at(z)?.potential, 0.0)])
                    },
                    0.0,
                    1.0,
                    tol,
                )
            },
            0.0,
            1.0,
            tol,
        )?;
        return Ok(v[0].re * area);
    }
    // Unit disks in z and w = 1/z, in polar coordinates; K dA = potential / 2.
    let mut total = 0.0;
    for chart in 0..2 {
        let v = integrate(
            |r| {
                integrate(
                    |t| {
                        let c = C64::from_polar(r, t);
                        let pos = if chart == 0 { ChartPos::Z(c) } else { ChartPos::W(c) };
                        let p = if r == 0.0 {
                            0.0
                        } else {
                            ev.local(pos, C64::new(1.0, 0.0))?.potential
                        };
                        Ok([C64::new(0.5 * p * r, 0.0)])
                    },
                    0.0,
                    2.0 * PI,
                    tol,
                )
            },
            0.0,
            1.0,
            tol,
        )?;
        total += v[0].re;
    }
    Ok(total)
}

/// Total angle around `p` estimated from circle lengths at radii `r` and
/// `r (1 + d)`: `2 pi d(log L)/d(log r)`.
pub fn cone_angle(s: &SurfaceSpec, p: C64, r: f64) -> Result<f64> {
    let ev = s.evaluator()?;
    let length = |rad: f64| -> Result<f64> {
        let n = 256;
        let mut acc = 0.0;
        for k in 0..n {
            let z = p + C64::from_polar(rad, 2.0 * PI * k as f64 / n as f64);
            acc += ev.at(z)?.e2l.sqrt();
        }
        Ok(acc * rad * 2.0 * PI / n as f64)
    };
    let d = 1e-3;
    let (l0, l1) = (length(r)?, length(r * (1.0 + d))?);
    Ok(2.0 * PI * (l1 / l0).ln() / (1.0 + d).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::point::Point;
    use crate::surface::SurfaceData;

    fn spec(name: &str, g: &str, eta: &str, punct: Vec<Point>) -> SurfaceSpec {
        SurfaceSpec::sphere(
            name,
            punct,
            SurfaceData::Weierstrass {
                g: parse(g).unwrap(),
                eta: parse(eta).unwrap(),
            },
        )
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn plane_immersion_is_linear() {
        let s = spec("plane", "0", "1", vec![Point::Infinity]);
        let x = minimal_immersion(&s, c(0.0, 0.0), c(0.3, 0.7), None, 1e-12).unwrap();
        assert!((x.x[0] - 0.15).abs() < 1e-12);
        assert!((x.x[1] + 0.35).abs() < 1e-12);
        assert_eq!(x.x[2], 0.0);
    }

    #[test]
    fn catenoid_paths_around_origin_agree() {
        let s = spec("cat", "z", "z^-2", vec![Point::finite(0.0, 0.0), Point::Infinity]);
        let up = [c(1.0, 0.0), c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, 0.0)];
        let down = [c(1.0, 0.0), c(1.0, -1.0), c(-1.0, -1.0), c(-1.0, 0.0)];
        let a = minimal_immersion(&s, up[0], up[3], Some(&up), 1e-12).unwrap();
        let b = minimal_immersion(&s, down[0], down[3], Some(&down), 1e-12).unwrap();
        for k in 0..3 {
            assert!((a.x[k] - b.x[k]).abs() < 1e-9);
        }
        assert!(!a.non_framed_ambiguity);
    }

    #[test]
    fn auto_path_detours() {
        let p = auto_path(c(-1.0, 0.0), c(1.0, 0.0), &[c(0.0, 0.0)], 0.1).unwrap();
        assert!(p.len() > 2);
        for w in p.windows(2) {
            assert!(clearance(w[0], w[1], c(0.0, 0.0)) > 0.05);
        }
    }

    #[test]
    fn differentials_of_immersion_match_forms() {
        let s = spec("enneper", "z", "1", vec![Point::Infinity]);
        let z = c(0.4, -0.3);
        let h = 1e-5;
        let base = c(0.1, 0.0);
        let xp = minimal_immersion(&s, base, z + h, None, 1e-13).unwrap().x;
        let xm = minimal_immersion(&s, base, z - h, None, 1e-13).unwrap().x;
        let a = harmonic_forms(&s, z).unwrap();
        for k in 0..3 {
            let fd = (xp[k] - xm[k]) / (2.0 * h);
            assert!((fd - a[k].re).abs() < 1e-7, "{k}: {fd} vs {}", a[k].re);
        }
    }

    #[test]
    fn catenoid_total_curvature() {
        let s = spec("cat", "z", "z^-2", vec![Point::finite(0.0, 0.0), Point::Infinity]);
        let t = total_curvature(&s, 1e-9).unwrap();
        assert!((t + 4.0 * PI).abs() < 1e-6, "{t}");
    }

    #[test]
    fn branch_point_cone_angle() {
        // eta vanishes simply at the origin: branch point of order 1.
        let s = spec("branched", "z", "z", vec![Point::Infinity]);
        let a = cone_angle(&s, c(0.0, 0.0), 1e-3).unwrap();
        assert!((a - 4.0 * PI).abs() < 1e-3, "{a}");
    }
}
