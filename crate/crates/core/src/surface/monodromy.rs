use super::{SurfaceData, SurfaceSpec, Topology};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::moebius::Mat2;
use crate::point::Point;
use crate::quadrature::segment_integral;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize)]
pub struct MonodromyReport {
    /// One label per generator (puncture or lattice vector).
    pub generators: Vec<String>,
    pub g_monodromy: Vec<Mat2>,
    /// Real parts of the loop integrals of the immersion integrands.
    pub periods: Vec<[f64; 3]>,
    /// Imaginary parts of the same loop integrals.
    pub fluxes: Vec<[f64; 3]>,
    pub framed: bool,
    pub two_sided_consistent: bool,
}

/// Immersion integrands `(1/2 (1 - g^2) eta, i/2 (1 + g^2) eta, g eta)`.
pub(crate) fn phi(g: C64, eta: C64, phase: C64) -> [C64; 3] {
    let e = eta * phase;
    let g2 = g * g;
    [
        0.5 * (1.0 - g2) * e,
        C64::new(0.0, 0.5) * (1.0 + g2) * e,
        g * e,
    ]
}

/// Finite punctures together with zeros and poles of rational data.
pub fn singular_points(s: &SurfaceSpec) -> Vec<C64> {
    let mut pts: Vec<C64> = s.punctures().iter().filter_map(|p| p.as_finite()).collect();
    if let Ok((g, eta)) = s.weierstrass_pair() {
        for e in [g, eta] {
            if let Some(d) = e.to_rational().and_then(|r| r.divisor(1e-6)) {
                pts.extend(d.iter().filter_map(|(p, _)| p.as_finite()));
            }
        }
    }
    let mut out: Vec<C64> = Vec::new();
    for p in pts {
        if out.iter().all(|q| (q - p).norm() > 1e-6) {
            out.push(p);
        }
    }
    out
}

/// Closed loop (first node repeated at the end) around puncture `p`, with the
/// derivative `dz/dt` at each node for `t` in `[0, 2 pi]`.
pub fn loop_for_puncture(s: &SurfaceSpec, p: Point, nodes: usize) -> (Vec<C64>, Vec<C64>) {
    let others = singular_points(s);
    match p {
        Point::Finite(c) => {
            let d = others
                .iter()
                .filter(|q| (*q - c).norm() > 1e-6)
                .map(|q| (q - c).norm())
                .fold(f64::INFINITY, f64::min);
            let r = (0.5 * d).min(1.0);
            (0..=nodes)
                .map(|k| {
                    let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
                    (c + r * e, C64::new(0.0, r) * e)
                })
                .unzip()
        }
        Point::Infinity => {
            let d = others
                .iter()
                .map(|q| 1.0 / q.norm().max(1e-300))
                .fold(f64::INFINITY, f64::min);
            let rw = (0.5 * d).min(1.0);
            (0..=nodes)
                .map(|k| {
                    let z = C64::from_polar(1.0 / rw, -2.0 * PI * k as f64 / nodes as f64);
                    (z, C64::new(0.0, -1.0) * z)
                })
                .unzip()
        }
    }
}

fn continued(e: &Expr, path: &[C64]) -> Result<Vec<C64>> {
    e.continue_along(path)
        .map_err(|err| Error::ContinuationFailure(err.to_string()))
}

/// Moebius map relating `g` before and after one turn of the loop.
fn g_monodromy(g: &Expr, s: &SurfaceSpec, p: Point, nodes: usize) -> Result<Mat2> {
    if !g.depends_on_z() {
        return Ok(Mat2::identity());
    }
    let (lp, _) = loop_for_puncture(s, p, nodes);
    let mut path: Vec<C64> = lp.clone();
    path.extend_from_slice(&lp[1..=2 * nodes / 3]);
    let v = continued(g, &path)?;
    let idx = [0, nodes / 3, 2 * nodes / 3];
    let before = idx.map(|i| Point::Finite(v[i]));
    let after = idx.map(|i| Point::Finite(v[i + nodes]));
    let spread = (v[idx[0]] - v[idx[1]]).norm().min((v[idx[1]] - v[idx[2]]).norm());
    if spread < 1e-12 {
        return Ok(Mat2::identity());
    }
    Mat2::from_three_points(before, after)
}

fn loop_integral(s: &SurfaceSpec, g: &Expr, eta: &Expr, p: Point, nodes: usize) -> Result<[C64; 3]> {
    let (path, dz) = loop_for_puncture(s, p, nodes);
    let gv = continued(g, &path)?;
    let ev = continued(eta, &path)?;
    let phase = C64::from_polar(1.0, s.phase);
    let h = 2.0 * PI / nodes as f64;
    let mut acc = [C64::new(0.0, 0.0); 3];
    for k in 0..nodes {
        let f = phi(gv[k], ev[k], phase);
        for i in 0..3 {
            acc[i] += f[i] * dz[k] * h;
        }
    }
    Ok(acc)
}

/// Monodromy of `g` and periods of the immersion forms around each generator.
pub fn monodromy_report(s: &SurfaceSpec, nodes: usize) -> Result<MonodromyReport> {
    let mut rep = MonodromyReport {
        generators: vec![],
        g_monodromy: vec![],
        periods: vec![],
        fluxes: vec![],
        framed: true,
        two_sided_consistent: true,
    };
    let pair = match &s.data {
        SurfaceData::Intrinsic { .. } => None,
        _ => Some(s.weierstrass_pair()?),
    };
    match &s.topology {
        Topology::Sphere { punctures } => {
            for p in punctures {
                rep.generators.push(format!("loop around {p}"));
                let Some((g, eta)) = &pair else {
                    rep.g_monodromy.push(Mat2::identity());
                    rep.periods.push([0.0; 3]);
                    rep.fluxes.push([0.0; 3]);
                    continue;
                };
                rep.g_monodromy.push(g_monodromy(g, s, *p, nodes)?);
                let v = loop_integral(s, g, eta, *p, nodes)?;
                rep.periods.push(v.map(|c| c.re));
                rep.fluxes.push(v.map(|c| c.im));
            }
        }
        Topology::Torus { omega1, omega2 } => {
            for (label, om) in [("omega1", omega1), ("omega2", omega2)] {
                rep.generators.push(format!("translation by {label}"));
                let Some((g, eta)) = &pair else {
                    rep.g_monodromy.push(Mat2::identity());
                    rep.periods.push([0.0; 3]);
                    rep.fluxes.push([0.0; 3]);
                    continue;
                };
                let z0 = C64::new(0.0, 0.0);
                let gs = [g.eval(z0)?, g.eval(*om)?];
                rep.g_monodromy.push(if (gs[0] - gs[1]).norm() < 1e-10 {
                    Mat2::identity()
                } else {
                    Mat2::new(C64::new(1.0, 0.0), gs[1] - gs[0], C64::default(), C64::new(1.0, 0.0))
                });
                let phase = C64::from_polar(1.0, s.phase);
                let v = segment_integral(
                    |z| Ok(phi(g.eval(z)?, eta.eval(z)?, phase)),
                    z0,
                    *om,
                    1e-11,
                )?;
                rep.periods.push(v.map(|c| c.re));
                rep.fluxes.push(v.map(|c| c.im));
            }
        }
    }
    rep.framed = rep.g_monodromy.iter().all(|m| m.is_identity_map(1e-8));
    rep.two_sided_consistent = rep.g_monodromy.iter().all(|m| m.is_su2(1e-8));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn catenoid_flux_and_framing() {
        let s = SurfaceSpec::sphere(
            "catenoid",
            vec![Point::finite(0.0, 0.0), Point::Infinity],
            SurfaceData::Weierstrass {
                g: Expr::z(),
                eta: parse("z^-2").unwrap(),
            },
        );
        let r = monodromy_report(&s, 512).unwrap();
        assert!(r.framed);
        for p in &r.periods {
            assert!(p.iter().all(|x| x.abs() < 1e-10));
        }
        assert!((r.fluxes[0][2].abs() - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn real_power_gauss_map_is_not_framed() {
        let s = SurfaceSpec::sphere(
            "cone",
            vec![Point::finite(0.0, 0.0), Point::Infinity],
            SurfaceData::Weierstrass {
                g: parse("z^{1.6}[0]").unwrap(),
                eta: parse("z^-2").unwrap(),
            },
        );
        let r = monodromy_report(&s, 512).unwrap();
        assert!(!r.framed);
        assert!(r.two_sided_consistent);
    }
}
