use crate::error::Result;
use crate::jet::Jet;
use crate::surface::SurfaceSpec;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// A coordinate differential `dx_k` or its conformal dual `*dx_k`
/// (`k` is 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HarmonicForm {
    Dx(usize),
    StarDx(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RosResidual {
    /// `Delta X_w - 2 K X_w` by the 5-point stencil.
    pub lhs: [f64; 3],
    /// `2 <grad w, Re sigma> N`.
    pub rhs: [f64; 3],
    pub residual: f64,
    /// The scalar `<grad w, Re sigma>`.
    pub pairing: f64,
}

struct Frame {
    phi: [Jet; 3],
    g: C64,
    e2l: f64,
    curvature: f64,
    lambda_z: C64,
    sigma: C64,
}

fn frame(s: &SurfaceSpec, z: C64) -> Result<Frame> {
    let (g, eta) = s.weierstrass_pair()?;
    let gj = g.jet(z, 2)?;
    let ej = eta.jet(z, 2)?;
    let phase = C64::from_polar(1.0, s.phase);
    let one = Jet::constant(z, C64::new(1.0, 0.0), 2);
    let g2 = gj.mul(&gj);
    let ep = ej.scale(phase);
    let phi = [
        one.sub(&g2).mul(&ep).scale(C64::new(0.5, 0.0)),
        one.add(&g2).mul(&ep).scale(C64::new(0.0, 0.5)),
        gj.mul(&ep),
    ];
    let (g0, g1) = (gj.value(), gj.derivative_value(1));
    let (e0, e1) = (ej.value(), ej.derivative_value(1));
    let l = s.evaluator()?.at(z)?;
    Ok(Frame {
        phi,
        g: g0,
        e2l: l.e2l,
        curvature: l.curvature,
        lambda_z: g0.conj() * g1 / (1.0 + g0.norm_sqr()) + e1 / (2.0 * e0),
        sigma: l.sigma,
    })
}

/// `(a, a')` for `w = Re(a dz)`.
fn coefficient(fr: &Frame, w: HarmonicForm) -> (C64, C64) {
    let (k, rot) = match w {
        HarmonicForm::Dx(k) => (k, C64::new(1.0, 0.0)),
        HarmonicForm::StarDx(k) => (k, C64::new(0.0, -1.0)),
    };
    let j = &fr.phi[k];
    (rot * j.value(), rot * j.derivative_value(1))
}

/// Components of the tangent vector dual to `w`: `<w, dx_k>`.
fn x_w(s: &SurfaceSpec, w: HarmonicForm, z: C64) -> Result<[f64; 3]> {
    let fr = frame(s, z)?;
    let (a, _) = coefficient(&fr, w);
    Ok([0, 1, 2].map(|k| (a * fr.phi[k].value().conj()).re / fr.e2l))
}

/// Unit normal for which the identity holds with a plus sign: the antipode of
/// the stereographic lift of `g`.
fn normal(g: C64) -> [f64; 3] {
    let n = 1.0 + g.norm_sqr();
    [-2.0 * g.re / n, -2.0 * g.im / n, (1.0 - g.norm_sqr()) / n]
}

/// Both sides of `Delta X_w - 2 K X_w = 2 <grad w, Re sigma> N` at `z`.
pub fn ros_identity_residual(
    s: &SurfaceSpec,
    w: HarmonicForm,
    z: C64,
    h: f64,
) -> Result<RosResidual> {
    let fr = frame(s, z)?;
    let x0 = x_w(s, w, z)?;
    let mut lap = [0.0; 3];
    for d in [C64::new(h, 0.0), C64::new(-h, 0.0), C64::new(0.0, h), C64::new(0.0, -h)] {
        let x = x_w(s, w, z + d)?;
        for k in 0..3 {
            lap[k] += x[k] - x0[k];
        }
    }
    let lhs = [0, 1, 2].map(|k| lap[k] / (h * h * fr.e2l) - 2.0 * fr.curvature * x0[k]);
    let (a, da) = coefficient(&fr, w);
    let pairing =
        2.0 / (fr.e2l * fr.e2l) * ((da - 2.0 * fr.lambda_z * a) * fr.sigma.conj()).re;
    let n = normal(fr.g);
    let rhs = n.map(|c| 2.0 * pairing * c);
    let residual = (0..3).map(|k| (lhs[k] - rhs[k]).powi(2)).sum::<f64>().sqrt();
    Ok(RosResidual {
        lhs,
        rhs,
        residual,
        pairing,
    })
}

/// `|K + e^{-2 lambda} Delta_0 lambda|` with the 5-point stencil.
pub fn gauss_residual(s: &SurfaceSpec, z: C64, h: f64) -> Result<f64> {
    let ev = s.evaluator()?;
    let l0 = ev.at(z)?;
    let lam = |p: C64| -> Result<f64> { Ok(0.5 * ev.at(p)?.e2l.ln()) };
    let c = lam(z)?;
    let mut acc = 0.0;
    for d in [C64::new(h, 0.0), C64::new(-h, 0.0), C64::new(0.0, h), C64::new(0.0, -h)] {
        acc += lam(z + d)? - c;
    }
    Ok((l0.curvature + acc / (h * h) / l0.e2l).abs())
}

/// `log(r_i / r_{i+1}) / log(h_i / h_{i+1})` for consecutive refinements.
pub fn observed_order(h: &[f64], r: &[f64]) -> Vec<f64> {
    h.windows(2)
        .zip(r.windows(2))
        .map(|(hw, rw)| (rw[0] / rw[1]).ln() / (hw[0] / hw[1]).ln())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Expr};
    use crate::point::Point;
    use crate::surface::SurfaceData;

    fn catenoid() -> SurfaceSpec {
        SurfaceSpec::sphere(
            "cat",
            vec![Point::finite(0.0, 0.0), Point::Infinity],
            SurfaceData::Weierstrass {
                g: Expr::z(),
                eta: parse("z^-2").unwrap(),
            },
        )
    }

    #[test]
    fn star_dx3_pairing_vanishes() {
        let s = catenoid();
        for z in [C64::new(0.7, 0.4), C64::new(-1.3, 0.2), C64::new(0.1, -0.6)] {
            let r = ros_identity_residual(&s, HarmonicForm::StarDx(2), z, 1e-3).unwrap();
            assert!(r.pairing.abs() < 1e-10);
        }
    }

    #[test]
    fn residual_is_second_order() {
        let s = catenoid();
        let hs = [0.02, 0.01, 0.005];
        for w in [HarmonicForm::Dx(0), HarmonicForm::Dx(2)] {
            let r: Vec<f64> = hs
                .iter()
                .map(|h| ros_identity_residual(&s, w, C64::new(0.7, 0.4), *h).unwrap().residual)
                .collect();
            for o in observed_order(&hs, &r) {
                assert!(o > 1.9, "{w:?}: {r:?}");
            }
        }
    }

    #[test]
    fn gauss_equation_holds() {
        let s = catenoid();
        let r: Vec<f64> = [0.02, 0.01]
            .iter()
            .map(|h| gauss_residual(&s, C64::new(0.6, -0.5), *h).unwrap())
            .collect();
        assert!(r[1] < r[0] / 3.8);
    }

    #[test]
    fn plane_sides_vanish() {
        let s = SurfaceSpec::sphere(
            "plane",
            vec![Point::Infinity],
            SurfaceData::Weierstrass {
                g: Expr::real(0.0),
                eta: Expr::real(1.0),
            },
        );
        let r = ros_identity_residual(&s, HarmonicForm::Dx(0), C64::new(0.3, 0.1), 1e-2).unwrap();
        assert!(r.residual < 1e-12 && r.pairing == 0.0);
    }
}
