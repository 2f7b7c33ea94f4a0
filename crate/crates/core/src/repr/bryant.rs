use super::lawson::{base_development, LocalDevelopment};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::Jet;
use crate::moebius::Mat2;
use crate::surface::{BryantF, SurfaceData, SurfaceSpec};
use num_complex::Complex64 as C64;
use serde::Serialize;

/// The null frame `omega(f, g)` from 3-jets of `f` and `g` at the same point.
/// The square root of `df/dg` uses the principal branch; only the projective
/// class is meaningful.
pub fn omega_from_jets(f: &Jet, g: &Jet) -> Result<Mat2> {
    let (f0, f1, f2) = (f.value(), f.derivative_value(1), f.derivative_value(2));
    let (g0, g1, g2) = (g.value(), g.derivative_value(1), g.derivative_value(2));
    if g1.norm() < 1e-300 || f1.norm() < 1e-300 {
        return Err(Error::CriticalPoint(format!("critical point at {}", f.center)));
    }
    let r = f1 / g1;
    let s = (f2 * g1 - f1 * g2) / (g1 * g1 * g1);
    let sq = r.sqrt();
    let rm12 = 1.0 / sq;
    let rm32 = rm12 / r;
    let alpha = sq - 0.5 * f0 * rm32 * s;
    let delta = rm12 + 0.5 * g0 * rm32 * s;
    let gamma = -0.5 * rm32 * s;
    let beta = f0 * delta - g0 * sq;
    Ok(Mat2::new(alpha, beta, gamma, delta))
}

pub fn omega_matrix(f: &Expr, g: &Expr, z: C64) -> Result<Mat2> {
    omega_from_jets(&f.jet(z, 3)?, &g.jet(z, 3)?)
}

/// `d omega / dz = -1/2 [[f, -f g], [1, -g]] (df/dg)^{-1/2} S_g(f) g'`.
pub fn d_omega_closed_form(f: &Jet, g: &Jet) -> Result<Mat2> {
    let s_fz = crate::schwarzian::schwarzian_from_jets(f, g)?;
    let (f0, f1) = (f.value(), f.derivative_value(1));
    let (g0, g1) = (g.value(), g.derivative_value(1));
    let r = f1 / g1;
    // schwarzian_from_jets returns the dz^2 coefficient; S_g(f) g' = that / g'.
    let c = -0.5 / r.sqrt() * s_fz / g1;
    Ok(Mat2::new(f0, -f0 * g0, C64::new(1.0, 0.0), -g0).scale(c))
}

/// Where `f` comes from: a closed form, or a local expansion of the
/// developing map continued from the scene's base point.
#[derive(Debug, Clone)]
pub enum FrameSource {
    Closed { f: Expr, g: Expr },
    Local { dev: LocalDevelopment, g: Expr },
}

impl FrameSource {
    pub fn f_jet(&self, z: C64, k: usize) -> Result<Jet> {
        match self {
            FrameSource::Closed { f, .. } => f.jet(z, k),
            FrameSource::Local { dev, .. } => dev.f_jet(z, k),
        }
    }

    pub fn g(&self) -> &Expr {
        match self {
            FrameSource::Closed { g, .. } | FrameSource::Local { g, .. } => g,
        }
    }

    pub fn frame(&self, z: C64) -> Result<Mat2> {
        omega_from_jets(&self.f_jet(z, 3)?, &self.g().jet(z, 3)?)
    }
}

/// Frame data valid near `z`. Weierstrass scenes are developed through the
/// Lawson correspondence first.
pub fn frame_source(s: &SurfaceSpec, z: C64) -> Result<FrameSource> {
    match &s.data {
        SurfaceData::Bryant {
            f: BryantF::Expr(f),
            g,
        } => Ok(FrameSource::Closed {
            f: f.clone(),
            g: g.clone(),
        }),
        SurfaceData::Bryant {
            f: BryantF::Developed(_),
            g,
        } => Ok(FrameSource::Local {
            dev: base_development(s, z)?,
            g: g.clone(),
        }),
        SurfaceData::Weierstrass { .. } => {
            frame_source(&super::lawson::lawson_min_to_bryant(s)?, z)
        }
        SurfaceData::Intrinsic { .. } => Err(Error::Unsupported(
            "intrinsic data carry no frame".into(),
        )),
    }
}

/// Sign of `m` chosen to be closest to `reference` (the lift of the
/// projective class that is continuous with it).
fn aligned(m: Mat2, reference: &Mat2) -> Mat2 {
    let minus = m.scale(C64::new(-1.0, 0.0));
    if m.sub(reference).max_abs() <= minus.sub(reference).max_abs() {
        m
    } else {
        minus
    }
}

/// `max |det(dF/dz)|` from central differences along the real and imaginary
/// directions. Since `det F = 1`, this equals `|det(F^{-1} dF)|`.
pub fn null_check(src: &FrameSource, z: C64, h: f64) -> Result<f64> {
    let f0 = src.frame(z)?;
    let mut worst: f64 = 0.0;
    for dir in [C64::new(h, 0.0), C64::new(0.0, h)] {
        let p = aligned(src.frame(z + dir)?, &f0);
        let m = aligned(src.frame(z - dir)?, &f0);
        let d = p.sub(&m).scale(1.0 / (2.0 * dir));
        worst = worst.max(d.det().norm());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperbolicSample {
    /// `F F^H` scaled to determinant one.
    pub hermitian: Mat2,
    /// Poincare ball coordinates.
    pub ball: [f64; 3],
}

/// Projection of a frame to hyperbolic space.
pub fn hyperbolic_sample(frame: &Mat2) -> HyperbolicSample {
    let x = *frame * frame.adjoint();
    let x = x.scale(C64::new(1.0 / frame.det().norm(), 0.0));
    let x0 = 0.5 * (x.a.re + x.d.re);
    let x3 = 0.5 * (x.a.re - x.d.re);
    let (x1, x2) = (x.b.re, x.b.im);
    let s = 1.0 / (1.0 + x0);
    HyperbolicSample {
        hermitian: x,
        ball: [x1 * s, x2 * s, x3 * s],
    }
}

pub fn bryant_position(s: &SurfaceSpec, z: C64) -> Result<HyperbolicSample> {
    Ok(hyperbolic_sample(&frame_source(s, z)?.frame(z)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_frame() {
        let m = omega_matrix(&Expr::z(), &Expr::z(), c(0.3, 0.2)).unwrap();
        assert!(m.projectively_eq(&Mat2::identity(), 1e-12));
        let h = hyperbolic_sample(&Mat2::identity());
        assert!(h.ball.iter().all(|b| b.abs() < 1e-15));
    }

    #[test]
    fn frame_has_unit_determinant_and_is_null() {
        let src = FrameSource::Closed {
            f: parse("(z^3 + 1) / (z - 2)").unwrap(),
            g: parse("z^2 + 3*z").unwrap(),
        };
        let z = c(0.4, 0.7);
        assert!((src.frame(z).unwrap().det() - 1.0).norm() < 1e-12);
        let r = null_check(&src, z, 1e-4).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn moebius_related_data_give_constant_frame() {
        let src = FrameSource::Closed {
            f: parse("(2*z + 1) / (z + 3)").unwrap(),
            g: Expr::z(),
        };
        let a = src.frame(c(0.1, 0.2)).unwrap();
        let b = src.frame(c(-0.7, 0.9)).unwrap();
        assert!(a.projectively_eq(&b, 1e-12));
    }

    #[test]
    fn closed_form_derivative_matches_differences() {
        let f = parse("z^3 + 2*z").unwrap();
        let g = parse("z^2 - z").unwrap();
        let z = c(0.8, 0.3);
        let h = 1e-5;
        let w0 = omega_matrix(&f, &g, z).unwrap();
        let p = aligned(omega_matrix(&f, &g, z + h).unwrap(), &w0);
        let m = aligned(omega_matrix(&f, &g, z - h).unwrap(), &w0);
        let fd = p.sub(&m).scale(C64::new(0.5 / h, 0.0));
        let cf = d_omega_closed_form(&f.jet(z, 3).unwrap(), &g.jet(z, 3).unwrap()).unwrap();
        let cf = if fd.sub(&cf).max_abs() < fd.add(&cf).max_abs() { cf } else { cf.scale(C64::new(-1.0, 0.0)) };
        assert!(fd.sub(&cf).max_abs() < 1e-6 * cf.max_abs(), "{fd:?} vs {cf:?}");
    }

    #[test]
    fn horosphere_projection() {
        let z = c(0.3, -1.2);
        let f = Mat2::new(c(1.0, 0.0), z, c(0.0, 0.0), c(1.0, 0.0));
        let h = hyperbolic_sample(&f);
        assert!((h.hermitian.a - (1.0 + z.norm_sqr())).norm() < 1e-14);
        assert!((h.hermitian.b - z).norm() < 1e-14);
        assert!((h.hermitian.c - z.conj()).norm() < 1e-14);
        let n: f64 = h.ball.iter().map(|b| b * b).sum();
        assert!(n < 1.0);
    }
}
