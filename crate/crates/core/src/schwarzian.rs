//! Schwarzian derivatives, the shift identity for `g = z^n`, the
//! regular-singular series solution of `S{f, z^n} = -sigma`, and end typing.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::Jet;
use crate::laurent::LaurentSeries;
use crate::point::Point;
use crate::series;
use num_complex::Complex64 as C64;
use serde::Serialize;

/// A quadratic differential `q(z) dz^2`, stored by its coefficient in the
/// global coordinate `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadDifferential {
    pub coeff: Expr,
}

impl QuadDifferential {
    pub fn new(coeff: Expr) -> Self {
        QuadDifferential { coeff }
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        self.coeff.eval(z)
    }

    /// Coefficient in the chart `w = 1/z`: `q(1/w) / w^4`.
    pub fn at_infinity_chart(&self) -> Expr {
        Expr::mul(
            self.coeff.substitute(&Expr::div(Expr::real(1.0), Expr::z())),
            Expr::powi(Expr::z(), -4),
        )
    }

    /// Laurent expansion in the natural local coordinate at `p`
    /// (`z - p`, or `w = 1/z` at infinity).
    pub fn laurent(&self, p: Point, n: i32) -> Result<LaurentSeries> {
        match p {
            Point::Finite(_) => self.coeff.laurent(p, n),
            Point::Infinity => {
                let mut s = self.at_infinity_chart().laurent(Point::finite(0.0, 0.0), n)?;
                s.center = Point::Infinity;
                Ok(s)
            }
        }
    }
}

/// `h'''/h' - (3/2) (h''/h')^2`.
pub fn schwarzian_z(h: &Expr) -> Expr {
    let d1 = h.derivative();
    let d2 = d1.derivative();
    let d3 = d2.derivative();
    Expr::sub(
        Expr::div(d3, d1.clone()),
        Expr::mul(Expr::real(1.5), Expr::powi(Expr::div(d2, d1), 2)),
    )
}

/// Symbolic `S{f, g}` as a quadratic differential in `z`.
pub fn schwarzian(f: &Expr, g: &Expr) -> Result<QuadDifferential> {
    if !f.depends_on_z() || !g.depends_on_z() {
        return Err(Error::DegenerateData("f and g must be non-constant".into()));
    }
    Ok(QuadDifferential::new(Expr::sub(schwarzian_z(f), schwarzian_z(g))))
}

/// `S{f, g}` coefficient at the common center of two jets (order >= 3), using
/// derivatives with respect to `g` and the factor `(dg/dz)^2`.
pub fn schwarzian_from_jets(f: &Jet, g: &Jet) -> Result<C64> {
    if f.order() < 3 || g.order() < 3 {
        return Err(Error::Unsupported("jets of order >= 3 required".into()));
    }
    let gp = g.derivative();
    if gp.value() == C64::new(0.0, 0.0) {
        return Err(Error::CriticalPoint(format!("g' = 0 at {}", g.center)));
    }
    let fg = f.derivative().div(&gp)?;
    if fg.value() == C64::new(0.0, 0.0) {
        return Err(Error::CriticalPoint(format!("df/dg = 0 at {}", f.center)));
    }
    let fgg = fg.derivative().div(&trim(&gp, fg.order()))?;
    let fggg = fgg.derivative().div(&trim(&gp, fgg.order()))?;
    let (d1, d2, d3) = (fg.value(), fgg.value(), fggg.value());
    let g1 = gp.value();
    Ok((d3 / d1 - 1.5 * (d2 / d1) * (d2 / d1)) * g1 * g1)
}

fn trim(j: &Jet, order: usize) -> Jet {
    Jet {
        center: j.center,
        coeffs: j.coeffs[..=order.min(j.order())].to_vec(),
    }
}

/// `S{f, z^n} = S{f, z} + (n^2 - 1)/(2 z^2)`.
pub fn schwarzian_shift(q: &QuadDifferential, n: i32) -> QuadDifferential {
    let c = (n as f64 * n as f64 - 1.0) / 2.0;
    QuadDifferential::new(Expr::add(
        q.coeff.clone(),
        Expr::mul(Expr::real(c), Expr::powi(Expr::z(), -2)),
    ))
}

/// Inverse of [`schwarzian_shift`].
pub fn schwarzian_unshift(q: &QuadDifferential, n: i32) -> QuadDifferential {
    let c = (n as f64 * n as f64 - 1.0) / 2.0;
    QuadDifferential::new(Expr::sub(
        q.coeff.clone(),
        Expr::mul(Expr::real(c), Expr::powi(Expr::z(), -2)),
    ))
}

/// `z^(twice_exponent/2) * sum coeffs[j] z^j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfSeries {
    pub twice_exponent: i32,
    pub coeffs: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchwarzianSolution {
    /// Multiplicity of `g = z^n` at the center.
    pub n: u32,
    /// Indicial multiplicity: leading order of `f` (equals `n` unless `sigma`
    /// has a double pole).
    pub multiplicity: u32,
    pub p1: HalfSeries,
    pub p2: HalfSeries,
    pub f_series: LaurentSeries,
    pub truncation: usize,
    /// Max coefficient error of `S{f, z^n} + sigma` through order `N - 3`.
    pub residual: f64,
}

const RESONANCE_TOL: f64 = 1e-10;

/// Solves `S{f, z^n} = -sigma` at `z = 0` by Frobenius series for
/// `z^2 p'' = Q p`, `Q = (n^2 - 1)/4 + sigma z^2 / 2`, with `truncation + 1`
/// coefficients per series. Normalization: `a_0 = b_0 = 1` and the free
/// resonant coefficient of `p2` set to zero, so `f = z^m + O(z^(m+1))`.
pub fn solve_schwarzian_series(
    sigma: &Expr,
    n: u32,
    truncation: usize,
) -> Result<SchwarzianSolution> {
    if n == 0 {
        return Err(Error::DegenerateData("multiplicity n must be >= 1".into()));
    }
    let big_n = truncation as i32;
    let s = sigma.laurent(Point::finite(0.0, 0.0), big_n + 2)?;
    if !s.is_zero() && s.order < -2 {
        return Err(Error::BadPole(format!("pole of order {}", -s.order)));
    }
    let nf = n as f64;
    // Q_j = [j == 0](n^2-1)/4 + s_{j-2}/2.
    let q: Vec<C64> = (0..=truncation as i32)
        .map(|j| {
            let base = if j == 0 { (nf * nf - 1.0) / 4.0 } else { 0.0 };
            C64::new(base, 0.0) + s.coefficient(j - 2) * 0.5
        })
        .collect();
    let disc = q[0] * 4.0 + 1.0;
    if disc.im.abs() > 1e-8 || disc.re <= 0.0 {
        return Err(Error::BadPole(format!(
            "indicial discriminant {disc} is not a positive real"
        )));
    }
    let m_real = disc.re.sqrt();
    let m = m_real.round();
    if (m_real - m).abs() > 1e-8 || m < 1.0 {
        return Err(Error::BadPole(format!(
            "indicial multiplicity {m_real} is not a positive integer"
        )));
    }
    let m = m as usize;
    let recur = |sign: f64| -> Result<Vec<C64>> {
        let mut a = vec![C64::new(1.0, 0.0)];
        for j in 1..=truncation {
            let rhs: C64 = (1..=j).map(|i| q[i] * a[j - i]).sum();
            let denom = j as f64 * (j as f64 + sign * m as f64);
            if denom == 0.0 {
                let scale = (1..=j).map(|i| (q[i] * a[j - i]).norm()).fold(1.0, f64::max);
                if rhs.norm() > RESONANCE_TOL * scale {
                    return Err(Error::ResonanceError(j));
                }
                a.push(C64::new(0.0, 0.0));
            } else {
                a.push(rhs / denom);
            }
        }
        Ok(a)
    };
    let a = recur(1.0)?;
    let b = recur(-1.0)?;
    let u = series::div(&a, &b);
    let f_series = LaurentSeries {
        center: Point::finite(0.0, 0.0),
        order: m as i32,
        coeffs: u.clone(),
        truncation: m as i32 + big_n,
    };
    let residual = back_substitution_residual(&u, m, n, &s, truncation);
    Ok(SchwarzianSolution {
        n,
        multiplicity: m as u32,
        p1: HalfSeries {
            twice_exponent: 1 + m as i32,
            coeffs: a,
        },
        p2: HalfSeries {
            twice_exponent: 1 - m as i32,
            coeffs: b,
        },
        f_series,
        truncation,
        residual,
    })
}

/// Max over exponents `-2..=N-5` of `|S{f, z^n} + sigma|` for `f = z^m u(z)`.
fn back_substitution_residual(u: &[C64], m: usize, n: u32, s: &LaurentSeries, big_n: usize) -> f64 {
    let len = u.len();
    // Coefficients of f^(k) / z^(m-k), i.e. nominal valuation m - k.
    let deriv = |k: usize| -> Vec<C64> {
        (0..len)
            .map(|j| {
                let e = (m + j) as f64;
                let fall: f64 = (0..k).map(|i| e - i as f64).product();
                u[j] * fall
            })
            .collect()
    };
    let (f1, f2, f3) = (deriv(1), deriv(2), deriv(3));
    // Both terms carry valuation -2.
    let t1 = series::div(&f3, &f1);
    let r = series::div(&f2, &f1);
    let t2 = series::mul(&r, &r);
    let shift = (1.0 - (n as f64).powi(2)) / 2.0;
    let mut worst: f64 = 0.0;
    let upto = big_n.saturating_sub(3).min(t1.len());
    for j in 0..upto {
        let e = j as i32 - 2;
        let mut v = t1[j] - t2[j] * 1.5 + s.coefficient(e);
        if j == 0 {
            v -= shift;
        }
        worst = worst.max(v.norm());
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EndType {
    Type1,
    Type2(u32),
    Irregular,
}

/// Classifies a puncture by the Laurent expansion of `sigma` in the local
/// coordinate, given the multiplicity `n` of `g` there.
pub fn classify_end(sigma_local: &LaurentSeries, n: u32) -> EndType {
    if sigma_local.is_zero() || sigma_local.order >= 0 {
        return EndType::Type1;
    }
    if sigma_local.order < -2 {
        return EndType::Irregular;
    }
    let c2 = sigma_local.coefficient(-2);
    if c2.im.abs() > 1e-8 {
        return EndType::Irregular;
    }
    let k2 = 2.0 * c2.re + (n as f64).powi(2);
    if k2 <= 0.0 {
        return EndType::Irregular;
    }
    let k = k2.sqrt();
    if (k - k.round()).abs() < 1e-8 && k.round() >= 1.0 {
        EndType::Type2(k.round() as u32)
    } else {
        EndType::Irregular
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn z_squared_against_identity() {
        let q = schwarzian(&parse("z^2").unwrap(), &Expr::z()).unwrap();
        let z0 = c(0.4, 0.9);
        assert!((q.eval(z0).unwrap() - (-1.5 / (z0 * z0))).norm() < 1e-13);
    }

    #[test]
    fn power_schwarzian() {
        for n in 2..=5 {
            let q = schwarzian(&Expr::powi(Expr::z(), n), &Expr::z()).unwrap();
            let z0 = c(-0.3, 0.7);
            let want = (1.0 - (n * n) as f64) / (2.0 * z0 * z0);
            assert!((q.eval(z0).unwrap() - want).norm() < 1e-12 * want.norm());
        }
    }

    #[test]
    fn jets_agree_with_symbolic() {
        let f = parse("(z^3 + 2)/(z - 0.5)").unwrap();
        let g = parse("z^2 + 3*z").unwrap();
        let z0 = c(0.2, 0.4);
        let sym = schwarzian(&f, &g).unwrap().eval(z0).unwrap();
        let jet = schwarzian_from_jets(&f.jet(z0, 4).unwrap(), &g.jet(z0, 4).unwrap()).unwrap();
        assert!((sym - jet).norm() < 1e-10 * sym.norm());
    }

    #[test]
    fn constant_is_degenerate() {
        assert!(matches!(
            schwarzian(&Expr::real(2.0), &Expr::z()),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn shift_examples() {
        let zero = QuadDifferential::new(Expr::real(0.0));
        let q = schwarzian_shift(&zero, 2);
        let z0 = c(0.5, 0.0);
        assert!((q.eval(z0).unwrap() - 1.5 / (z0 * z0)).norm() < 1e-14);
        assert_eq!(schwarzian_shift(&zero, 1).eval(z0).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn zero_sigma_gives_power() {
        for n in 1..=3 {
            let sol = solve_schwarzian_series(&Expr::real(0.0), n, 24).unwrap();
            assert_eq!(sol.multiplicity, n);
            assert_eq!(sol.f_series.coeffs[0], c(1.0, 0.0));
            assert!(sol.f_series.coeffs[1..].iter().all(|x| x.norm() == 0.0));
        }
    }

    #[test]
    fn double_pole_changes_multiplicity() {
        // sigma = (k^2 - n^2)/(2 z^2) with n = 1, k = 2.
        let sol = solve_schwarzian_series(&parse("1.5/z^2").unwrap(), 1, 16).unwrap();
        assert_eq!(sol.multiplicity, 2);
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn inadmissible_poles() {
        assert!(matches!(
            solve_schwarzian_series(&parse("1/z^3").unwrap(), 1, 8),
            Err(Error::BadPole(_))
        ));
        assert!(matches!(
            solve_schwarzian_series(&parse("0.3/z^2").unwrap(), 1, 8),
            Err(Error::BadPole(_))
        ));
    }

    #[test]
    fn log_obstruction_is_a_resonance() {
        // m = 1 with Q_1 != 0 forces a logarithmic second solution.
        assert_eq!(
            solve_schwarzian_series(&parse("1/z").unwrap(), 1, 8),
            Err(Error::ResonanceError(1))
        );
    }

    #[test]
    fn classify() {
        let at0 = |s: &str| parse(s).unwrap().laurent(Point::finite(0.0, 0.0), 4).unwrap();
        assert_eq!(classify_end(&at0("z + 1"), 1), EndType::Type1);
        assert_eq!(classify_end(&at0("1.5/z^2"), 1), EndType::Type2(2));
        assert_eq!(classify_end(&at0("1/z^3"), 1), EndType::Irregular);
        assert_eq!(classify_end(&at0("0.1/z^2"), 1), EndType::Irregular);
    }
}
