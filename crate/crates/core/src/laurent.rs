//! Truncated Laurent expansions at a point of the sphere. The point at infinity
//! is handled by expanding `e(1/w)` at `w = 0`.

use crate::error::{Error, Result};
use crate::expr::{as_integer, log_branch, Expr};
use crate::point::Point;
use crate::series;
use num_complex::Complex64 as C64;

/// `sum_j coeffs[j] * t^(order + j)` with `t = z - center` (or `1/z` at infinity).
/// An identically-zero series (to the known precision) has empty `coeffs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries {
    pub center: Point,
    pub order: i32,
    pub coeffs: Vec<C64>,
    pub truncation: i32,
}

impl LaurentSeries {
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<C64> {
        self.coeffs.first().copied()
    }

    /// Coefficient of `t^n`; zero below the leading order.
    pub fn coefficient(&self, n: i32) -> C64 {
        if n < self.order || n > self.truncation {
            return C64::new(0.0, 0.0);
        }
        self.coeffs
            .get((n - self.order) as usize)
            .copied()
            .unwrap_or_default()
    }

    /// Sum of the truncated series at `z`.
    pub fn eval(&self, z: C64) -> C64 {
        let t = match self.center {
            Point::Finite(c) => z - c,
            Point::Infinity => 1.0 / z,
        };
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * t.powi(self.order + j as i32))
            .sum()
    }
}

const ZERO_TOL: f64 = 1e-11;

/// Working series: `v` is the valuation, precision is `v + c.len()`.
#[derive(Debug, Clone)]
struct Ser {
    v: i32,
    c: Vec<C64>,
}

impl Ser {
    fn prec(&self) -> i32 {
        self.v + self.c.len() as i32
    }

    fn zero(prec: i32) -> Ser {
        Ser { v: prec, c: vec![] }
    }

    fn normalized(mut self, scale: &[f64]) -> Ser {
        let lead = self
            .c
            .iter()
            .zip(scale)
            .take_while(|(c, s)| c.norm() <= ZERO_TOL * **s)
            .count();
        self.c.drain(..lead);
        self.v += lead as i32;
        self
    }

    fn add(&self, o: &Ser, sign: f64) -> Ser {
        let p = self.prec().min(o.prec());
        let v = self.v.min(o.v).min(p);
        let get = |s: &Ser, e: i32| -> C64 {
            if e < s.v || e >= s.prec() {
                C64::new(0.0, 0.0)
            } else {
                s.c[(e - s.v) as usize]
            }
        };
        let mut c = Vec::new();
        let mut scale = Vec::new();
        for e in v..p {
            let (a, b) = (get(self, e), get(o, e) * sign);
            c.push(a + b);
            scale.push(a.norm().max(b.norm()));
        }
        let s = Ser { v, c }.normalized(&scale);
        if s.c.is_empty() {
            Ser::zero(p)
        } else {
            s
        }
    }

    fn mul(&self, o: &Ser) -> Ser {
        if self.c.is_empty() || o.c.is_empty() {
            let p = match (self.c.is_empty(), o.c.is_empty()) {
                (true, true) => self.prec() + o.prec(),
                (true, false) => self.prec() + o.v,
                _ => self.v + o.prec(),
            };
            return Ser::zero(p);
        }
        Ser {
            v: self.v + o.v,
            c: series::mul(&self.c, &o.c),
        }
    }

    fn div(&self, o: &Ser) -> Result<Ser> {
        if o.c.is_empty() {
            return Err(Error::SingularPoint("division by a vanishing series".into()));
        }
        if self.c.is_empty() {
            return Ok(Ser::zero(self.prec() - o.v));
        }
        Ok(Ser {
            v: self.v - o.v,
            c: series::div(&self.c, &o.c),
        })
    }
}

fn expand(e: &Expr, center: C64, len: usize) -> Result<Ser> {
    let zero = C64::new(0.0, 0.0);
    let constant = |c: C64| {
        if c == zero {
            Ser::zero(len as i32)
        } else {
            let mut v = vec![zero; len];
            v[0] = c;
            Ser { v: 0, c: v }
        }
    };
    Ok(match e {
        Expr::Const(c) => constant(*c),
        Expr::Param(p) => return Err(Error::UnboundParameter(p.clone())),
        Expr::Var => {
            if center == zero {
                let mut v = vec![zero; len];
                v[0] = C64::new(1.0, 0.0);
                Ser { v: 1, c: v }
            } else {
                let mut s = constant(center);
                if len > 1 {
                    s.c[1] = C64::new(1.0, 0.0);
                }
                s
            }
        }
        Expr::Neg(a) => {
            let s = expand(a, center, len)?;
            Ser {
                v: s.v,
                c: s.c.iter().map(|x| -x).collect(),
            }
        }
        Expr::Add(a, b) => expand(a, center, len)?.add(&expand(b, center, len)?, 1.0),
        Expr::Sub(a, b) => expand(a, center, len)?.add(&expand(b, center, len)?, -1.0),
        Expr::Mul(a, b) => expand(a, center, len)?.mul(&expand(b, center, len)?),
        Expr::Div(a, b) => expand(a, center, len)?.div(&expand(b, center, len)?)?,
        Expr::PowInt(a, n) => powi(&expand(a, center, len)?, *n)?,
        Expr::Pow {
            base,
            exponent,
            branch,
        } => {
            let mu = exponent.real_exponent()?;
            let b = expand(base, center, len)?;
            match as_integer(mu) {
                Some(n) => powi(&b, n)?,
                None => {
                    if b.c.is_empty() {
                        return Err(Error::EssentialOrBranch("real power of zero".into()));
                    }
                    let m = as_integer(mu * b.v as f64).ok_or_else(|| {
                        Error::EssentialOrBranch(format!(
                            "exponent offset {} is not integral",
                            mu * b.v as f64
                        ))
                    })?;
                    let k = branch.ok_or(Error::BranchUnset)?;
                    let c0 = (mu * log_branch(b.c[0], k)).exp();
                    Ser {
                        v: m,
                        c: series::powf(&b.c, mu, c0),
                    }
                }
            }
        }
        Expr::Log { arg, branch } => {
            let b = expand(arg, center, len)?;
            if b.c.is_empty() || b.v != 0 {
                return Err(Error::EssentialOrBranch("logarithmic singularity".into()));
            }
            let k = branch.ok_or(Error::BranchUnset)?;
            let s = Ser {
                v: 0,
                c: series::ln(&b.c, log_branch(b.c[0], k)),
            };
            s.normalized(&vec![b.c[0].norm().max(1.0); b.c.len()])
        }
    })
}

fn powi(s: &Ser, n: i32) -> Result<Ser> {
    if s.c.is_empty() {
        return if n > 0 {
            Ok(Ser::zero(s.prec() * n))
        } else {
            Err(Error::SingularPoint("negative power of a vanishing series".into()))
        };
    }
    Ok(Ser {
        v: s.v * n,
        c: series::powi(&s.c, n).expect("nonzero leading coefficient"),
    })
}

/// Laurent expansion of `e` at `center`, with coefficients through `t^n`.
pub fn laurent(e: &Expr, center: Point, n: i32) -> Result<LaurentSeries> {
    let (expr, c) = match center {
        Point::Finite(c) => (e.clone(), c),
        Point::Infinity => (
            e.substitute(&Expr::div(Expr::real(1.0), Expr::z())),
            C64::new(0.0, 0.0),
        ),
    };
    let mut len = 24usize;
    for _ in 0..6 {
        let s = expand(&expr, c, len)?;
        if s.prec() > n {
            let keep = if s.c.is_empty() {
                0
            } else {
                ((n - s.v + 1).max(1) as usize).min(s.c.len())
            };
            return Ok(LaurentSeries {
                center,
                order: if s.c.is_empty() { n + 1 } else { s.v },
                coeffs: s.c[..keep].to_vec(),
                truncation: if s.c.is_empty() { n } else { n.max(s.v) },
            });
        }
        len += (n - s.prec() + 1).max(0) as usize + 16;
    }
    Err(Error::EssentialOrBranch(
        "could not reach the requested truncation".into(),
    ))
}

impl Expr {
    pub fn laurent(&self, center: Point, n: i32) -> Result<LaurentSeries> {
        laurent(self, center, n)
    }

    /// Order of vanishing at `p` (negative for poles); `None` if identically zero.
    pub fn order_at(&self, p: Point) -> Result<Option<i32>> {
        let s = laurent(self, p, 12)?;
        Ok(if s.is_zero() { None } else { Some(s.order) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn inverse_square_at_zero() {
        let s = laurent(&parse("1/z^2").unwrap(), Point::finite(0.0, 0.0), 3).unwrap();
        assert_eq!(s.order, -2);
        assert_eq!(s.coeffs.len(), 6);
        assert_eq!(s.coeffs[0], C64::new(1.0, 0.0));
        assert!(s.coeffs[1..].iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn scherk_residue() {
        let s = laurent(&parse("(1 - z^4)^-1").unwrap(), Point::finite(1.0, 0.0), 2).unwrap();
        assert_eq!(s.order, -1);
        assert!((s.coeffs[0] - C64::new(-0.25, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn enneper_at_infinity() {
        let s = laurent(&Expr::z(), Point::Infinity, 2).unwrap();
        assert_eq!(s.order, -1);
        let s = laurent(&parse("z^{3}[0] + z").unwrap(), Point::Infinity, 2).unwrap();
        assert_eq!(s.order, -3);
    }

    #[test]
    fn cancellation_lowers_valuation() {
        let s = laurent(&parse("(1/z + 1) - 1/z").unwrap(), Point::finite(0.0, 0.0), 3).unwrap();
        assert_eq!(s.order, 0);
        let s = laurent(&parse("z - z").unwrap(), Point::finite(0.0, 0.0), 3).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn fractional_offset_rejected() {
        let e = parse("z^{0.3}[0]").unwrap();
        assert!(matches!(
            laurent(&e, Point::finite(0.0, 0.0), 3),
            Err(Error::EssentialOrBranch(_))
        ));
        // Regular point of the same expression is fine.
        assert!(laurent(&e, Point::finite(1.0, 0.0), 3).is_ok());
    }

    #[test]
    fn series_reproduces_values() {
        let e = parse("(z + 2)/(z*(z - 3)^2)").unwrap();
        let s = laurent(&e, Point::finite(0.0, 0.0), 10).unwrap();
        let z = C64::new(0.05, 0.02);
        let rel = (s.eval(z) - e.eval(z).unwrap()).norm() / e.eval(z).unwrap().norm();
        assert!(rel < 1e-12);
    }
}
