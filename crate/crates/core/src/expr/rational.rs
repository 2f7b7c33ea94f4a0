//! Exact rational-function view of expressions built without real powers or
//! logarithms, used for locating zeros and poles on the whole sphere.

use super::{as_integer, Expr};
use crate::point::Point;
use num_complex::Complex64 as C64;

/// Polynomial with ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<C64>);

impl Poly {
    pub fn constant(c: C64) -> Poly {
        Poly(vec![c]).trimmed()
    }

    fn trimmed(mut self) -> Poly {
        while self.0.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let get = |p: &Poly, i: usize| p.0.get(i).copied().unwrap_or_default();
        Poly((0..n).map(|i| get(self, i) + get(o, i)).collect()).trimmed()
    }

    pub fn scale(&self, c: C64) -> Poly {
        Poly(self.0.iter().map(|x| x * c).collect()).trimmed()
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly(vec![]);
        }
        let mut out = vec![C64::new(0.0, 0.0); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out).trimmed()
    }

    pub fn powu(&self, n: u32) -> Poly {
        (0..n).fold(Poly::constant(C64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }
}

/// `num / den` with `den != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rational {
    pub num: Poly,
    pub den: Poly,
}

impl Rational {
    fn poly(p: Poly) -> Rational {
        Rational {
            num: p,
            den: Poly::constant(C64::new(1.0, 0.0)),
        }
    }

    /// Orders of zeros (positive) and poles (negative) on the sphere,
    /// including the point at infinity; common roots cancel.
    /// `None` for the zero function.
    pub fn divisor(&self, cluster_tol: f64) -> Option<Vec<(Point, i32)>> {
        let dn = self.num.degree()?;
        let dd = self.den.degree().expect("nonzero denominator");
        let mut pts: Vec<(C64, i32)> = Vec::new();
        let mut push = |z: C64, m: i32| {
            let tol = cluster_tol * z.norm().max(1.0);
            if let Some(e) = pts.iter_mut().find(|(w, _)| (w - z).norm() <= tol) {
                e.1 += m;
            } else {
                pts.push((z, m));
            }
        };
        for r in poly_roots(&self.num) {
            push(r, 1);
        }
        for r in poly_roots(&self.den) {
            push(r, -1);
        }
        let mut out: Vec<(Point, i32)> = pts
            .into_iter()
            .filter(|(_, m)| *m != 0)
            .map(|(z, m)| (Point::Finite(z), m))
            .collect();
        let at_inf = dd as i32 - dn as i32;
        if at_inf != 0 {
            out.push((Point::Infinity, at_inf));
        }
        Some(out)
    }
}

/// Roots of a polynomial (with multiplicity) by the Aberth–Ehrlich iteration.
/// Exact zero low-order coefficients are split off as roots at the origin.
pub fn poly_roots(p: &Poly) -> Vec<C64> {
    let zero = C64::new(0.0, 0.0);
    let lead_zeros = p.0.iter().take_while(|c| **c == zero).count();
    let q: Vec<C64> = p.0[lead_zeros.min(p.0.len())..].to_vec();
    let mut roots = vec![zero; lead_zeros];
    let n = q.len().saturating_sub(1);
    if n == 0 {
        return roots;
    }
    let lead = q[n];
    let a: Vec<C64> = q.iter().map(|c| c / lead).collect();
    let bound = 1.0 + a[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let r0 = a[0].norm().powf(1.0 / n as f64).clamp(1e-3, bound);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(r0, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    let dp: Vec<C64> = (1..=n).map(|k| a[k] * k as f64).collect();
    let ev = |c: &[C64], x: C64| c.iter().rev().fold(zero, |acc, v| acc * x + v);
    for _ in 0..2000 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let pv = ev(&a, z[i]);
            if pv == zero {
                continue;
            }
            let ratio = pv / ev(&dp, z[i]);
            let s: C64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d == zero {
                        C64::new(1e30, 0.0)
                    } else {
                        1.0 / d
                    }
                })
                .sum();
            let w = ratio / (1.0 - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[i] -= w;
                max_step = max_step.max(w.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    roots.extend(z);
    roots
}

impl Expr {
    /// Rational-function form, if the expression is built from constants, `z`,
    /// field operations and integer powers only.
    pub fn to_rational(&self) -> Option<Rational> {
        let one = C64::new(1.0, 0.0);
        Some(match self {
            Expr::Const(c) => Rational::poly(Poly::constant(*c)),
            Expr::Var => Rational::poly(Poly(vec![C64::new(0.0, 0.0), one])),
            Expr::Param(_) | Expr::Log { .. } => return None,
            Expr::Neg(a) => {
                let r = a.to_rational()?;
                Rational {
                    num: r.num.scale(-one),
                    den: r.den,
                }
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let (x, y) = (a.to_rational()?, b.to_rational()?);
                let sign = if matches!(self, Expr::Sub(..)) { -one } else { one };
                Rational {
                    num: x.num.mul(&y.den).add(&y.num.mul(&x.den).scale(sign)),
                    den: x.den.mul(&y.den),
                }
            }
            Expr::Mul(a, b) => {
                let (x, y) = (a.to_rational()?, b.to_rational()?);
                Rational {
                    num: x.num.mul(&y.num),
                    den: x.den.mul(&y.den),
                }
            }
            Expr::Div(a, b) => {
                let (x, y) = (a.to_rational()?, b.to_rational()?);
                if y.num.is_zero() {
                    return None;
                }
                Rational {
                    num: x.num.mul(&y.den),
                    den: x.den.mul(&y.num),
                }
            }
            Expr::PowInt(a, n) => return a.to_rational()?.powi(*n),
            Expr::Pow { base, exponent, .. } => {
                let n = as_integer(exponent.real_exponent().ok()?)?;
                return base.to_rational()?.powi(n);
            }
        })
    }
}

impl Rational {
    fn powi(self, n: i32) -> Option<Rational> {
        let k = n.unsigned_abs();
        if n >= 0 {
            Some(Rational {
                num: self.num.powu(k),
                den: self.den.powu(k),
            })
        } else if self.num.is_zero() {
            None
        } else {
            Some(Rational {
                num: self.den.powu(k),
                den: self.num.powu(k),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn roots_of_z4_minus_1() {
        let p = Poly(vec![
            C64::new(-1.0, 0.0),
            C64::default(),
            C64::default(),
            C64::default(),
            C64::new(1.0, 0.0),
        ]);
        let r = poly_roots(&p);
        assert_eq!(r.len(), 4);
        for x in r {
            assert!((x.powi(4) - 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn divisor_of_scherk_eta() {
        let d = parse("(1 - z^4)^-1").unwrap().to_rational().unwrap();
        let div = d.divisor(1e-6).unwrap();
        let poles: i32 = div.iter().filter(|(p, _)| !p.is_infinite()).map(|(_, m)| m).sum();
        assert_eq!(poles, -4);
        assert!(div.contains(&(Point::Infinity, 4)));
    }

    #[test]
    fn cancellation_of_common_roots() {
        let d = parse("(z^2 - 1)/(z - 1)").unwrap().to_rational().unwrap();
        let div = d.divisor(1e-6).unwrap();
        assert_eq!(div.len(), 2);
        assert!(div.iter().any(|(p, m)| *m == 1 && p.approx_eq(&Point::finite(-1.0, 0.0), 1e-9)));
        assert!(div.contains(&(Point::Infinity, -1)));
    }
}
