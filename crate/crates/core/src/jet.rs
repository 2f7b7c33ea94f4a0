//! Truncated Taylor expansions ("jets") with Taylor-coefficient normalization:
//! `coeffs[k] = f^(k)(center) / k!`.

use crate::error::{Error, Result};
use crate::expr::{as_integer, log_branch, Expr};
use crate::series;
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub center: C64,
    pub coeffs: Vec<C64>,
}

impl Jet {
    pub fn constant(center: C64, c: C64, order: usize) -> Jet {
        let mut coeffs = vec![C64::new(0.0, 0.0); order + 1];
        coeffs[0] = c;
        Jet { center, coeffs }
    }

    pub fn variable(center: C64, order: usize) -> Jet {
        let mut j = Jet::constant(center, center, order);
        if order >= 1 {
            j.coeffs[1] = C64::new(1.0, 0.0);
        }
        j
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> C64 {
        self.coeffs[0]
    }

    /// `n`-th derivative at the center.
    pub fn derivative_value(&self, n: usize) -> C64 {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        self.coeffs[n] * fact
    }

    /// Jet of `f'` (one order lower).
    pub fn derivative(&self) -> Jet {
        let coeffs = (1..self.coeffs.len())
            .map(|k| self.coeffs[k] * k as f64)
            .collect::<Vec<_>>();
        Jet {
            center: self.center,
            coeffs: if coeffs.is_empty() {
                vec![C64::new(0.0, 0.0)]
            } else {
                coeffs
            },
        }
    }

    fn with(&self, coeffs: Vec<C64>) -> Jet {
        Jet {
            center: self.center,
            coeffs,
        }
    }

    pub fn add(&self, o: &Jet) -> Jet {
        self.with(self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        self.with(self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: C64) -> Jet {
        self.with(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        self.with(series::mul(&self.coeffs, &o.coeffs))
    }

    pub fn div(&self, o: &Jet) -> Result<Jet> {
        if o.value() == C64::new(0.0, 0.0) {
            return Err(Error::SingularPoint(format!("pole at {}", self.center)));
        }
        Ok(self.with(series::div(&self.coeffs, &o.coeffs)))
    }

    pub fn powi(&self, n: i32) -> Result<Jet> {
        series::powi(&self.coeffs, n)
            .map(|c| self.with(c))
            .ok_or_else(|| Error::SingularPoint(format!("pole at {}", self.center)))
    }

    /// Real power on branch `k` of the logarithm.
    pub fn powf(&self, mu: f64, k: i32) -> Result<Jet> {
        let a0 = self.value();
        if a0 == C64::new(0.0, 0.0) {
            return Err(Error::SingularPoint(format!("branch point at {}", self.center)));
        }
        let c0 = (mu * log_branch(a0, k)).exp();
        Ok(self.with(series::powf(&self.coeffs, mu, c0)))
    }

    pub fn ln(&self, k: i32) -> Result<Jet> {
        let a0 = self.value();
        if a0 == C64::new(0.0, 0.0) {
            return Err(Error::SingularPoint(format!("log of zero at {}", self.center)));
        }
        Ok(self.with(series::ln(&self.coeffs, log_branch(a0, k))))
    }
}

/// Taylor coefficients of `e` at `z0` through order `k`.
pub fn eval_jet(e: &Expr, z0: C64, k: usize) -> Result<Jet> {
    let j = match e {
        Expr::Const(c) => Jet::constant(z0, *c, k),
        Expr::Var => Jet::variable(z0, k),
        Expr::Param(p) => return Err(Error::UnboundParameter(p.clone())),
        Expr::Neg(a) => eval_jet(a, z0, k)?.scale(C64::new(-1.0, 0.0)),
        Expr::Add(a, b) => eval_jet(a, z0, k)?.add(&eval_jet(b, z0, k)?),
        Expr::Sub(a, b) => eval_jet(a, z0, k)?.sub(&eval_jet(b, z0, k)?),
        Expr::Mul(a, b) => eval_jet(a, z0, k)?.mul(&eval_jet(b, z0, k)?),
        Expr::Div(a, b) => eval_jet(a, z0, k)?.div(&eval_jet(b, z0, k)?)?,
        Expr::PowInt(a, n) => eval_jet(a, z0, k)?.powi(*n)?,
        Expr::Pow {
            base,
            exponent,
            branch,
        } => {
            let mu = exponent.real_exponent()?;
            let b = eval_jet(base, z0, k)?;
            match as_integer(mu) {
                Some(n) => b.powi(n)?,
                None => b.powf(mu, branch.ok_or(Error::BranchUnset)?)?,
            }
        }
        Expr::Log { arg, branch } => {
            let k_br = branch.ok_or(Error::BranchUnset)?;
            eval_jet(arg, z0, k)?.ln(k_br)?
        }
    };
    if j.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(j)
    } else {
        Err(Error::SingularPoint(format!("non-finite jet at {z0}")))
    }
}

impl Expr {
    pub fn jet(&self, z0: C64, k: usize) -> Result<Jet> {
        eval_jet(self, z0, k)
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
    fn square_at_one() {
        let j = eval_jet(&parse("z^2").unwrap(), c(1.0, 0.0), 2).unwrap();
        assert_eq!(j.coeffs, vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn principal_sqrt_at_one() {
        let j = eval_jet(&parse("z^{0.5}[0]").unwrap(), c(1.0, 0.0), 1).unwrap();
        assert!((j.coeffs[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((j.coeffs[1] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn scherk_eta_matches_symbolic_derivatives() {
        let e = parse("(1 - z^4)^-1").unwrap();
        let z0 = c(0.3, 0.1);
        let j = eval_jet(&e, z0, 3).unwrap();
        let mut d = e.clone();
        for n in 0..=3 {
            let want = d.eval(z0).unwrap();
            assert!((j.derivative_value(n) - want).norm() <= 1e-12 * want.norm().max(1.0));
            d = d.derivative();
        }
    }

    #[test]
    fn errors() {
        let e = parse("1/z").unwrap();
        assert!(matches!(eval_jet(&e, c(0.0, 0.0), 2), Err(Error::SingularPoint(_))));
        let e = parse("z^{0.3}").unwrap();
        assert_eq!(eval_jet(&e, c(1.0, 0.0), 2), Err(Error::BranchUnset));
        let e = parse("z^{0.3}[0]").unwrap();
        assert!(matches!(eval_jet(&e, c(0.0, 0.0), 2), Err(Error::SingularPoint(_))));
    }
}
