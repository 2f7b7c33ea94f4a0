//! Symbolic meromorphic expressions in one complex variable `z`.
//!
//! Real powers `base^{mu}` and logarithms carry an explicit branch index `k`:
//! the value is `exp(mu * (Log base + 2*pi*i*k))` with `Log` the principal
//! logarithm. A missing index is an error at evaluation time unless the
//! exponent turns out to be an integer.

mod parse;
mod print;
mod rational;

pub use parse::parse;
pub use rational::{poly_roots, Poly, Rational};

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(C64),
    Var,
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    PowInt(Box<Expr>, i32),
    Pow {
        base: Box<Expr>,
        exponent: Box<Expr>,
        branch: Option<i32>,
    },
    Log {
        arg: Box<Expr>,
        branch: Option<i32>,
    },
}

const INT_TOL: f64 = 1e-12;

pub(crate) fn as_integer(mu: f64) -> Option<i32> {
    let r = mu.round();
    ((mu - r).abs() < INT_TOL && r.abs() < i32::MAX as f64).then_some(r as i32)
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl Expr {
    pub fn z() -> Expr {
        Expr::Var
    }

    pub fn constant(c: C64) -> Expr {
        Expr::Const(c)
    }

    pub fn real(x: f64) -> Expr {
        Expr::Const(C64::new(x, 0.0))
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    fn const_of(&self) -> Option<C64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_const_value(&self, v: f64) -> bool {
        self.const_of() == Some(C64::new(v, 0.0))
    }

    // Smart constructors: fold constants and neutral elements only. They keep
    // derivative trees small; the parser never uses them so that parsing is
    // faithful to the text.

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.const_of(), b.const_of()) {
            (Some(x), Some(y)) => Expr::Const(x + y),
            (Some(x), _) if x == zero() => b,
            (_, Some(y)) if y == zero() => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.const_of(), b.const_of()) {
            (Some(x), Some(y)) => Expr::Const(x - y),
            (Some(x), _) if x == zero() => Expr::neg(b),
            (_, Some(y)) if y == zero() => a,
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.const_of(), b.const_of()) {
            (Some(x), Some(y)) => Expr::Const(x * y),
            (Some(x), _) if x == zero() => Expr::Const(zero()),
            (_, Some(y)) if y == zero() => Expr::Const(zero()),
            (Some(x), _) if x == C64::new(1.0, 0.0) => b,
            (_, Some(y)) if y == C64::new(1.0, 0.0) => a,
            (Some(x), _) if x == C64::new(-1.0, 0.0) => Expr::neg(b),
            (_, Some(y)) if y == C64::new(-1.0, 0.0) => Expr::neg(a),
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    /// Quotient; also cancels a factor that appears verbatim in a product
    /// numerator, so `(a*b)/b` becomes `a`.
    pub fn div(a: Expr, b: Expr) -> Expr {
        if let Expr::Mul(x, y) = &a {
            if **y == b {
                return (**x).clone();
            }
            if **x == b {
                return (**y).clone();
            }
        }
        match (a.const_of(), b.const_of()) {
            (Some(x), Some(y)) if y != zero() => Expr::Const(x / y),
            (Some(x), _) if x == zero() => Expr::Const(zero()),
            (_, Some(y)) if y == C64::new(1.0, 0.0) => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn powi(a: Expr, n: i32) -> Expr {
        match (n, a) {
            (0, _) => Expr::real(1.0),
            (1, a) => a,
            (n, Expr::Const(c)) if c != zero() || n > 0 => Expr::Const(c.powi(n)),
            (n, Expr::PowInt(b, m)) if (m as i64 * n as i64).abs() < i32::MAX as i64 => {
                Expr::powi(*b, m * n)
            }
            (n, a) => Expr::PowInt(Box::new(a), n),
        }
    }

    pub fn pow(base: Expr, exponent: Expr, branch: Option<i32>) -> Expr {
        Expr::Pow {
            base: Box::new(base),
            exponent: Box::new(exponent),
            branch,
        }
    }

    pub fn log(arg: Expr, branch: Option<i32>) -> Expr {
        Expr::Log {
            arg: Box::new(arg),
            branch,
        }
    }

    /// `d/dz`.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Param(_) => Expr::real(0.0),
            Expr::Var => Expr::real(1.0),
            Expr::Neg(a) => Expr::neg(a.derivative()),
            Expr::Add(a, b) => Expr::add(a.derivative(), b.derivative()),
            Expr::Sub(a, b) => Expr::sub(a.derivative(), b.derivative()),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.derivative(), (**b).clone()),
                Expr::mul((**a).clone(), b.derivative()),
            ),
            Expr::Div(a, b) => {
                let da = a.derivative();
                let db = b.derivative();
                if db.is_const_value(0.0) {
                    return Expr::div(da, (**b).clone());
                }
                Expr::div(
                    Expr::sub(
                        Expr::mul(da, (**b).clone()),
                        Expr::mul((**a).clone(), db),
                    ),
                    Expr::powi((**b).clone(), 2),
                )
            }
            Expr::PowInt(a, n) => Expr::mul(
                Expr::mul(Expr::real(*n as f64), Expr::powi((**a).clone(), n - 1)),
                a.derivative(),
            ),
            Expr::Pow {
                base,
                exponent,
                branch,
            } => Expr::mul(
                Expr::mul(
                    (**exponent).clone(),
                    Expr::pow(
                        (**base).clone(),
                        Expr::sub((**exponent).clone(), Expr::real(1.0)),
                        *branch,
                    ),
                ),
                base.derivative(),
            ),
            Expr::Log { arg, .. } => Expr::div(arg.derivative(), (**arg).clone()),
        }
    }

    /// Applies `f` bottom-up to every node.
    fn map(&self, f: &dyn Fn(Expr) -> Expr) -> Expr {
        let b = |e: &Expr| Box::new(e.map(f));
        let rebuilt = match self {
            Expr::Const(_) | Expr::Var | Expr::Param(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(b(a)),
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Expr::Div(x, y) => Expr::Div(b(x), b(y)),
            Expr::PowInt(x, n) => Expr::PowInt(b(x), *n),
            Expr::Pow {
                base,
                exponent,
                branch,
            } => Expr::Pow {
                base: b(base),
                exponent: b(exponent),
                branch: *branch,
            },
            Expr::Log { arg, branch } => Expr::Log {
                arg: b(arg),
                branch: *branch,
            },
        };
        f(rebuilt)
    }

    /// Replaces the variable by `w`.
    pub fn substitute(&self, w: &Expr) -> Expr {
        self.map(&|e| if e == Expr::Var { w.clone() } else { e })
    }

    /// Substitutes parameter values; unknown parameters are left in place.
    pub fn bind(&self, params: &BTreeMap<String, f64>) -> Expr {
        self.map(&|e| match &e {
            Expr::Param(name) => params.get(name).map_or(e.clone(), |v| Expr::real(*v)),
            _ => e,
        })
    }

    /// Fixes every unset branch index to `k`.
    pub fn with_branch(&self, k: i32) -> Expr {
        self.map(&|e| match e {
            Expr::Pow {
                base,
                exponent,
                branch: None,
            } => Expr::Pow {
                base,
                exponent,
                branch: Some(k),
            },
            Expr::Log { arg, branch: None } => Expr::Log {
                arg,
                branch: Some(k),
            },
            other => other,
        })
    }

    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var | Expr::Param(_) => {}
            Expr::Neg(a) | Expr::PowInt(a, _) | Expr::Log { arg: a, .. } => a.visit(f),
            Expr::Add(x, y) | Expr::Sub(x, y) | Expr::Mul(x, y) | Expr::Div(x, y) => {
                x.visit(f);
                y.visit(f);
            }
            Expr::Pow { base, exponent, .. } => {
                base.visit(f);
                exponent.visit(f);
            }
        }
    }

    pub fn depends_on_z(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= *e == Expr::Var);
        found
    }

    /// True when some real power with non-integer exponent, or a logarithm, occurs.
    pub fn is_multivalued(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| match e {
            Expr::Log { .. } => found = true,
            Expr::Pow { exponent, .. } => {
                if !matches!(exponent.real_exponent().map(as_integer), Ok(Some(_))) {
                    found = true;
                }
            }
            _ => {}
        });
        found
    }

    /// Value of a `z`-free expression.
    pub fn const_value(&self) -> Result<C64> {
        if self.depends_on_z() {
            return Err(Error::DegenerateData("expected a constant expression".into()));
        }
        self.eval(zero())
    }

    /// Exponent of a real power: constant and real.
    pub(crate) fn real_exponent(&self) -> Result<f64> {
        let v = self.const_value()?;
        if v.im.abs() > 1e-14 * v.re.abs().max(1.0) {
            return Err(Error::Unsupported(format!("complex exponent {v}")));
        }
        Ok(v.re)
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => z,
            Expr::Param(p) => return Err(Error::UnboundParameter(p.clone())),
            Expr::Neg(a) => -a.eval(z)?,
            Expr::Add(a, b) => a.eval(z)? + b.eval(z)?,
            Expr::Sub(a, b) => a.eval(z)? - b.eval(z)?,
            Expr::Mul(a, b) => a.eval(z)? * b.eval(z)?,
            Expr::Div(a, b) => {
                let d = b.eval(z)?;
                if d == zero() {
                    return Err(Error::SingularPoint(format!("division by zero at {z}")));
                }
                a.eval(z)? / d
            }
            Expr::PowInt(a, n) => {
                let b = a.eval(z)?;
                if b == zero() && *n < 0 {
                    return Err(Error::SingularPoint(format!("pole at {z}")));
                }
                b.powi(*n)
            }
            Expr::Pow {
                base,
                exponent,
                branch,
            } => {
                let mu = exponent.real_exponent()?;
                let b = base.eval(z)?;
                if let Some(n) = as_integer(mu) {
                    if b == zero() && n < 0 {
                        return Err(Error::SingularPoint(format!("pole at {z}")));
                    }
                    b.powi(n)
                } else {
                    let k = branch.ok_or(Error::BranchUnset)?;
                    if b == zero() {
                        if mu > 0.0 {
                            zero()
                        } else {
                            return Err(Error::SingularPoint(format!("branch pole at {z}")));
                        }
                    } else {
                        (mu * log_branch(b, k)).exp()
                    }
                }
            }
            Expr::Log { arg, branch } => {
                let k = branch.ok_or(Error::BranchUnset)?;
                let b = arg.eval(z)?;
                if b == zero() {
                    return Err(Error::SingularPoint(format!("log of zero at {z}")));
                }
                log_branch(b, k)
            }
        };
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::SingularPoint(format!("non-finite value at {z}")))
        }
    }

    /// Evaluates along a polyline, continuing every multivalued subexpression
    /// continuously from its stored branch at `path[0]`.
    pub fn continue_along(&self, path: &[C64]) -> Result<Vec<C64>> {
        let mut state: Vec<Option<f64>> = Vec::new();
        let mut out = Vec::with_capacity(path.len());
        for &z in path {
            let mut idx = 0;
            out.push(self.eval_tracked(z, &mut state, &mut idx)?);
        }
        Ok(out)
    }

    fn eval_tracked(&self, z: C64, state: &mut Vec<Option<f64>>, idx: &mut usize) -> Result<C64> {
        let v = match self {
            Expr::Const(_) | Expr::Var | Expr::Param(_) => self.eval(z)?,
            Expr::Neg(a) => -a.eval_tracked(z, state, idx)?,
            Expr::Add(a, b) => a.eval_tracked(z, state, idx)? + b.eval_tracked(z, state, idx)?,
            Expr::Sub(a, b) => a.eval_tracked(z, state, idx)? - b.eval_tracked(z, state, idx)?,
            Expr::Mul(a, b) => a.eval_tracked(z, state, idx)? * b.eval_tracked(z, state, idx)?,
            Expr::Div(a, b) => {
                let x = a.eval_tracked(z, state, idx)?;
                let d = b.eval_tracked(z, state, idx)?;
                if d == zero() {
                    return Err(Error::SingularPoint(format!("division by zero at {z}")));
                }
                x / d
            }
            Expr::PowInt(a, n) => a.eval_tracked(z, state, idx)?.powi(*n),
            Expr::Pow {
                base,
                exponent,
                branch,
            } => {
                let mu = exponent.real_exponent()?;
                let b = base.eval_tracked(z, state, idx)?;
                match as_integer(mu) {
                    Some(n) => {
                        *idx += 1;
                        b.powi(n)
                    }
                    None => (mu * track_log(state, idx, z, b, *branch)?).exp(),
                }
            }
            Expr::Log { arg, branch } => {
                let b = arg.eval_tracked(z, state, idx)?;
                track_log(state, idx, z, b, *branch)?
            }
        };
        Ok(v)
    }
}

/// Continuous logarithm for the `idx`-th multivalued node along a path.
fn track_log(
    state: &mut Vec<Option<f64>>,
    idx: &mut usize,
    z: C64,
    b: C64,
    k: Option<i32>,
) -> Result<C64> {
    let i = *idx;
    *idx += 1;
    if state.len() <= i {
        state.resize(i + 1, None);
    }
    if b == zero() {
        return Err(Error::ContinuationFailure(format!("branch point hit at {z}")));
    }
    let a = b.arg();
    let theta = match state[i] {
        Some(prev) => {
            if ((a - prev + PI).rem_euclid(2.0 * PI) - PI).abs() > 0.5 * PI {
                return Err(Error::ContinuationFailure(format!(
                    "argument jump too large near {z}; refine the path"
                )));
            }
            a + 2.0 * PI * ((prev - a) / (2.0 * PI)).round()
        }
        None => a + 2.0 * PI * k.ok_or(Error::BranchUnset)? as f64,
    };
    state[i] = Some(theta);
    Ok(C64::new(b.norm().ln(), theta))
}

pub(crate) fn log_branch(b: C64, k: i32) -> C64 {
    let l = b.ln();
    C64::new(l.re, l.im + 2.0 * PI * k as f64)
}

macro_rules! binop {
    ($tr:ident, $m:ident, $ctor:ident) => {
        impl std::ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$ctor(self, rhs)
            }
        }
        impl std::ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                Expr::$ctor(self, Expr::real(rhs))
            }
        }
    };
}
binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        parse(s)
    }
}
