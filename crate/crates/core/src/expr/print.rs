use super::Expr;
use std::fmt;

fn write_const(f: &mut fmt::Formatter<'_>, c: num_complex::Complex64) -> fmt::Result {
    if c.im == 0.0 && c.re.is_sign_positive() {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 && c.re.is_sign_positive() && c.im == 1.0 {
        write!(f, "i")
    } else {
        write!(f, "c({},{})", c.re, c.im)
    }
}

fn write_base(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::PowInt(..) | Expr::Pow { .. } => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

fn write_branch(f: &mut fmt::Formatter<'_>, b: Option<i32>) -> fmt::Result {
    match b {
        Some(k) => write!(f, "[{k}]"),
        None => Ok(()),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_const(f, *c),
            Expr::Var => write!(f, "z"),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::PowInt(a, n) => {
                write_base(f, a)?;
                write!(f, "^{n}")
            }
            Expr::Pow {
                base,
                exponent,
                branch,
            } => {
                write_base(f, base)?;
                write!(f, "^{{{exponent}}}")?;
                write_branch(f, *branch)
            }
            Expr::Log { arg, branch } => {
                write!(f, "log({arg})")?;
                write_branch(f, *branch)
            }
        }
    }
}
