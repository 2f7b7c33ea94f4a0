//! Recursive-descent parser for the scene expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' (int | '-' int | '{' expr '}' branch?))?
//! atom   := number | 'z' | 'i' | ident | 'c(' num ',' num ')'
//!         | 'log(' expr ')' branch? | '(' expr ')'
//! branch := '[' int ']'
//! ```

use super::Expr;
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { s: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        if self.eat(b'{') {
            let exponent = self.expr()?;
            self.expect(b'}')?;
            let branch = self.branch()?;
            return Ok(Expr::Pow {
                base: Box::new(base),
                exponent: Box::new(exponent),
                branch,
            });
        }
        let neg = self.eat(b'-');
        let n = self.integer()?;
        Ok(Expr::PowInt(Box::new(base), if neg { -n } else { n }))
    }

    fn branch(&mut self) -> Result<Option<i32>> {
        if !self.eat(b'[') {
            return Ok(None);
        }
        let neg = self.eat(b'-');
        let k = self.integer()?;
        self.expect(b']')?;
        Ok(Some(if neg { -k } else { k }))
    }

    fn integer(&mut self) -> Result<i32> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| {
                self.pos = start;
                self.err("expected an integer")
            })
    }

    fn number(&mut self) -> Result<f64> {
        self.ws();
        let start = self.pos;
        let s = self.s;
        let mut i = self.pos;
        if i < s.len() && (s[i] == b'-' || s[i] == b'+') {
            i += 1;
        }
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'-' || s[j] == b'+') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                i = j;
                while i < s.len() && s[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
        self.pos = i;
        std::str::from_utf8(&s[start..i])
            .unwrap()
            .parse()
            .map_err(|_| {
                self.pos = start;
                self.err("expected a number")
            })
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.s.len()
            && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8(self.s[start..self.pos].to_vec()).unwrap()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                Ok(Expr::Const(C64::new(self.number()?, 0.0)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let name = self.ident();
                match name.as_str() {
                    "z" => Ok(Expr::Var),
                    "i" => Ok(Expr::Const(C64::new(0.0, 1.0))),
                    "c" if self.peek() == Some(b'(') => {
                        self.pos += 1;
                        let re = self.number()?;
                        self.expect(b',')?;
                        let im = self.number()?;
                        self.expect(b')')?;
                        Ok(Expr::Const(C64::new(re, im)))
                    }
                    "log" if self.peek() == Some(b'(') => {
                        self.pos += 1;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        let branch = self.branch()?;
                        Ok(Expr::Log {
                            arg: Box::new(arg),
                            branch,
                        })
                    }
                    _ => Ok(Expr::Param(name)),
                }
            }
            Some(_) => Err(self.err("unexpected character")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scene_style_inputs() {
        let e = parse("(1 - z^4)^-1").unwrap();
        let v = e.eval(C64::new(0.5, 0.0)).unwrap();
        assert!((v.re - 1.0 / (1.0 - 0.0625)).abs() < 1e-15);
        let e = parse("z^{2*mu + 1}[0]").unwrap();
        assert_eq!(e.params().into_iter().collect::<Vec<_>>(), vec!["mu"]);
        assert!(parse("log(z)[-1] + c(1.5,-2)").is_ok());
        assert!(parse("1e-3*z").is_ok());
    }

    #[test]
    fn errors_carry_position() {
        match parse("z + * 2") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(parse("(z").is_err());
        assert!(parse("z^x").is_err());
    }
}
