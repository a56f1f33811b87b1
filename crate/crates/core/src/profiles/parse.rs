//! Expression-string grammar for initial data and soliton profiles.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('+' | '-') unary | primary
//! primary := number | 'r' | 'pi' | func '(' expr ')' | 'pow' '(' expr ',' int ')' | '(' expr ')'
//! func    := 'sin' | 'cos' | 'exp' | 'atan'
//! ```

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::string::String;

use super::expr::Expr;
use super::ProfileError;
use crate::math;

pub fn parse_expr(src: &str) -> Result<Expr, ProfileError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ProfileError {
        ProfileError::Parse { position: self.pos, message: message.to_owned() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ProfileError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(match c {
                b'(' => "expected '('",
                b')' => "expected ')'",
                b',' => "expected ','",
                _ => "unexpected character",
            }))
        }
    }

    fn expr(&mut self) -> Result<Expr, ProfileError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = lhs + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ProfileError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = lhs * self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = lhs / self.unary()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ProfileError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(match self.unary()? {
                    Expr::Const(c) => Expr::Const(-c),
                    e => -e,
                })
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<f64, ProfileError> {
        let start = self.pos;
        let bytes = self.src;
        let mut i = self.pos;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = core::str::from_utf8(&bytes[start..i]).map_err(|_| self.error("bad number"))?;
        let v = text.parse::<f64>().map_err(|_| self.error("malformed number"))?;
        self.pos = i;
        Ok(v)
    }

    fn primary(&mut self) -> Result<Expr, ProfileError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let at = self.pos;
                let name = self.ident();
                match name.as_str() {
                    "r" => Ok(Expr::R),
                    "pi" => Ok(Expr::Const(math::PI)),
                    "sin" | "cos" | "exp" | "atan" => {
                        self.expect(b'(')?;
                        let arg = Box::new(self.expr()?);
                        self.expect(b')')?;
                        Ok(match name.as_str() {
                            "sin" => Expr::Sin(arg),
                            "cos" => Expr::Cos(arg),
                            "exp" => Expr::Exp(arg),
                            _ => Expr::Atan(arg),
                        })
                    }
                    "pow" => {
                        self.expect(b'(')?;
                        let base = self.expr()?;
                        self.expect(b',')?;
                        let exp_at = self.pos;
                        let exponent = match self.unary()? {
                            Expr::Const(c) => c,
                            _ => {
                                self.pos = exp_at;
                                return Err(self.error("pow exponent must be an integer literal"));
                            }
                        };
                        if math::round(exponent) != exponent || math::abs(exponent) > 64.0 {
                            self.pos = exp_at;
                            return Err(self.error("pow exponent must be an integer literal"));
                        }
                        self.expect(b')')?;
                        Ok(Expr::PowI(Box::new(base), exponent as i32))
                    }
                    _ => {
                        self.pos = at;
                        Err(self.error("unknown identifier"))
                    }
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::RJet;

    #[test]
    fn sine_string_matches_analytic_jet() {
        let e = parse_expr("sin(r)").unwrap();
        for r in [0.0, 0.3, 2.0, -1.2] {
            let j = e.jet(r).unwrap();
            assert!(j.max_diff(&RJet::variable(r).sin()) < 1e-15);
        }
    }

    #[test]
    fn precedence_and_unary_minus() {
        let e = parse_expr("1 + 2*r - -3/4 + pow(r, 2)").unwrap();
        let r = 1.5;
        assert!((e.eval(r).unwrap() - (1.0 + 3.0 + 0.75 + 2.25)).abs() < 1e-15);
        let e = parse_expr("pi/6 + 0.001*cos(r)").unwrap();
        assert!((e.eval(0.0).unwrap() - (math::PI / 6.0 + 0.001)).abs() < 1e-15);
        let e = parse_expr("2.5e-1*exp(-r)").unwrap();
        assert!((e.eval(0.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_position() {
        match parse_expr("sin(r) + foo(r)") {
            Err(ProfileError::Parse { position, .. }) => assert_eq!(position, 9),
            other => panic!("{other:?}"),
        }
        assert!(parse_expr("pow(r, 1.5)").is_err());
        assert!(parse_expr("(r").is_err());
        assert!(parse_expr("r r").is_err());
    }
}
