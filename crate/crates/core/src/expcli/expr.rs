//! Rational expressions in `s`: numbers, `s`, `+ - * /`, integer `^`,
//! parentheses and implicit products such as `2s` or `(s+1)(s+2)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    S,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let mut p = Parser {
            chars: text.char_indices().collect(),
            pos: 0,
            text,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected input"));
        }
        Ok(e)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        match self {
            Expr::Num(v) => Complex64::new(*v, 0.0),
            Expr::S => s,
            Expr::Neg(e) => -e.eval(s),
            Expr::Add(a, b) => a.eval(s) + b.eval(s),
            Expr::Sub(a, b) => a.eval(s) - b.eval(s),
            Expr::Mul(a, b) => a.eval(s) * b.eval(s),
            Expr::Div(a, b) => a.eval(s) / b.eval(s),
            Expr::Pow(e, n) => e.eval(s).powi(*n),
        }
    }
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        let col = self.chars.get(self.pos).map_or(self.text.len(), |c| c.0) + 1;
        Error::Parse(format!("transform `{}`: {what} at column {col}", self.text))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(op @ ('*' | '/')) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = if op == '*' {
                        Expr::Mul(Box::new(lhs), Box::new(rhs))
                    } else {
                        Expr::Div(Box::new(lhs), Box::new(rhs))
                    };
                }
                Some(c) if c == 's' || c == '(' || c.is_ascii_digit() || c == '.' => {
                    let rhs = self.power()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let negative = match self.peek() {
            Some('-') => {
                self.pos += 1;
                true
            }
            Some('+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos || matches!(self.chars.get(self.pos), Some((_, '.' | 'e' | 'E'))) {
            return Err(self.error("exponent must be an integer"));
        }
        let digits: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        let n: i32 = digits.parse().map_err(|_| self.error("exponent too large"))?;
        Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('s') => {
                self.pos += 1;
                Ok(Expr::S)
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let mut seen_exp = false;
        while let Some(&(_, c)) = self.chars.get(self.pos) {
            let sign_in_exp =
                (c == '+' || c == '-') && seen_exp && matches!(self.chars.get(self.pos - 1), Some((_, 'e' | 'E')));
            if c.is_ascii_digit() || c == '.' || sign_in_exp {
                self.pos += 1;
            } else if (c == 'e' || c == 'E') && !seen_exp {
                seen_exp = true;
                self.pos += 1;
            } else {
                break;
            }
        }
        let lit: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        lit.parse().map(Expr::Num).map_err(|_| {
            self.pos = start;
            self.error("malformed number")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(text: &str, s: Complex64) -> Complex64 {
        Expr::parse(text).unwrap().eval(s)
    }

    #[test]
    fn precedence_and_implicit_products() {
        let s = Complex64::new(0.5, 1.5);
        assert_eq!(at("1/s", s), 1.0 / s);
        assert!((at("2s + 3*s^2 - 1", s) - (2.0 * s + 3.0 * s * s - 1.0)).norm() < 1e-15);
        assert!((at("1/((s+1)(s+2))", s) - 1.0 / ((s + 1.0) * (s + 2.0))).norm() < 1e-15);
        assert!((at("-s^-2", s) + s.powi(-2)).norm() < 1e-15);
        assert!((at("1.5e-1 / (s - 2.5E+0)", s) - 0.15 / (s - 2.5)).norm() < 1e-15);
        assert_eq!(at("1", s), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn errors_point_at_column() {
        for bad in ["", "1/", "(s+1", "s^0.5", "s + x", "1..2", "s)"] {
            let e = Expr::parse(bad).unwrap_err();
            assert!(matches!(e, Error::Parse(ref m) if m.contains("column")), "{bad}: {e}");
        }
    }
}
