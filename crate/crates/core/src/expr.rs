//! A small expression language for coefficient functions of `x`.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-' unary | atom
//! atom   := number | 'x' | '(' expr ')'
//! ```
//!
//! Exponents must not depend on `x`, so expressions are limited to sums,
//! products and quotients of polynomial and power terms. Evaluation carries
//! first and second derivatives alongside the value.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
}

/// Value with first and second derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    fn constant(v: f64) -> Self {
        Jet { v, d1: 0.0, d2: 0.0 }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        };
        let e = p.expr()?;
        if p.pos != p.chars.len() {
            return Err(Error::Config(format!(
                "unexpected '{}' at offset {} in expression '{src}'",
                p.chars[p.pos], p.pos
            )));
        }
        Ok(e)
    }

    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::X => true,
            Expr::Neg(a) | Expr::Pow(a, _) => a.depends_on_x(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on_x() || b.depends_on_x()
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet(x).v
    }

    pub fn jet(&self, x: f64) -> Jet {
        match self {
            Expr::Const(c) => Jet::constant(*c),
            Expr::X => Jet { v: x, d1: 1.0, d2: 0.0 },
            Expr::Neg(a) => {
                let a = a.jet(x);
                Jet { v: -a.v, d1: -a.d1, d2: -a.d2 }
            }
            Expr::Add(a, b) => {
                let (a, b) = (a.jet(x), b.jet(x));
                Jet { v: a.v + b.v, d1: a.d1 + b.d1, d2: a.d2 + b.d2 }
            }
            Expr::Sub(a, b) => {
                let (a, b) = (a.jet(x), b.jet(x));
                Jet { v: a.v - b.v, d1: a.d1 - b.d1, d2: a.d2 - b.d2 }
            }
            Expr::Mul(a, b) => {
                let (a, b) = (a.jet(x), b.jet(x));
                Jet {
                    v: a.v * b.v,
                    d1: a.d1 * b.v + a.v * b.d1,
                    d2: a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2,
                }
            }
            Expr::Div(a, b) => {
                let (a, b) = (a.jet(x), b.jet(x));
                let v = a.v / b.v;
                let d1 = (a.d1 - v * b.d1) / b.v;
                let d2 = (a.d2 - 2.0 * d1 * b.d1 - v * b.d2) / b.v;
                Jet { v, d1, d2 }
            }
            Expr::Pow(a, p) => {
                let a = a.jet(x);
                let p = *p;
                if p == 0.0 {
                    return Jet::constant(1.0);
                }
                let v = a.v.powf(p);
                let g1 = p * a.v.powf(p - 1.0);
                let g2 = if p == 1.0 { 0.0 } else { p * (p - 1.0) * a.v.powf(p - 2.0) };
                Jet {
                    v,
                    d1: g1 * a.d1,
                    d2: g2 * a.d1 * a.d1 + g1 * a.d2,
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::X => write!(f, "x"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, p) => write!(f, "({a}^{p})"),
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                '-' => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while let Some(c) = self.peek() {
            match c {
                '*' => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                '/' => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exponent = self.factor()?;
            if exponent.depends_on_x() {
                return Err(Error::Config("exponents must not depend on x".into()));
            }
            return Ok(Expr::Pow(Box::new(base), exponent.eval(0.0)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some('-') {
            self.pos += 1;
            // -x^2 parses as -(x^2)
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('x') => {
                self.pos += 1;
                Ok(Expr::X)
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(Error::Config(format!("missing ')' at offset {}", self.pos)));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    let exp_sign = (c == '-' || c == '+')
                        && matches!(self.chars.get(self.pos.wrapping_sub(1)), Some('e' | 'E'));
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let s: String = self.chars[start..self.pos].iter().collect();
                s.parse::<f64>()
                    .map(Expr::Const)
                    .map_err(|_| Error::Config(format!("bad number '{s}'")))
            }
            Some(c) => Err(Error::Config(format!("unexpected '{c}' at offset {}", self.pos))),
            None => Err(Error::Config("unexpected end of expression".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_unary_minus() {
        let e = Expr::parse("1 - 2*x^2 + -x^2/4").unwrap();
        assert_eq!(e.eval(2.0), 1.0 - 8.0 - 1.0);
        let e = Expr::parse("2^3^2").unwrap();
        assert_eq!(e.eval(0.0), 512.0);
        assert_eq!(Expr::parse("1.5e-1*x").unwrap().eval(2.0), 0.3);
    }

    #[test]
    fn jets_match_hand_derivatives() {
        let e = Expr::parse("(1 - x)^1.5 / (1 + x)").unwrap();
        let x = 0.3f64;
        let f = |x: f64| (1.0 - x).powf(1.5) / (1.0 + x);
        let j = e.jet(x);
        let h = 1e-4;
        assert!((j.v - f(x)).abs() < 1e-15);
        assert!((j.d1 - (f(x + h) - f(x - h)) / (2.0 * h)).abs() < 1e-7);
        assert!((j.d2 - (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)).abs() < 1e-5);
    }

    #[test]
    fn rejects_x_in_exponent_and_garbage() {
        assert!(Expr::parse("2^x").is_err());
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("sin(x)").is_err());
        assert!(Expr::parse("(1+x").is_err());
    }
}
