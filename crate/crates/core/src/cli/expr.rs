//! Closed-form periodic data.
//!
//! Grammar:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'pi' | 'x' | 'y' | 't' | func '(' expr ')' | '(' expr ')'
//! func  := 'sin' | 'cos' | 'exp' | 'log'
//! ```
//!
//! Coordinates may only appear inside `sin`/`cos`, and each such argument
//! must be `2π·(k_x x/L_x + k_y y/L_y + k_t t/L_t) + phase` with integer `k`,
//! which keeps every accepted expression exactly periodic on the box.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{Axis, GridSpec, ScalarField};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Axis),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse()
                .map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_op('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat_op('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_op('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat_op('^') {
            Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Expr::Const(v)),
            Token::Op('(') => {
                let e = self.expr()?;
                if !self.eat_op(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            Token::Ident(name) => match name.as_str() {
                "pi" => Ok(Expr::Const(PI)),
                "x" => Ok(Expr::Var(Axis::X)),
                "y" => Ok(Expr::Var(Axis::Y)),
                "t" => Ok(Expr::Var(Axis::T)),
                "sin" | "cos" | "exp" | "log" => {
                    if !self.eat_op('(') {
                        return Err(Error::Parse(format!("expected '(' after {name}")));
                    }
                    let arg = Box::new(self.expr()?);
                    if !self.eat_op(')') {
                        return Err(Error::Parse("missing ')'".into()));
                    }
                    Ok(match name.as_str() {
                        "sin" => Expr::Sin(arg),
                        "cos" => Expr::Cos(arg),
                        "exp" => Expr::Exp(arg),
                        _ => Expr::Log(arg),
                    })
                }
                other => Err(Error::Parse(format!("unknown identifier {other:?}"))),
            },
            Token::Op(c) => Err(Error::Parse(format!("unexpected {c:?}"))),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            tokens: tokenize(src)?,
            pos: 0,
        };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!("trailing input in {src:?}")));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        let ev = |e: &Expr| e.eval(x, y, t);
        match self {
            Expr::Const(v) => *v,
            Expr::Var(Axis::X) => x,
            Expr::Var(Axis::Y) => y,
            Expr::Var(Axis::T) => t,
            Expr::Neg(a) => -ev(a),
            Expr::Add(a, b) => ev(a) + ev(b),
            Expr::Sub(a, b) => ev(a) - ev(b),
            Expr::Mul(a, b) => ev(a) * ev(b),
            Expr::Div(a, b) => ev(a) / ev(b),
            Expr::Pow(a, b) => ev(a).powf(ev(b)),
            Expr::Sin(a) => ev(a).sin(),
            Expr::Cos(a) => ev(a).cos(),
            Expr::Exp(a) => ev(a).exp(),
            Expr::Log(a) => ev(a).ln(),
        }
    }

    fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Var(_) => vec![],
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) | Expr::Log(a) => vec![a],
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                vec![a, b]
            }
        }
    }

    /// Rejects expressions that are not exactly periodic on `grid`'s box.
    pub fn check_periodic(&self, grid: &GridSpec) -> Result<()> {
        match self {
            Expr::Var(a) => Err(Error::Parse(format!(
                "coordinate {a:?} may only appear inside sin or cos"
            ))),
            Expr::Sin(arg) | Expr::Cos(arg) => check_trig_argument(arg, grid),
            other => other.children().into_iter().try_for_each(|c| c.check_periodic(grid)),
        }
    }

    pub fn sample(&self, grid: GridSpec) -> Result<ScalarField> {
        self.check_periodic(&grid)?;
        ScalarField::sample(grid, |x, y, t| self.eval(x, y, t))
    }
}

fn check_trig_argument(arg: &Expr, grid: &GridSpec) -> Result<()> {
    let origin = arg.eval(0.0, 0.0, 0.0);
    let slope = [
        arg.eval(1.0, 0.0, 0.0) - origin,
        arg.eval(0.0, 1.0, 0.0) - origin,
        arg.eval(0.0, 0.0, 1.0) - origin,
    ];
    let probes = [(0.37, -1.3, 2.1), (-0.8, 0.45, 0.05), (3.3, 2.2, -0.7)];
    for (x, y, t) in probes {
        let affine = origin + slope[0] * x + slope[1] * y + slope[2] * t;
        let actual = arg.eval(x, y, t);
        if !((actual - affine).abs() <= 1e-9 * (1.0 + actual.abs())) {
            return Err(Error::Parse("sin/cos arguments must be affine in x, y, t".into()));
        }
    }
    for (axis, s) in Axis::ALL.iter().zip(slope) {
        let k = s * grid.period(*axis) / (2.0 * PI);
        if (k - k.round()).abs() > 1e-9 {
            return Err(Error::Parse(format!(
                "wavenumber {k} along {axis:?} is not an integer multiple of 2 pi / L"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let e = Expr::parse("0.3*sin(2*pi*x)*cos(2*pi*(y-t)) + exp(-1) - 2^3/4").unwrap();
        let (x, y, t) = (0.1, 0.4, 0.7);
        let expect = 0.3 * (2.0 * PI * x).sin() * (2.0 * PI * (y - t)).cos() + (-1f64).exp() - 2.0;
        assert!((e.eval(x, y, t) - expect).abs() < 1e-15);
        assert_eq!(Expr::parse("1e-3").unwrap(), Expr::Const(1e-3));
        assert_eq!(Expr::parse("-2").unwrap().eval(0.0, 0.0, 0.0), -2.0);
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "sin(x", "2 +", "foo(1)", "1 $ 2", "(1))", "sin 1"] {
            assert!(Expr::parse(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn periodicity_rules() {
        let unit = GridSpec::cube(8).unwrap();
        let ok = ["sin(2*pi*x)", "0.5*cos(2*pi*(x+2*y)-1)", "log(1.5+sin(4*pi*t))", "3"];
        for s in ok {
            Expr::parse(s).unwrap().check_periodic(&unit).unwrap();
        }
        let bad = ["x", "sin(x)", "sin(2*pi*x*x)", "sin(sin(2*pi*x))", "exp(2*pi*y)", "cos(3*pi*t)"];
        for s in bad {
            assert!(Expr::parse(s).unwrap().check_periodic(&unit).is_err(), "{s}");
        }
        let stretched = GridSpec::new([8, 8, 8], [2.0, 1.0, 1.0]).unwrap();
        assert!(Expr::parse("sin(pi*x)").unwrap().check_periodic(&stretched).is_ok());
        assert!(Expr::parse("sin(pi*x)").unwrap().check_periodic(&unit).is_err());
    }
}
