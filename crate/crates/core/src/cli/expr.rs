//! The jump-probability expression language.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := base ("^" integer)?
//! base    := number | VAR | "(" expr ")"
//! integer := "-"? digits
//! ```
//!
//! Precedence, tightest first: `^`, unary `-`, `* /`, `+ -`. So `-x^2` is
//! `-(x^2)`. Evaluation runs in signed log space so `x`, `1 - x` and
//! friends stay accurate at trajectory points far below `f64::MIN_POSITIVE`.

use std::fmt;

use thiserror::Error;

use crate::measure::{grid, LogNum, MeasurableSet, Point};

/// Divisors smaller than this at an audit point are a range violation.
pub const MIN_AUDIT_DIVISOR: f64 = 1e-12;

/// Audit grid size for jump probabilities.
pub const PI_AUDIT_POINTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at position {position}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        position: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("division by {divisor}")]
    Division { divisor: f64 },
    #[error("zero raised to a negative power")]
    ZeroPower,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PiError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("pi({x}) = {value} is outside [0,1]")]
    Range { x: f64, value: f64 },
    #[error("pi divides by {divisor} at x = {x}")]
    SmallDivisor { x: f64, divisor: f64 },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Plus => "\"+\"".into(),
            Tok::Minus => "\"-\"".into(),
            Tok::Star => "\"*\"".into(),
            Tok::Slash => "\"/\"".into(),
            Tok::Caret => "\"^\"".into(),
            Tok::LParen => "\"(\"".into(),
            Tok::RParen => "\")\"".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok, &str)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
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
                let text = &src[start..i];
                match text.parse::<f64>() {
                    Ok(v) if v.is_finite() => {
                        out.push((start, Tok::Num(v), text));
                        continue;
                    }
                    _ => {
                        return Err(ExprError::Syntax {
                            position: start,
                            expected: vec!["finite number".into()],
                            found: format!("{text:?}"),
                        })
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string()), &src[start..i]));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    position: start,
                    expected: vec!["number, variable, operator or parenthesis".into()],
                    found: format!("{ch:?}"),
                });
            }
        };
        i += 1;
        out.push((start, tok, &src[start..i]));
    }
    out.push((src.len(), Tok::End, ""));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok, &'a str)>,
    pos: usize,
    var: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ExprError {
        let (position, tok, _) = &self.toks[self.pos];
        ExprError::Syntax {
            position: *position,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.describe(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let text = self.toks[self.pos].2;
        match self.peek() {
            Tok::Num(_) if text.bytes().all(|b| b.is_ascii_digit()) => {
                let k: i64 = text
                    .parse()
                    .map_err(|_| self.error(&["integer exponent"]))?;
                self.bump();
                Ok(Expr::Pow(Box::new(base), if negative { -k } else { k }))
            }
            _ => Err(self.error(&["integer exponent"])),
        }
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Ident(name) if name == self.var => {
                self.bump();
                Ok(Expr::Var)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(&["\")\""]));
                }
                self.bump();
                Ok(inner)
            }
            _ => {
                let var = format!("\"{}\"", self.var);
                Err(self.error(&["number", &var, "\"(\"", "\"-\""]))
            }
        }
    }
}

impl Expr {
    /// Parses `src` with `var` as the only variable name.
    pub fn parse(src: &str, var: &str) -> Result<Expr, ExprError> {
        let toks = lex(src)?;
        let mut p = Parser { toks, pos: 0, var };
        let e = p.expr()?;
        if *p.peek() != Tok::End {
            return Err(p.error(&["operator", "end of input"]));
        }
        Ok(e)
    }

    /// Evaluates with the variable bound to `var`. Any divisor with
    /// `|d| < min_divisor` (or exactly zero) is an error.
    pub fn eval(&self, var: LogNum, min_divisor: f64) -> Result<LogNum, ExprError> {
        Ok(match self {
            Expr::Num(v) => LogNum::from_f64(*v),
            Expr::Var => var,
            Expr::Neg(e) => e.eval(var, min_divisor)?.neg(),
            Expr::Add(a, b) => a.eval(var, min_divisor)?.add(b.eval(var, min_divisor)?),
            Expr::Sub(a, b) => a.eval(var, min_divisor)?.sub(b.eval(var, min_divisor)?),
            Expr::Mul(a, b) => a.eval(var, min_divisor)?.mul(b.eval(var, min_divisor)?),
            Expr::Div(a, b) => {
                let d = b.eval(var, min_divisor)?;
                if d.is_zero() || d.value().abs() < min_divisor {
                    return Err(ExprError::Division { divisor: d.value() });
                }
                a.eval(var, min_divisor)?
                    .div(d)
                    .ok_or(ExprError::Division { divisor: 0.0 })?
            }
            Expr::Pow(b, k) => b
                .eval(var, min_divisor)?
                .powi(*k)
                .ok_or(ExprError::ZeroPower)?,
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Var => 5,
        }
    }

    /// Canonical text with `var` as the variable name.
    pub fn format(&self, var: &str) -> String {
        let mut s = String::new();
        self.write(var, &mut s);
        s
    }

    fn write_child(&self, var: &str, min_prec: u8, out: &mut String) {
        if self.precedence() < min_prec {
            out.push('(');
            self.write(var, out);
            out.push(')');
        } else {
            self.write(var, out);
        }
    }

    fn write(&self, var: &str, out: &mut String) {
        match self {
            Expr::Num(v) => out.push_str(&format!("{v}")),
            Expr::Var => out.push_str(var),
            Expr::Neg(e) => {
                out.push('-');
                e.write_child(var, 3, out);
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_child(var, 1, out);
                out.push_str(if matches!(self, Expr::Add(..)) {
                    " + "
                } else {
                    " - "
                });
                b.write_child(var, 2, out);
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.write_child(var, 2, out);
                out.push_str(if matches!(self, Expr::Mul(..)) {
                    " * "
                } else {
                    " / "
                });
                b.write_child(var, 3, out);
            }
            Expr::Pow(b, k) => {
                b.write_child(var, 5, out);
                out.push_str(&format!("^{k}"));
            }
        }
    }
}

/// A parsed jump probability `π(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiExpression {
    source: String,
    expr: Expr,
}

impl PiExpression {
    /// Syntax only; no range audit.
    pub fn parse_unchecked(src: &str) -> Result<PiExpression, ExprError> {
        Ok(PiExpression {
            source: src.to_string(),
            expr: Expr::parse(src, "x")?,
        })
    }

    pub fn from_expr(expr: Expr) -> PiExpression {
        PiExpression {
            source: expr.format("x"),
            expr,
        }
    }

    pub fn constant(p: f64) -> PiExpression {
        PiExpression::from_expr(Expr::Num(p))
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn canonical(&self) -> String {
        self.expr.format("x")
    }

    pub fn eval(&self, x: Point) -> Result<LogNum, ExprError> {
        self.expr.eval(LogNum::from_ln(x.log_value()), 0.0)
    }

    /// Checks `π ∈ [0,1]` and divisor sizes on the audit points of `domain`.
    pub fn audit_on(&self, domain: &MeasurableSet) -> Result<(), PiError> {
        for x in grid::audit_grid(PI_AUDIT_POINTS) {
            if !domain.contains(x) {
                continue;
            }
            let v = match self
                .expr
                .eval(LogNum::from_ln(x.log_value()), MIN_AUDIT_DIVISOR)
            {
                Ok(v) => v,
                Err(ExprError::Division { divisor }) => {
                    return Err(PiError::SmallDivisor {
                        x: x.value(),
                        divisor,
                    })
                }
                Err(e) => return Err(e.into()),
            };
            let lin = v.value();
            if !v.is_finite() || v.is_negative() || v.ln_abs() > 1e-12 {
                return Err(PiError::Range {
                    x: x.value(),
                    value: lin,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for PiExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// Parses `src` and audits it over all of `[0,1]`.
pub fn parse_pi(src: &str) -> Result<PiExpression, PiError> {
    let pi = PiExpression::parse_unchecked(src)?;
    pi.audit_on(&MeasurableSet::unit())?;
    Ok(pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(pi: &PiExpression, x: f64) -> f64 {
        pi.eval(Point::new(x).unwrap()).unwrap().value()
    }

    #[test]
    fn identity_and_complement() {
        let id = parse_pi("x").unwrap();
        assert!((at(&id, 0.3) - 0.3).abs() < 1e-15);
        let c = parse_pi("1 - x").unwrap();
        assert!((at(&c, 0.3) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn precedence() {
        let e = Expr::parse("-x^2", "x").unwrap();
        assert_eq!(e, Expr::Neg(Box::new(Expr::Pow(Box::new(Expr::Var), 2))));
        let e = Expr::parse("1 - x * 2 + 3", "x").unwrap();
        assert_eq!(e.format("x"), "1 - x * 2 + 3");
        let v = e.eval(LogNum::from_f64(0.5), 0.0).unwrap().value();
        assert!((v - 3.0).abs() < 1e-15);
        let e = Expr::parse("2^3^", "x");
        assert!(e.is_err());
        let e = Expr::parse("(1 - x)^2 / 4", "x").unwrap();
        assert_eq!(e.format("x"), "(1 - x)^2 / 4");
        let e = Expr::parse("x^-1", "x").unwrap();
        assert_eq!(e, Expr::Pow(Box::new(Expr::Var), -1));
    }

    #[test]
    fn errors_carry_position_and_expectations() {
        match Expr::parse("1 + * x", "x") {
            Err(ExprError::Syntax {
                position, expected, ..
            }) => {
                assert_eq!(position, 4);
                assert!(expected.iter().any(|e| e == "number"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Expr::parse("x^0.5", "x"),
            Err(ExprError::Syntax { position: 2, .. })
        ));
        assert!(matches!(
            Expr::parse("y", "x"),
            Err(ExprError::Syntax { position: 0, .. })
        ));
        assert!(matches!(
            Expr::parse("(x", "x"),
            Err(ExprError::Syntax { position: 2, .. })
        ));
        assert!(matches!(
            Expr::parse("x $", "x"),
            Err(ExprError::Syntax { position: 2, .. })
        ));
        assert!(Expr::parse("", "x").is_err());
        assert!(Expr::parse("1e999", "x").is_err());
    }

    #[test]
    fn range_violations_name_a_witness() {
        match parse_pi("2 * x") {
            Err(PiError::Range { x, value }) => assert!(value > 1.0 && x > 0.5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_pi("x - 1"), Err(PiError::Range { .. })));
        assert!(matches!(
            parse_pi("x / x"),
            Err(PiError::SmallDivisor { .. })
        ));
    }

    #[test]
    fn log_domain_stays_accurate_deep_in_a_trajectory() {
        let deep = Point::new(0.5).unwrap().pow2n(30);
        let c = parse_pi("1 - x").unwrap();
        let v = c.eval(deep).unwrap();
        assert_eq!(v.value(), 1.0);
        let id = parse_pi("x").unwrap();
        assert_eq!(id.eval(deep).unwrap().ln_abs(), deep.log_value());
    }
}
