//! Tiny closed-form potential grammar: sums of products of sines, cosines
//! and constants in the torus coordinates.
//!
//! Syntax accepted by [`Expr::parse`]:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := ['-'] factor ('*' factor)*
//! factor := NUMBER | ('sin' | 'cos') '(' [UINT ['*']] ('x' | 'y') ')'
//! ```
//!
//! `sin(k*x)` means one full cycle per `k`-th of the fundamental domain:
//! the evaluated angle is `2*pi*k*x/L`, so `cos(x)` is `cos(2*pi*x)` on the
//! unit torus and literally `cos(x)` on a `[0, 2*pi)` domain. Harmonics are
//! positive integers, which keeps every expression smooth and periodic by
//! construction.

use std::f64::consts::TAU;
use std::fmt;

use thiserror::Error;

use crate::linalg::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wave {
    Sin,
    Cos,
}

/// One trigonometric factor `sin(h * axis)` or `cos(h * axis)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factor {
    pub wave: Wave,
    pub harmonic: u32,
    pub axis: Axis,
}

/// Product of a numeric coefficient with trigonometric factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub factors: Vec<Factor>,
}

/// Sum of terms; the whole grammar.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    terms: Vec<Term>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character {0:?} at byte {1}")]
    UnexpectedChar(char, usize),
    #[error("expected {expected} at byte {at}")]
    Expected { expected: &'static str, at: usize },
    #[error("harmonic must be a positive integer (byte {0})")]
    ZeroHarmonic(usize),
    #[error("malformed number {0:?}")]
    BadNumber(String),
    #[error("trailing input starting at byte {0}")]
    Trailing(usize),
}

impl Factor {
    fn eval(&self, p: Vec2, period: f64) -> f64 {
        let coord = match self.axis {
            Axis::X => p.x,
            Axis::Y => p.y,
        };
        let angle = TAU * self.harmonic as f64 * coord / period;
        match self.wave {
            Wave::Sin => angle.sin(),
            Wave::Cos => angle.cos(),
        }
    }
}

impl Expr {
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Evaluate at a torus point with the given fundamental-domain period.
    pub fn eval(&self, p: Vec2, period: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .fold(t.coeff, |acc, f| acc * f.eval(p, period))
            })
            .sum()
    }

    /// Coarse uniform bound: sum of absolute coefficients (every trig factor
    /// has modulus at most one).
    pub fn sup_norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        Parser {
            bytes: src.as_bytes(),
            pos: 0,
        }
        .parse_all()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, term) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", term.coeff)?;
            for fac in &term.factors {
                let wave = match fac.wave {
                    Wave::Sin => "sin",
                    Wave::Cos => "cos",
                };
                let axis = match fac.axis {
                    Axis::X => "x",
                    Axis::Y => "y",
                };
                write!(f, "*{wave}({}{axis})", fac.harmonic)?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn parse_all(mut self) -> Result<Expr, ExprError> {
        let mut terms = Vec::new();
        self.skip_ws();
        if self.peek().is_none() {
            return Err(ExprError::Empty);
        }
        let mut sign = 1.0;
        if self.eat(b'-') {
            sign = -1.0;
        } else {
            self.eat(b'+');
        }
        loop {
            let term = self.parse_term(sign)?;
            terms.push(term);
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1.0;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1.0;
                }
                Some(_) => return Err(ExprError::Trailing(self.pos)),
            }
        }
        Ok(Expr { terms })
    }

    fn parse_term(&mut self, sign: f64) -> Result<Term, ExprError> {
        let mut coeff = sign;
        let mut factors = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(c) if c.is_ascii_digit() || c == b'.' => {
                    coeff *= self.parse_number()?;
                }
                Some(b's') | Some(b'c') => factors.push(self.parse_trig()?),
                Some(c) => {
                    return Err(ExprError::UnexpectedChar(c as char, self.pos));
                }
                None => {
                    return Err(ExprError::Expected {
                        expected: "factor",
                        at: self.pos,
                    })
                }
            }
            self.skip_ws();
            if !self.eat(b'*') {
                break;
            }
        }
        Ok(Term { coeff, factors })
    }

    fn parse_number(&mut self) -> Result<f64, ExprError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E') && self.pos > start {
                self.pos += 1;
                if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse()
            .map_err(|_| ExprError::BadNumber(text.to_string()))
    }

    fn parse_trig(&mut self) -> Result<Factor, ExprError> {
        let wave = if self.eat_word(b"sin") {
            Wave::Sin
        } else if self.eat_word(b"cos") {
            Wave::Cos
        } else {
            return Err(ExprError::Expected {
                expected: "sin or cos",
                at: self.pos,
            });
        };
        self.skip_ws();
        if !self.eat(b'(') {
            return Err(ExprError::Expected {
                expected: "(",
                at: self.pos,
            });
        }
        self.skip_ws();
        let mut harmonic = 1u32;
        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
            harmonic = text
                .parse()
                .map_err(|_| ExprError::BadNumber(text.to_string()))?;
            if harmonic == 0 {
                return Err(ExprError::ZeroHarmonic(start));
            }
            self.skip_ws();
            self.eat(b'*');
            self.skip_ws();
        }
        let axis = match self.peek() {
            Some(b'x') => Axis::X,
            Some(b'y') => Axis::Y,
            _ => {
                return Err(ExprError::Expected {
                    expected: "x or y",
                    at: self.pos,
                })
            }
        };
        self.pos += 1;
        self.skip_ws();
        if !self.eat(b')') {
            return Err(ExprError::Expected {
                expected: ")",
                at: self.pos,
            });
        }
        Ok(Factor {
            wave,
            harmonic,
            axis,
        })
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, word: &[u8]) -> bool {
        if self.bytes[self.pos..].starts_with(word) {
            self.pos += word.len();
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }
}
