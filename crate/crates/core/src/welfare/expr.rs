//! Welfare expression syntax tree and parser.
//!
//! ```text
//! expr   := scalar
//! scalar := scalar ('+'|'-'|'*'|'/') scalar | agg | number | fn '(' scalar ')' | scalar '^' number
//! agg    := ('sum'|'prod'|'min'|'max') '(' elem ')'
//! elem   := elem op elem | fn '(' elem ')' | elem '^' number | 'u' | number
//! fn     := 'log' | 'exp'
//! ```
//!
//! Usual precedence (`^` binds tightest and is right-associative), unary
//! minus, parentheses. Exponents must be rational constants such as `2`,
//! `-1` or `(1/2)`. Aggregators cannot nest, and `u` may only appear inside
//! one.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::WelfareError;
use crate::scalar::{format_rational, is_integer, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Log,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregator {
    Sum,
    Prod,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Const(Rational),
    /// The current coordinate `u_i`; only valid under an [`Node::Aggregate`].
    Var,
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, Rational),
    Call(Func, Box<Node>),
    Aggregate(Aggregator, Box<Node>),
}

impl Node {
    /// No `log`, `exp` or fractional exponent anywhere in the tree.
    pub fn is_rational_closed(&self) -> bool {
        match self {
            Node::Const(_) | Node::Var => true,
            Node::Neg(a) | Node::Aggregate(_, a) => a.is_rational_closed(),
            Node::Binary(_, a, b) => a.is_rational_closed() && b.is_rational_closed(),
            Node::Pow(a, p) => is_integer(p) && a.is_rational_closed(),
            Node::Call(..) => false,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Node::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Node::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            Node::Const(c) if c.is_negative() || !is_integer(c) => 3,
            _ => 5,
        }
    }
}

fn fmt_child(f: &mut fmt::Formatter<'_>, child: &Node, min: u8) -> fmt::Result {
    if child.precedence() < min {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => f.write_str(&format_rational(c)),
            Node::Var => f.write_str("u"),
            Node::Neg(a) => {
                f.write_str("-")?;
                fmt_child(f, a, 4)
            }
            Node::Binary(op, a, b) => {
                let (sym, prec) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                };
                fmt_child(f, a, prec)?;
                write!(f, " {sym} ")?;
                fmt_child(f, b, prec + 1)
            }
            Node::Pow(a, p) => {
                fmt_child(f, a, 5)?;
                if p.is_negative() || !is_integer(p) {
                    write!(f, "^({})", format_rational(p))
                } else {
                    write!(f, "^{}", format_rational(p))
                }
            }
            Node::Call(func, a) => {
                let name = match func {
                    Func::Log => "log",
                    Func::Exp => "exp",
                };
                write!(f, "{name}({a})")
            }
            Node::Aggregate(agg, a) => {
                let name = match agg {
                    Aggregator::Sum => "sum",
                    Aggregator::Prod => "prod",
                    Aggregator::Min => "min",
                    Aggregator::Max => "max",
                };
                write!(f, "{name}({a})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(Rational),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, WelfareError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos] as char;
        if c.is_ascii_whitespace() {
            pos += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = pos;
            while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'.') {
                pos += 1;
            }
            let value = parse_decimal(&text[start..pos]).ok_or_else(|| WelfareError::Syntax {
                position: start,
                message: format!("malformed number {:?}", &text[start..pos]),
            })?;
            tokens.push((start, Token::Number(value)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = pos;
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            tokens.push((start, Token::Ident(text[start..pos].to_string())));
        } else if "+-*/^()".contains(c) {
            tokens.push((pos, Token::Sym(c)));
            pos += 1;
        } else {
            return Err(WelfareError::Syntax {
                position: pos,
                message: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(tokens)
}

/// `"12"`, `"0.25"`, `".5"` as exact rationals.
fn parse_decimal(text: &str) -> Option<Rational> {
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    if (whole.is_empty() && frac.is_empty()) || frac.contains('.') {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = BigInt::from(10u8).pow(frac.len() as u32);
    Some(Rational::new(numer, denom))
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    index: usize,
    end: usize,
    aggregate_depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.index).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.index).map_or(self.end, |(p, _)| *p)
    }

    fn error(&self, message: impl Into<String>) -> WelfareError {
        WelfareError::Syntax {
            position: self.position(),
            message: message.into(),
        }
    }

    fn eat(&mut self, sym: char) -> bool {
        if self.peek() == Some(&Token::Sym(sym)) {
            self.index += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: char) -> Result<(), WelfareError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{sym}'")))
        }
    }

    fn additive(&mut self) -> Result<Node, WelfareError> {
        let mut node = self.multiplicative()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(node);
            };
            let rhs = self.multiplicative()?;
            node = Node::Binary(op, Box::new(node), Box::new(rhs));
        }
    }

    fn multiplicative(&mut self) -> Result<Node, WelfareError> {
        let mut node = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(node);
            };
            let rhs = self.unary()?;
            node = Node::Binary(op, Box::new(node), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, WelfareError> {
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(match inner {
                Node::Const(c) => Node::Const(-c),
                other => Node::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, WelfareError> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let at = self.position();
        let exponent = self.unary()?;
        let value = constant_value(&exponent).ok_or(WelfareError::Syntax {
            position: at,
            message: "exponent must be a rational constant".into(),
        })?;
        Ok(match base {
            Node::Const(c) if is_integer(&value) => {
                let e: i32 = value
                    .to_integer()
                    .try_into()
                    .map_err(|_| WelfareError::Syntax {
                        position: at,
                        message: "exponent too large".into(),
                    })?;
                if c.is_zero() && e < 0 {
                    return Err(WelfareError::Syntax {
                        position: at,
                        message: "zero raised to a negative power".into(),
                    });
                }
                Node::Const(num_traits::Pow::pow(&c, e))
            }
            other => Node::Pow(Box::new(other), value),
        })
    }

    fn primary(&mut self) -> Result<Node, WelfareError> {
        let at = self.position();
        match self.peek().cloned() {
            Some(Token::Number(value)) => {
                self.index += 1;
                Ok(Node::Const(value))
            }
            Some(Token::Sym('(')) => {
                self.index += 1;
                let inner = self.additive()?;
                self.expect(')')?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.index += 1;
                if name == "u" {
                    if self.aggregate_depth == 0 {
                        return Err(WelfareError::Structure {
                            position: at,
                            message: "'u' must appear inside sum/prod/min/max".into(),
                        });
                    }
                    return Ok(Node::Var);
                }
                let aggregator = match name.as_str() {
                    "sum" => Some(Aggregator::Sum),
                    "prod" => Some(Aggregator::Prod),
                    "min" => Some(Aggregator::Min),
                    "max" => Some(Aggregator::Max),
                    _ => None,
                };
                if let Some(agg) = aggregator {
                    if self.aggregate_depth > 0 {
                        return Err(WelfareError::Structure {
                            position: at,
                            message: format!("nested aggregator '{name}'"),
                        });
                    }
                    self.expect('(')?;
                    self.aggregate_depth += 1;
                    let inner = self.additive()?;
                    self.aggregate_depth -= 1;
                    self.expect(')')?;
                    return Ok(Node::Aggregate(agg, Box::new(inner)));
                }
                let func = match name.as_str() {
                    "log" | "ln" => Func::Log,
                    "exp" => Func::Exp,
                    _ => {
                        return Err(WelfareError::Syntax {
                            position: at,
                            message: format!("unknown identifier '{name}'"),
                        })
                    }
                };
                self.expect('(')?;
                let inner = self.additive()?;
                self.expect(')')?;
                Ok(Node::Call(func, Box::new(inner)))
            }
            Some(Token::Sym(c)) => Err(self.error(format!("unexpected '{c}'"))),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Folds a `u`-free, aggregate-free, field-only subtree to its value.
fn constant_value(node: &Node) -> Option<Rational> {
    match node {
        Node::Const(c) => Some(c.clone()),
        Node::Neg(a) => constant_value(a).map(|v| -v),
        Node::Binary(op, a, b) => {
            let (a, b) = (constant_value(a)?, constant_value(b)?);
            match op {
                BinOp::Add => Some(a + b),
                BinOp::Sub => Some(a - b),
                BinOp::Mul => Some(a * b),
                BinOp::Div => (!b.is_zero()).then(|| a / b),
            }
        }
        Node::Pow(a, p) if is_integer(p) => {
            let base = constant_value(a)?;
            let e: i32 = p.to_integer().try_into().ok()?;
            (e >= 0 || !base.is_zero()).then(|| num_traits::Pow::pow(&base, e))
        }
        _ => None,
    }
}

pub(crate) fn parse(text: &str) -> Result<Node, WelfareError> {
    let expanded = match text.trim() {
        "nash" => "prod(u)",
        "lognash" => "sum(log(u))",
        "util" => "sum(u)",
        "egal" => "min(u)",
        other => other,
    };
    let tokens = tokenize(expanded)?;
    let mut parser = Parser {
        tokens,
        index: 0,
        end: expanded.len(),
        aggregate_depth: 0,
    };
    let node = parser.additive()?;
    if parser.index < parser.tokens.len() {
        return Err(parser.error("trailing input"));
    }
    Ok(node)
}
