//! Tiny arithmetic expression language for user-defined rates.
//!
//! Variables: `t` (time), `a` (own state code), `d` (degree), and
//! `count(s)` (number of neighbors in state `s`). Operators: `+ - * /`,
//! `max(x,y)`, `min(x,y)`, and `ind(x)` (1 if x > 0, else 0).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    T,
    A,
    D,
    Count(i32),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Ind(Box<Expr>),
}

pub struct EvalCtx<'a> {
    pub t: f64,
    pub a: f64,
    pub d: f64,
    /// Count of neighbors in a given state code.
    pub count: &'a dyn Fn(i32) -> f64,
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let tokens = lex(text)?;
        let mut parser = Parser { tokens, pos: 0 };
        let e = parser.add()?;
        if parser.pos != parser.tokens.len() {
            let tok = &parser.tokens[parser.pos];
            return Err(err_at(tok.line, tok.col, "unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, ctx: &EvalCtx) -> f64 {
        match self {
            Expr::Num(x) => *x,
            Expr::T => ctx.t,
            Expr::A => ctx.a,
            Expr::D => ctx.d,
            Expr::Count(s) => (ctx.count)(*s),
            Expr::Neg(e) => -e.eval(ctx),
            Expr::Add(a, b) => a.eval(ctx) + b.eval(ctx),
            Expr::Sub(a, b) => a.eval(ctx) - b.eval(ctx),
            Expr::Mul(a, b) => a.eval(ctx) * b.eval(ctx),
            Expr::Div(a, b) => a.eval(ctx) / b.eval(ctx),
            Expr::Max(a, b) => a.eval(ctx).max(b.eval(ctx)),
            Expr::Min(a, b) => a.eval(ctx).min(b.eval(ctx)),
            Expr::Ind(e) => {
                if e.eval(ctx) > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// State codes referenced by `count(...)`, for validation against
    /// the model's state space.
    pub fn counted_states(&self, out: &mut Vec<i32>) {
        match self {
            Expr::Count(s) => out.push(*s),
            Expr::Neg(e) | Expr::Ind(e) => e.counted_states(out),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Max(a, b)
            | Expr::Min(a, b) => {
                a.counted_states(out);
                b.counted_states(out);
            }
            _ => {}
        }
    }
}

fn err_at(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::ExprParse {
        line,
        col,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, co) = (line, col);
        let mut push = |t: Tok| out.push(Token { tok: t, line: l, col: co });
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '+' => { chars.next(); col += 1; push(Tok::Plus); }
            '-' => { chars.next(); col += 1; push(Tok::Minus); }
            '*' => { chars.next(); col += 1; push(Tok::Star); }
            '/' => { chars.next(); col += 1; push(Tok::Slash); }
            '(' => { chars.next(); col += 1; push(Tok::LParen); }
            ')' => { chars.next(); col += 1; push(Tok::RParen); }
            ',' => { chars.next(); col += 1; push(Tok::Comma); }
            c if c.is_ascii_digit() || c == '.' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else if (c == '+' || c == '-') && (s.ends_with('e') || s.ends_with('E')) {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let x: f64 = s
                    .parse()
                    .map_err(|_| err_at(l, co, format!("bad number `{s}`")))?;
                push(Tok::Num(x));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push(Tok::Ident(s));
            }
            other => return Err(err_at(line, col, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn loc(&self) -> (usize, usize) {
        match self.tokens.get(self.pos.min(self.tokens.len().saturating_sub(1))) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        let (line, col) = self.loc();
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(err_at(line, col, format!("expected {what}"))),
        }
    }

    fn add(&mut self) -> Result<Expr> {
        let mut lhs = self.mul()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.mul()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.mul()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn mul(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let (line, col) = self.loc();
        match self.peek().cloned() {
            Some(Tok::Num(x)) => {
                self.pos += 1;
                Ok(Expr::Num(x))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.add()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "t" => Ok(Expr::T),
                    "a" => Ok(Expr::A),
                    "d" => Ok(Expr::D),
                    "count" => {
                        self.expect(Tok::LParen, "`(` after count")?;
                        let neg = if self.peek() == Some(&Tok::Minus) {
                            self.pos += 1;
                            true
                        } else {
                            false
                        };
                        let (l2, c2) = self.loc();
                        let code = match self.peek() {
                            Some(Tok::Num(x)) if x.fract() == 0.0 => {
                                let v = *x as i32;
                                self.pos += 1;
                                if neg { -v } else { v }
                            }
                            _ => return Err(err_at(l2, c2, "count() takes an integer state code")),
                        };
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expr::Count(code))
                    }
                    "max" | "min" => {
                        self.expect(Tok::LParen, "`(`")?;
                        let x = self.add()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let y = self.add()?;
                        self.expect(Tok::RParen, "`)`")?;
                        if name == "max" {
                            Ok(Expr::Max(Box::new(x), Box::new(y)))
                        } else {
                            Ok(Expr::Min(Box::new(x), Box::new(y)))
                        }
                    }
                    "ind" => {
                        self.expect(Tok::LParen, "`(`")?;
                        let x = self.add()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expr::Ind(Box::new(x)))
                    }
                    other => Err(err_at(line, col, format!("unknown symbol `{other}`"))),
                }
            }
            _ => Err(err_at(line, col, "expected expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, counts: &[(i32, f64)]) -> f64 {
        let e = Expr::parse(src).unwrap();
        let count = |s: i32| {
            counts
                .iter()
                .find(|&&(c, _)| c == s)
                .map(|&(_, n)| n)
                .unwrap_or(0.0)
        };
        e.eval(&EvalCtx {
            t: 2.0,
            a: 1.0,
            d: 3.0,
            count: &count,
        })
    }

    #[test]
    fn spec_example() {
        // neighbors {1,1,0,0}: 0 ∨ (1 + 4 - 2) = 3
        let v = eval("max(0, 1 + 2*count(1) - count(0))", &[(1, 2.0), (0, 2.0)]);
        assert_eq!(v, 3.0);
    }

    #[test]
    fn precedence_and_unary() {
        assert_eq!(eval("1 + 2 * 3", &[]), 7.0);
        assert_eq!(eval("-2 * 3 + 10", &[]), 4.0);
        assert_eq!(eval("(1 + 2) * 3", &[]), 9.0);
        assert_eq!(eval("min(t, d)", &[]), 2.0);
        assert_eq!(eval("ind(a)", &[]), 1.0);
        assert_eq!(eval("ind(a - 1)", &[]), 0.0);
    }

    #[test]
    fn negative_state_code() {
        assert_eq!(eval("count(-1)", &[(-1, 2.0)]), 2.0);
    }

    #[test]
    fn errors_carry_location() {
        match Expr::parse("1 + foo") {
            Err(Error::ExprParse { line, col, msg }) => {
                assert_eq!(line, 1);
                assert_eq!(col, 5);
                assert!(msg.contains("foo"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(Expr::parse("max(1 2)").is_err());
        assert!(Expr::parse("1 +").is_err());
    }
}
