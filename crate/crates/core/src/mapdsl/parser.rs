//! Tokenizer and recursive-descent parser for map expressions.
//!
//! ```text
//! expr     := additive ( ("<" | "<=" | ">" | ">=") additive )?
//! additive := term ( ("+" | "-") term )*
//! term     := power ( ("*" | "/") power )*
//! power    := unary ( "^" power )?
//! unary    := "-" unary | atom
//! atom     := number | ident | func "(" additive ")" | "(" additive ")"
//! func     := "sin" | "cos" | "exp" | "log" | "abs"
//! ```

use super::expr::{BinOp, CmpOp, Expr, Func};
use crate::error::ParseError;

const MAX_DEPTH: usize = 128;
const MAX_TOKENS: usize = 16_384;

#[derive(Debug, Clone, PartialEq)]
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
    Cmp(CmpOp),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v:?}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Cmp(CmpOp::Lt) => "`<`".into(),
            Tok::Cmp(CmpOp::Le) => "`<=`".into(),
            Tok::Cmp(CmpOp::Gt) => "`>`".into(),
            Tok::Cmp(CmpOp::Ge) => "`>=`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn expected(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

const OPERAND: [&str; 4] = ["number", "identifier", "`(`", "`-`"];

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '≤' => Some(Tok::Cmp(CmpOp::Le)),
            '≥' => Some(Tok::Cmp(CmpOp::Ge)),
            _ => None,
        };
        if toks.len() >= MAX_TOKENS {
            return Err(ParseError {
                position: pos,
                found: "expression longer than 16384 tokens".into(),
                expected: Vec::new(),
            });
        }
        if let Some(tok) = single {
            toks.push((pos, tok));
            i += 1;
            continue;
        }
        match c {
            '*' => {
                if chars.get(i + 1) == Some(&'*') {
                    return Err(ParseError {
                        position: pos,
                        found: "`**`".into(),
                        expected: expected(&["`*`", "`^`"]),
                    });
                }
                toks.push((pos, Tok::Star));
                i += 1;
            }
            '<' | '>' => {
                let eq = chars.get(i + 1) == Some(&'=');
                let op = match (c, eq) {
                    ('<', false) => CmpOp::Lt,
                    ('<', true) => CmpOp::Le,
                    ('>', false) => CmpOp::Gt,
                    _ => CmpOp::Ge,
                };
                toks.push((pos, Tok::Cmp(op)));
                i += if eq { 2 } else { 1 };
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                match text.parse::<f64>() {
                    Ok(v) if v.is_finite() => toks.push((pos, Tok::Num(v))),
                    _ => {
                        return Err(ParseError {
                            position: pos,
                            found: format!("`{text}`"),
                            expected: expected(&["finite number"]),
                        })
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((pos, Tok::Ident(chars[start..i].iter().collect())));
            }
            other => {
                return Err(ParseError {
                    position: pos,
                    found: format!("{other:?}"),
                    expected: Vec::new(),
                })
            }
        }
    }
    toks.push((chars.len() + 1, Tok::End));
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    fn error(&self, expected: Vec<String>) -> ParseError {
        ParseError {
            position: self.pos(),
            found: self.peek().describe(),
            expected,
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError {
                position: self.pos(),
                found: "expression nested too deeply".into(),
                expected: Vec::new(),
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.additive()?;
        if let Tok::Cmp(op) = *self.peek() {
            self.bump();
            let rhs = self.additive()?;
            return Ok(Expr::Compare(op, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.power()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.power()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let base = self.unary()?;
        let out = if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.power()?;
            Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp))
        } else {
            base
        };
        self.depth -= 1;
        Ok(out)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    self.bump();
                    if *self.peek() != Tok::LParen {
                        return Err(self.error(expected(&["`(`"])));
                    }
                    let inner = self.parenthesized()?;
                    Ok(Expr::Call(func, Box::new(inner)))
                } else {
                    self.bump();
                    Ok(Expr::Var(name))
                }
            }
            Tok::LParen => self.parenthesized(),
            _ => Err(self.error(expected(&OPERAND))),
        }
    }

    fn parenthesized(&mut self) -> Result<Expr, ParseError> {
        self.bump();
        self.enter()?;
        let inner = self.additive()?;
        self.depth -= 1;
        if *self.peek() != Tok::RParen {
            return Err(self.error(expected(&["`)`", "operator"])));
        }
        self.bump();
        Ok(inner)
    }
}

/// Parses one expression; a single top-level comparison is allowed.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut parser = Parser {
        toks: tokenize(src)?,
        at: 0,
        depth: 0,
    };
    let expr = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error(expected(&[
            "`+`",
            "`-`",
            "`*`",
            "`/`",
            "`^`",
            "`<`",
            "`<=`",
            "`>`",
            "`>=`",
            "end of input",
        ])));
    }
    Ok(expr)
}

/// Byte-level entry point: invalid UTF-8 is reported as a parse error at the
/// first offending character.
pub fn parse_expr_bytes(src: &[u8]) -> Result<Expr, ParseError> {
    match std::str::from_utf8(src) {
        Ok(s) => parse_expr(s),
        Err(e) => {
            let valid = std::str::from_utf8(&src[..e.valid_up_to()]).unwrap_or_default();
            Err(ParseError {
                position: valid.chars().count() + 1,
                found: "invalid UTF-8".into(),
                expected: Vec::new(),
            })
        }
    }
}
