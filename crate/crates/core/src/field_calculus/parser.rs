use super::{FieldExpr, Func, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

struct Lexer;

impl Lexer {
    fn tokens(text: &str) -> Result<Vec<(Tok, usize)>> {
        let bytes = text.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        while j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| Error::Parse {
                    position: start,
                    message: format!("malformed number `{lit}`"),
                })?;
                out.push((Tok::Num(value), start));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
            } else if "+-*/^()".contains(c) {
                out.push((Tok::Op(c), i));
                i += 1;
            } else {
                return Err(Error::Parse { position: i, message: format!("unexpected character `{c}`") });
            }
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { position: self.here(), message: message.into() })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            self.err(format!("expected `{op}`"))
        }
    }

    fn expr(&mut self) -> Result<FieldExpr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = FieldExpr::add(lhs, self.term()?);
            } else if self.eat('-') {
                lhs = FieldExpr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<FieldExpr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = FieldExpr::mul(lhs, self.unary()?);
            } else if self.eat('/') {
                lhs = FieldExpr::div(lhs, self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<FieldExpr> {
        if self.eat('-') {
            // A minus sign glued to a literal that is not a power base is a
            // negative literal.
            if let Some(Tok::Num(c)) = self.peek().cloned() {
                if self.peek_at(1) != Some(&Tok::Op('^')) {
                    self.pos += 1;
                    return Ok(FieldExpr::Const(-c));
                }
            }
            return Ok(FieldExpr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<FieldExpr> {
        let base = self.primary()?;
        if self.eat('^') {
            let at = self.here();
            let exponent = self.unary()?;
            if exponent.min_dimension() > 0 || contains_var(&exponent) {
                return Err(Error::Parse { position: at, message: "exponent must be a numeric literal".into() });
            }
            let e = exponent.eval_coords(&[0.0]).map_err(|err| Error::Parse {
                position: at,
                message: format!("exponent does not evaluate: {err}"),
            })?;
            return Ok(FieldExpr::pow(base, e));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<FieldExpr> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(c)) => {
                self.pos += 1;
                Ok(FieldExpr::Const(c))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(func) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(FieldExpr::func(func, arg));
                }
                self.variable(&name, at)
            }
            Some(Tok::Op(c)) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of input"),
        }
    }

    fn variable(&self, name: &str, at: usize) -> Result<FieldExpr> {
        if name == "t" {
            return Ok(FieldExpr::Var(Var::T));
        }
        let (head, digits) = name.split_at(1);
        let index: Option<usize> = if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            None
        } else {
            digits.parse().ok()
        };
        match (head, index) {
            ("x" | "y", Some(i)) if i >= 1 => {
                if i > self.n {
                    return Err(Error::Parse {
                        position: at,
                        message: format!("variable `{name}`: index {i} exceeds n = {}", self.n),
                    });
                }
                Ok(FieldExpr::Var(if head == "x" { Var::X(i - 1) } else { Var::Y(i - 1) }))
            }
            _ => Err(Error::Parse { position: at, message: format!("unknown identifier `{name}`") }),
        }
    }
}

fn contains_var(e: &FieldExpr) -> bool {
    match e {
        FieldExpr::Const(_) => false,
        FieldExpr::Var(_) => true,
        FieldExpr::Neg(a) | FieldExpr::Pow(a, _) | FieldExpr::Func(_, a) => contains_var(a),
        FieldExpr::Add(a, b) | FieldExpr::Sub(a, b) | FieldExpr::Mul(a, b) | FieldExpr::Div(a, b) => {
            contains_var(a) || contains_var(b)
        }
    }
}

/// Parses a field on `Hⁿ` written in the infix grammar.
pub fn parse_field(text: &str, n: usize) -> Result<FieldExpr> {
    if text.trim().is_empty() {
        return Err(Error::Parse { position: 0, message: "empty field expression".into() });
    }
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), n };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}
