//! Recursive-descent parser for the scalar surface grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' '-'? integer)?
//! base   := number | ident | '(' expr ')' | func '(' expr ')'
//! func   := exp | log | sin | cos
//! ```
//!
//! Identifiers must name a chart coordinate, or `t` on a time-extended chart.
//! Integer literals become exact rationals; literals with a decimal point or
//! exponent become doubles.

use super::{Chart, Expr, Number};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Float(f64),
    Ident(String),
    Sym(char),
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    end: usize,
}

fn lex(text: &str) -> Result<Lexer> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            let mut is_float = false;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                is_float |= bytes[i] == b'.';
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    is_float = true;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            let tok = if is_float {
                lit.parse::<f64>()
                    .map(Tok::Float)
                    .map_err(|_| Error::Parse { column: col, message: format!("bad number `{lit}`") })?
            } else {
                match lit.parse::<i64>() {
                    Ok(v) => Tok::Int(v),
                    Err(_) => Tok::Float(lit.parse::<f64>().map_err(|_| Error::Parse {
                        column: col,
                        message: format!("bad number `{lit}`"),
                    })?),
                }
            };
            toks.push((tok, col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            toks.push((Tok::Ident(text[start..i].to_string()), col));
        } else if "+-*/^()".contains(c) {
            toks.push((Tok::Sym(c), col));
            i += 1;
        } else {
            return Err(Error::Parse { column: col, message: format!("unexpected character `{c}`") });
        }
    }
    Ok(Lexer { toks, end: text.len() + 1 })
}

struct Parser<'a> {
    lexer: Lexer,
    pos: usize,
    chart: &'a Chart,
    offset: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.lexer.toks.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.offset + self.lexer.toks.get(self.pos).map_or(self.lexer.end, |(_, c)| *c)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { column: self.column(), message: message.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.eat('/') {
                acc = acc / self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let negative = self.eat('-');
        match self.peek().cloned() {
            Some(Tok::Int(k)) => {
                let k = i32::try_from(k).or_else(|_| self.err("exponent out of range"))?;
                self.pos += 1;
                Ok(base.powi(if negative { -k } else { k }))
            }
            _ => self.err("expected an integer exponent"),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let col = self.column();
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(Expr::int(v))
            }
            Some(Tok::Float(v)) => {
                self.pos += 1;
                Ok(Expr::constant(Number::Float(v)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let func: Option<fn(&Expr) -> Expr> = match name.as_str() {
                    "exp" => Some(Expr::exp),
                    "log" => Some(Expr::log),
                    "sin" => Some(Expr::sin),
                    "cos" => Some(Expr::cos),
                    _ => None,
                };
                if let Some(func) = func {
                    if self.peek() == Some(&Tok::Sym('(')) {
                        self.pos += 1;
                        let arg = self.expr()?;
                        if !self.eat(')') {
                            return self.err("expected `)`");
                        }
                        return Ok(func(&arg));
                    }
                }
                match self.chart.var_index(&name) {
                    Some(i) => Ok(Expr::var(i)),
                    None => Err(Error::UnknownIdentifier { name, column: col }),
                }
            }
            Some(Tok::Sym(c)) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of expression"),
        }
    }
}

/// Parses `text` against `chart`. Error columns are 1-based within `text`.
pub fn parse_expr(text: &str, chart: &Chart) -> Result<Expr> {
    parse_expr_at(text, chart, 0)
}

/// As [`parse_expr`], shifting reported columns by `offset` (for embedding in larger lines).
pub fn parse_expr_at(text: &str, chart: &Chart, offset: usize) -> Result<Expr> {
    let lexer = lex(text).map_err(|e| shift(e, offset))?;
    let mut p = Parser { lexer, pos: 0, chart, offset };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(e)
}

fn shift(e: Error, offset: usize) -> Error {
    match e {
        Error::Parse { column, message } => Error::Parse { column: column + offset, message },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Chart {
        Chart::standard(3).with_time().unwrap()
    }

    #[test]
    fn precedence_and_unary_minus() {
        let c = chart();
        let e = parse_expr("x*y + 1 - -z^2/2", &c).unwrap();
        assert_eq!(e.eval(&[2.0, 3.0, 2.0, 0.0]).unwrap(), 9.0);
        let e = parse_expr("-x^2", &c).unwrap();
        assert_eq!(e.eval(&[3.0, 0.0, 0.0, 0.0]).unwrap(), -9.0);
        let e = parse_expr("exp(-t)*x + x^-1", &c).unwrap();
        assert!((e.eval(&[2.0, 0.0, 0.0, 0.0]).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn literals() {
        let c = chart();
        assert_eq!(parse_expr("1/2", &c).unwrap(), Expr::ratio(1, 2));
        assert_eq!(parse_expr("0.5", &c).unwrap(), Expr::float(0.5));
        assert_eq!(parse_expr("1e-3", &c).unwrap(), Expr::float(1e-3));
    }

    #[test]
    fn errors_are_located() {
        let c = chart();
        assert_eq!(
            parse_expr("x + w", &c),
            Err(Error::UnknownIdentifier { name: "w".into(), column: 5 })
        );
        assert!(matches!(parse_expr("x +", &c), Err(Error::Parse { column: 4, .. })));
        assert!(matches!(parse_expr("(x", &c), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("x^y", &c), Err(Error::Parse { column: 3, .. })));
        assert!(matches!(parse_expr("t", &Chart::standard(2)), Err(Error::UnknownIdentifier { .. })));
    }
}
