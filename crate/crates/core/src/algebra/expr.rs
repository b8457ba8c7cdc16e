//! Polynomial expressions: `+ - * ^`, parentheses, integer and `p/q`
//! literals. Juxtaposition is rejected.

use num::{BigInt, One};
use thiserror::Error;

use super::poly::{GeneratorSet, Poly};
use crate::linalg::Q;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset}")]
pub struct ExprError {
    /// Byte offset into the parsed text.
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            d if d.is_ascii_digit() => {
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Num(text[start..i].parse().expect("digits"))));
                continue;
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                while i < bytes.len() && {
                    let b = bytes[i] as char;
                    b.is_ascii_alphanumeric() || b == '_' || b == '\''
                } {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                return Err(ExprError {
                    offset: start,
                    message: format!("unexpected character '{other}'"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    gens: &'a GeneratorSet,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Poly, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?, self.gens);
                }
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    return self.err("juxtaposition is not allowed; use '*'")
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Poly, ExprError> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            return Ok(self.unary()?.scaled(&-Q::one()));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Poly, ExprError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    let e: u32 = match n.try_into() {
                        Ok(e) => e,
                        Err(_) => return self.err("exponent too large"),
                    };
                    return Ok(base.pow(e, self.gens));
                }
                _ => return self.err("expected a nonnegative integer exponent"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, ExprError> {
        let n = self.gens.len();
        match self.peek().cloned() {
            Some(Tok::Num(p)) => {
                self.pos += 1;
                if let Some(Tok::Slash) = self.peek() {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Tok::Num(d)) if d != BigInt::from(0) => {
                            self.pos += 1;
                            Ok(Poly::constant(n, Q::new(p, d)))
                        }
                        Some(Tok::Num(_)) => self.err("zero denominator"),
                        _ => self.err("expected a denominator after '/'"),
                    }
                } else {
                    Ok(Poly::constant(n, Q::from_integer(p)))
                }
            }
            Some(Tok::Ident(name)) => match self.gens.index_of(&name) {
                Some(g) => {
                    self.pos += 1;
                    Ok(Poly::generator(n, g))
                }
                None => self.err(format!("undeclared generator '{name}'")),
            },
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => self.err("expected ')'"),
                }
            }
            Some(Tok::Slash) => self.err("'/' is only allowed inside a rational literal"),
            Some(_) => self.err("expected a generator, number or '('"),
            None => self.err("unexpected end of expression"),
        }
    }
}

/// Parses an expression over the given generators.
pub fn parse_poly(gens: &GeneratorSet, text: &str) -> Result<Poly, ExprError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        gens,
    };
    let poly = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::Generator;
    use crate::linalg::q_frac;

    fn gens() -> GeneratorSet {
        GeneratorSet::new(
            vec![
                Generator { name: "u".into(), degree: 2 },
                Generator { name: "x".into(), degree: 2 },
            ],
            &[0],
        )
    }

    #[test]
    fn factored_and_expanded_forms_agree() {
        let g = gens();
        let a = parse_poly(&g, "(x+u)*(x-u)").unwrap();
        let b = parse_poly(&g, "x^2 - u^2").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rational_literals() {
        let g = gens();
        let p = parse_poly(&g, "-3/4*x").unwrap();
        assert_eq!(p.display(&g), "-3/4*x");
        assert_eq!(
            parse_poly(&g, "1/2").unwrap(),
            Poly::constant(2, q_frac(1, 2))
        );
    }

    #[test]
    fn juxtaposition_rejected() {
        let g = gens();
        let e = parse_poly(&g, "2x").unwrap_err();
        assert_eq!(e.offset, 1);
        assert!(parse_poly(&g, "x u").is_err());
    }

    #[test]
    fn undeclared_generator() {
        let e = parse_poly(&gens(), "x + y").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.message.contains("'y'"));
    }
}
