//! Lexer and recursive-descent parser shared by the polynomial and the
//! expression grammars.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' exponent)?
//! atom   := number | ident | ident '(' args ')' | '(' expr ')'
//! ```

use crate::error::{Error, Result};
use crate::rational::{parse_decimal, Q};

#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(Q),
    Ident(String, usize),
    Call(String, Vec<Ast>, usize),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>, usize),
    Pow(Box<Ast>, i64, usize),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            // scientific exponent: e[+-]digits
            if i < chars.len() && matches!(chars[i].1, 'e' | 'E') {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j].1, '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].1.is_ascii_digit() {
                    while j < chars.len() && chars[j].1.is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s: String = chars[start..i].iter().map(|&(_, c)| c).collect();
            out.push((Tok::Num(s), pos));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().map(|&(_, c)| c).collect();
            out.push((Tok::Ident(s), pos));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Sym(c), pos));
            i += 1;
        } else if c == '−' {
            out.push((Tok::Sym('-'), pos));
            i += 1;
        } else {
            return Err(Error::Parse { pos, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|&(_, p)| p).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn err(&self, msg: String) -> Error {
        Error::Parse { pos: self.pos(), msg }
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek() == Some(&Tok::Sym('/')) {
                let pos = self.pos();
                self.i += 1;
                lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?), pos);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast> {
        if self.eat('-') {
            Ok(Ast::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Ast> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Sym('^')) {
            let pos = self.pos();
            self.i += 1;
            let neg = self.eat('-');
            let parens = self.eat('(');
            let neg = neg || (parens && self.eat('-'));
            let k = match self.peek().cloned() {
                Some(Tok::Num(s)) => {
                    self.i += 1;
                    s.parse::<i64>()
                        .map_err(|_| Error::Parse { pos, msg: format!("exponent `{s}` is not an integer") })?
                }
                _ => return Err(self.err("expected integer exponent".into())),
            };
            if parens {
                self.expect(')')?;
            }
            return Ok(Ast::Pow(Box::new(base), if neg { -k } else { k }, pos));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                self.i += 1;
                let v = parse_decimal(&s).map_err(|_| Error::Parse { pos, msg: format!("bad number `{s}`") })?;
                Ok(Ast::Num(v))
            }
            Some(Tok::Ident(name)) => {
                self.i += 1;
                if self.eat('(') {
                    let mut args = Vec::new();
                    if !self.eat(')') {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(')') {
                                break;
                            }
                            self.expect(',')?;
                        }
                    }
                    Ok(Ast::Call(name, args, pos))
                } else {
                    Ok(Ast::Ident(name, pos))
                }
            }
            Some(Tok::Sym('(')) => {
                self.i += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(t) => Err(self.err(format!("unexpected token {t:?}"))),
            None => Err(self.err("unexpected end of input".into())),
        }
    }
}

/// Parses `text` into an [`Ast`]; errors carry the character offset.
pub fn parse(text: &str) -> Result<Ast> {
    let toks = lex(text)?;
    let mut p = Parser { toks, i: 0, end: text.len() };
    let e = p.expr()?;
    if p.i != p.toks.len() {
        return Err(p.err("trailing input".into()));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let a = parse("1 + 2*x^2").unwrap();
        match a {
            Ast::Add(_, r) => assert!(matches!(*r, Ast::Mul(..))),
            _ => panic!("{a:?}"),
        }
        assert!(matches!(parse("-x^2").unwrap(), Ast::Neg(_)));
    }

    #[test]
    fn positions_reported() {
        match parse("x + * y") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        match parse("x $ y") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn calls_and_negative_exponents() {
        let a = parse("theta(norm(x,y), 2*rho) * z^-1").unwrap();
        assert!(matches!(a, Ast::Mul(..)));
        assert!(matches!(parse("z^(-2)").unwrap(), Ast::Pow(_, -2, _)));
        assert!(matches!(parse("1e-3").unwrap(), Ast::Num(_)));
    }
}
