//! Recursive-descent parser for the plain-text expression grammar used in
//! config files and CLI flags (see docs/grammar.ebnf):
//!
//!   expr   = term { ("+" | "-") term }
//!   term   = factor { ("*" | "/") factor }
//!   factor = "-" factor | base
//!   base   = atomic [ "^" sint ]
//!   atomic = number | "I" | call | ident | "(" expr ")"
//!   call   = ("exp"|"log"|"sin"|"cos"|"conj"|"D1"|"D2"|"D0"|"Dr") "(" expr ")"
//!
//! Decimal literals become exact rationals.

use num::{BigInt, BigRational};

use super::atom::Symbols;
use super::coeff::Coeff;
use super::expr::Expr;
use super::normal::Direction;
use crate::error::{Error, Result};

pub fn parse_expr(input: &str, sym: &Symbols) -> Result<Expr> {
    let mut p = Parser { bytes: input.as_bytes(), pos: 0, sym };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    sym: &'a Symbols,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> Error {
        Error::Parse { offset: self.pos, message: message.to_string() }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t') | Some(b'\n') | Some(b'\r')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", b as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(self.term()?.neg());
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Add(terms) })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut parts = vec![self.factor()?];
        loop {
            if self.eat(b'*') {
                parts.push(self.factor()?);
            } else if self.eat(b'/') {
                parts.push(self.factor()?.pow(-1));
            } else {
                break;
            }
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Expr::Mul(parts) })
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(self.factor()?.neg());
        }
        self.base()
    }

    fn base(&mut self) -> Result<Expr> {
        let a = self.atomic()?;
        if self.eat(b'^') {
            let k = self.signed_int()?;
            return Ok(a.pow(k));
        }
        Ok(a)
    }

    fn signed_int(&mut self) -> Result<i32> {
        let neg = self.eat(b'-');
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected integer exponent"));
        }
        let digits = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        let val: i32 = digits.parse().map_err(|_| self.error("exponent out of range"))?;
        self.skip_ws();
        Ok(if neg { -val } else { val })
    }

    fn atomic(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'0'..=b'9') | Some(b'.') => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident_or_call(),
            _ => Err(self.error("expected a number, symbol, or parenthesized expression")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        let mut denom = BigInt::from(1);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            let frac_start = self.pos;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
            if self.pos == frac_start {
                return Err(self.error("expected digits after decimal point"));
            }
            for _ in frac_start..self.pos {
                denom *= 10;
            }
        }
        let text: String =
            std::str::from_utf8(&self.bytes[start..self.pos]).unwrap().replace('.', "");
        if text.is_empty() {
            return Err(self.error("expected digits"));
        }
        let numer: BigInt = text.parse().map_err(|_| self.error("bad number"))?;
        self.skip_ws();
        Ok(Expr::Num(Coeff { re: BigRational::new(numer, denom), im: BigRational::from_integer(BigInt::from(0)) }))
    }

    fn ident_or_call(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap().to_string();
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            self.skip_ws();
            let arg = self.expr()?;
            self.expect(b')')?;
            return match name.as_str() {
                "exp" => Ok(arg.exp()),
                "log" => Ok(arg.log()),
                "sin" => Ok(arg.sin()),
                "cos" => Ok(arg.cos()),
                "conj" => Ok(arg.conj()),
                "D1" => Ok(arg.deriv(Direction::D1)),
                "D2" => Ok(arg.deriv(Direction::D2)),
                "D0" => Ok(arg.deriv(Direction::D0)),
                "Dr" => Ok(arg.deriv(Direction::Dr)),
                _ => Err(Error::Parse {
                    offset: start,
                    message: format!("unknown function `{name}`"),
                }),
            };
        }
        if name == "I" {
            return Ok(Expr::i());
        }
        match self.sym.lookup(&name) {
            Some(id) => Ok(Expr::Atom(id)),
            None => Err(Error::UnknownSymbol(name)),
        }
    }
}
