//! Parser for the compact element notation used in input files:
//! sums of products of integers, `p`, `u` and `y`, each optionally raised to
//! a nonnegative integer power, e.g. `"-1"`, `"u^5"`, `"3*u^2 + p*y"`.

use std::sync::Arc;

use super::{ModelRingParams, RingElem};
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
    params: &'a Arc<ModelRingParams>,
}

impl<'a> Parser<'a> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Shorthand {
            input: self.src.to_string(),
            reason: reason.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<u128> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected a number at offset {start}")));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<u128>()
            .map_err(|_| self.err(format!("number {s} is too large")))
    }

    fn exponent(&mut self) -> Result<u32> {
        if self.peek() == Some('^') {
            self.pos += 1;
            let k = self.number()?;
            u32::try_from(k).map_err(|_| self.err("exponent too large"))
        } else {
            Ok(1)
        }
    }

    /// A factor and whether it is a nonzero literal.
    fn factor(&mut self) -> Result<(RingElem, bool)> {
        let prm = self.params;
        match self.peek() {
            Some('p') => {
                self.pos += 1;
                let k = self.exponent()?;
                let val = k.checked_mul(prm.ram_index()).ok_or_else(|| self.err("exponent too large"))?;
                Ok((RingElem::u_pow(prm, val), true))
            }
            Some('u') => {
                self.pos += 1;
                let k = self.exponent()?;
                Ok((RingElem::u_pow(prm, k), true))
            }
            Some('y') => {
                self.pos += 1;
                let k = self.exponent()?;
                let y = RingElem::y(prm);
                let mut acc = RingElem::one(prm);
                for _ in 0..k {
                    acc = &acc * &y;
                }
                Ok((acc, true))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("unbalanced parenthesis"));
                }
                self.pos += 1;
                let k = self.exponent()?;
                let mut acc = RingElem::one(prm);
                for _ in 0..k {
                    acc = &acc * &inner;
                }
                Ok((acc, false))
            }
            Some(c) if c.is_ascii_digit() => {
                let c = self.number()?;
                let k = self.exponent()?;
                let base = RingElem::from_w(prm, &[(c % prm.modulus()) as i128]);
                let mut acc = RingElem::one(prm);
                for _ in 0..k {
                    acc = &acc * &base;
                }
                Ok((acc, c != 0))
            }
            Some(c) => Err(self.err(format!("unexpected character {c:?}"))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn term(&mut self) -> Result<RingElem> {
        let (mut acc, mut literal) = self.factor()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            let (x, lit) = self.factor()?;
            acc = &acc * &x;
            literal &= lit;
        }
        if literal && acc.is_zero() {
            return Err(self.err(format!(
                "monomial vanishes at precision u^{}",
                self.params.max_prec()
            )));
        }
        Ok(acc)
    }

    fn expr(&mut self) -> Result<RingElem> {
        let mut negate = false;
        if self.peek() == Some('-') {
            self.pos += 1;
            negate = true;
        } else if self.peek() == Some('+') {
            self.pos += 1;
        }
        let t = self.term()?;
        let mut acc = if negate { -&t } else { t };
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some('-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }
}

/// Parses shorthand into an element of the model ring.
pub fn parse_shorthand(params: &Arc<ModelRingParams>, src: &str) -> Result<RingElem> {
    let mut parser = Parser {
        src,
        chars: src.chars().collect(),
        pos: 0,
        params,
    };
    let x = parser.expr()?;
    if parser.peek().is_some() {
        return Err(parser.err(format!("trailing input at offset {}", parser.pos)));
    }
    Ok(x)
}
