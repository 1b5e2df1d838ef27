//! Polynomial expression strings such as `3*(conj(t)^9+conj(t)^10)`.
//!
//! Numbers are read exactly (`0.25` becomes `1/4`), `i` is the imaginary
//! unit, `conj(..)` conjugates its argument. Multiplication must be written
//! with `*`; only constants may divide.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::poly::{Poly, QI};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unexpected character {0:?} at offset {1}")]
    UnexpectedChar(char, usize),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("{0:?} has no conjugate in this context")]
    NoConjugate(String),
    #[error("exponent must be a nonnegative integer at offset {0}")]
    BadExponent(usize),
    #[error("trailing input at offset {0}")]
    Trailing(usize),
    #[error("only constants can divide, at offset {0}")]
    NonConstantDivisor(usize),
    #[error("division by zero at offset {0}")]
    DivisionByZero(usize),
}

/// Variable names available to the parser and how they conjugate.
#[derive(Clone, Debug)]
pub struct VarTable {
    names: Vec<(&'static str, usize)>,
    conj: Vec<Option<usize>>,
}

impl VarTable {
    /// `t` (alias `tau`) and its conjugate `tb` (alias `tbar`).
    pub fn parameter() -> Self {
        VarTable {
            names: vec![("t", 0), ("tau", 0), ("tb", 1), ("tbar", 1)],
            conj: vec![Some(1), Some(0)],
        }
    }

    /// Holomorphic parameter polynomials (`t` only).
    pub fn univariate() -> Self {
        VarTable {
            names: vec![("t", 0), ("tau", 0)],
            conj: vec![None],
        }
    }

    /// `(z1, zb1, z2, zb2)`; `z`/`w` alias `z1`/`z2`.
    pub fn ambient() -> Self {
        VarTable {
            names: vec![
                ("z1", 0),
                ("z", 0),
                ("zeta1", 0),
                ("zb1", 1),
                ("zb", 1),
                ("z2", 2),
                ("w", 2),
                ("zeta2", 2),
                ("zb2", 3),
                ("wb", 3),
            ],
            conj: vec![Some(1), Some(0), Some(3), Some(2)],
        }
    }

    /// Holomorphic polynomials in `(z1, z2)`.
    pub fn plane() -> Self {
        VarTable {
            names: vec![
                ("z1", 0),
                ("z", 0),
                ("zeta1", 0),
                ("z2", 1),
                ("w", 1),
                ("zeta2", 1),
            ],
            conj: vec![None, None],
        }
    }

    fn lookup(&self, name: &str) -> Option<usize> {
        self.names.iter().find(|(n, _)| *n == name).map(|(_, i)| *i)
    }
}

/// Parse an expression into a polynomial with `N` variables laid out as in
/// `vars`.
pub fn parse_poly<const N: usize>(src: &str, vars: &VarTable) -> Result<Poly<QI, N>, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        vars,
    };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(ParseError::Trailing(p.pos));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a VarTable,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr<const N: usize>(&mut self) -> Result<Poly<QI, N>, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term<const N: usize>(&mut self) -> Result<Poly<QI, N>, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d: Poly<QI, N> = self.unary()?;
                    if d.total_degree().unwrap_or(0) > 0 {
                        return Err(ParseError::NonConstantDivisor(at));
                    }
                    let inv = d
                        .coeff(&[0; N])
                        .inv()
                        .ok_or(ParseError::DivisionByZero(at))?;
                    acc = acc.scale(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary<const N: usize>(&mut self) -> Result<Poly<QI, N>, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power<const N: usize>(&mut self) -> Result<Poly<QI, N>, ParseError> {
        let base = self.atom()?;
        if let Some(b'^') = self.peek() {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
            let k: u32 = digits.parse().map_err(|_| ParseError::BadExponent(start))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom<const N: usize>(&mut self) -> Result<Poly<QI, N>, ParseError> {
        let c = self.peek().ok_or(ParseError::UnexpectedEnd)?;
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return Ok(Poly::constant(QI::real(self.number())));
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
            if name == "i" {
                return Ok(Poly::constant(QI::i()));
            }
            if name == "conj" {
                self.expect(b'(')?;
                let inner: Poly<QI, N> = self.expr()?;
                self.expect(b')')?;
                return self.conjugate(&inner);
            }
            let idx = self
                .vars
                .lookup(name)
                .ok_or_else(|| ParseError::UnknownVariable(name.to_string()))?;
            return Ok(Poly::var(idx));
        }
        Err(ParseError::UnexpectedChar(c as char, self.pos))
    }

    fn conjugate<const N: usize>(&self, p: &Poly<QI, N>) -> Result<Poly<QI, N>, ParseError> {
        let mut out = Poly::zero();
        for (e, c) in p.terms() {
            let mut ne = [0u32; N];
            for (i, k) in e.iter().enumerate() {
                if *k == 0 {
                    continue;
                }
                let j = self.vars.conj[i].ok_or_else(|| {
                    let name = self
                        .vars
                        .names
                        .iter()
                        .find(|(_, v)| *v == i)
                        .map(|(n, _)| n.to_string())
                        .unwrap_or_default();
                    ParseError::NoConjugate(name)
                })?;
                ne[j] += k;
            }
            out.add_term(ne, c.conj());
        }
        Ok(out)
    }

    fn number(&mut self) -> BigRational {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int_part = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let mut value = if int_part.is_empty() {
            BigRational::zero()
        } else {
            BigRational::from_integer(int_part.parse::<BigInt>().unwrap_or_default())
        };
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let mut scale = BigRational::one();
            let ten = BigRational::from_integer(BigInt::from(10));
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                scale /= ten.clone();
                let d = (self.src[self.pos] - b'0') as i64;
                value += scale.clone() * BigRational::from_integer(BigInt::from(d));
                self.pos += 1;
            }
        }
        value
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(ParseError::UnexpectedChar(x as char, self.pos)),
            None => Err(ParseError::UnexpectedEnd),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_intro_form() {
        let p: Poly<QI, 2> =
            parse_poly("3*(conj(t)^9+conj(t)^10)", &VarTable::parameter()).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.coeff(&[0, 9]), QI::from_int(3));
        assert_eq!(p.coeff(&[0, 10]), QI::from_int(3));
    }

    #[test]
    fn exact_decimals_and_imaginary_unit() {
        let p: Poly<QI, 1> = parse_poly("0.25*t - 2*i", &VarTable::univariate()).unwrap();
        assert_eq!(p.coeff(&[1]), QI::from_ratio(1, 4));
        assert_eq!(p.coeff(&[0]), -(QI::i() * QI::from_int(2)));
    }

    #[test]
    fn conj_swaps_ambient_variables() {
        let p: Poly<QI, 4> = parse_poly("conj(i*z1*w^2)", &VarTable::ambient()).unwrap();
        assert_eq!(p.coeff(&[0, 1, 0, 2]), -QI::i());
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_poly::<1>("t + q", &VarTable::univariate()),
            Err(ParseError::UnknownVariable("q".into()))
        );
        assert!(matches!(
            parse_poly::<1>("conj(t)", &VarTable::univariate()),
            Err(ParseError::NoConjugate(_))
        ));
        assert!(parse_poly::<1>("(t", &VarTable::univariate()).is_err());
        assert!(parse_poly::<1>("t ^ x", &VarTable::univariate()).is_err());
    }
}
