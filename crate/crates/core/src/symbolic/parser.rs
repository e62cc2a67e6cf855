//! Recursive-descent parser for the polynomial grammar.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := ("-" | "+") unary | power
//! power  := atom ("^" integer)?
//! atom   := number | "i" | ident | "dot" "(" expr ")" | "(" expr ")"
//! ```
//!
//! `i` is the imaginary unit. Division is only by nonzero constants.

use num::rational::BigRational;
use num::traits::{One, Zero};
use num::BigInt;
use num_complex::Complex;

use super::{Declarations, GradedPolynomial, Symbol, SymbolicError};
use crate::scalar::{q_inverse, QComplex};

pub fn parse(input: &str, decls: &Declarations) -> Result<GradedPolynomial, SymbolicError> {
    let mut p = Parser { src: input, pos: 0, decls };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    decls: &'a Declarations,
}

/// A parsed factor, remembering whether it was a bare odd symbol so that
/// `xi*xi` can be rejected rather than silently folded to zero.
struct Factor {
    value: GradedPolynomial,
    bare_odd: Option<Symbol>,
}

impl Parser<'_> {
    fn syntax(&self, msg: &str) -> SymbolicError {
        SymbolicError::Syntax { msg: msg.to_string(), pos: self.pos }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<GradedPolynomial, SymbolicError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<GradedPolynomial, SymbolicError> {
        let first = self.unary()?;
        let mut seen: Vec<Symbol> = first.bare_odd.into_iter().collect();
        let mut acc = first.value;
        loop {
            self.skip_ws();
            let at = self.pos;
            if self.eat('*') {
                let f = self.unary()?;
                if let Some(s) = f.bare_odd {
                    if seen.contains(&s) {
                        return Err(SymbolicError::OddSquared { name: s.to_string(), pos: at });
                    }
                    seen.push(s);
                }
                acc = &acc * &f.value;
            } else if self.eat('/') {
                let f = self.unary()?;
                let inv = constant_inverse(&f.value).ok_or(SymbolicError::BadDivision { pos: at })?;
                acc = acc.scale(&inv);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Factor, SymbolicError> {
        if self.eat('-') {
            let f = self.unary()?;
            Ok(Factor { value: -&f.value, bare_odd: f.bare_odd })
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Factor, SymbolicError> {
        let base = self.atom()?;
        self.skip_ws();
        let at = self.pos;
        if !self.eat('^') {
            return Ok(base);
        }
        self.skip_ws();
        let digits = self.take_while(|c| c.is_ascii_digit());
        let n: u32 = digits.parse().map_err(|_| self.syntax("expected a non-negative integer exponent"))?;
        if let Some(s) = &base.bare_odd {
            if n >= 2 {
                return Err(SymbolicError::OddSquared { name: s.to_string(), pos: at });
            }
        }
        let bare_odd = if n == 1 { base.bare_odd } else { None };
        Ok(Factor { value: base.value.pow(n), bare_odd })
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn atom(&mut self) -> Result<Factor, SymbolicError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let value = self.expr()?;
                if !self.eat(')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(Factor { value, bare_odd: None })
            }
            Some(c) if c.is_ascii_digit() => {
                let int = self.take_while(|c| c.is_ascii_digit()).to_string();
                let mut value = BigRational::from_integer(int.parse::<BigInt>().expect("digits"));
                if self.peek() == Some('.') {
                    self.pos += 1;
                    let frac = self.take_while(|c| c.is_ascii_digit()).to_string();
                    if frac.is_empty() {
                        return Err(self.syntax("expected digits after `.`"));
                    }
                    let scale = BigInt::from(10).pow(frac.len() as u32);
                    value += BigRational::new(frac.parse::<BigInt>().expect("digits"), scale);
                }
                let c = Complex::new(value, BigRational::zero());
                Ok(Factor { value: GradedPolynomial::constant(c), bare_odd: None })
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let ident = self.take_while(|c| c.is_alphanumeric() || c == '_').to_string();
                match ident.as_str() {
                    "i" => Ok(Factor { value: GradedPolynomial::constant(QComplex::i()), bare_odd: None }),
                    "dot" => {
                        if !self.eat('(') {
                            return Err(self.syntax("expected `(` after `dot`"));
                        }
                        let inner = self.dot_body()?;
                        if !self.eat(')') {
                            return Err(self.syntax("expected `)`"));
                        }
                        Ok(inner)
                    }
                    name => {
                        let sym = self
                            .decls
                            .get(name)
                            .cloned()
                            .ok_or(SymbolicError::UnknownSymbol { name: name.to_string(), pos: start })?;
                        let bare_odd = sym.parity().is_odd().then(|| sym.clone());
                        Ok(Factor { value: sym.poly(), bare_odd })
                    }
                }
            }
            Some(_) => Err(self.syntax("unexpected character")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    /// Body of `dot(...)`: a general expression, differentiated formally. A
    /// bare odd symbol stays tracked as its dotted version.
    fn dot_body(&mut self) -> Result<Factor, SymbolicError> {
        let value = self.expr()?;
        let derivative = value.formal_time_derivative();
        let bare_odd = single_odd_symbol(&derivative);
        Ok(Factor { value: derivative, bare_odd })
    }
}

fn single_odd_symbol(p: &GradedPolynomial) -> Option<Symbol> {
    let mut terms = p.terms();
    let (m, c) = terms.next()?;
    if terms.next().is_some() || !c.is_one() {
        return None;
    }
    match m.factors() {
        [(s, 1)] if s.parity().is_odd() => Some(s.clone()),
        _ => None,
    }
}

fn constant_inverse(p: &GradedPolynomial) -> Option<QComplex> {
    let mut terms = p.terms();
    let (m, c) = terms.next()?;
    if terms.next().is_some() || !m.factors().is_empty() {
        return None;
    }
    q_inverse(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::Parity;
    use crate::scalar::q;

    fn decls() -> Declarations {
        Declarations::new().even("q").even("p").odd("xi").odd("xibar").constant("w")
    }

    #[test]
    fn free_particle_lagrangian() {
        let l = parse("p*dot(q) - p^2/2", &decls()).unwrap();
        let pq = Symbol::dynamic("p", Parity::Even);
        let qd = Symbol::dynamic("q", Parity::Even).dotted();
        let expected = &(&pq.poly() * &qd.poly()) - &pq.poly().pow(2).scale(&q(1, 2));
        assert_eq!(l, expected);
    }

    #[test]
    fn spin_lagrangian() {
        let l = parse("i*xibar*dot(xi) + (w/2)*(1 - 2*xi*xibar)", &decls()).unwrap();
        assert_eq!(l.num_terms(), 3);
        assert_eq!(l, parse("-i*dot(xi)*xibar + 1/2*w - w*xi*xibar", &decls()).unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse("xi*xi", &decls()), Err(SymbolicError::OddSquared { name: "xi".into(), pos: 2 }));
        assert!(matches!(parse("xi^2", &decls()), Err(SymbolicError::OddSquared { .. })));
        assert_eq!(parse("q + zz", &decls()), Err(SymbolicError::UnknownSymbol { name: "zz".into(), pos: 4 }));
        assert!(matches!(parse("q/p", &decls()), Err(SymbolicError::BadDivision { pos: 1 })));
        assert!(matches!(parse("q/0", &decls()), Err(SymbolicError::BadDivision { .. })));
        assert!(matches!(parse("(q + p", &decls()), Err(SymbolicError::Syntax { .. })));
        assert!(matches!(parse("q +", &decls()), Err(SymbolicError::Syntax { .. })));
    }

    #[test]
    fn decimals_and_imaginary_division() {
        assert_eq!(parse("0.25*q", &decls()).unwrap(), parse("q/4", &decls()).unwrap());
        assert_eq!(parse("q/i", &decls()).unwrap(), parse("-i*q", &decls()).unwrap());
    }

    #[test]
    fn dot_of_expression() {
        assert_eq!(parse("dot(q*p)", &decls()).unwrap(), parse("dot(q)*p + q*dot(p)", &decls()).unwrap());
        assert!(parse("dot(w)", &decls()).unwrap().is_zero());
        assert!(matches!(parse("dot(xi)*dot(xi)", &decls()), Err(SymbolicError::OddSquared { .. })));
    }
}
