//! Polynomials over named graded symbols.
//!
//! Symbols carry a parity and a formal time-derivative order. Constants
//! (coupling strengths, the supertime partners θ, θ̄) are time independent, so
//! their formal derivative vanishes. Coefficients are exact complex rationals
//! and every result is kept in a normal form: symbols sorted by
//! `(name, dot order)`, odd symbols with exponent one, zero terms pruned.

mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num::traits::{One, Signed, Zero};

pub use parser::parse;

use crate::grassmann::Parity;
use crate::scalar::{QComplex, QDisplay, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolicError {
    #[error("unknown symbol `{name}` at offset {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("odd symbol `{name}` squared at offset {pos}")]
    OddSquared { name: String, pos: usize },
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { msg: String, pos: usize },
    #[error("division by a non-constant or zero expression at offset {pos}")]
    BadDivision { pos: usize },
    #[error("binding for `{symbol}` has parity {found:?}, expected {expected}")]
    ParityMismatch { symbol: String, expected: Parity, found: Option<Parity> },
    #[error("symbol `{0}` declared twice with different attributes")]
    ConflictingDeclaration(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    name: Arc<str>,
    dot: u32,
    parity: Parity,
    constant: bool,
}

impl Symbol {
    pub fn dynamic(name: &str, parity: Parity) -> Self {
        Symbol { name: name.into(), dot: 0, parity, constant: false }
    }

    /// Time-independent even parameter.
    pub fn constant(name: &str) -> Self {
        Symbol { name: name.into(), dot: 0, parity: Parity::Even, constant: true }
    }

    /// Time-independent symbol of either parity (e.g. θ, θ̄).
    pub fn constant_with(name: &str, parity: Parity) -> Self {
        Symbol { name: name.into(), dot: 0, parity, constant: true }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dot_order(&self) -> u32 {
        self.dot
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn dotted(&self) -> Symbol {
        Symbol { dot: self.dot + 1, ..self.clone() }
    }

    pub fn base(&self) -> Symbol {
        Symbol { dot: 0, ..self.clone() }
    }

    pub fn poly(&self) -> GradedPolynomial {
        GradedPolynomial::from_symbol(self.clone())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in 0..self.dot {
            f.write_str("dot(")?;
        }
        f.write_str(&self.name)?;
        for _ in 0..self.dot {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Named symbols available to the parser.
#[derive(Clone, Debug, Default)]
pub struct Declarations {
    symbols: BTreeMap<String, Symbol>,
}

impl Declarations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, sym: Symbol) -> Result<(), SymbolicError> {
        let base = sym.base();
        match self.symbols.get(base.name()) {
            Some(existing) if *existing != base => Err(SymbolicError::ConflictingDeclaration(base.name().to_string())),
            _ => {
                self.symbols.insert(base.name().to_string(), base);
                Ok(())
            }
        }
    }

    pub fn with(mut self, sym: Symbol) -> Self {
        self.declare(sym).expect("conflicting declaration");
        self
    }

    pub fn even(self, name: &str) -> Self {
        self.with(Symbol::dynamic(name, Parity::Even))
    }

    pub fn odd(self, name: &str) -> Self {
        self.with(Symbol::dynamic(name, Parity::Odd))
    }

    pub fn constant(self, name: &str) -> Self {
        self.with(Symbol::constant(name))
    }

    pub fn get(&self, name: &str) -> Option<&Symbol> {
        self.symbols.get(name)
    }

    pub fn merge(&mut self, other: &Declarations) -> Result<(), SymbolicError> {
        other.symbols.values().try_for_each(|s| self.declare(s.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.values()
    }
}

/// Ordered product of symbol powers; odd symbols appear at most once.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<(Symbol, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn parity(&self) -> Parity {
        let odd = self.0.iter().filter(|(s, _)| s.parity.is_odd()).count();
        Parity::from_odd(odd % 2 == 1)
    }

    pub fn contains(&self, sym: &Symbol) -> bool {
        self.0.iter().any(|(s, _)| s == sym)
    }

    /// Product of two normal-ordered monomials: the merged monomial and the
    /// sign from reordering odd symbols, or `None` if an odd symbol repeats.
    fn times(&self, other: &Monomial) -> Option<(Monomial, bool)> {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut odd_a_remaining = a.iter().filter(|(s, _)| s.parity.is_odd()).count();
        let mut negative = false;
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take_a = j >= b.len() || (i < a.len() && a[i].0 <= b[j].0);
            if take_a && j < b.len() && a[i].0 == b[j].0 {
                if a[i].0.parity.is_odd() {
                    return None;
                }
                out.push((a[i].0.clone(), a[i].1 + b[j].1));
                i += 1;
                j += 1;
            } else if take_a {
                if a[i].0.parity.is_odd() {
                    odd_a_remaining -= 1;
                }
                out.push(a[i].clone());
                i += 1;
            } else {
                if b[j].0.parity.is_odd() && odd_a_remaining % 2 == 1 {
                    negative = !negative;
                }
                out.push(b[j].clone());
                j += 1;
            }
        }
        Some((Monomial(out), negative))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (s, e) in &self.0 {
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

pub type Bindings = BTreeMap<String, GradedPolynomial>;

#[derive(Clone, Default, PartialEq, Eq)]
pub struct GradedPolynomial {
    terms: BTreeMap<Monomial, QComplex>,
}

impl GradedPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(QComplex::one())
    }

    pub fn constant(c: QComplex) -> Self {
        Self::from_term(Monomial::one(), c)
    }

    pub fn from_symbol(s: Symbol) -> Self {
        Self::from_term(Monomial(vec![(s, 1)]), QComplex::one())
    }

    pub fn from_term(m: Monomial, c: QComplex) -> Self {
        let mut p = Self::zero();
        p.accumulate(m, c);
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &QComplex)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> QComplex {
        self.terms.get(m).cloned().unwrap_or_else(QComplex::zero)
    }

    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(Monomial::parity);
        match it.next() {
            None => Some(Parity::Even),
            Some(p) => it.all(|q| q == p).then_some(p),
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(s, _)| s.clone())).collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn accumulate(&mut self, m: Monomial, c: QComplex) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(QComplex::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, c: &QComplex) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.accumulate(m.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Formal d/dt as an even derivation: constants are annihilated and every
    /// dynamic factor is replaced in place by its dotted counterpart.
    pub fn formal_time_derivative(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let factors = &m.0;
            for (k, (s, e)) in factors.iter().enumerate() {
                if s.constant {
                    continue;
                }
                let mut piece = Self::constant(c.clone() * QComplex::from_i64(*e as i64));
                for (s2, e2) in &factors[..k] {
                    piece = &piece * &s2.poly().pow(*e2);
                }
                piece = &piece * &s.poly().pow(e - 1);
                piece = &piece * &s.dotted().poly();
                for (s2, e2) in &factors[k + 1..] {
                    piece = &piece * &s2.poly().pow(*e2);
                }
                out = &out + &piece;
            }
        }
        out
    }

    /// Left partial derivative with respect to `sym` (matched including its
    /// dot order).
    pub fn left_derivative(&self, sym: &Symbol) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let Some(k) = m.0.iter().position(|(s, _)| s == sym) else { continue };
            let e = m.0[k].1;
            let mut factors = m.0.clone();
            let c = if sym.parity.is_odd() {
                let before = m.0[..k].iter().filter(|(s, _)| s.parity.is_odd()).count();
                if before % 2 == 1 {
                    -c.clone()
                } else {
                    c.clone()
                }
            } else {
                c.clone() * QComplex::from_i64(e as i64)
            };
            if e == 1 {
                factors.remove(k);
            } else {
                factors[k].1 -= 1;
            }
            out.accumulate(Monomial(factors), c);
        }
        out
    }

    /// Simultaneous substitution keyed by base symbol name. A dotted symbol
    /// whose base is bound is replaced by the matching formal time derivative
    /// of the binding.
    pub fn substitute(&self, bindings: &Bindings) -> Result<Self, SymbolicError> {
        for (name, b) in bindings {
            if let Some(sym) = self.symbols().into_iter().find(|s| s.name() == name) {
                let found = b.parity();
                if !b.is_zero() && found != Some(sym.parity) {
                    return Err(SymbolicError::ParityMismatch { symbol: name.clone(), expected: sym.parity, found });
                }
            }
        }
        let mut cache: BTreeMap<Symbol, GradedPolynomial> = BTreeMap::new();
        let mut image = |s: &Symbol| -> GradedPolynomial {
            cache
                .entry(s.clone())
                .or_insert_with(|| match bindings.get(s.name()) {
                    Some(b) => (0..s.dot).fold(b.clone(), |acc, _| acc.formal_time_derivative()),
                    None => s.poly(),
                })
                .clone()
        };
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut term = Self::constant(c.clone());
            for (s, e) in &m.0 {
                term = &term * &image(s).pow(*e);
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Substitutes numeric values for symbols (by name, any dot order is
    /// rejected by simply not matching) and returns the remaining polynomial
    /// with floating coefficients as (monomial, value) pairs.
    pub fn evaluate_partial(&self, values: &BTreeMap<String, f64>) -> Vec<(Monomial, num_complex::Complex64)> {
        let mut acc: BTreeMap<Monomial, num_complex::Complex64> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut v = c.to_complex64();
            let mut rest = Vec::new();
            for (s, e) in &m.0 {
                match values.get(s.name()) {
                    Some(x) if s.dot == 0 => v *= x.powi(*e as i32),
                    _ => rest.push((s.clone(), *e)),
                }
            }
            *acc.entry(Monomial(rest)).or_default() += v;
        }
        acc.into_iter().filter(|(_, v)| *v != num_complex::Complex64::new(0.0, 0.0)).collect()
    }
}

impl Add for &GradedPolynomial {
    type Output = GradedPolynomial;

    fn add(self, rhs: Self) -> GradedPolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.accumulate(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &GradedPolynomial {
    type Output = GradedPolynomial;

    fn sub(self, rhs: Self) -> GradedPolynomial {
        self + &-rhs
    }
}

impl Neg for &GradedPolynomial {
    type Output = GradedPolynomial;

    fn neg(self) -> GradedPolynomial {
        self.scale(&-QComplex::one())
    }
}

impl Mul for &GradedPolynomial {
    type Output = GradedPolynomial;

    fn mul(self, rhs: Self) -> GradedPolynomial {
        let mut out = GradedPolynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                if let Some((m, negative)) = ma.times(mb) {
                    let c = ca.clone() * cb.clone();
                    out.accumulate(m, if negative { -c } else { c });
                }
            }
        }
        out
    }
}

fn is_negative(c: &QComplex) -> bool {
    (c.im.is_zero() && c.re.is_negative()) || (c.re.is_zero() && c.im.is_negative())
}

/// Prints in the parser's grammar, so `parse(p.to_string())` recovers `p`.
impl fmt::Display for GradedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = is_negative(c);
            let mag = if neg { -c.clone() } else { c.clone() };
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let is_one = mag.is_one();
            if m.0.is_empty() {
                write!(f, "{}", QDisplay(&mag))?;
            } else if is_one {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", QDisplay(&mag))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for GradedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn decls() -> Declarations {
        Declarations::new()
            .even("q")
            .even("p")
            .even("lambda_p")
            .odd("c_p")
            .odd("cbar_p")
            .odd("xi")
            .odd("xibar")
            .constant("w")
    }

    fn p(s: &str) -> GradedPolynomial {
        parse(s, &decls()).unwrap()
    }

    #[test]
    fn leibniz_on_bilinears() {
        assert_eq!(p("lambda_p*p").formal_time_derivative(), p("dot(lambda_p)*p + lambda_p*dot(p)"));
        assert_eq!(p("cbar_p*c_p").formal_time_derivative(), p("dot(cbar_p)*c_p + cbar_p*dot(c_p)"));
        assert!(p("3*w + 2").formal_time_derivative().is_zero());
    }

    #[test]
    fn odd_reordering_sign() {
        assert_eq!(p("xibar*xi"), p("-xi*xibar"));
        assert_eq!(p("(xi + xibar)*(xi + xibar)"), GradedPolynomial::zero());
    }

    #[test]
    fn substitution_basics() {
        let mut b = Bindings::new();
        assert_eq!(p("p").substitute(&b).unwrap(), p("p"));
        b.insert("q".into(), p("q + p"));
        assert_eq!(p("q^2").substitute(&b).unwrap(), p("q^2 + 2*q*p + p^2"));
        assert_eq!(p("dot(q)").substitute(&b).unwrap(), p("dot(q) + dot(p)"));
        b.insert("xi".into(), p("q"));
        assert!(matches!(p("xi").substitute(&b), Err(SymbolicError::ParityMismatch { .. })));
    }

    #[test]
    fn partial_derivatives() {
        assert_eq!(p("q^3*p").left_derivative(&Symbol::dynamic("q", Parity::Even)), p("3*q^2*p"));
        assert_eq!(p("xi*xibar").left_derivative(&Symbol::dynamic("xibar", Parity::Odd)), p("-xi"));
    }

    #[test]
    fn printing() {
        assert_eq!(p("-q + 3/2*p^2").to_string(), "3/2*p^2 - q");
        assert_eq!(p("i*xibar*dot(xi)").to_string(), "-i*dot(xi)*xibar");
        assert_eq!(GradedPolynomial::constant(q(-1, 3)).to_string(), "-1/3");
    }
}
