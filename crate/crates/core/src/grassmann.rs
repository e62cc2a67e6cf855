//! Finite graded algebras over a declared table of generators.
//!
//! A [`GeneratorTable`] lists odd (anticommuting, nilpotent) and even
//! (commuting, truncated at a fixed power) generators. The order of the
//! table is the normal order of every monomial: a term is stored as one
//! exponent per generator, and all signs come from counting the odd
//! transpositions needed to bring a product back into table order.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn from_odd(odd: bool) -> Self {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    /// Parity of a product.
    pub fn combine(self, other: Parity) -> Parity {
        Parity::from_odd(self.is_odd() ^ other.is_odd())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("multivectors belong to different generator tables")]
    TableMismatch,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("even generator `{0}` must have a positive truncation degree")]
    InvalidTruncation(String),
    #[error("Berezin measure over even generator `{0}`")]
    EvenMeasure(String),
    #[error("exponential of an element with odd parity")]
    OddExponential,
    #[error("exponential of an inhomogeneous element")]
    InhomogeneousExponential,
    #[error("exp of the scalar part is not representable in the coefficient field")]
    NonRepresentableExp,
    #[error("exponent vector {0:?} violates the table's nilpotency bounds")]
    InvalidExponents(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub parity: Parity,
    /// Highest retained power. Always 1 for odd generators.
    pub truncation: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GeneratorTable {
    entries: Vec<Generator>,
}

impl GeneratorTable {
    pub fn builder() -> GeneratorTableBuilder {
        GeneratorTableBuilder::default()
    }

    pub fn entries(&self) -> &[Generator] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, AlgebraError> {
        self.entries.iter().position(|g| g.name == name).ok_or_else(|| AlgebraError::UnknownGenerator(name.to_string()))
    }

    pub fn generator(&self, index: usize) -> &Generator {
        &self.entries[index]
    }

    /// Parity of a monomial with the given exponents.
    pub fn monomial_parity(&self, exps: &[u8]) -> Parity {
        let odd = self.entries.iter().zip(exps).filter(|(g, &e)| g.parity.is_odd() && e == 1).count();
        Parity::from_odd(odd % 2 == 1)
    }

    fn check_exponents(&self, exps: &[u8]) -> Result<(), AlgebraError> {
        let ok = exps.len() == self.entries.len() && self.entries.iter().zip(exps).all(|(g, &e)| e <= g.truncation);
        if ok {
            Ok(())
        } else {
            Err(AlgebraError::InvalidExponents(exps.to_vec()))
        }
    }

    /// Whether `exps` is a valid exponent vector for this table.
    pub fn admits(&self, exps: &[u8]) -> bool {
        self.check_exponents(exps).is_ok()
    }

    /// Every valid exponent vector, in lexicographic order.
    pub fn all_exponents(&self) -> Vec<Vec<u8>> {
        let mut out = vec![Vec::new()];
        for g in &self.entries {
            out = out
                .into_iter()
                .flat_map(|e| {
                    (0..=g.truncation).map(move |k| {
                        let mut e = e.clone();
                        e.push(k);
                        e
                    })
                })
                .collect();
        }
        out
    }

    /// Human-readable monomial such as `xi*c_xi^2`, `1` for the empty one.
    pub fn monomial_name(&self, exps: &[u8]) -> String {
        let parts: Vec<String> = self
            .entries
            .iter()
            .zip(exps)
            .filter(|(_, &e)| e > 0)
            .map(|(g, &e)| if e == 1 { g.name.clone() } else { format!("{}^{}", g.name, e) })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    /// Same generators with every even truncation raised by `extra`.
    pub fn widened(&self, extra: u8) -> GeneratorTable {
        let entries = self
            .entries
            .iter()
            .map(|g| Generator {
                truncation: if g.parity.is_odd() { 1 } else { g.truncation.saturating_add(extra) },
                ..g.clone()
            })
            .collect();
        GeneratorTable { entries }
    }
}

#[derive(Default)]
pub struct GeneratorTableBuilder {
    entries: Vec<Generator>,
}

impl GeneratorTableBuilder {
    pub fn odd(mut self, name: &str) -> Self {
        self.entries.push(Generator { name: name.into(), parity: Parity::Odd, truncation: 1 });
        self
    }

    pub fn even(mut self, name: &str, truncation: u8) -> Self {
        self.entries.push(Generator { name: name.into(), parity: Parity::Even, truncation });
        self
    }

    pub fn with(self, name: &str, parity: Parity, truncation: u8) -> Self {
        match parity {
            Parity::Odd => self.odd(name),
            Parity::Even => self.even(name, truncation),
        }
    }

    pub fn build(self) -> Result<Arc<GeneratorTable>, AlgebraError> {
        for (i, g) in self.entries.iter().enumerate() {
            if self.entries[..i].iter().any(|h| h.name == g.name) {
                return Err(AlgebraError::DuplicateGenerator(g.name.clone()));
            }
            if g.parity == Parity::Even && g.truncation == 0 {
                return Err(AlgebraError::InvalidTruncation(g.name.clone()));
            }
        }
        Ok(Arc::new(GeneratorTable { entries: self.entries }))
    }
}

/// Element of the graded algebra generated by a [`GeneratorTable`].
#[derive(Clone, PartialEq)]
pub struct Multivector<C> {
    table: Arc<GeneratorTable>,
    terms: BTreeMap<Vec<u8>, C>,
}

impl<C: Scalar> Multivector<C> {
    pub fn zero(table: &Arc<GeneratorTable>) -> Self {
        Multivector { table: table.clone(), terms: BTreeMap::new() }
    }

    pub fn scalar(table: &Arc<GeneratorTable>, c: C) -> Self {
        Self::monomial(table, vec![0; table.len()], c).expect("zero exponents are always valid")
    }

    pub fn one(table: &Arc<GeneratorTable>) -> Self {
        Self::scalar(table, C::one())
    }

    pub fn monomial(table: &Arc<GeneratorTable>, exps: Vec<u8>, c: C) -> Result<Self, AlgebraError> {
        table.check_exponents(&exps)?;
        let mut m = Self::zero(table);
        if !c.is_zero() {
            m.terms.insert(exps, c);
        }
        Ok(m)
    }

    /// The generator `name` as an element of the algebra.
    pub fn generator(table: &Arc<GeneratorTable>, name: &str) -> Result<Self, AlgebraError> {
        let k = table.index_of(name)?;
        let mut exps = vec![0; table.len()];
        exps[k] = 1;
        Self::monomial(table, exps, C::one())
    }

    pub fn table(&self) -> &Arc<GeneratorTable> {
        &self.table
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], &C)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &[u8]) -> C {
        self.terms.get(exps).cloned().unwrap_or_else(C::zero)
    }

    /// Coefficient of the monomial built from the named generators (each to the first power).
    pub fn coefficient_of(&self, names: &[&str]) -> Result<C, AlgebraError> {
        let mut exps = vec![0u8; self.table.len()];
        for n in names {
            exps[self.table.index_of(n)?] += 1;
        }
        Ok(self.coefficient(&exps))
    }

    pub fn scalar_part(&self) -> C {
        self.coefficient(&vec![0; self.table.len()])
    }

    /// `Some(parity)` when every term has the same parity; zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut parities = self.terms.keys().map(|e| self.table.monomial_parity(e));
        match parities.next() {
            None => Some(Parity::Even),
            Some(p) => parities.all(|q| q == p).then_some(p),
        }
    }

    fn same_table(&self, other: &Self) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.table, &other.table) || self.table == other.table {
            Ok(())
        } else {
            Err(AlgebraError::TableMismatch)
        }
    }

    fn accumulate(&mut self, exps: Vec<u8>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same_table(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.accumulate(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(&self.table);
        for (e, v) in &self.terms {
            out.accumulate(e.clone(), v.clone() * c.clone());
        }
        out
    }

    /// Graded product. Odd generators anticommute, even powers above the
    /// truncation are dropped.
    pub fn product(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same_table(other)?;
        let gens = self.table.entries();
        let mut out = Self::zero(&self.table);
        for (ea, ca) in &self.terms {
            'terms: for (eb, cb) in &other.terms {
                let mut exps = Vec::with_capacity(gens.len());
                let mut swaps = 0usize;
                // odd generators of `a` lying to the right of position j
                let mut odd_a_right: usize = gens.iter().zip(ea).filter(|(g, &e)| g.parity.is_odd() && e == 1).count();
                for (j, g) in gens.iter().enumerate() {
                    let (x, y) = (ea[j], eb[j]);
                    if g.parity.is_odd() {
                        if x == 1 {
                            odd_a_right -= 1;
                        }
                        if x + y > 1 {
                            continue 'terms;
                        }
                        if y == 1 {
                            swaps += odd_a_right;
                        }
                    } else if x + y > g.truncation {
                        continue 'terms;
                    }
                    exps.push(x + y);
                }
                let c = ca.clone() * cb.clone();
                out.accumulate(exps, if swaps % 2 == 1 { -c } else { c });
            }
        }
        Ok(out)
    }

    /// Left derivative: an odd generator is anticommuted to the front and
    /// struck; an even generator is differentiated as usual.
    pub fn left_derivative(&self, name: &str) -> Result<Self, AlgebraError> {
        let k = self.table.index_of(name)?;
        let gens = self.table.entries();
        let mut out = Self::zero(&self.table);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[k] -= 1;
            let c = if gens[k].parity.is_odd() {
                let before = (0..k).filter(|&j| gens[j].parity.is_odd() && e[j] == 1).count();
                if before % 2 == 1 {
                    -c.clone()
                } else {
                    c.clone()
                }
            } else {
                c.clone() * C::from_i64(e[k] as i64)
            };
            out.accumulate(exps, c);
        }
        Ok(out)
    }

    /// Iterated Berezin integral `∫ d g_0 d g_1 ... d g_{n-1}`. The measure
    /// nearest the integrand acts first, so `∂_{g_{n-1}}` is applied first and
    /// `∂_{g_0}` last.
    pub fn berezin_integral(&self, gens: &[&str]) -> Result<Self, AlgebraError> {
        for g in gens {
            let k = self.table.index_of(g)?;
            if !self.table.generator(k).parity.is_odd() {
                return Err(AlgebraError::EvenMeasure(g.to_string()));
            }
        }
        gens.iter().rev().try_fold(self.clone(), |acc, g| acc.left_derivative(g))
    }

    /// Exponential of an even element: `exp(s)` times the terminating series
    /// of the nilpotent remainder.
    pub fn graded_exp(&self) -> Result<Self, AlgebraError> {
        match self.parity() {
            Some(Parity::Even) => {}
            Some(Parity::Odd) => return Err(AlgebraError::OddExponential),
            None => return Err(AlgebraError::InhomogeneousExponential),
        }
        let s = self.scalar_part();
        let prefactor = s.try_exp().ok_or(AlgebraError::NonRepresentableExp)?;
        let nil = self.try_add(&Self::scalar(&self.table, -s))?;
        let mut sum = Self::one(&self.table);
        let mut power = Self::one(&self.table);
        let mut k = 1i64;
        loop {
            power = power.product(&nil)?.scale(&C::from_ratio(1, k));
            if power.is_zero() {
                break;
            }
            sum = sum.try_add(&power)?;
            k += 1;
        }
        Ok(sum.scale(&prefactor))
    }

    /// Maps each generator of this table to a generator of `target` and
    /// re-normalizes. `rename` returns the target name for a source name;
    /// `None` keeps the name.
    pub fn relabel<'a>(
        &self,
        target: &Arc<GeneratorTable>,
        rename: impl Fn(&str) -> Option<&'a str>,
    ) -> Result<Multivector<C>, AlgebraError> {
        let images: Vec<Multivector<C>> = self
            .table
            .entries()
            .iter()
            .map(|g| Multivector::generator(target, rename(&g.name).unwrap_or(&g.name)))
            .collect::<Result<_, _>>()?;
        self.substitute_generators(&images)
    }

    /// Replaces generator `k` by `images[k]` (all on one target table) and
    /// expands. Images of odd generators should be odd.
    pub fn substitute_generators(&self, images: &[Multivector<C>]) -> Result<Multivector<C>, AlgebraError> {
        let target = images.first().map(|m| m.table.clone()).ok_or(AlgebraError::TableMismatch)?;
        if images.len() != self.table.len() {
            return Err(AlgebraError::TableMismatch);
        }
        let mut out = Multivector::zero(&target);
        for (e, c) in &self.terms {
            let mut term = Multivector::scalar(&target, c.clone());
            for (img, &k) in images.iter().zip(e) {
                for _ in 0..k {
                    term = term.product(img)?;
                }
            }
            out = out.try_add(&term)?;
        }
        Ok(out)
    }

    pub fn map_coefficients<D: Scalar>(&self, f: impl Fn(&C) -> D) -> Multivector<D> {
        let mut out = Multivector::zero(&self.table);
        for (e, c) in &self.terms {
            out.accumulate(e.clone(), f(c));
        }
        out
    }

    /// Drops monomials whose exponents do not fit `target` (which must list
    /// the same generators in the same order, possibly with other truncations).
    pub fn project(&self, target: &Arc<GeneratorTable>) -> Self {
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            if target.check_exponents(e).is_ok() {
                out.accumulate(e.clone(), c.clone());
            }
        }
        out
    }

    /// Largest absolute coefficient, as a float.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.to_complex64().norm()).fold(0.0, f64::max)
    }
}

impl<C: Scalar> fmt::Debug for Multivector<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c:?}")?;
            for (g, &k) in self.table.entries().iter().zip(e) {
                match k {
                    0 => {}
                    1 => write!(f, "*{}", g.name)?,
                    _ => write!(f, "*{}^{}", g.name, k)?,
                }
            }
        }
        Ok(())
    }
}

impl<C: Scalar> Add for &Multivector<C> {
    type Output = Multivector<C>;

    fn add(self, rhs: Self) -> Multivector<C> {
        self.try_add(rhs).expect("multivector tables must match")
    }
}

impl<C: Scalar> Sub for &Multivector<C> {
    type Output = Multivector<C>;

    fn sub(self, rhs: Self) -> Multivector<C> {
        self.try_add(&-rhs).expect("multivector tables must match")
    }
}

impl<C: Scalar> Neg for &Multivector<C> {
    type Output = Multivector<C>;

    fn neg(self) -> Multivector<C> {
        self.scale(&-C::one())
    }
}

/// Panics when the tables differ; use [`Multivector::product`] to get an error instead.
impl<C: Scalar> Mul for &Multivector<C> {
    type Output = Multivector<C>;

    fn mul(self, rhs: Self) -> Multivector<C> {
        self.product(rhs).expect("multivector tables must match")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qc, QComplex};
    use num::traits::One;

    fn xi_table() -> Arc<GeneratorTable> {
        GeneratorTable::builder().odd("xi").odd("xibar").odd("xi1").build().unwrap()
    }

    fn g(t: &Arc<GeneratorTable>, n: &str) -> Multivector<QComplex> {
        Multivector::generator(t, n).unwrap()
    }

    fn c(t: &Arc<GeneratorTable>, v: QComplex) -> Multivector<QComplex> {
        Multivector::scalar(t, v)
    }

    #[test]
    fn nilpotent_and_anticommuting() {
        let t = xi_table();
        let (xi, xb) = (g(&t, "xi"), g(&t, "xibar"));
        assert!((&xi * &xi).is_zero());
        let ab = &xi * &xb;
        let ba = &xb * &xi;
        assert_eq!(ab.coefficient_of(&["xi", "xibar"]).unwrap(), q(1, 1));
        assert_eq!(ba, -&ab);
    }

    #[test]
    fn four_term_distribution() {
        let t = xi_table();
        let (xi, xb) = (g(&t, "xi"), g(&t, "xibar"));
        let a = &c(&t, q(1, 1)) + &xi.scale(&q(2, 1));
        let b = &c(&t, q(3, 1)) + &xb;
        let expected = &(&(&c(&t, q(3, 1)) + &xi.scale(&q(6, 1))) + &xb) + &(&xi * &xb).scale(&q(2, 1));
        assert_eq!(&a * &b, expected);
    }

    #[test]
    fn left_derivatives() {
        let t = xi_table();
        let (xi, xb) = (g(&t, "xi"), g(&t, "xibar"));
        assert_eq!(xi.left_derivative("xi").unwrap(), c(&t, q(1, 1)));
        assert_eq!((&xi * &xb).left_derivative("xibar").unwrap(), -&xi);
        assert!(c(&t, q(1, 1)).left_derivative("xi").unwrap().is_zero());
        assert!(matches!(xi.left_derivative("eta"), Err(AlgebraError::UnknownGenerator(_))));
    }

    #[test]
    fn berezin_normalization() {
        let t = xi_table();
        let xi = g(&t, "xi");
        assert_eq!(xi.berezin_integral(&["xi"]).unwrap(), c(&t, q(1, 1)));
        assert!(c(&t, q(1, 1)).berezin_integral(&["xi"]).unwrap().is_zero());
        let te = GeneratorTable::builder().odd("xi").even("x", 2).build().unwrap();
        let x = Multivector::<QComplex>::generator(&te, "x").unwrap();
        assert_eq!(x.berezin_integral(&["x"]), Err(AlgebraError::EvenMeasure("x".into())));
    }

    #[test]
    fn reproducing_kernel() {
        // ∫dξ' dξ̄ e^{ξ̄(ξ'−ξ)} ψ(ξ') = ψ(ξ)
        let t = xi_table();
        let (xi, xb, xp) = (g(&t, "xi"), g(&t, "xibar"), g(&t, "xi1"));
        let kernel = (&xb * &(&xp - &xi)).graded_exp().unwrap();
        let (psi0, psi1) = (qc(2, -1), qc(-3, 5));
        let psi_at = |v: &Multivector<QComplex>| &c(&t, psi0.clone()) + &v.scale(&psi1);
        let out = (&kernel * &psi_at(&xp)).berezin_integral(&["xi1", "xibar"]).unwrap();
        assert_eq!(out, psi_at(&xi));
    }

    #[test]
    fn exponentials() {
        let t = xi_table();
        let (xi, xb) = (g(&t, "xi"), g(&t, "xibar"));
        assert_eq!(Multivector::<QComplex>::zero(&t).graded_exp().unwrap(), c(&t, QComplex::one()));
        let n = &xb * &xi;
        assert_eq!(n.graded_exp().unwrap(), &c(&t, q(1, 1)) + &n);
        assert_eq!(xi.graded_exp(), Err(AlgebraError::OddExponential));
        let tf = GeneratorTable::builder().odd("xi").odd("xibar").build().unwrap();
        let a = num_complex::Complex64::new(0.3, -1.2);
        let nf = &Multivector::generator(&tf, "xibar").unwrap() * &Multivector::generator(&tf, "xi").unwrap();
        let e = (&Multivector::scalar(&tf, a) + &nf).graded_exp().unwrap();
        let want = (&Multivector::one(&tf) + &nf).scale(&a.exp());
        assert!((&e - &want).max_abs() < 1e-15);
    }

    #[test]
    fn even_truncation() {
        let t = GeneratorTable::builder().even("c", 2).build().unwrap();
        let cgen = Multivector::<QComplex>::generator(&t, "c").unwrap();
        let c2 = &cgen * &cgen;
        assert_eq!(c2.left_derivative("c").unwrap(), cgen.scale(&q(2, 1)));
        assert!((&c2 * &cgen).is_zero());
        // exp(c) = 1 + c + c^2/2 at truncation 2
        let e = cgen.graded_exp().unwrap();
        assert_eq!(e.coefficient(&[2]), q(1, 2));
    }

    #[test]
    fn table_checks() {
        assert!(matches!(
            GeneratorTable::builder().odd("a").odd("a").build(),
            Err(AlgebraError::DuplicateGenerator(_))
        ));
        let t1 = xi_table();
        let t2 = GeneratorTable::builder().odd("eta").build().unwrap();
        let a = Multivector::<QComplex>::one(&t1);
        let b = Multivector::<QComplex>::one(&t2);
        assert_eq!(a.product(&b), Err(AlgebraError::TableMismatch));
    }

    #[test]
    fn relabel_reorders_with_sign() {
        let t = xi_table();
        let xb_xi1 = &g(&t, "xibar") * &g(&t, "xi1");
        // swap xibar <-> xi1: xibar*xi1 -> xi1*xibar = -xibar*xi1
        let swapped = xb_xi1
            .relabel(&t, |n| match n {
                "xibar" => Some("xi1"),
                "xi1" => Some("xibar"),
                _ => None,
            })
            .unwrap();
        assert_eq!(swapped, -&xb_xi1);
    }
}
