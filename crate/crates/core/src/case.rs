//! The three classical systems and the names of their enlarged-space fields.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::grassmann::Parity;
use crate::symbolic::{parse, Declarations, GradedPolynomial, Symbol, SymbolicError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// Canonical pair (q, p).
    Bosonic,
    /// Spin-1/2 as a pair of odd variables (ξ, ξ̄).
    Grassmann,
    /// Darboux coordinates (φ, η) on the S² coadjoint orbit.
    Coadjoint,
}

pub const ALL_CASES: [Case; 3] = [Case::Bosonic, Case::Grassmann, Case::Coadjoint];

/// Names of one base field and its three partners.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldNames {
    pub coord: &'static str,
    /// Auxiliary field λ_a (Λ_a on the orbit).
    pub aux: &'static str,
    pub ghost: &'static str,
    pub antighost: &'static str,
}

const BOSONIC: [FieldNames; 2] = [
    FieldNames { coord: "q", aux: "lambda_q", ghost: "c_q", antighost: "cbar_q" },
    FieldNames { coord: "p", aux: "lambda_p", ghost: "c_p", antighost: "cbar_p" },
];
const GRASSMANN: [FieldNames; 2] = [
    FieldNames { coord: "xi", aux: "lambda_xi", ghost: "c_xi", antighost: "cbar_xi" },
    FieldNames { coord: "xibar", aux: "lambda_xibar", ghost: "c_xibar", antighost: "cbar_xibar" },
];
const COADJOINT: [FieldNames; 2] = [
    FieldNames { coord: "phi", aux: "Lambda_phi", ghost: "c_phi", antighost: "cbar_phi" },
    FieldNames { coord: "eta", aux: "Lambda_eta", ghost: "c_eta", antighost: "cbar_eta" },
];

impl Case {
    pub fn fields(self) -> &'static [FieldNames; 2] {
        match self {
            Case::Bosonic => &BOSONIC,
            Case::Grassmann => &GRASSMANN,
            Case::Coadjoint => &COADJOINT,
        }
    }

    /// Odd partners of time.
    pub fn supertime(self) -> (&'static str, &'static str) {
        match self {
            Case::Coadjoint => ("chi", "chibar"),
            _ => ("theta", "thetabar"),
        }
    }

    /// Parameters that may appear in Hamiltonians of this case.
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            Case::Bosonic => &["alpha", "hbar"],
            Case::Grassmann => &["w", "hbar"],
            Case::Coadjoint => &["mu", "B", "gamma", "hbar"],
        }
    }

    pub fn coord_parity(self) -> Parity {
        match self {
            Case::Grassmann => Parity::Odd,
            _ => Parity::Even,
        }
    }

    /// Parity of the auxiliary field λ_a, equal to that of its coordinate.
    pub fn aux_parity(self) -> Parity {
        self.coord_parity()
    }

    /// Ghosts carry the opposite parity of their coordinate.
    pub fn ghost_parity(self) -> Parity {
        self.coord_parity().combine(Parity::Odd)
    }

    pub fn coord(self, a: usize) -> Symbol {
        Symbol::dynamic(self.fields()[a].coord, self.coord_parity())
    }

    pub fn aux(self, a: usize) -> Symbol {
        Symbol::dynamic(self.fields()[a].aux, self.aux_parity())
    }

    pub fn ghost(self, a: usize) -> Symbol {
        Symbol::dynamic(self.fields()[a].ghost, self.ghost_parity())
    }

    pub fn antighost(self, a: usize) -> Symbol {
        Symbol::dynamic(self.fields()[a].antighost, self.ghost_parity())
    }

    pub fn theta(self) -> Symbol {
        Symbol::constant_with(self.supertime().0, Parity::Odd)
    }

    pub fn thetabar(self) -> Symbol {
        Symbol::constant_with(self.supertime().1, Parity::Odd)
    }

    /// Symbols whose dotted forms must not survive in a first-order CPI
    /// Lagrangian: the auxiliary fields and antighosts.
    pub fn momentum_symbols(self) -> Vec<Symbol> {
        (0..2).flat_map(|a| [self.aux(a), self.antighost(a)]).collect()
    }

    pub fn declarations(self) -> Declarations {
        let mut d = Declarations::new();
        for a in 0..2 {
            d = d.with(self.coord(a)).with(self.aux(a)).with(self.ghost(a)).with(self.antighost(a));
        }
        d = d.with(self.theta()).with(self.thetabar());
        for p in self.parameters() {
            d = d.constant(p);
        }
        d
    }

    /// First-order kinetic term of the phase-space Lagrangian. On the orbit the
    /// optional γ term shifts the one-form by a constant.
    pub fn kinetic_term(self, with_gamma: bool) -> GradedPolynomial {
        let src = match self {
            Case::Bosonic => "p*dot(q)",
            Case::Grassmann => "i*xibar*dot(xi)",
            Case::Coadjoint if with_gamma => "(gamma + eta)*dot(phi)",
            Case::Coadjoint => "eta*dot(phi)",
        };
        parse(src, &self.declarations()).expect("kinetic term parses")
    }

    /// `kinetic − H`.
    pub fn lagrangian(self, hamiltonian: &GradedPolynomial, with_gamma: bool) -> GradedPolynomial {
        &self.kinetic_term(with_gamma) - hamiltonian
    }

    pub fn builtins(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Case::Bosonic => {
                &[("free", "p^2/2"), ("harmonic", "p^2/2 + q^2/2"), ("quartic", "p^2/2 + q^4/4"), ("qp", "alpha*q*p")]
            }
            Case::Grassmann => &[("spin", "-(w/2)*(1 - 2*xi*xibar)")],
            Case::Coadjoint => &[("precession", "-mu*B*eta")],
        }
    }

    pub fn builtin_hamiltonian(self, name: &str) -> Option<GradedPolynomial> {
        let (_, src) = self.builtins().iter().find(|(n, _)| *n == name)?;
        Some(parse(src, &self.declarations()).expect("builtin parses"))
    }

    pub fn parse_hamiltonian(self, src: &str, extra: &Declarations) -> Result<GradedPolynomial, SymbolicError> {
        let mut d = self.declarations();
        d.merge(extra)?;
        parse(src, &d)
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Bosonic => "bosonic",
            Case::Grassmann => "grassmann",
            Case::Coadjoint => "coadjoint",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown case `{0}` (expected bosonic, grassmann or coadjoint)")]
pub struct UnknownCase(pub String);

impl FromStr for Case {
    type Err = UnknownCase;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bosonic" => Ok(Case::Bosonic),
            "grassmann" => Ok(Case::Grassmann),
            "coadjoint" => Ok(Case::Coadjoint),
            other => Err(UnknownCase(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parities_follow_the_coordinate() {
        assert_eq!(Case::Grassmann.ghost(0).parity(), Parity::Even);
        assert_eq!(Case::Grassmann.aux(1).parity(), Parity::Odd);
        assert_eq!(Case::Bosonic.antighost(1).parity(), Parity::Odd);
        assert_eq!(Case::Coadjoint.supertime(), ("chi", "chibar"));
    }

    #[test]
    fn builtins_parse() {
        for case in ALL_CASES {
            for (name, _) in case.builtins() {
                assert!(case.builtin_hamiltonian(name).is_some());
            }
            assert_eq!(case.to_string().parse::<Case>().unwrap(), case);
        }
        assert!("spinor".parse::<Case>().is_err());
    }
}
