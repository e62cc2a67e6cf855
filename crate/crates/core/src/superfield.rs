//! Superfields, supertime integration and the dequantization map.
//!
//! A superfield packages a base field with its ghost, antighost and auxiliary
//! partners as a polynomial in the two odd partners of time:
//!
//! ```text
//! Φ = φ + θ·c + θ̄·(…) + θ̄θ·(…)
//! ```
//!
//! Replacing fields by superfields and integrating `i∫dθdθ̄` turns a phase-space
//! Lagrangian into the classical-path-integral Lagrangian up to a total time
//! derivative, which [`dequantize`] isolates exactly.

use std::collections::BTreeSet;

use num::traits::{One, Zero};

use crate::case::Case;
use crate::cpi;
use crate::grassmann::Parity;
use crate::linalg::solve_exact;
use crate::scalar::{qc, QComplex};
use crate::symbolic::{Bindings, GradedPolynomial, Monomial, Symbol, SymbolicError};

/// Sign of `∫dθdθ̄ θ̄θ`. With the measure read right to left this is +1, and the
/// free-particle identity passes with it.
pub const MEASURE_SIGN: i64 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SuperfieldError {
    #[error("component {index} of superfield `{base}` has parity {found:?}, expected {expected}")]
    ComponentParity { base: String, index: usize, expected: Parity, found: Option<Parity> },
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("no bilinear total derivative accounts for the dotted auxiliary terms; left over: {residual}")]
    IdentityViolation { residual: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Superfield {
    base: Symbol,
    theta: Symbol,
    thetabar: Symbol,
    components: [GradedPolynomial; 4],
}

impl Superfield {
    /// `components` are the coefficients of `1, θ, θ̄, θ̄θ`.
    pub fn new(
        base: Symbol,
        theta: Symbol,
        thetabar: Symbol,
        components: [GradedPolynomial; 4],
    ) -> Result<Self, SuperfieldError> {
        let flipped = base.parity().combine(Parity::Odd);
        let expected = [base.parity(), flipped, flipped, base.parity()];
        for (index, (c, e)) in components.iter().zip(expected).enumerate() {
            if !c.is_zero() && c.parity() != Some(e) {
                return Err(SuperfieldError::ComponentParity {
                    base: base.name().to_string(),
                    index,
                    expected: e,
                    found: c.parity(),
                });
            }
        }
        Ok(Superfield { base, theta, thetabar, components })
    }

    pub fn base(&self) -> &Symbol {
        &self.base
    }

    pub fn components(&self) -> &[GradedPolynomial; 4] {
        &self.components
    }

    pub fn expansion(&self) -> GradedPolynomial {
        let [c0, c1, c2, c3] = &self.components;
        let th = self.theta.poly();
        let tb = self.thetabar.poly();
        &(&(c0 + &(&th * c1)) + &(&tb * c2)) + &(&(&tb * &th) * c3)
    }

    /// The part of the expansion beyond the base field.
    pub fn shift(&self) -> GradedPolynomial {
        &self.expansion() - &self.components[0]
    }

    /// Sets every partner to zero, leaving the base field.
    pub fn truncated(&self) -> Superfield {
        let z = GradedPolynomial::zero();
        Superfield { components: [self.components[0].clone(), z.clone(), z.clone(), z], ..self.clone() }
    }
}

/// The superfields of `case`, in the order of [`Case::fields`].
///
/// ```text
/// bosonic    Q = q + θc^q + θ̄c̄_p + iθ̄θλ_p        P = p + θc^p − θ̄c̄_q − iθ̄θλ_q
/// grassmann  Ξ = ξ + θc^ξ − iθ̄c̄_ξ̄ − θ̄θλ_ξ̄      Ξ̄ = ξ̄ + θc^ξ̄ − iθ̄c̄_ξ − θ̄θλ_ξ
/// coadjoint  φ̃ = φ + χc^φ + χ̄c̄_η + iχ̄χΛ_η      η̃ = η + χc^η − χ̄c̄_φ − iχ̄χΛ_φ
/// ```
pub fn standard_superfields(case: Case) -> Vec<Superfield> {
    let (anti, aux): ([QComplex; 2], [QComplex; 2]) = match case {
        Case::Bosonic | Case::Coadjoint => ([qc(1, 0), qc(-1, 0)], [qc(0, 1), qc(0, -1)]),
        Case::Grassmann => ([qc(0, -1), qc(0, -1)], [qc(-1, 0), qc(-1, 0)]),
    };
    (0..2)
        .map(|a| {
            let partner = 1 - a;
            Superfield::new(
                case.coord(a),
                case.theta(),
                case.thetabar(),
                [
                    case.coord(a).poly(),
                    case.ghost(a).poly(),
                    case.antighost(partner).poly().scale(&anti[a]),
                    case.aux(partner).poly().scale(&aux[a]),
                ],
            )
            .expect("standard superfields are well graded")
        })
        .collect()
}

pub fn bindings(superfields: &[Superfield]) -> Bindings {
    superfields.iter().map(|s| (s.base.name().to_string(), s.expansion())).collect()
}

/// `h` with every base field replaced by its superfield.
pub fn compose_observable(
    h: &GradedPolynomial,
    superfields: &[Superfield],
) -> Result<GradedPolynomial, SuperfieldError> {
    Ok(h.substitute(&bindings(superfields))?)
}

/// Second-order Taylor expansion `h + Dh + ½D(Dh)` with `D = Σ Δ^a ∂_a`. It is
/// exact because every shift carries θ or θ̄.
pub fn compose_observable_taylor(h: &GradedPolynomial, superfields: &[Superfield]) -> GradedPolynomial {
    let d = |g: &GradedPolynomial| {
        superfields.iter().fold(GradedPolynomial::zero(), |acc, s| &acc + &(&s.shift() * &g.left_derivative(&s.base)))
    };
    let first = d(h);
    let second = d(&first);
    &(h + &first) + &second.scale(&crate::scalar::q(1, 2))
}

/// `i∫dθdθ̄ g`, with `θ, θ̄` the supertime partners of `case`.
pub fn supertime_integral(g: &GradedPolynomial, case: Case) -> GradedPolynomial {
    supertime_integral_with(g, case, None)
}

/// As [`supertime_integral`], optionally carrying an explicit ħ factor.
pub fn supertime_integral_with(g: &GradedPolynomial, case: Case, hbar: Option<&Symbol>) -> GradedPolynomial {
    let inner = g.left_derivative(&case.thetabar()).left_derivative(&case.theta());
    let out = inner.scale(&qc(0, MEASURE_SIGN));
    match hbar {
        Some(h) => &out * &h.poly(),
        None => out,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dequantization {
    /// `i∫dθdθ̄ L(Φ)`.
    pub raw: GradedPolynomial,
    pub cpi_lagrangian: GradedPolynomial,
    /// `d/dt(primitive)`; `cpi_lagrangian + surface_term = raw`.
    pub surface_term: GradedPolynomial,
    pub primitive: GradedPolynomial,
}

/// Maps `l` through the superfields of `case` and splits off the total time
/// derivative that carries dotted auxiliary fields or antighosts.
pub fn dequantize(l: &GradedPolynomial, case: Case) -> Result<Dequantization, SuperfieldError> {
    dequantize_with(l, case, None)
}

pub fn dequantize_with(
    l: &GradedPolynomial,
    case: Case,
    hbar: Option<&Symbol>,
) -> Result<Dequantization, SuperfieldError> {
    let composed = compose_observable(l, &standard_superfields(case))?;
    let raw = supertime_integral_with(&composed, case, hbar);
    let (primitive, surface_term) = recognize_surface(&raw, &case.momentum_symbols())?;
    let cpi_lagrangian = &raw - &surface_term;
    Ok(Dequantization { raw, cpi_lagrangian, surface_term, primitive })
}

fn has_dotted(m: &Monomial, momenta: &[Symbol]) -> bool {
    m.factors().iter().any(|(s, _)| s.dot_order() > 0 && momenta.contains(&s.base()))
}

/// Finds `P`, a combination of bilinears each containing a momentum symbol
/// (times a constant monomial from `raw`), such that `raw − dP/dt` has no
/// dotted momentum symbols.
fn recognize_surface(
    raw: &GradedPolynomial,
    momenta: &[Symbol],
) -> Result<(GradedPolynomial, GradedPolynomial), SuperfieldError> {
    let mut dynamic: BTreeSet<Symbol> = BTreeSet::new();
    let mut constant_parts: BTreeSet<Monomial> = BTreeSet::new();
    for (m, _) in raw.terms() {
        let mut c = GradedPolynomial::one();
        for (s, e) in m.factors() {
            if s.is_constant() {
                c = &c * &s.poly().pow(*e);
            } else {
                dynamic.insert(s.base());
            }
        }
        constant_parts.extend(c.terms().map(|(m, _)| m.clone()));
    }
    let dynamic: Vec<Symbol> = dynamic.into_iter().collect();
    let mut bilinears: Vec<GradedPolynomial> = Vec::new();
    for (i, s) in dynamic.iter().enumerate() {
        bilinears.push(s.poly());
        for t in &dynamic[i..] {
            bilinears.push(&s.poly() * &t.poly());
        }
    }
    let mut candidates: Vec<GradedPolynomial> = Vec::new();
    for b in bilinears {
        let Some((m, _)) = b.terms().next() else { continue };
        if !momenta.iter().any(|p| m.contains(p)) {
            continue;
        }
        for c in &constant_parts {
            let cand = &GradedPolynomial::from_term(c.clone(), QComplex::one()) * &b;
            if !cand.is_zero() {
                candidates.push(cand);
            }
        }
    }
    let images: Vec<GradedPolynomial> = candidates.iter().map(GradedPolynomial::formal_time_derivative).collect();
    let mut rows: BTreeSet<Monomial> = BTreeSet::new();
    for p in images.iter().chain(std::iter::once(raw)) {
        rows.extend(p.terms().map(|(m, _)| m).filter(|m| has_dotted(m, momenta)).cloned());
    }
    let a: Vec<Vec<QComplex>> = rows.iter().map(|r| images.iter().map(|im| im.coefficient(r)).collect()).collect();
    let b: Vec<QComplex> = rows.iter().map(|r| raw.coefficient(r)).collect();
    let leftover = || {
        let mut p = GradedPolynomial::zero();
        for (m, c) in raw.terms().filter(|(m, _)| has_dotted(m, momenta)) {
            p = &p + &GradedPolynomial::from_term(m.clone(), c.clone());
        }
        p.to_string()
    };
    let x = if rows.is_empty() {
        vec![QComplex::zero(); candidates.len()]
    } else {
        solve_exact(&a, &b).ok_or_else(|| SuperfieldError::IdentityViolation { residual: leftover() })?
    };
    let mut primitive = GradedPolynomial::zero();
    let mut surface = GradedPolynomial::zero();
    for ((cand, image), xk) in candidates.iter().zip(&images).zip(&x) {
        if !xk.is_zero() {
            primitive = &primitive + &cand.scale(xk);
            surface = &surface + &image.scale(xk);
        }
    }
    Ok((primitive, surface))
}

/// The bilinear whose negative time derivative is the expected surface term:
/// `λ p + i c̄ c` for the second field of the case, plus `γΛ_η` on the orbit.
pub fn expected_primitive(case: Case, with_gamma: bool) -> GradedPolynomial {
    let mut p = &(&case.aux(1).poly() * &case.coord(1).poly())
        + &(&case.antighost(1).poly() * &case.ghost(1).poly()).scale(&qc(0, 1));
    if with_gamma && case == Case::Coadjoint {
        p = &p + &(&Symbol::constant("gamma").poly() * &case.aux(1).poly());
    }
    -&p
}

/// Outcome of checking `i∫dθdθ̄ L(Φ) = L̃ + d/dt(expected primitive)` both
/// against the closed forms and against the recognized decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub case: Case,
    pub hamiltonian: GradedPolynomial,
    pub with_gamma: bool,
    pub dequantization: Dequantization,
    pub expected_cpi_lagrangian: GradedPolynomial,
    pub expected_surface_term: GradedPolynomial,
    /// `raw − L̃ − surface`, which must vanish identically.
    pub residual: GradedPolynomial,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.residual.is_zero()
            && self.dequantization.cpi_lagrangian == self.expected_cpi_lagrangian
            && self.dequantization.surface_term == self.expected_surface_term
    }
}

pub fn check_identity(
    case: Case,
    hamiltonian: &GradedPolynomial,
    with_gamma: bool,
) -> Result<IdentityCheck, SuperfieldError> {
    let l = case.lagrangian(hamiltonian, with_gamma);
    let dequantization = dequantize(&l, case)?;
    let expected_cpi_lagrangian = cpi::cpi_lagrangian(case, hamiltonian);
    let expected_surface_term = expected_primitive(case, with_gamma).formal_time_derivative();
    let residual = &(&dequantization.raw - &expected_cpi_lagrangian) - &expected_surface_term;
    Ok(IdentityCheck {
        case,
        hamiltonian: hamiltonian.clone(),
        with_gamma,
        dequantization,
        expected_cpi_lagrangian,
        expected_surface_term,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse;

    fn p(case: Case, s: &str) -> GradedPolynomial {
        parse(s, &case.declarations()).unwrap()
    }

    #[test]
    fn bosonic_superfields_match_closed_form() {
        let sf = standard_superfields(Case::Bosonic);
        let c = Case::Bosonic;
        assert_eq!(sf[0].expansion(), p(c, "q + theta*c_q + thetabar*cbar_p + i*thetabar*theta*lambda_p"));
        assert_eq!(sf[1].expansion(), p(c, "p + theta*c_p - thetabar*cbar_q - i*thetabar*theta*lambda_q"));
        assert_eq!(sf[1].truncated().expansion(), p(c, "p"));
    }

    #[test]
    fn grassmann_superfields_match_closed_form() {
        let c = Case::Grassmann;
        let sf = standard_superfields(c);
        assert_eq!(sf[0].expansion(), p(c, "xi + theta*c_xi - i*thetabar*cbar_xibar - thetabar*theta*lambda_xibar"));
        assert_eq!(sf[1].expansion(), p(c, "xibar + theta*c_xibar - i*thetabar*cbar_xi - thetabar*theta*lambda_xi"));
        assert_eq!(sf[0].expansion().parity(), Some(Parity::Odd));
    }

    #[test]
    fn wrong_component_parity_is_rejected() {
        let c = Case::Bosonic;
        let err = Superfield::new(
            c.coord(0),
            c.theta(),
            c.thetabar(),
            [c.coord(0).poly(), c.coord(1).poly(), GradedPolynomial::zero(), GradedPolynomial::zero()],
        );
        assert!(matches!(err, Err(SuperfieldError::ComponentParity { index: 1, .. })));
    }

    #[test]
    fn supertime_integral_picks_the_top_component() {
        let c = Case::Bosonic;
        assert_eq!(supertime_integral(&p(c, "thetabar*theta*q"), c), p(c, "i*q"));
        assert!(supertime_integral(&p(c, "q"), c).is_zero());
        assert!(supertime_integral(&p(c, "theta*c_q"), c).is_zero());
    }

    #[test]
    fn free_particle_fixes_the_measure_sign() {
        let c = Case::Bosonic;
        let check = check_identity(c, &p(c, "p^2/2"), false).unwrap();
        assert!(check.holds(), "{:?}", check.residual);
    }

    #[test]
    fn all_builtin_identities_hold() {
        for case in crate::case::ALL_CASES {
            for (name, _) in case.builtins() {
                let h = case.builtin_hamiltonian(name).unwrap();
                for with_gamma in [false, true] {
                    let check = check_identity(case, &h, with_gamma).unwrap();
                    assert!(check.holds(), "{case} {name}: {:?}", check.residual);
                }
            }
        }
    }

    #[test]
    fn gamma_only_changes_the_surface_term() {
        let c = Case::Coadjoint;
        let h = c.builtin_hamiltonian("precession").unwrap();
        let plain = dequantize(&c.lagrangian(&h, false), c).unwrap();
        let shifted = dequantize(&c.lagrangian(&h, true), c).unwrap();
        assert_eq!(plain.cpi_lagrangian, shifted.cpi_lagrangian);
        assert_eq!(&shifted.surface_term - &plain.surface_term, p(c, "-gamma*dot(Lambda_eta)"));
    }

    #[test]
    fn eta_superfield() {
        let c = Case::Coadjoint;
        let out = compose_observable(&p(c, "eta"), &standard_superfields(c)).unwrap();
        assert_eq!(out, p(c, "eta + chi*c_eta - chibar*cbar_phi - i*chibar*chi*Lambda_phi"));
    }

    #[test]
    fn taylor_route_matches_substitution() {
        for (case, h) in [
            (Case::Bosonic, "q^2"),
            (Case::Bosonic, "q^4/4 + alpha*q*p - p^3"),
            (Case::Grassmann, "xi*xibar"),
            (Case::Coadjoint, "eta^2*phi"),
        ] {
            let h = p(case, h);
            let sf = standard_superfields(case);
            assert_eq!(compose_observable(&h, &sf).unwrap(), compose_observable_taylor(&h, &sf));
        }
    }

    #[test]
    fn q_squared_expansion() {
        let c = Case::Bosonic;
        let out = compose_observable(&p(c, "q^2"), &standard_superfields(c)).unwrap();
        let expected =
            p(c, "q^2 + 2*q*theta*c_q + 2*q*thetabar*cbar_p + thetabar*theta*(2*i*q*lambda_p + 2*c_q*cbar_p)");
        assert_eq!(out, expected);
    }

    #[test]
    fn xi_xibar_expansion() {
        // 16 component products, 7 of them killed by θ² = θ̄² = 0.
        let c = Case::Grassmann;
        let sf = standard_superfields(c);
        let out = compose_observable(&p(c, "xi*xibar"), &sf).unwrap();
        assert_eq!(out.num_terms(), 9);
        assert_eq!(out, compose_observable_taylor(&p(c, "xi*xibar"), &sf));
        let top = supertime_integral(&out, c);
        assert_eq!(top, p(c, "i*(lambda_xi*xi - lambda_xibar*xibar) - c_xi*cbar_xi + cbar_xibar*c_xibar"));
    }

    #[test]
    fn liouvillian_map_on_the_orbit() {
        let c = Case::Coadjoint;
        let h = p(c, "-mu*B*eta");
        let out = supertime_integral(&compose_observable(&h, &standard_superfields(c)).unwrap(), c);
        assert_eq!(out, p(c, "-mu*B*Lambda_phi"));
    }

    #[test]
    fn unrecognizable_dotted_terms_are_reported() {
        let c = Case::Bosonic;
        let l = p(c, "q^2*dot(p)*dot(q)");
        let d = dequantize(&l, c);
        assert!(matches!(d, Err(SuperfieldError::IdentityViolation { .. })), "{d:?}");
    }

    #[test]
    fn hbar_factor_scales_everything() {
        let c = Case::Bosonic;
        let hbar = Symbol::constant("hbar");
        let l = c.lagrangian(&p(c, "p^2/2"), false);
        let plain = dequantize(&l, c).unwrap();
        let with = dequantize_with(&l, c, Some(&hbar)).unwrap();
        assert_eq!(with.cpi_lagrangian, &plain.cpi_lagrangian * &hbar.poly());
        assert_eq!(with.surface_term, &plain.surface_term * &hbar.poly());
    }
}
