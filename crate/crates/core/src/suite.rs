//! The acceptance criteria as runnable check batteries.
//!
//! Each criterion compares library output against an oracle built separately:
//! hand-written closed forms for the symbolic identities, closed-form
//! solutions for the dynamics, and the matrix representation for the spin
//! operators.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::case::Case;
use crate::coadjoint::{self, angle_distance, ConstraintSystem, OrbitState, PhaseFunction};
use crate::cpi::{self, build_cpi_hamiltonian, CpiSpec, EnlargedWavefunction};
use crate::grassmann::Multivector;
use crate::report::{Check, RunReport};
use crate::scalar::{q, QComplex, Scalar};
use crate::spin::{self, MagneticField, SpinOperator};
use crate::superfield::{self, check_identity};
use crate::symbolic::{parse, GradedPolynomial};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub dirac_samples: usize,
    pub random_fields: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 20240601, dirac_samples: 100, random_fields: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: u8,
    pub title: String,
    pub budget_seconds: f64,
    pub elapsed_seconds: f64,
    pub checks: Vec<Check>,
}

impl Criterion {
    pub fn checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn within_budget(&self) -> bool {
        self.elapsed_seconds < self.budget_seconds
    }

    pub fn passed(&self) -> bool {
        self.checks_pass() && self.within_budget()
    }
}

fn timed(id: u8, title: &str, budget_seconds: f64, f: impl FnOnce() -> Vec<Check>) -> Criterion {
    let start = Instant::now();
    let checks = f();
    Criterion { id, title: title.to_string(), budget_seconds, elapsed_seconds: start.elapsed().as_secs_f64(), checks }
}

fn poly(case: Case, src: &str) -> GradedPolynomial {
    parse(src, &case.declarations()).expect("oracle expressions parse")
}

/// `raw − L̃ − surface` against hand-written `L̃` and surface term.
fn identity_checks(case: Case, label: &str, h: &str, with_gamma: bool, cpi_l: &str, surface: &str) -> Vec<Check> {
    let h = poly(case, h);
    let oracle_l = poly(case, cpi_l);
    let oracle_s = poly(case, surface);
    match check_identity(case, &h, with_gamma) {
        Ok(c) => {
            let residual = &(&c.dequantization.raw - &oracle_l) - &oracle_s;
            vec![
                Check::exact(format!("{label}: residual"), "0", &residual),
                Check::exact(format!("{label}: recognized L~"), &oracle_l, &c.dequantization.cpi_lagrangian),
                Check::exact(format!("{label}: recognized surface term"), &oracle_s, &c.dequantization.surface_term),
            ]
        }
        Err(e) => vec![Check::exact(format!("{label}: residual"), "0", e)],
    }
}

const BOSONIC_KINETIC: &str = "lambda_q*dot(q) + lambda_p*dot(p) + i*cbar_q*dot(c_q) + i*cbar_p*dot(c_p)";
const BOSONIC_SURFACE: &str = "-(dot(lambda_p)*p + lambda_p*dot(p) + i*dot(cbar_p)*c_p + i*cbar_p*dot(c_p))";

pub fn dequantization_bosonic() -> Criterion {
    timed(1, "dequantization identity, bosonic", 1.0, || {
        let cases = [
            ("p^2/2", "lambda_q*p + i*cbar_q*c_p"),
            ("p^2/2 + q^2/2", "lambda_q*p - lambda_p*q + i*cbar_q*c_p - i*cbar_p*c_q"),
            ("p^2/2 + q^4/4", "lambda_q*p - lambda_p*q^3 + i*cbar_q*c_p - 3*i*cbar_p*q^2*c_q"),
            ("alpha*q*p", "alpha*(lambda_q*q - lambda_p*p + i*cbar_q*c_q - i*cbar_p*c_p)"),
        ];
        cases
            .iter()
            .flat_map(|(h, ht)| {
                let l = format!("{BOSONIC_KINETIC} - ({ht})");
                identity_checks(Case::Bosonic, &format!("H = {h}"), h, false, &l, BOSONIC_SURFACE)
            })
            .collect()
    })
}

pub fn dequantization_grassmann() -> Criterion {
    timed(2, "dequantization identity, Grassmann", 1.0, || {
        identity_checks(
            Case::Grassmann,
            "H = -(w/2)(1 - 2 xi xibar)",
            "-(w/2)*(1 - 2*xi*xibar)",
            false,
            "lambda_xi*dot(xi) + lambda_xibar*dot(xibar) + i*cbar_xi*dot(c_xi) + i*cbar_xibar*dot(c_xibar) \
             - i*w*(lambda_xi*xi - lambda_xibar*xibar + i*cbar_xi*c_xi - i*cbar_xibar*c_xibar)",
            "-(dot(lambda_xibar)*xibar + lambda_xibar*dot(xibar) + i*dot(cbar_xibar)*c_xibar + i*cbar_xibar*dot(c_xibar))",
        )
    })
}

const ORBIT_L: &str =
    "Lambda_phi*dot(phi) + Lambda_eta*dot(eta) + i*cbar_phi*dot(c_phi) + i*cbar_eta*dot(c_eta) + mu*B*Lambda_phi";
const ORBIT_SURFACE: &str =
    "-(dot(Lambda_eta)*eta + Lambda_eta*dot(eta) + i*dot(cbar_eta)*c_eta + i*cbar_eta*dot(c_eta))";

pub fn dequantization_coadjoint() -> Criterion {
    timed(3, "dequantization identity, coadjoint orbit", 1.0, || {
        let c = Case::Coadjoint;
        let mut checks = identity_checks(c, "gamma = 0", "-mu*B*eta", false, ORBIT_L, ORBIT_SURFACE);
        let with_gamma = format!("{ORBIT_SURFACE} - gamma*dot(Lambda_eta)");
        checks.extend(identity_checks(c, "symbolic gamma", "-mu*B*eta", true, ORBIT_L, &with_gamma));
        let h = poly(c, "-mu*B*eta");
        match (superfield::dequantize(&c.lagrangian(&h, false), c), superfield::dequantize(&c.lagrangian(&h, true), c))
        {
            (Ok(plain), Ok(shifted)) => {
                checks.push(Check::exact(
                    "gamma changes only the surface term",
                    poly(c, "-gamma*dot(Lambda_eta)"),
                    &shifted.surface_term - &plain.surface_term,
                ));
                checks.push(Check::exact("gamma leaves L~ unchanged", &plain.cpi_lagrangian, &shifted.cpi_lagrangian));
            }
            (a, b) => checks.push(Check::truth(format!("dequantization failed: {:?} {:?}", a.err(), b.err()), false)),
        }
        checks
    })
}

pub fn liouvillian_map() -> Criterion {
    timed(4, "Hamiltonian to Liouvillian map", 1.0, || {
        let c = Case::Coadjoint;
        let h = poly(c, "-mu*B*eta");
        let out = superfield::compose_observable(&h, &superfield::standard_superfields(c))
            .map(|composed| superfield::supertime_integral(&composed, c).to_string())
            .unwrap_or_else(|e| e.to_string());
        let from_flow = cpi::cpi_hamiltonian(c, &h);
        vec![
            Check::exact("i∫dχdχ̄ H(φ~, η~)", poly(c, "-mu*B*Lambda_phi"), out),
            Check::exact("Λ_a ω^ab ∂_b H", poly(c, "-mu*B*Lambda_phi"), from_flow),
        ]
    })
}

fn random_rational(rng: &mut ChaCha8Rng) -> QComplex {
    q(rng.gen_range(-9..=9), rng.gen_range(1..=7))
}

fn commutator<C: Scalar>(a: &[[C; 2]; 2], b: &[[C; 2]; 2]) -> [[C; 2]; 2] {
    let mul = |x: &[[C; 2]; 2], y: &[[C; 2]; 2]| {
        let mut out: [[C; 2]; 2] = [[C::zero(), C::zero()], [C::zero(), C::zero()]];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = x[i][0].clone() * y[0][j].clone() + x[i][1].clone() * y[1][j].clone();
            }
        }
        out
    };
    let (ab, ba) = (mul(a, b), mul(b, a));
    let mut out = ab.clone();
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = ab[i][j].clone() - ba[i][j].clone();
        }
    }
    out
}

/// Matrix of `[A, B]` computed purely through the Grassmann forms.
fn grassmann_commutator<C: Scalar>(a: &SpinOperator<C>, b: &SpinOperator<C>) -> [[C; 2]; 2] {
    let col = |v: [C; 2]| {
        let ab = a.grassmann_apply(&b.grassmann_apply(&v));
        let ba = b.grassmann_apply(&a.grassmann_apply(&v));
        [ab[0].clone() - ba[0].clone(), ab[1].clone() - ba[1].clone()]
    };
    let c0 = col([C::one(), C::zero()]);
    let c1 = col([C::zero(), C::one()]);
    [[c0[0].clone(), c1[0].clone()], [c0[1].clone(), c1[1].clone()]]
}

fn scaled<C: Scalar>(m: &[[C; 2]; 2], s: &C) -> [[C; 2]; 2] {
    [
        [s.clone() * m[0][0].clone(), s.clone() * m[0][1].clone()],
        [s.clone() * m[1][0].clone(), s.clone() * m[1][1].clone()],
    ]
}

fn su2_checks<C: Scalar + PartialEq>(hbar: C) -> bool {
    let ops = spin::spin_operators(hbar.clone());
    let ih = C::i() * hbar;
    let triples = [(&ops.sx, &ops.sy, &ops.sz), (&ops.sy, &ops.sz, &ops.sx), (&ops.sz, &ops.sx, &ops.sy)];
    triples.iter().all(|(a, b, c)| {
        let expected = scaled(&c.matrix, &ih);
        commutator(&a.matrix, &b.matrix) == expected && grassmann_commutator(a, b) == expected
    })
}

pub fn representation_isomorphism(config: &SuiteConfig) -> Criterion {
    timed(5, "matrix and Grassmann representations agree", 1.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut checks = Vec::new();
        let exact_ops = spin::spin_operators(q(1, 1));
        let hbar = random_rational(&mut rng);
        let scaled_ops = spin::spin_operators(hbar.clone());
        let fixed_ok = [&exact_ops, &scaled_ops]
            .iter()
            .all(|o| [&o.sx, &o.sy, &o.sz, &o.n].iter().all(|op| op.representations_agree()));
        checks.push(Check::truth("Sx, Sy, Sz, N agree exactly on 1 and xi", fixed_ok));
        checks.push(Check::truth("su(2) commutators, hbar = 1, both forms", su2_checks(q(1, 1))));
        checks.push(Check::truth(format!("su(2) commutators, hbar = {hbar}, both forms"), su2_checks(hbar)));

        let mut exact_ok = true;
        let mut float_worst = 0.0f64;
        let mut symbol_worst = 0.0f64;
        let mut kernel_worst = 0.0f64;
        for _ in 0..config.random_fields {
            let (mu, bx, by, bz) = (
                random_rational(&mut rng),
                random_rational(&mut rng),
                random_rational(&mut rng),
                random_rational(&mut rng),
            );
            exact_ok &= spin::hamiltonian_with(mu, bx, by, bz).representations_agree();
            let b = MagneticField::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
                .with_moment(rng.gen_range(0.1..2.0));
            let h = spin::hamiltonian(&b);
            float_worst = float_worst.max(h.discrepancy());
            symbol_worst = symbol_worst.max((&spin::hamiltonian_symbol(&b) - &h.symbol()).max_abs());
            let km = spin::kernel_to_matrix(&h.kernel()).expect("spin table");
            kernel_worst = kernel_worst.max(spin::max_abs_diff(&spin::to_matrix2(&km), &spin::to_matrix2(&h.matrix)));
        }
        let n = config.random_fields;
        checks.push(Check::truth(format!("H(b) agrees exactly for {n} rational fields"), exact_ok));
        checks.push(Check::small(format!("H(b) max discrepancy over {n} float fields"), float_worst, 1e-12));
        checks.push(Check::small("ordered symbol of H(b) matches the closed form", symbol_worst, 1e-12));
        checks.push(Check::small("integral kernel of H(b) reproduces the matrix", kernel_worst, 1e-12));
        checks
    })
}

pub fn propagator_convergence(config: &SuiteConfig) -> Criterion {
    timed(6, "sliced propagator converges at first order", 10.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
        let dir = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0f64)];
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let fields = [
            ("b = (1,0,0)", MagneticField::new(1.0, 0.0, 0.0)),
            ("b generic", MagneticField::new(dir[0] / norm, dir[1] / norm, dir[2] / norm)),
        ];
        let t = 1.0;
        let mut checks = Vec::new();
        for (label, b) in fields {
            checks.push(Check::close(format!("{label}: mu|B|t"), 1.0, b.mu_b * b.magnitude() * t, 1e-12));
            match spin::convergence_sweep(&b, t, &[125, 250, 500, 1000]) {
                Ok(points) => {
                    checks.push(Check::small(format!("{label}: error at n = 1000"), points[3].max_error, 1e-2));
                    for w in points.windows(2) {
                        let ratio = w[0].max_error / w[1].max_error;
                        checks.push(Check::within(
                            format!("{label}: error({}) / error({})", w[0].n, w[1].n),
                            ratio,
                            1.7,
                            2.3,
                        ));
                    }
                }
                Err(e) => checks.push(Check::truth(format!("{label}: {e}"), false)),
            }
        }
        checks
    })
}

pub fn dirac_brackets(config: &SuiteConfig) -> Criterion {
    timed(7, "Dirac brackets on the orbit", 5.0, || {
        dirac_checks(config.dirac_samples, config.seed, &DiracTolerances::default())
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracTolerances {
    /// Canonical pair and constraint brackets.
    pub bracket: f64,
    pub so3: f64,
    /// so(3) relations with finite-difference gradients.
    pub finite_difference: f64,
}

impl Default for DiracTolerances {
    fn default() -> Self {
        DiracTolerances { bracket: 1e-9, so3: 1e-8, finite_difference: 1e-6 }
    }
}

/// Bracket checks at `samples` random non-polar states.
pub fn dirac_checks(samples: usize, seed: u64, tol: &DiracTolerances) -> Vec<Check> {
    let sys = ConstraintSystem::default();
    let states = coadjoint::random_states(samples, seed, 0.05);
    let funcs = [
        PhaseFunction::theta(),
        PhaseFunction::phi(),
        PhaseFunction::p_theta(),
        PhaseFunction::p_phi(),
        PhaseFunction::eta(),
        PhaseFunction::x(1),
        PhaseFunction::x(2),
        PhaseFunction::x(3),
        PhaseFunction::hamiltonian(1.0),
        PhaseFunction::numeric("sin(phi)*p_theta + theta*p_phi^2", |s| {
            s.phi.sin() * s.p_theta + s.theta * s.p_phi.powi(2)
        }),
    ];
    let xs = [PhaseFunction::x(1), PhaseFunction::x(2), PhaseFunction::x(3)];
    let (mut canonical, mut constraint, mut so3, mut so3_fd, mut antisym) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut failure = None;
    for s in &states {
        let mut run = || -> Result<(), coadjoint::OrbitError> {
            let b = sys.dirac_bracket(&PhaseFunction::phi(), &PhaseFunction::eta(), s)?;
            canonical = canonical.max((b - 1.0).abs());
            for f in &funcs {
                for phi in &sys.constraints {
                    constraint = constraint.max(sys.dirac_bracket(f, phi, s)?.abs());
                }
                for g in &funcs {
                    let fg = sys.dirac_bracket(f, g, s)?;
                    let gf = sys.dirac_bracket(g, f, s)?;
                    antisym = antisym.max((fg + gf).abs());
                }
            }
            let x = s.embedding();
            for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                so3 = so3.max((sys.dirac_bracket(&xs[a], &xs[b], s)? - x[c]).abs());
                let fd = sys.dirac_bracket(&xs[a].without_gradient(), &xs[b].without_gradient(), s)?;
                so3_fd = so3_fd.max((fd - x[c]).abs());
            }
            Ok(())
        };
        if let Err(e) = run() {
            failure = Some(e);
            break;
        }
    }
    let mut checks = vec![
        Check::small(format!("{{phi, eta}}_D = 1 at {samples} states"), canonical, tol.bracket),
        Check::small("brackets with Phi1, Phi2 vanish", constraint, tol.bracket),
        Check::small("so(3): {x^a, x^b}_D = eps x^c", so3, tol.so3),
        Check::small("so(3) with finite-difference gradients", so3_fd, tol.finite_difference),
        Check::small("antisymmetry", antisym, 1e-12),
    ];
    let sample = OrbitState::on_shell(std::f64::consts::FRAC_PI_2, 0.0, 1.0);
    checks.push(Check::close(
        "{Phi1, Phi2}_P at theta = pi/2, lambda = 1",
        -1.0,
        sys.bracket_matrix(&sample)[0][1],
        1e-15,
    ));
    let pole = OrbitState::on_shell(0.0, 0.3, 1.0);
    checks.push(Check::truth(
        "poles are rejected",
        sys.dirac_bracket(&PhaseFunction::phi(), &PhaseFunction::eta(), &pole).is_err(),
    ));
    if let Some(e) = failure {
        checks.push(Check::truth(e.to_string(), false));
    }
    checks
}

pub fn precession() -> Criterion {
    timed(8, "closed-form precession", 1.0, precession_checks)
}

/// Equation-of-motion residuals use central differences with step `1e-3`,
/// so "machine precision" here means rounding of `φ` amplified by `1/2h`.
pub fn precession_checks() -> Vec<Check> {
    let (mut eom, mut per, mut conserved, mut compose) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut frozen = true;
    for &theta in &[0.3, 1.2, 2.5] {
        for &phi in &[0.0, 1.0, 4.0] {
            for &(mu, b) in &[(0.5, 1.0), (1.0, 1.0), (0.9, 3.0)] {
                let s0 = OrbitState::on_shell(theta, phi, 1.7);
                let h0 = coadjoint::total_hamiltonian(&s0, mu, b);
                let period = coadjoint::period(mu, b);
                for k in 0..=16 {
                    let t = 2.0 * period * k as f64 / 16.0;
                    let r = coadjoint::equation_of_motion_residuals(&s0, mu, b, t, 1e-3);
                    eom = eom.max(r[0]).max(r[1]);
                    let s = coadjoint::classical_trajectory(&s0, mu, b, t);
                    conserved = conserved
                        .max((s.eta() - s0.eta()).abs())
                        .max((coadjoint::total_hamiltonian(&s, mu, b) - h0).abs());
                    let (t1, t2) = (0.37 * t, 0.63 * t);
                    let two =
                        coadjoint::classical_trajectory(&coadjoint::classical_trajectory(&s0, mu, b, t1), mu, b, t2);
                    let one = coadjoint::classical_trajectory(&s0, mu, b, t1 + t2);
                    compose = compose.max(angle_distance(two.phi, one.phi)).max((two.theta - one.theta).abs());
                }
                let s = coadjoint::classical_trajectory(&s0, mu, b, period);
                per = per.max(angle_distance(s.phi, s0.phi)).max((s.theta - s0.theta).abs());
                frozen &= coadjoint::classical_trajectory(&s0, mu, 0.0, 12.5) == s0;
            }
        }
    }
    vec![
        Check::small("equations of motion along the closed form", eom, 1e-10),
        Check::small("flow over T = 2pi/(mu B) is the identity mod 2pi", per, 1e-12),
        Check::with_residual("eta and H conserved exactly", 0.0, conserved, conserved, 0.0),
        Check::small("flow(t1) then flow(t2) = flow(t1 + t2)", compose, 1e-12),
        Check::truth("B = 0 freezes the state", frozen),
    ]
}

pub fn cpi_transport() -> Criterion {
    timed(9, "CPI evolution follows the classical flow", 5.0, || {
        cpi_checks(0.8, 1.3, 1.9).unwrap_or_else(|e| vec![Check::truth(e.to_string(), false)])
    })
}

/// Operator evolution on the orbit (`μB = mu_b`) and in the Grassmann case
/// (`ω = w`), compared with closed-form classical solutions.
pub fn cpi_checks(mu_b: f64, w: f64, t: f64) -> Result<Vec<Check>, cpi::CpiError> {
    let i = Complex64::new(0.0, 1.0);
    let mut checks = Vec::new();

    let orbit = CpiSpec::precession(mu_b);
    let op = build_cpi_hamiltonian(&orbit)?;
    let table = op.table().clone();
    let mut mode_err = 0.0f64;
    for k in -5i64..=5 {
        let psi = EnlargedWavefunction::fourier([(k, Multivector::one(&table))]);
        let out = op.evolve(&psi, t)?;
        let expected = (i * (k as f64) * mu_b * t).exp();
        mode_err = mode_err.max((out.mode(k).expect("mode kept").scalar_part() - expected).norm());
    }
    checks.push(Check::small("e^{ik phi} -> e^{ik muB t} e^{ik phi}, |k| <= 5", mode_err, 1e-12));
    for c in cpi::characteristics_check(&orbit, &[0.0, 1.0, 2.5, 5.5], t)? {
        checks.push(Check::small(format!("orbit packet {}", c.name), c.residual, 1e-9));
    }
    let mut ghost_err = 0.0f64;
    for name in ["c_phi", "c_eta"] {
        let psi = EnlargedWavefunction::new(Multivector::generator(&table, name)?);
        ghost_err = ghost_err.max(op.evolve(&psi, t)?.max_abs_diff(&psi));
    }
    let c0 = [Complex64::new(1.0, 0.0), Complex64::new(-0.4, 0.0)];
    let jac = cpi::jacobi_fields(&orbit, c0, t)?;
    checks.push(Check::small("orbit ghosts are invariant under evolution", ghost_err, 0.0));
    checks.push(Check::truth("Jacobi fields on the orbit stay at c0", jac == c0));

    let spin = CpiSpec::spin(w);
    let op = build_cpi_hamiltonian(&spin)?;
    let table = op.table().clone();
    // ξ(t) = e^{iωt}ξ0 and ξ̄(t) = e^{−iωt}ξ̄0; ghosts obey the same linear
    // equations. The wavefunction ψ = x evolves to x(−t).
    let classical = [("xi", w), ("xibar", -w), ("c_xi", w), ("c_xibar", -w)];
    let mut phase_err = 0.0f64;
    let mut eig_err = 0.0f64;
    for (name, rate) in classical {
        let g = Multivector::generator(&table, name)?;
        let exps: Vec<u8> = g.terms().next().map(|(e, _)| e.to_vec()).expect("generator");
        let ev = op.monomial_eigenvalue(0, &exps)?.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        eig_err = eig_err.max((ev - rate).norm());
        let out = op.evolve(&EnlargedWavefunction::new(g), t)?;
        let coeff = out.mode(0).expect("mode 0").coefficient(&exps);
        phase_err = phase_err.max((coeff - (-i * rate * t).exp()).norm());
    }
    checks.push(Check::small("Grassmann monomial eigenvalues from the operator", eig_err, 1e-12));
    checks.push(Check::small("Grassmann monomial phases match xi_cl(-t)", phase_err, 1e-12));
    let constant = op.monomial_eigenvalue(0, &vec![0; table.len()])?;
    checks.push(Check::truth("constant wavefunction is annihilated", constant == Some(Complex64::new(0.0, 0.0))));
    for c in cpi::characteristics_check(&spin, &[], t)? {
        checks.push(Check::small(format!("Grassmann {}", c.name), c.residual, 1e-12));
    }
    let values = op.eigenphases(&[0])?;
    let kind = cpi::classify_spectrum(
        values.iter().filter_map(|m| m.eigenvalue.map(|[re, im]| Complex64::new(re, im))),
        1e-12,
    );
    checks.push(Check::exact("Grassmann spectrum kind", "Real", format!("{kind:?}")));
    Ok(checks)
}

/// Criteria 1-9; the tenth is running this whole battery through the binary.
pub fn run_all(config: &SuiteConfig) -> Vec<Criterion> {
    vec![
        dequantization_bosonic(),
        dequantization_grassmann(),
        dequantization_coadjoint(),
        liouvillian_map(),
        representation_isomorphism(config),
        propagator_convergence(config),
        dirac_brackets(config),
        precession(),
        cpi_transport(),
    ]
}

/// Flattens criteria into one report. Runtimes become checks against their
/// budgets.
pub fn to_report(config: &SuiteConfig, criteria: &[Criterion], timing: f64) -> RunReport {
    let mut report = RunReport::new("all")
        .parameter("seed", config.seed)
        .parameter("dirac_samples", config.dirac_samples)
        .parameter("random_fields", config.random_fields);
    for c in criteria {
        for check in &c.checks {
            let mut check = check.clone();
            check.name = format!("[{}] {}", c.id, check.name);
            report.checks.push(check);
        }
        report.checks.push(Check::within(format!("[{}] runtime (s)", c.id), c.elapsed_seconds, 0.0, c.budget_seconds));
    }
    report.timing = timing;
    report
}
