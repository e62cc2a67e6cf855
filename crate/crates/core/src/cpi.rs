//! Classical path integral operators.
//!
//! The CPI Hamiltonian `H̃ = λ_a f^a + i c̄_a ∂_b f^a c^b` generates the flow
//! `ẋ^a = f^a` on phase space together with its tangent (Jacobi) flow on the
//! ghosts. Quantized with `λ_a`, `c̄_a` as derivatives it acts on functions
//! `ψ(φ, c)` of the enlarged space, which are stored as [`Multivector`]s; the
//! periodic angle of the orbit case is handled by Fourier modes instead.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use nalgebra::DMatrix;
use num::traits::Zero;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::case::Case;
use crate::grassmann::{AlgebraError, GeneratorTable, Multivector, Parity};
use crate::linalg::expm;
use crate::scalar::{qc, Scalar};
use crate::symbolic::{GradedPolynomial, Monomial, Symbol};

/// Default truncation degree of even wavefunction arguments.
pub const DEFAULT_TRUNCATION: u8 = 4;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CpiError {
    #[error("symplectic matrix must be antisymmetric and nondegenerate")]
    InvalidOmega,
    #[error("no numeric value for parameter `{0}`")]
    UnboundParameter(String),
    #[error("operator raises the degree beyond the truncation {truncation}; only linear dynamics are supported")]
    DegreeOverflow { truncation: u8 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("equation of motion is not affine: {0}")]
    NonlinearDynamics(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpiSpec {
    pub case: Case,
    pub hamiltonian: GradedPolynomial,
    omega: Option<[[i64; 2]; 2]>,
    /// Numeric values of the constants appearing in the Hamiltonian.
    pub parameters: BTreeMap<String, f64>,
    pub truncation: u8,
}

pub const STANDARD_OMEGA: [[i64; 2]; 2] = [[0, 1], [-1, 0]];

impl CpiSpec {
    pub fn new(case: Case, hamiltonian: GradedPolynomial) -> Self {
        let omega = (case != Case::Grassmann).then_some(STANDARD_OMEGA);
        CpiSpec { case, hamiltonian, omega, parameters: BTreeMap::new(), truncation: DEFAULT_TRUNCATION }
    }

    /// Spin in a field along z, `H = −(ω/2)(1 − 2ξξ̄)`.
    pub fn spin(omega: f64) -> Self {
        Self::new(Case::Grassmann, Case::Grassmann.builtin_hamiltonian("spin").expect("builtin"))
            .with_parameter("w", omega)
    }

    /// Precession on the orbit, `H = −μBη`. Only the product μB matters, so it
    /// is stored as `mu` with `B = 1`.
    pub fn precession(mu_b: f64) -> Self {
        Self::new(Case::Coadjoint, Case::Coadjoint.builtin_hamiltonian("precession").expect("builtin"))
            .with_parameter("mu", mu_b)
            .with_parameter("B", 1.0)
    }

    pub fn with_parameter(mut self, name: &str, value: f64) -> Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    pub fn with_truncation(mut self, truncation: u8) -> Self {
        self.truncation = truncation.max(1);
        self
    }

    pub fn with_omega(mut self, omega: [[i64; 2]; 2]) -> Result<Self, CpiError> {
        let antisym = omega[0][0] == 0 && omega[1][1] == 0 && omega[0][1] == -omega[1][0] && omega[0][1] != 0;
        if !antisym || self.case == Case::Grassmann {
            return Err(CpiError::InvalidOmega);
        }
        self.omega = Some(omega);
        Ok(self)
    }

    pub fn omega(&self) -> Option<[[i64; 2]; 2]> {
        self.omega
    }

    /// Symbolic `H̃`.
    pub fn cpi_hamiltonian(&self) -> GradedPolynomial {
        cpi_hamiltonian_with(self.case, self.omega.as_ref(), &self.hamiltonian)
    }

    pub fn cpi_lagrangian(&self) -> GradedPolynomial {
        &kinetic(self.case) - &self.cpi_hamiltonian()
    }

    pub fn mu_b(&self) -> f64 {
        self.param("mu").unwrap_or(0.0) * self.param("B").unwrap_or(1.0)
    }

    fn param(&self, name: &str) -> Option<f64> {
        self.parameters.get(name).copied()
    }
}

/// Hamiltonian vector field. Even cases: `f^a = ω^{ab} ∂_b H`. Grassmann case:
/// `ξ̇ = −i ∂_ξ̄ H`, `ξ̄̇ = −i ∂_ξ H`, from `L = iξ̄ξ̇ − H`.
pub fn flow_vector(case: Case, omega: Option<&[[i64; 2]; 2]>, h: &GradedPolynomial) -> [GradedPolynomial; 2] {
    let d = |b: usize| h.left_derivative(&case.coord(b));
    match (case, omega) {
        (Case::Grassmann, _) => [d(1).scale(&qc(0, -1)), d(0).scale(&qc(0, -1))],
        (_, om) => {
            let om = om.unwrap_or(&STANDARD_OMEGA);
            let f = |a: usize| (0..2).fold(GradedPolynomial::zero(), |acc, b| &acc + &d(b).scale(&qc(om[a][b], 0)));
            [f(0), f(1)]
        }
    }
}

fn cpi_hamiltonian_with(case: Case, omega: Option<&[[i64; 2]; 2]>, h: &GradedPolynomial) -> GradedPolynomial {
    let f = flow_vector(case, omega, h);
    let mut out = GradedPolynomial::zero();
    for (a, fa) in f.iter().enumerate() {
        out = &out + &(&case.aux(a).poly() * fa);
        for b in 0..2 {
            let jac = fa.left_derivative(&case.coord(b));
            let term = &(&case.antighost(a).poly() * &jac) * &case.ghost(b).poly();
            out = &out + &term.scale(&qc(0, 1));
        }
    }
    out
}

/// `H̃` for the case's standard symplectic structure.
pub fn cpi_hamiltonian(case: Case, h: &GradedPolynomial) -> GradedPolynomial {
    cpi_hamiltonian_with(case, None, h)
}

fn kinetic(case: Case) -> GradedPolynomial {
    (0..2).fold(GradedPolynomial::zero(), |acc, a| {
        let lam = &case.aux(a).poly() * &case.coord(a).dotted().poly();
        let gh = (&case.antighost(a).poly() * &case.ghost(a).dotted().poly()).scale(&qc(0, 1));
        &(&acc + &lam) + &gh
    })
}

/// `L̃ = λ_a φ̇^a + i c̄_a ċ^a − H̃`.
pub fn cpi_lagrangian(case: Case, h: &GradedPolynomial) -> GradedPolynomial {
    &kinetic(case) - &cpi_hamiltonian(case, h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Action {
    Mul(usize),
    Deriv(usize),
    /// `∂_φ` on the current Fourier mode.
    FourierDeriv,
}

#[derive(Clone, Debug)]
struct OpTerm {
    coeff: Complex64,
    /// Applied last to first.
    actions: Vec<Action>,
}

/// Whether the eigenvalues found on the monomial basis are real, imaginary or
/// neither.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Zero,
    Real,
    Imaginary,
    Complex,
}

/// The quantized `Ĥ̃` acting on enlarged wavefunctions.
#[derive(Clone, Debug)]
pub struct CpiOperator {
    case: Case,
    table: Arc<GeneratorTable>,
    wide: Arc<GeneratorTable>,
    terms: Vec<OpTerm>,
}

/// Generator table of the wavefunction arguments `(φ, c)`. On the orbit the
/// angle is carried by Fourier modes and left out.
pub fn enlarged_table(case: Case, truncation: u8) -> Arc<GeneratorTable> {
    let mut b = GeneratorTable::builder();
    for a in 0..2 {
        if case == Case::Coadjoint && a == 0 {
            continue;
        }
        b = b.with(case.fields()[a].coord, case.coord_parity(), truncation);
    }
    for a in 0..2 {
        b = b.with(case.fields()[a].ghost, case.ghost_parity(), truncation);
    }
    b.build().expect("distinct names")
}

/// Realizes `Ĥ̃` for `spec`. Auxiliary fields and antighosts are moved to the
/// left of each term and become derivatives, so `λ_ξ ξ` reads "multiply by ξ,
/// then differentiate". Grassmann case: `λ̂ = i∂_φ`, `c̄̂ = −∂_c`; otherwise
/// `λ̂ = −i∂_φ`, `c̄̂ = ∂_c`.
pub fn build_cpi_hamiltonian(spec: &CpiSpec) -> Result<CpiOperator, CpiError> {
    let case = spec.case;
    let table = enlarged_table(case, spec.truncation);
    let (k_aux, k_anti) = match case {
        Case::Grassmann => (I, Complex64::new(-1.0, 0.0)),
        _ => (-I, Complex64::new(1.0, 0.0)),
    };
    let mut terms = Vec::new();
    let mut max_mul = 0;
    for (m, c) in spec.cpi_hamiltonian().terms() {
        let mut coeff = c.to_complex64();
        let mut momenta = Vec::new();
        let mut positions = Vec::new();
        let mut odd_positions_seen = 0usize;
        let mut sign_flips = 0usize;
        for (s, e) in m.factors() {
            if s.is_constant() {
                let v = spec.param(s.name()).ok_or_else(|| CpiError::UnboundParameter(s.name().to_string()))?;
                coeff *= v.powi(*e as i32);
                continue;
            }
            let role = classify(case, s);
            match role {
                Role::Aux(_) | Role::Anti(_) => {
                    if s.parity().is_odd() {
                        sign_flips += odd_positions_seen;
                    }
                    momenta.extend(std::iter::repeat_n(role, *e as usize));
                }
                Role::Coord(_) | Role::Ghost(_) => {
                    if case == Case::Coadjoint && role == Role::Coord(0) {
                        return Err(CpiError::Unsupported("Hamiltonians depending on the orbit angle".into()));
                    }
                    if s.parity().is_odd() {
                        odd_positions_seen += 1;
                    }
                    let g = table.index_of(s.name())?;
                    positions.extend(std::iter::repeat_n(Action::Mul(g), *e as usize));
                }
                Role::Other => return Err(CpiError::Unsupported(format!("symbol `{s}` in the CPI Hamiltonian"))),
            }
        }
        if sign_flips % 2 == 1 {
            coeff = -coeff;
        }
        let mut actions = Vec::new();
        for role in momenta {
            match role {
                Role::Aux(a) => {
                    coeff *= k_aux;
                    if case == Case::Coadjoint && a == 0 {
                        actions.push(Action::FourierDeriv);
                    } else {
                        actions.push(Action::Deriv(table.index_of(case.fields()[a].coord)?));
                    }
                }
                Role::Anti(a) => {
                    coeff *= k_anti;
                    actions.push(Action::Deriv(table.index_of(case.fields()[a].ghost)?));
                }
                _ => unreachable!("only momenta are collected"),
            }
        }
        max_mul = max_mul.max(positions.len());
        actions.extend(positions);
        terms.push(OpTerm { coeff, actions });
    }
    let wide = Arc::new(table.widened(max_mul as u8));
    Ok(CpiOperator { case, table, wide, terms })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    Coord(usize),
    Aux(usize),
    Ghost(usize),
    Anti(usize),
    Other,
}

fn classify(case: Case, s: &Symbol) -> Role {
    if s.dot_order() > 0 {
        return Role::Other;
    }
    for (a, f) in case.fields().iter().enumerate() {
        let n = s.name();
        if n == f.coord {
            return Role::Coord(a);
        } else if n == f.aux {
            return Role::Aux(a);
        } else if n == f.ghost {
            return Role::Ghost(a);
        } else if n == f.antighost {
            return Role::Anti(a);
        }
    }
    Role::Other
}

impl CpiOperator {
    pub fn case(&self) -> Case {
        self.case
    }

    pub fn table(&self) -> &Arc<GeneratorTable> {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Ĥ̃ψ` on Fourier mode `k` (ignored off the orbit).
    pub fn apply(&self, k: i64, psi: &Multivector<Complex64>) -> Result<Multivector<Complex64>, CpiError> {
        if psi.table() != &self.table && **psi.table() != *self.table {
            return Err(AlgebraError::TableMismatch.into());
        }
        let lifted = psi.project(&self.wide);
        let mut out = Multivector::zero(&self.wide);
        for term in &self.terms {
            let mut cur = lifted.clone();
            for action in term.actions.iter().rev() {
                cur = match *action {
                    Action::Mul(g) => {
                        let gen = Multivector::generator(&self.wide, &self.wide.generator(g).name)?;
                        gen.product(&cur)?
                    }
                    Action::Deriv(g) => cur.left_derivative(&self.wide.generator(g).name)?,
                    Action::FourierDeriv => cur.scale(&Complex64::new(0.0, k as f64)),
                };
                if cur.is_zero() {
                    break;
                }
            }
            out = out.try_add(&cur.scale(&term.coeff))?;
        }
        if out.terms().any(|(e, _)| !self.table.admits(e)) {
            return Err(CpiError::DegreeOverflow {
                truncation: self.table.entries().iter().map(|g| g.truncation).max().unwrap_or(1),
            });
        }
        Ok(out.project(&self.table))
    }

    /// Eigenvalue of `Ĥ̃` on a basis monomial, if the monomial is an eigenvector.
    pub fn monomial_eigenvalue(&self, k: i64, exps: &[u8]) -> Result<Option<Complex64>, CpiError> {
        let m = Multivector::monomial(&self.table, exps.to_vec(), Complex64::new(1.0, 0.0))?;
        let image = self.apply(k, &m)?;
        let e = image.coefficient(exps);
        let rest = &image - &m.scale(&e);
        Ok((rest.max_abs() == 0.0).then_some(e))
    }

    /// Matrix of `Ĥ̃` on the smallest set of monomials that contains `seed` and
    /// is closed under the operator.
    fn closure(
        &self,
        k: i64,
        seed: impl IntoIterator<Item = Vec<u8>>,
    ) -> Result<(Vec<Vec<u8>>, DMatrix<Complex64>), CpiError> {
        let mut basis: Vec<Vec<u8>> = Vec::new();
        let mut seen: BTreeSet<Vec<u8>> = BTreeSet::new();
        let mut images: Vec<Multivector<Complex64>> = Vec::new();
        let mut queue: Vec<Vec<u8>> = seed.into_iter().collect();
        while let Some(e) = queue.pop() {
            if !seen.insert(e.clone()) {
                continue;
            }
            let m = Multivector::monomial(&self.table, e.clone(), Complex64::new(1.0, 0.0))?;
            let image = self.apply(k, &m)?;
            queue.extend(image.terms().map(|(x, _)| x.to_vec()).filter(|x| !seen.contains(x)));
            basis.push(e);
            images.push(image);
        }
        let index: BTreeMap<&[u8], usize> = basis.iter().enumerate().map(|(i, e)| (e.as_slice(), i)).collect();
        let n = basis.len();
        let mut mat = DMatrix::zeros(n, n);
        for (j, image) in images.iter().enumerate() {
            for (e, c) in image.terms() {
                mat[(index[e], j)] = *c;
            }
        }
        Ok((basis, mat))
    }

    /// `exp(−iĤ̃t)ψ`. Pure phases on diagonal blocks, a matrix exponential on
    /// the closed monomial block otherwise.
    pub fn evolve(&self, psi: &EnlargedWavefunction, t: f64) -> Result<EnlargedWavefunction, CpiError> {
        let mut modes = BTreeMap::new();
        for (&k, v) in &psi.modes {
            let (basis, mat) = self.closure(k, v.terms().map(|(e, _)| e.to_vec()))?;
            let n = basis.len();
            let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || mat[(i, j)] == Complex64::zero()));
            let x = DMatrix::from_iterator(n, 1, basis.iter().map(|e| v.coefficient(e)));
            let y = if diagonal {
                DMatrix::from_iterator(n, 1, (0..n).map(|i| (-I * mat[(i, i)] * t).exp() * x[(i, 0)]))
            } else {
                expm(&(mat * (-I * t))) * x
            };
            let mut out = Multivector::zero(&self.table);
            for (e, c) in basis.iter().zip(y.iter()) {
                out = out.try_add(&Multivector::monomial(&self.table, e.clone(), *c)?)?;
            }
            modes.insert(k, out);
        }
        Ok(EnlargedWavefunction { modes })
    }

    /// Eigenvalues on every basis monomial of the truncated table for the given
    /// Fourier modes; `None` entries are monomials that mix under `Ĥ̃`.
    pub fn eigenphases(&self, modes: &[i64]) -> Result<Vec<MonomialPhase>, CpiError> {
        let mut out = Vec::new();
        for &k in modes {
            for e in self.table.all_exponents() {
                let value = match self.monomial_eigenvalue(k, &e) {
                    Ok(v) => v,
                    Err(CpiError::DegreeOverflow { .. }) => None,
                    Err(err) => return Err(err),
                };
                out.push(MonomialPhase {
                    mode: k,
                    monomial: self.table.monomial_name(&e),
                    eigenvalue: value.map(|z| [z.re, z.im]),
                });
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialPhase {
    /// Fourier index on the orbit, 0 elsewhere.
    pub mode: i64,
    pub monomial: String,
    /// `[re, im]`.
    pub eigenvalue: Option<[f64; 2]>,
}

pub fn classify_spectrum(values: impl IntoIterator<Item = Complex64>, tol: f64) -> SpectrumKind {
    let (mut re, mut im) = (false, false);
    for z in values {
        re |= z.re.abs() > tol;
        im |= z.im.abs() > tol;
    }
    match (re, im) {
        (false, false) => SpectrumKind::Zero,
        (true, false) => SpectrumKind::Real,
        (false, true) => SpectrumKind::Imaginary,
        (true, true) => SpectrumKind::Complex,
    }
}

/// `ψ(φ, c)` as a map from Fourier index to a multivector over the enlarged
/// table. Off the orbit only mode 0 is used.
#[derive(Clone, Debug, PartialEq)]
pub struct EnlargedWavefunction {
    modes: BTreeMap<i64, Multivector<Complex64>>,
}

impl EnlargedWavefunction {
    pub fn new(psi: Multivector<Complex64>) -> Self {
        EnlargedWavefunction { modes: BTreeMap::from([(0, psi)]) }
    }

    pub fn fourier(modes: impl IntoIterator<Item = (i64, Multivector<Complex64>)>) -> Self {
        EnlargedWavefunction { modes: modes.into_iter().collect() }
    }

    pub fn modes(&self) -> &BTreeMap<i64, Multivector<Complex64>> {
        &self.modes
    }

    pub fn mode(&self, k: i64) -> Option<&Multivector<Complex64>> {
        self.modes.get(&k)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let keys: BTreeSet<i64> = self.modes.keys().chain(other.modes.keys()).copied().collect();
        keys.into_iter()
            .map(|k| match (self.modes.get(&k), other.modes.get(&k)) {
                (Some(a), Some(b)) => (a - b).max_abs(),
                (Some(a), None) | (None, Some(a)) => a.max_abs(),
                (None, None) => 0.0,
            })
            .fold(0.0, f64::max)
    }
}

/// `ẋ = A x + b` on `(φ^1, φ^2, c^1, c^2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFlow {
    pub matrix: DMatrix<Complex64>,
    pub offset: Vec<Complex64>,
}

impl AffineFlow {
    /// `(M, v)` with `Φ_t(x) = M x + v`.
    pub fn map(&self, t: f64) -> (DMatrix<Complex64>, Vec<Complex64>) {
        let n = self.offset.len();
        let mut aug = DMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self.matrix[(i, j)] * t;
            }
            aug[(i, n)] = self.offset[i] * t;
        }
        let e = expm(&aug);
        let m = e.view((0, 0), (n, n)).into_owned();
        let v = (0..n).map(|i| e[(i, n)]).collect();
        (m, v)
    }
}

/// Reads the classical equations of motion off `L̃`: varying `λ_a` gives
/// `φ̇^a = f^a`, varying `c̄_a` gives the Jacobi equation for `c^a`.
pub fn equations_of_motion(spec: &CpiSpec) -> Result<AffineFlow, CpiError> {
    let case = spec.case;
    let l = spec.cpi_lagrangian();
    let vars: Vec<Symbol> = (0..2).map(|a| case.coord(a)).chain((0..2).map(|a| case.ghost(a))).collect();
    let mut matrix = DMatrix::zeros(4, 4);
    let mut offset = vec![Complex64::zero(); 4];
    for (row, var) in vars.iter().enumerate() {
        let a = row % 2;
        let conj = if row < 2 { case.aux(a) } else { case.antighost(a) };
        let eq = l.left_derivative(&conj).evaluate_partial(&spec.parameters);
        let dot = var.dotted();
        let lead = eq
            .iter()
            .find(|(m, _)| m.factors() == [(dot.clone(), 1)])
            .map(|(_, c)| *c)
            .ok_or_else(|| CpiError::NonlinearDynamics(format!("no {dot} in the variation")))?;
        for (m, c) in &eq {
            let c = -*c / lead;
            match m.factors() {
                [] => offset[row] += c,
                [(s, 1)] if *s == dot => {}
                [(s, 1)] => match vars.iter().position(|v| v == s) {
                    Some(col) => matrix[(row, col)] += c,
                    None => return Err(unbound_or_nonlinear(m)),
                },
                _ => return Err(unbound_or_nonlinear(m)),
            }
        }
    }
    Ok(AffineFlow { matrix, offset })
}

fn unbound_or_nonlinear(m: &Monomial) -> CpiError {
    match m.factors().iter().find(|(s, _)| s.is_constant()) {
        Some((s, _)) => CpiError::UnboundParameter(s.name().to_string()),
        None => CpiError::NonlinearDynamics(m.to_string()),
    }
}

/// Ghosts at time `t` from the Jacobi equation extracted from `L̃`.
pub fn jacobi_fields(spec: &CpiSpec, c0: [Complex64; 2], t: f64) -> Result<[Complex64; 2], CpiError> {
    let flow = equations_of_motion(spec)?;
    let (m, _) = flow.map(t);
    let mut out = [Complex64::zero(); 2];
    for (i, o) in out.iter_mut().enumerate() {
        *o = m[(2 + i, 2)] * c0[0] + m[(2 + i, 3)] * c0[1];
    }
    Ok(out)
}

/// `ψ0 ∘ Φ_{−t}` for a wavefunction on the enlarged table, computed from the
/// closed-form flow rather than from `Ĥ̃`.
pub fn transport(spec: &CpiSpec, psi: &EnlargedWavefunction, t: f64) -> Result<EnlargedWavefunction, CpiError> {
    let case = spec.case;
    let flow = equations_of_motion(spec)?;
    let (m, v) = flow.map(-t);
    let table = enlarged_table(case, spec.truncation);
    let vars: Vec<Option<usize>> = (0..2)
        .map(|a| table.index_of(case.fields()[a].coord).ok())
        .chain((0..2).map(|a| table.index_of(case.fields()[a].ghost).ok()))
        .collect();
    let mut images = vec![Multivector::zero(&table); table.len()];
    for (row, slot) in vars.iter().enumerate() {
        let Some(g) = *slot else { continue };
        let mut img = Multivector::scalar(&table, v[row]);
        for (col, src) in vars.iter().enumerate() {
            let c = m[(row, col)];
            if c == Complex64::zero() {
                continue;
            }
            let Some(h) = *src else {
                return Err(CpiError::Unsupported("flow couples to the orbit angle".into()));
            };
            let gen = Multivector::generator(&table, &table.generator(h).name)?;
            img = img.try_add(&gen.scale(&c))?;
        }
        if table.generator(g).parity == Parity::Odd && img.scalar_part() != Complex64::zero() {
            return Err(CpiError::Unsupported("odd variable with a constant drift".into()));
        }
        images[g] = img;
    }
    let mut modes = BTreeMap::new();
    for (&k, mv) in psi.modes() {
        let mut out = mv.substitute_generators(&images)?.project(&table);
        if case == Case::Coadjoint {
            // Φ_{−t} shifts the angle by v[0], which multiplies e^{ikφ} by e^{ik v[0]}.
            out = out.scale(&(I * k as f64 * v[0]).exp());
        }
        modes.insert(k, out);
    }
    Ok(EnlargedWavefunction { modes })
}

/// One comparison between operator evolution and the classical flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub residual: f64,
}

/// Width of the wrapped Gaussian packets used on the orbit.
pub const PACKET_WIDTH: f64 = 0.3;
const PACKET_MODES: i64 = 30;

/// Fourier coefficients `e^{−k²σ²/2} e^{−ikφ0}` of a wrapped Gaussian centred at
/// `φ0`, times `1 + η/2` so that the η marginal is not trivial.
pub fn orbit_packet(table: &Arc<GeneratorTable>, phi0: f64, width: f64) -> Result<EnlargedWavefunction, CpiError> {
    let eta = Multivector::generator(table, "eta")?;
    let profile = &Multivector::one(table) + &eta.scale(&Complex64::new(0.5, 0.0));
    Ok(EnlargedWavefunction::fourier((-PACKET_MODES..=PACKET_MODES).map(|k| {
        let a = (-0.5 * (k as f64 * width).powi(2)).exp() * (-I * k as f64 * phi0).exp();
        (k, profile.scale(&a))
    })))
}

/// `arg ∫|ψ|² e^{iφ} dφ` for the `η⁰` component, i.e. the circular mean of the
/// packet.
pub fn packet_center(psi: &EnlargedWavefunction) -> f64 {
    let mut z = Complex64::zero();
    for (&k, mv) in psi.modes() {
        if let Some(next) = psi.mode(k + 1) {
            z += mv.scalar_part() * next.scalar_part().conj();
        }
    }
    z.arg()
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Checks that `exp(−iĤ̃t)` moves wavefunctions along the classical flow.
///
/// On the orbit, packets centred at each of `centers` must move to
/// `φ0 − μBt`, keep their η marginal, and return after one period. Elsewhere
/// every basis monomial of degree ≤ 2 is evolved and compared with the
/// pullback along the closed-form flow, and the phase of each generator is
/// compared with the classical solution.
pub fn characteristics_check(spec: &CpiSpec, centers: &[f64], t: f64) -> Result<Vec<CharacteristicCheck>, CpiError> {
    let op = build_cpi_hamiltonian(spec)?;
    let table = op.table().clone();
    let mut out = Vec::new();
    if spec.case == Case::Coadjoint {
        let mu_b = spec.mu_b();
        for &phi0 in centers {
            let psi = orbit_packet(&table, phi0, PACKET_WIDTH)?;
            let moved = op.evolve(&psi, t)?;
            let expected = (phi0 - mu_b * t).rem_euclid(std::f64::consts::TAU);
            let actual = packet_center(&moved).rem_euclid(std::f64::consts::TAU);
            out.push(CharacteristicCheck {
                name: format!("center[phi0={phi0}]"),
                expected,
                actual,
                residual: angle_gap(expected, actual),
            });
            let mut marginal = 0.0f64;
            for (k, mv) in psi.modes() {
                let after = moved.mode(*k).expect("evolution keeps every mode");
                for e in table.all_exponents() {
                    marginal = marginal.max((mv.coefficient(&e).norm() - after.coefficient(&e).norm()).abs());
                }
            }
            out.push(CharacteristicCheck {
                name: format!("eta_marginal[phi0={phi0}]"),
                expected: 0.0,
                actual: marginal,
                residual: marginal,
            });
            let period = std::f64::consts::TAU / mu_b;
            let back = op.evolve(&psi, period)?.max_abs_diff(&psi);
            out.push(CharacteristicCheck {
                name: format!("period[phi0={phi0}]"),
                expected: 0.0,
                actual: back,
                residual: back,
            });
        }
        return Ok(out);
    }
    for e in table.all_exponents() {
        if e.iter().map(|&x| x as u32).sum::<u32>() > 2 {
            continue;
        }
        let psi = EnlargedWavefunction::new(Multivector::monomial(&table, e.clone(), Complex64::new(1.0, 0.0))?);
        let evolved = op.evolve(&psi, t)?;
        let pulled = transport(spec, &psi, t)?;
        let d = evolved.max_abs_diff(&pulled);
        out.push(CharacteristicCheck {
            name: format!("transport[{}]", table.monomial_name(&e)),
            expected: 0.0,
            actual: d,
            residual: d,
        });
    }
    if spec.case == Case::Grassmann {
        // ψ = x is carried to x∘Φ_{−t}; its coefficient is the classical
        // solution run backwards.
        let flow = equations_of_motion(spec)?;
        let (m, _) = flow.map(-t);
        let vars = [
            case_name(spec.case, 0, false),
            case_name(spec.case, 1, false),
            case_name(spec.case, 0, true),
            case_name(spec.case, 1, true),
        ];
        for (row, name) in vars.iter().enumerate() {
            let psi = EnlargedWavefunction::new(Multivector::generator(&table, name)?);
            let evolved = op.evolve(&psi, t)?;
            let expected = m[(row, row)].arg();
            let actual = evolved.mode(0).expect("mode 0").coefficient_of(&[name])?.arg();
            out.push(CharacteristicCheck {
                name: format!("phase[{name}]"),
                expected,
                actual,
                residual: angle_gap(expected, actual),
            });
        }
    }
    Ok(out)
}

fn case_name(case: Case, a: usize, ghost: bool) -> &'static str {
    let f = case.fields()[a];
    if ghost {
        f.ghost
    } else {
        f.coord
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse;

    fn p(case: Case, s: &str) -> GradedPolynomial {
        parse(s, &case.declarations()).unwrap()
    }

    #[test]
    fn orbit_liouvillian() {
        let c = Case::Coadjoint;
        assert_eq!(cpi_hamiltonian(c, &p(c, "-mu*B*eta")), p(c, "-mu*B*Lambda_phi"));
    }

    #[test]
    fn grassmann_cpi_hamiltonian() {
        let c = Case::Grassmann;
        let h = Case::Grassmann.builtin_hamiltonian("spin").unwrap();
        let expected = p(c, "i*w*(lambda_xi*xi - lambda_xibar*xibar + i*cbar_xi*c_xi - i*cbar_xibar*c_xibar)");
        assert_eq!(cpi_hamiltonian(c, &h), expected);
    }

    #[test]
    fn bosonic_cpi_hamiltonian_of_oscillator() {
        let c = Case::Bosonic;
        let h = p(c, "p^2/2 + q^2/2");
        let expected = p(c, "lambda_q*p - lambda_p*q + i*cbar_q*c_p - i*cbar_p*c_q");
        assert_eq!(cpi_hamiltonian(c, &h), expected);
    }

    #[test]
    fn zero_hamiltonian_gives_zero_operator() {
        let spec = CpiSpec::new(Case::Bosonic, GradedPolynomial::zero());
        assert!(build_cpi_hamiltonian(&spec).unwrap().is_zero());
    }

    #[test]
    fn grassmann_operator_on_monomials() {
        let w = 0.8;
        let op = build_cpi_hamiltonian(&CpiSpec::spin(w)).unwrap();
        let t = op.table().clone();
        let idx = |names: &[&str]| {
            let mut e = vec![0u8; t.len()];
            for n in names {
                e[t.index_of(n).unwrap()] += 1;
            }
            e
        };
        let ev = |names: &[&str]| op.monomial_eigenvalue(0, &idx(names)).unwrap().unwrap();
        assert!((ev(&[]) - 0.0).norm() < 1e-15);
        assert!((ev(&["xi"]) - w).norm() < 1e-15);
        assert!((ev(&["xibar"]) + w).norm() < 1e-15);
        assert!((ev(&["c_xi"]) - w).norm() < 1e-15);
        assert!((ev(&["xi", "xibar", "c_xi", "c_xi"]) - 2.0 * w).norm() < 1e-15);
    }

    #[test]
    fn unbound_parameters_are_reported() {
        let spec = CpiSpec::new(Case::Grassmann, Case::Grassmann.builtin_hamiltonian("spin").unwrap());
        assert_eq!(build_cpi_hamiltonian(&spec).unwrap_err(), CpiError::UnboundParameter("w".into()));
    }

    #[test]
    fn nonlinear_dynamics_overflow() {
        let c = Case::Bosonic;
        let spec = CpiSpec::new(c, p(c, "p^2/2 + q^4/4"));
        let op = build_cpi_hamiltonian(&spec).unwrap();
        let q = Multivector::generator(op.table(), "q").unwrap();
        let err = op.evolve(&EnlargedWavefunction::new(q), 0.1).unwrap_err();
        assert!(matches!(err, CpiError::DegreeOverflow { .. }));
        assert!(matches!(equations_of_motion(&spec), Err(CpiError::NonlinearDynamics(_))));
    }

    #[test]
    fn oscillator_transport() {
        let c = Case::Bosonic;
        let spec = CpiSpec::new(c, p(c, "p^2/2 + q^2/2"));
        let op = build_cpi_hamiltonian(&spec).unwrap();
        let table = op.table().clone();
        let q = Multivector::generator(&table, "q").unwrap();
        let t = 0.9;
        let out = op.evolve(&EnlargedWavefunction::new(q), t).unwrap();
        let psi = out.mode(0).unwrap();
        assert!((psi.coefficient_of(&["q"]).unwrap().re - t.cos()).abs() < 1e-12);
        assert!((psi.coefficient_of(&["p"]).unwrap().re + t.sin()).abs() < 1e-12);
    }

    #[test]
    fn grassmann_jacobi_fields() {
        let w = 1.3;
        let t = 0.4;
        let c = jacobi_fields(&CpiSpec::spin(w), [Complex64::new(1.0, 0.0); 2], t).unwrap();
        assert!((c[0] - (I * w * t).exp()).norm() < 1e-13);
        assert!((c[1] - (-I * w * t).exp()).norm() < 1e-13);
    }

    #[test]
    fn operator_evolution_matches_transport() {
        let c = Case::Bosonic;
        let specs = [
            CpiSpec::new(c, p(c, "p^2/2 + q^2/2")),
            CpiSpec::new(c, p(c, "alpha*q*p")).with_parameter("alpha", 0.6),
            CpiSpec::spin(1.1).with_truncation(3),
        ];
        for spec in specs {
            let op = build_cpi_hamiltonian(&spec).unwrap();
            let table = op.table().clone();
            for e in table.all_exponents().into_iter().filter(|e| e.iter().map(|&x| x as u32).sum::<u32>() <= 3) {
                let psi =
                    EnlargedWavefunction::new(Multivector::monomial(&table, e, Complex64::new(1.0, 0.0)).unwrap());
                let a = op.evolve(&psi, 0.7).unwrap();
                let b = transport(&spec, &psi, 0.7).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-12, "{:?} vs {:?}", a, b);
            }
        }
    }

    #[test]
    fn orbit_modes_shift_the_angle() {
        let mu_b = 0.9;
        let spec = CpiSpec::precession(mu_b);
        let op = build_cpi_hamiltonian(&spec).unwrap();
        let table = op.table().clone();
        let psi = EnlargedWavefunction::fourier(
            (-3..=3).map(|k| (k, Multivector::scalar(&table, Complex64::new(1.0 / (1.0 + (k * k) as f64), 0.0)))),
        );
        let t = 1.7;
        let a = op.evolve(&psi, t).unwrap();
        let b = transport(&spec, &psi, t).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
        let phase = a.mode(2).unwrap().scalar_part() / psi.mode(2).unwrap().scalar_part();
        assert!((phase - (I * 2.0 * mu_b * t).exp()).norm() < 1e-13);
    }

    #[test]
    fn evolution_composes() {
        let spec = CpiSpec::spin(0.5);
        let op = build_cpi_hamiltonian(&spec).unwrap();
        let table = op.table().clone();
        let psi = EnlargedWavefunction::new(
            &(&Multivector::generator(&table, "xi").unwrap() + &Multivector::generator(&table, "c_xibar").unwrap())
                + &Multivector::one(&table),
        );
        let once = op.evolve(&psi, 0.8).unwrap();
        let twice = op.evolve(&op.evolve(&psi, 0.3).unwrap(), 0.5).unwrap();
        assert!(once.max_abs_diff(&twice) < 1e-14);
    }

    #[test]
    fn characteristics_follow_the_flow() {
        for (spec, centers) in [
            (CpiSpec::precession(0.8), vec![0.0, 2.5, -1.0]),
            (CpiSpec::spin(1.3), vec![]),
            (CpiSpec::new(Case::Bosonic, p(Case::Bosonic, "p^2/2 + q^2/2")), vec![]),
        ] {
            let checks = characteristics_check(&spec, &centers, 1.9).unwrap();
            assert!(!checks.is_empty());
            for c in checks {
                assert!(c.residual < 1e-9, "{c:?}");
            }
        }
    }

    #[test]
    fn packet_center_is_the_mean() {
        let table = enlarged_table(Case::Coadjoint, 2);
        let psi = orbit_packet(&table, 1.2, PACKET_WIDTH).unwrap();
        assert!((packet_center(&psi) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn orbit_ghosts_are_constant() {
        let c = jacobi_fields(&CpiSpec::precession(2.0), [Complex64::new(1.0, 0.0); 2], 5.0).unwrap();
        assert_eq!(c, [Complex64::new(1.0, 0.0); 2]);
    }
}
