//! The S² coadjoint orbit of SO(3): Darboux chart, constraint analysis and
//! precession.
//!
//! Phase-space points are `(θ, φ, p_θ, p_φ)`. The first-order Lagrangian
//! `(γ + λcosθ)φ̇ + λμB cosθ` gives the second-class constraints
//! `Φ1 = p_θ`, `Φ2 = p_φ − λcosθ`; Dirac brackets then make `(φ, η = λcosθ)`
//! a canonical pair.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default guard on `|sinθ|` for bracket evaluation.
pub const POLE_GUARD: f64 = 1e-6;
/// Base step for finite-difference gradients.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrbitError {
    #[error("|sin θ| = {sin_theta:e} is inside the pole guard {guard:e}; the Darboux chart degenerates there")]
    SingularConfiguration { sin_theta: f64, guard: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitState {
    pub theta: f64,
    /// Unwrapped; see [`OrbitState::wrapped_phi`].
    pub phi: f64,
    pub lambda_radius: f64,
    pub p_theta: f64,
    pub p_phi: f64,
}

impl OrbitState {
    /// A point on the constraint surface `p_θ = 0`, `p_φ = λcosθ`.
    pub fn on_shell(theta: f64, phi: f64, lambda_radius: f64) -> Self {
        OrbitState { theta, phi, lambda_radius, p_theta: 0.0, p_phi: lambda_radius * theta.cos() }
    }

    pub fn eta(&self) -> f64 {
        self.lambda_radius * self.theta.cos()
    }

    pub fn embedding(&self) -> [f64; 3] {
        let l = self.lambda_radius;
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [l * st * cp, l * st * sp, l * ct]
    }

    pub fn wrapped_phi(&self) -> f64 {
        wrap_angle(self.phi)
    }

    fn coords(&self) -> [f64; 4] {
        [self.theta, self.phi, self.p_theta, self.p_phi]
    }

    fn with_coords(&self, z: [f64; 4]) -> Self {
        OrbitState { theta: z[0], phi: z[1], p_theta: z[2], p_phi: z[3], ..*self }
    }
}

/// Angle in `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y >= 2.0 * PI {
        0.0
    } else {
        y
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(2.0 * PI - d)
}

type ValueFn = dyn Fn(&OrbitState) -> f64 + Send + Sync;
type GradFn = dyn Fn(&OrbitState) -> [f64; 4] + Send + Sync;

/// A function on `(θ, φ, p_θ, p_φ)`, with an optional analytic gradient.
#[derive(Clone)]
pub struct PhaseFunction {
    pub name: String,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradFn>>,
}

impl std::fmt::Debug for PhaseFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PhaseFunction({})", self.name)
    }
}

impl PhaseFunction {
    pub fn new(
        name: &str,
        value: impl Fn(&OrbitState) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&OrbitState) -> [f64; 4] + Send + Sync + 'static,
    ) -> Self {
        PhaseFunction { name: name.to_string(), value: Arc::new(value), gradient: Some(Arc::new(gradient)) }
    }

    /// Gradient by Richardson-extrapolated central differences.
    pub fn numeric(name: &str, value: impl Fn(&OrbitState) -> f64 + Send + Sync + 'static) -> Self {
        PhaseFunction { name: name.to_string(), value: Arc::new(value), gradient: None }
    }

    /// Same value, analytic gradient dropped.
    pub fn without_gradient(&self) -> Self {
        PhaseFunction { gradient: None, ..self.clone() }
    }

    pub fn value(&self, at: &OrbitState) -> f64 {
        (self.value)(at)
    }

    pub fn gradient(&self, at: &OrbitState) -> [f64; 4] {
        match &self.gradient {
            Some(g) => g(at),
            None => richardson_gradient(&*self.value, at, FD_STEP),
        }
    }

    pub fn theta() -> Self {
        Self::new("theta", |s| s.theta, |_| [1.0, 0.0, 0.0, 0.0])
    }

    pub fn phi() -> Self {
        Self::new("phi", |s| s.phi, |_| [0.0, 1.0, 0.0, 0.0])
    }

    pub fn p_theta() -> Self {
        Self::new("p_theta", |s| s.p_theta, |_| [0.0, 0.0, 1.0, 0.0])
    }

    pub fn p_phi() -> Self {
        Self::new("p_phi", |s| s.p_phi, |_| [0.0, 0.0, 0.0, 1.0])
    }

    /// `η = λcosθ`.
    pub fn eta() -> Self {
        Self::new("eta", OrbitState::eta, |s| [-s.lambda_radius * s.theta.sin(), 0.0, 0.0, 0.0])
    }

    /// Embedding coordinate `x^k`, `k ∈ {1, 2, 3}`.
    pub fn x(k: usize) -> Self {
        assert!((1..=3).contains(&k), "embedding index must be 1, 2 or 3");
        Self::new(
            &format!("x{k}"),
            move |s| s.embedding()[k - 1],
            move |s| {
                let l = s.lambda_radius;
                let (st, ct) = s.theta.sin_cos();
                let (sp, cp) = s.phi.sin_cos();
                match k {
                    1 => [l * ct * cp, -l * st * sp, 0.0, 0.0],
                    2 => [l * ct * sp, l * st * cp, 0.0, 0.0],
                    _ => [-l * st, 0.0, 0.0, 0.0],
                }
            },
        )
    }

    /// `Φ1 = p_θ`, `Φ2 = p_φ − λcosθ`.
    pub fn constraint(a: usize) -> Self {
        match a {
            1 => Self::new("Phi1", |s| s.p_theta, |_| [0.0, 0.0, 1.0, 0.0]),
            2 => Self::new("Phi2", |s| s.p_phi - s.eta(), |s| [s.lambda_radius * s.theta.sin(), 0.0, 0.0, 1.0]),
            _ => panic!("constraint index must be 1 or 2"),
        }
    }

    /// `H = −λμB cosθ`.
    pub fn hamiltonian(mu_b: f64) -> Self {
        Self::new("H", move |s| -mu_b * s.eta(), move |s| [mu_b * s.lambda_radius * s.theta.sin(), 0.0, 0.0, 0.0])
    }
}

fn richardson_gradient(f: &ValueFn, at: &OrbitState, h: f64) -> [f64; 4] {
    let z = at.coords();
    let central = |i: usize, h: f64| {
        let mut zp = z;
        let mut zm = z;
        zp[i] += h;
        zm[i] -= h;
        (f(&at.with_coords(zp)) - f(&at.with_coords(zm))) / (2.0 * h)
    };
    let mut g = [0.0; 4];
    for (i, gi) in g.iter_mut().enumerate() {
        *gi = (4.0 * central(i, h / 2.0) - central(i, h)) / 3.0;
    }
    g
}

fn bracket_of_gradients(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[2] - a[2] * b[0] + a[1] * b[3] - a[3] * b[1]
}

/// `Σ ∂_q f ∂_p g − ∂_p f ∂_q g` over `(θ, p_θ)` and `(φ, p_φ)`.
pub fn poisson_bracket(f: &PhaseFunction, g: &PhaseFunction, at: &OrbitState) -> f64 {
    bracket_of_gradients(&f.gradient(at), &g.gradient(at))
}

/// The second-class constraint pair and its inverse bracket matrix.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub constraints: [PhaseFunction; 2],
    pub guard: f64,
}

impl Default for ConstraintSystem {
    fn default() -> Self {
        ConstraintSystem {
            constraints: [PhaseFunction::constraint(1), PhaseFunction::constraint(2)],
            guard: POLE_GUARD,
        }
    }
}

impl ConstraintSystem {
    pub fn with_guard(guard: f64) -> Self {
        ConstraintSystem { guard, ..Self::default() }
    }

    fn check(&self, at: &OrbitState) -> Result<(), OrbitError> {
        let s = at.theta.sin();
        if s.abs() <= self.guard {
            Err(OrbitError::SingularConfiguration { sin_theta: s, guard: self.guard })
        } else {
            Ok(())
        }
    }

    /// `{Φa, Φb}_P`.
    pub fn bracket_matrix(&self, at: &OrbitState) -> [[f64; 2]; 2] {
        let [a, b] = &self.constraints;
        let x = poisson_bracket(a, b, at);
        [[0.0, x], [-x, 0.0]]
    }

    /// `C_ab = {Φa, Φb}_P⁻¹`.
    pub fn c_matrix(&self, at: &OrbitState) -> Result<[[f64; 2]; 2], OrbitError> {
        self.check(at)?;
        let m = self.bracket_matrix(at);
        let x = m[0][1];
        Ok([[0.0, -1.0 / x], [1.0 / x, 0.0]])
    }

    /// `{f, g}_D = {f, g}_P − {f, Φa}_P C_ab {Φb, g}_P`.
    pub fn dirac_bracket(&self, f: &PhaseFunction, g: &PhaseFunction, at: &OrbitState) -> Result<f64, OrbitError> {
        let c = self.c_matrix(at)?;
        let gf = f.gradient(at);
        let gg = g.gradient(at);
        let gphi: Vec<[f64; 4]> = self.constraints.iter().map(|p| p.gradient(at)).collect();
        let mut out = bracket_of_gradients(&gf, &gg);
        for a in 0..2 {
            for b in 0..2 {
                out -= bracket_of_gradients(&gf, &gphi[a]) * c[a][b] * bracket_of_gradients(&gphi[b], &gg);
            }
        }
        Ok(out)
    }

    /// Multipliers `v = −C {Φ, H0}` that keep the constraints conserved.
    pub fn lagrange_multipliers(&self, h0: &PhaseFunction, at: &OrbitState) -> Result<[f64; 2], OrbitError> {
        let c = self.c_matrix(at)?;
        let r: Vec<f64> = self.constraints.iter().map(|p| poisson_bracket(p, h0, at)).collect();
        Ok([-(c[0][0] * r[0] + c[0][1] * r[1]), -(c[1][0] * r[0] + c[1][1] * r[1])])
    }
}

/// Convenience wrapper with the default constraints and guard.
pub fn dirac_bracket(f: &PhaseFunction, g: &PhaseFunction, at: &OrbitState) -> Result<f64, OrbitError> {
    ConstraintSystem::default().dirac_bracket(f, g, at)
}

/// `H = −λμB cosθ`.
pub fn total_hamiltonian(at: &OrbitState, mu: f64, b: f64) -> f64 {
    -at.lambda_radius * mu * b * at.theta.cos()
}

/// Closed-form precession `θ(t) = θ0`, `φ(t) = φ0 − μBt`, kept on shell.
pub fn classical_trajectory(s0: &OrbitState, mu: f64, b: f64, t: f64) -> OrbitState {
    OrbitState { phi: s0.phi - mu * b * t, ..*s0 }
}

pub fn period(mu: f64, b: f64) -> f64 {
    2.0 * PI / (mu * b)
}

/// Residuals of `d/dt(λcosθ) = 0` and `(φ̇ + μB) sinθ = 0` at time `t`, with
/// the time derivatives taken by central differences of step `h`.
pub fn equation_of_motion_residuals(s0: &OrbitState, mu: f64, b: f64, t: f64, h: f64) -> [f64; 2] {
    let plus = classical_trajectory(s0, mu, b, t + h);
    let minus = classical_trajectory(s0, mu, b, t - h);
    let eta_dot = (plus.eta() - minus.eta()) / (2.0 * h);
    let phi_dot = (plus.phi - minus.phi) / (2.0 * h);
    let here = classical_trajectory(s0, mu, b, t);
    [eta_dot.abs(), ((phi_dot + mu * b) * here.theta.sin()).abs()]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymplecticData {
    /// Coefficient of `dθ∧dφ` in `Ω`, i.e. `λ sinθ`.
    pub two_form: f64,
    /// Coefficient of `dφ` in `ω = (γ + λcosθ)dφ`.
    pub one_form: f64,
    /// `|dω + Ω|` with `dω` from finite differences.
    pub exterior_residual: f64,
}

/// `Ω = λ sinθ dθ∧dφ` and its primitive `ω`, with `dω = −Ω` checked numerically.
pub fn symplectic_data(at: &OrbitState, gamma: f64) -> SymplecticData {
    let l = at.lambda_radius;
    let one_form = |th: f64| gamma + l * th.cos();
    let h = 1e-4;
    let d = |h: f64| (one_form(at.theta + h) - one_form(at.theta - h)) / (2.0 * h);
    let d_theta = (4.0 * d(h / 2.0) - d(h)) / 3.0;
    let two_form = l * at.theta.sin();
    SymplecticData { two_form, one_form: one_form(at.theta), exterior_residual: (d_theta + two_form).abs() }
}

/// Random non-polar states with `θ ∈ [margin, π − margin]`, `λ ∈ [0.5, 2]` and
/// momenta on or off the constraint surface.
pub fn random_states(n: usize, seed: u64, margin: f64) -> Vec<OrbitState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| OrbitState {
            theta: rng.gen_range(margin..PI - margin),
            phi: rng.gen_range(0.0..2.0 * PI),
            lambda_radius: rng.gen_range(0.5..2.0),
            p_theta: rng.gen_range(-1.0..1.0),
            p_phi: rng.gen_range(-2.0..2.0),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st() -> OrbitState {
        OrbitState { theta: 1.1, phi: 0.4, lambda_radius: 1.3, p_theta: 0.2, p_phi: -0.7 }
    }

    #[test]
    fn constraint_bracket() {
        let s = OrbitState::on_shell(PI / 2.0, 0.0, 1.0);
        let sys = ConstraintSystem::default();
        assert!((sys.bracket_matrix(&s)[0][1] + 1.0).abs() < 1e-15);
        let c = sys.c_matrix(&st()).unwrap();
        let expected = 1.0 / (1.3 * 1.1f64.sin());
        assert!((c[0][1] - expected).abs() < 1e-14 && (c[1][0] + expected).abs() < 1e-14);
    }

    #[test]
    fn canonical_brackets() {
        let s = st();
        assert!((poisson_bracket(&PhaseFunction::phi(), &PhaseFunction::p_phi(), &s) - 1.0).abs() < 1e-15);
        let f = PhaseFunction::x(1);
        assert_eq!(poisson_bracket(&f, &f, &s), 0.0);
    }

    #[test]
    fn dirac_brackets() {
        let s = st();
        let one = dirac_bracket(&PhaseFunction::phi(), &PhaseFunction::eta(), &s).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        let zero = dirac_bracket(&PhaseFunction::theta(), &PhaseFunction::p_theta(), &s).unwrap();
        assert!(zero.abs() < 1e-12);
        let x12 = dirac_bracket(&PhaseFunction::x(1), &PhaseFunction::x(2), &s).unwrap();
        assert!((x12 - s.embedding()[2]).abs() < 1e-12);
    }

    #[test]
    fn numeric_gradients_agree() {
        let s = st();
        for f in [PhaseFunction::x(1), PhaseFunction::x(3), PhaseFunction::constraint(2)] {
            let a = f.gradient(&s);
            let b = f.without_gradient().gradient(&s);
            for i in 0..4 {
                assert!((a[i] - b[i]).abs() < 1e-9, "{} {i}: {} vs {}", f.name, a[i], b[i]);
            }
        }
    }

    #[test]
    fn poles_are_rejected() {
        let s = OrbitState::on_shell(0.0, 0.0, 1.0);
        assert!(matches!(
            dirac_bracket(&PhaseFunction::phi(), &PhaseFunction::eta(), &s),
            Err(OrbitError::SingularConfiguration { .. })
        ));
    }

    #[test]
    fn multipliers_reproduce_precession() {
        let mu_b = 0.7;
        let v = ConstraintSystem::default().lagrange_multipliers(&PhaseFunction::hamiltonian(mu_b), &st()).unwrap();
        assert!(v[0].abs() < 1e-14 && (v[1] + mu_b).abs() < 1e-14);
        let phi_dot = dirac_bracket(&PhaseFunction::phi(), &PhaseFunction::hamiltonian(mu_b), &st()).unwrap();
        assert!((phi_dot + mu_b).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_values() {
        assert_eq!(total_hamiltonian(&OrbitState::on_shell(0.0, 0.0, 2.0), 0.5, 3.0), -3.0);
        assert!(total_hamiltonian(&OrbitState::on_shell(PI / 2.0, 0.0, 2.0), 0.5, 3.0).abs() < 1e-15);
    }

    #[test]
    fn trajectory_period_and_residuals() {
        let s0 = OrbitState::on_shell(0.8, 1.0, 1.0);
        let (mu, b) = (0.5, 3.0);
        let s = classical_trajectory(&s0, mu, b, period(mu, b));
        assert!(angle_distance(s.phi, s0.phi) < 1e-12);
        assert_eq!(s.eta(), s0.eta());
        let r = equation_of_motion_residuals(&s0, mu, b, 2.3, 1e-3);
        assert!(r[0] == 0.0 && r[1] < 1e-10);
        assert_eq!(classical_trajectory(&s0, mu, 0.0, 10.0), s0);
    }

    #[test]
    fn symplectic_potential() {
        let s = OrbitState::on_shell(PI / 2.0, 0.0, 1.5);
        let d = symplectic_data(&s, 0.0);
        assert!(d.one_form.abs() < 1e-15 && d.exterior_residual < 1e-8);
        let shifted = symplectic_data(&s, 4.0);
        assert_eq!(shifted.two_form, d.two_form);
    }
}
