//! Spin-1/2 in the matrix and the Grassmann representation.
//!
//! A state `ψ0|+⟩ + ψ1|−⟩` is the Grassmann function `ψ0 + ψ1 ξ`. Operators are
//! polynomials in `ξ̂` (multiplication) and `∂ = ∂/∂ξ`; their normal-ordered
//! symbols live in `(ξ, ξ̄)` and their integral kernels in `(ξ, ξ′)`.
//! Units have `ħ = 1`.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use nalgebra::{Matrix2, Vector3};
use num::traits::{One, Zero};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grassmann::{AlgebraError, GeneratorTable, Multivector};
use crate::scalar::Scalar;

pub const XI: &str = "xi";
pub const XIBAR: &str = "xibar";
pub const XI1: &str = "xi1";
pub const XIBAR1: &str = "xibar1";

/// Table `[ξ, ξ̄, ξ′, ξ̄′]` shared by states, symbols and kernels.
pub fn spin_table() -> &'static Arc<GeneratorTable> {
    static TABLE: OnceLock<Arc<GeneratorTable>> = OnceLock::new();
    TABLE.get_or_init(|| GeneratorTable::builder().odd(XI).odd(XIBAR).odd(XI1).odd(XIBAR1).build().expect("valid"))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpinError {
    #[error("slice count must be at least 1")]
    ZeroSlices,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    pub psi0: Complex64,
    pub psi1: Complex64,
}

impl SpinState {
    pub fn new(psi0: Complex64, psi1: Complex64) -> Self {
        SpinState { psi0, psi1 }
    }

    pub fn up() -> Self {
        Self::new(Complex64::one(), Complex64::zero())
    }

    pub fn down() -> Self {
        Self::new(Complex64::zero(), Complex64::one())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi0.norm_sqr() + self.psi1.norm_sqr()
    }

    /// `ψ0 + ψ1 ξ`.
    pub fn to_grassmann(&self) -> Multivector<Complex64> {
        to_grassmann(&[self.psi0, self.psi1])
    }

    pub fn from_grassmann(psi: &Multivector<Complex64>) -> Self {
        let [a, b] = from_grassmann(psi);
        Self::new(a, b)
    }

    pub fn apply(&self, m: &Matrix2<Complex64>) -> Self {
        Self::new(m[(0, 0)] * self.psi0 + m[(0, 1)] * self.psi1, m[(1, 0)] * self.psi0 + m[(1, 1)] * self.psi1)
    }

    /// Expectation of `(σx, σy, σz)/2`, normalized by the state norm.
    pub fn spin_expectation(&self) -> [f64; 3] {
        let n = self.norm_sqr();
        let c = self.psi0.conj() * self.psi1;
        [c.re / n, c.im / n, 0.5 * (self.psi0.norm_sqr() - self.psi1.norm_sqr()) / n]
    }
}

fn to_grassmann<C: Scalar>(v: &[C; 2]) -> Multivector<C> {
    let t = spin_table();
    let xi = Multivector::generator(t, XI).expect("xi");
    &Multivector::scalar(t, v[0].clone()) + &xi.scale(&v[1])
}

fn from_grassmann<C: Scalar>(psi: &Multivector<C>) -> [C; 2] {
    [psi.scalar_part(), psi.coefficient(&[1, 0, 0, 0])]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagneticField {
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
    /// Magnetic moment μ_B multiplying the field.
    pub mu_b: f64,
}

impl MagneticField {
    pub fn new(bx: f64, by: f64, bz: f64) -> Self {
        MagneticField { bx, by, bz, mu_b: 1.0 }
    }

    pub fn with_moment(self, mu_b: f64) -> Self {
        MagneticField { mu_b, ..self }
    }

    pub fn magnitude(&self) -> f64 {
        (self.bx * self.bx + self.by * self.by + self.bz * self.bz).sqrt()
    }
}

/// `a + b ξ̂ + c ∂ + d ξ̂∂`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrassmannForm<C> {
    pub one: C,
    pub xi: C,
    pub d: C,
    pub xi_d: C,
}

impl<C: Scalar> GrassmannForm<C> {
    /// Action on a function of `ξ` through the algebra engine.
    pub fn apply(&self, psi: &Multivector<C>) -> Result<Multivector<C>, AlgebraError> {
        let t = psi.table().clone();
        let xi = Multivector::generator(&t, XI)?;
        let dpsi = psi.left_derivative(XI)?;
        let out = &(&psi.scale(&self.one) + &xi.product(psi)?.scale(&self.xi)) + &dpsi.scale(&self.d);
        Ok(&out + &xi.product(&dpsi)?.scale(&self.xi_d))
    }

    /// Normal-ordered symbol `a + bξ + cξ̄ + dξξ̄`.
    pub fn symbol(&self) -> Multivector<C> {
        let t = spin_table();
        let g = |n: &str| Multivector::generator(t, n).expect("generator");
        let xixb = &g(XI) * &g(XIBAR);
        &(&(&Multivector::scalar(t, self.one.clone()) + &g(XI).scale(&self.xi)) + &g(XIBAR).scale(&self.d))
            + &xixb.scale(&self.xi_d)
    }
}

/// An operator held in both representations, each built from its own formula.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinOperator<C> {
    pub matrix: [[C; 2]; 2],
    pub form: GrassmannForm<C>,
}

impl<C: Scalar> SpinOperator<C> {
    pub fn matrix_apply(&self, v: &[C; 2]) -> [C; 2] {
        let m = &self.matrix;
        [
            m[0][0].clone() * v[0].clone() + m[0][1].clone() * v[1].clone(),
            m[1][0].clone() * v[0].clone() + m[1][1].clone() * v[1].clone(),
        ]
    }

    pub fn grassmann_apply(&self, v: &[C; 2]) -> [C; 2] {
        from_grassmann(&self.form.apply(&to_grassmann(v)).expect("spin table"))
    }

    /// Whether both forms act identically on `1` and `ξ`.
    pub fn representations_agree(&self) -> bool {
        basis::<C>().iter().all(|v| self.matrix_apply(v) == self.grassmann_apply(v))
    }

    /// Largest discrepancy between the two forms on the basis.
    pub fn discrepancy(&self) -> f64 {
        basis::<C>()
            .iter()
            .flat_map(|v| {
                let a = self.matrix_apply(v);
                let b = self.grassmann_apply(v);
                [
                    (a[0].clone() - b[0].clone()).to_complex64().norm(),
                    (a[1].clone() - b[1].clone()).to_complex64().norm(),
                ]
            })
            .fold(0.0, f64::max)
    }

    pub fn symbol(&self) -> Multivector<C> {
        self.form.symbol()
    }

    pub fn kernel(&self) -> Multivector<C> {
        integral_kernel(&self.symbol()).expect("spin table")
    }
}

fn basis<C: Scalar>() -> [[C; 2]; 2] {
    [[C::one(), C::zero()], [C::zero(), C::one()]]
}

pub struct SpinOperators<C> {
    pub sx: SpinOperator<C>,
    pub sy: SpinOperator<C>,
    pub sz: SpinOperator<C>,
    pub n: SpinOperator<C>,
}

/// `Ŝ = ħσ/2` and `N̂ = diag(1/2, −1/2)`. Grassmann forms:
/// `Ŝx = (ħ/2)(∂ + ξ̂)`, `Ŝy = (iħ/2)(ξ̂ − ∂)`, `N̂ = 1/2 − ξ̂∂`, `Ŝz = ħN̂`.
pub fn spin_operators<C: Scalar>(hbar: C) -> SpinOperators<C> {
    let z = C::zero;
    let half = C::from_ratio(1, 2) * hbar.clone();
    let ihalf = C::i() * half.clone();
    let sx = SpinOperator {
        matrix: [[z(), half.clone()], [half.clone(), z()]],
        form: GrassmannForm { one: z(), xi: half.clone(), d: half.clone(), xi_d: z() },
    };
    let sy = SpinOperator {
        matrix: [[z(), -ihalf.clone()], [ihalf.clone(), z()]],
        form: GrassmannForm { one: z(), xi: ihalf.clone(), d: -ihalf, xi_d: z() },
    };
    let h = C::from_ratio(1, 2);
    let n = SpinOperator {
        matrix: [[h.clone(), z()], [z(), -h.clone()]],
        form: GrassmannForm { one: h, xi: z(), d: z(), xi_d: -C::one() },
    };
    let sz = SpinOperator {
        matrix: [[half.clone(), z()], [z(), -half.clone()]],
        form: GrassmannForm { one: half, xi: z(), d: z(), xi_d: -hbar },
    };
    SpinOperators { sx, sy, sz, n }
}

/// `Ĥ = −μ_B B·σ`, with the matrix `−μ_B[[Bz, Bx−iBy], [Bx+iBy, −Bz]]` and the
/// Grassmann form `−μ_B[Bz + (Bx+iBy)ξ̂ + (Bx−iBy)∂ − 2Bz ξ̂∂]`.
pub fn hamiltonian_with<C: Scalar>(mu: C, bx: C, by: C, bz: C) -> SpinOperator<C> {
    let iby = C::i() * by;
    let plus = bx.clone() + iby.clone();
    let minus = bx - iby;
    let m = -mu;
    SpinOperator {
        matrix: [
            [m.clone() * bz.clone(), m.clone() * minus.clone()],
            [m.clone() * plus.clone(), -(m.clone() * bz.clone())],
        ],
        form: GrassmannForm {
            one: m.clone() * bz.clone(),
            xi: m.clone() * plus,
            d: m.clone() * minus,
            xi_d: -(m * bz * C::from_i64(2)),
        },
    }
}

pub fn hamiltonian(b: &MagneticField) -> SpinOperator<Complex64> {
    let r = |x: f64| Complex64::new(x, 0.0);
    hamiltonian_with(r(b.mu_b), r(b.bx), r(b.by), r(b.bz))
}

/// Ordered symbol `H̄(ξ, ξ̄) = −μBz − μ(Bx+iBy)ξ − μ(Bx−iBy)ξ̄ + 2μBz ξξ̄`, written
/// out directly.
pub fn hamiltonian_symbol(b: &MagneticField) -> Multivector<Complex64> {
    let t = spin_table();
    let g = |n: &str| Multivector::generator(t, n).expect("generator");
    let mu = b.mu_b;
    let plus = Complex64::new(b.bx, b.by);
    let minus = plus.conj();
    let terms = [
        Multivector::scalar(t, Complex64::new(-mu * b.bz, 0.0)),
        g(XI).scale(&(-mu * plus)),
        g(XIBAR).scale(&(-mu * minus)),
        (&g(XI) * &g(XIBAR)).scale(&Complex64::new(2.0 * mu * b.bz, 0.0)),
    ];
    terms.iter().fold(Multivector::zero(t), |acc, x| &acc + x)
}

/// Integral kernel `H̃(ξ, ξ′) = ∫dξ̄ H̄(ξ, ξ̄) e^{ξ̄(ξ′−ξ)}`.
pub fn integral_kernel<C: Scalar>(symbol: &Multivector<C>) -> Result<Multivector<C>, AlgebraError> {
    let t = symbol.table().clone();
    let g = |n: &str| Multivector::generator(&t, n);
    let e = g(XIBAR)?.product(&(&g(XI1)? - &g(XI)?))?.graded_exp()?;
    symbol.product(&e)?.berezin_integral(&[XIBAR])
}

/// `∫dξ′ K(ξ, ξ′) ψ(ξ′)`.
pub fn apply_kernel<C: Scalar>(kernel: &Multivector<C>, psi: &Multivector<C>) -> Result<Multivector<C>, AlgebraError> {
    let t = kernel.table().clone();
    let shifted = psi.relabel(&t, |n| (n == XI).then_some(XI1))?;
    kernel.product(&shifted)?.berezin_integral(&[XI1])
}

/// Ordered symbol of the product of the operators with symbols `u1`, `u2`:
/// `∫dξ′dξ̄′ e^{(ξ̄′−ξ̄)(ξ′−ξ)} U1(ξ, ξ̄′) U2(ξ′, ξ̄)`.
pub fn compose_symbols<C: Scalar>(u1: &Multivector<C>, u2: &Multivector<C>) -> Result<Multivector<C>, AlgebraError> {
    let t = u1.table().clone();
    let g = |n: &str| Multivector::generator(&t, n);
    let a = u1.relabel(&t, |n| (n == XIBAR).then_some(XIBAR1))?;
    let b = u2.relabel(&t, |n| (n == XI).then_some(XI1))?;
    let e = (&g(XIBAR1)? - &g(XIBAR)?).product(&(&g(XI1)? - &g(XI)?))?.graded_exp()?;
    e.product(&a)?.product(&b)?.berezin_integral(&[XI1, XIBAR1])
}

/// Matrix of the operator whose symbol is `a + bξ + cξ̄ + dξξ̄`.
pub fn symbol_to_matrix<C: Scalar>(symbol: &Multivector<C>) -> [[C; 2]; 2] {
    let a = symbol.scalar_part();
    let b = symbol.coefficient(&[1, 0, 0, 0]);
    let c = symbol.coefficient(&[0, 1, 0, 0]);
    let d = symbol.coefficient(&[1, 1, 0, 0]);
    [[a.clone(), c], [b, a + d]]
}

pub fn matrix_to_symbol<C: Scalar>(m: &[[C; 2]; 2]) -> Multivector<C> {
    GrassmannForm {
        one: m[0][0].clone(),
        xi: m[1][0].clone(),
        d: m[0][1].clone(),
        xi_d: m[1][1].clone() - m[0][0].clone(),
    }
    .symbol()
}

/// Matrix of the operator with integral kernel `k`, read off by applying it to
/// the basis `1, ξ`.
pub fn kernel_to_matrix<C: Scalar>(k: &Multivector<C>) -> Result<[[C; 2]; 2], AlgebraError> {
    let c0 = from_grassmann(&apply_kernel(k, &to_grassmann(&[C::one(), C::zero()]))?);
    let c1 = from_grassmann(&apply_kernel(k, &to_grassmann(&[C::zero(), C::one()]))?);
    Ok([[c0[0].clone(), c1[0].clone()], [c0[1].clone(), c1[1].clone()]])
}

pub fn to_matrix2(m: &[[Complex64; 2]; 2]) -> Matrix2<Complex64> {
    Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

/// Symbol of `n` slices `1 − iεH̄`, `ε = t/n`, composed left to right.
pub fn sliced_symbol(b: &MagneticField, t: f64, n: usize) -> Result<Multivector<Complex64>, SpinError> {
    if n == 0 {
        return Err(SpinError::ZeroSlices);
    }
    let eps = t / n as f64;
    let slice = &Multivector::one(spin_table()) - &hamiltonian_symbol(b).scale(&Complex64::new(0.0, eps));
    let mut u = slice.clone();
    for _ in 1..n {
        u = compose_symbols(&slice, &u)?;
    }
    Ok(u)
}

/// Time-sliced propagator, converted to a matrix through its integral kernel.
pub fn sliced_propagator(b: &MagneticField, t: f64, n: usize) -> Result<Matrix2<Complex64>, SpinError> {
    let u = sliced_symbol(b, t, n)?;
    Ok(to_matrix2(&kernel_to_matrix(&integral_kernel(&u)?)?))
}

/// `exp(−iH t)` in closed form: with `H = h·σ`,
/// `exp(−iHt) = cos(|h|t) I − i sin(|h|t) ĥ·σ`.
pub fn pauli_propagator(b: &MagneticField, t: f64) -> Matrix2<Complex64> {
    let h = Vector3::new(b.bx, b.by, b.bz) * (-b.mu_b);
    let norm = h.norm();
    let id = Matrix2::identity();
    if norm == 0.0 {
        return id;
    }
    let n = h / norm;
    let i = Complex64::new(0.0, 1.0);
    let sigma = Matrix2::new(
        Complex64::new(n.z, 0.0),
        Complex64::new(n.x, -n.y),
        Complex64::new(n.x, n.y),
        Complex64::new(-n.z, 0.0),
    );
    let th = norm * t;
    id * Complex64::new(th.cos(), 0.0) - sigma * (i * th.sin())
}

pub fn pauli_evolve(psi: &SpinState, b: &MagneticField, t: f64) -> SpinState {
    psi.apply(&pauli_propagator(b, t))
}

/// `ψ(ξ, t) = ∫dξ0 Ũ(ξ, t; ξ0) ψ(ξ0)` with the sliced kernel.
pub fn kernel_propagate(psi: &SpinState, b: &MagneticField, t: f64, n: usize) -> Result<SpinState, SpinError> {
    let k = integral_kernel(&sliced_symbol(b, t, n)?)?;
    Ok(SpinState::from_grassmann(&apply_kernel(&k, &psi.to_grassmann())?))
}

pub fn max_abs_diff(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub max_error: f64,
    pub wall_time: f64,
}

pub fn convergence_sweep(b: &MagneticField, t: f64, ns: &[usize]) -> Result<Vec<ConvergencePoint>, SpinError> {
    let exact = pauli_propagator(b, t);
    ns.iter()
        .map(|&n| {
            let start = Instant::now();
            let u = sliced_propagator(b, t, n)?;
            Ok(ConvergencePoint { n, max_error: max_abs_diff(&u, &exact), wall_time: start.elapsed().as_secs_f64() })
        })
        .collect()
}

/// Least-squares `C` in `error ≈ C/n`.
pub fn fit_first_order(points: &[ConvergencePoint]) -> f64 {
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), p| {
        let x = 1.0 / p.n as f64;
        (a + p.max_error * x, b + x * x)
    });
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qc, QComplex};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sz_eigenvalues() {
        let ops = spin_operators(c(1.0, 0.0));
        assert_eq!(ops.sz.grassmann_apply(&[c(1.0, 0.0), c(0.0, 0.0)]), [c(0.5, 0.0), c(0.0, 0.0)]);
        assert_eq!(ops.sz.grassmann_apply(&[c(0.0, 0.0), c(1.0, 0.0)]), [c(0.0, 0.0), c(-0.5, 0.0)]);
    }

    #[test]
    fn exact_representations_agree() {
        let ops = spin_operators(QComplex::one());
        for op in [&ops.sx, &ops.sy, &ops.sz, &ops.n] {
            assert!(op.representations_agree());
        }
        let h = hamiltonian_with(q(3, 2), q(1, 3), q(-2, 1), q(5, 7));
        assert!(h.representations_agree());
        let n2 = ops.n.grassmann_apply(&ops.n.grassmann_apply(&[qc(2, 1), qc(-3, 4)]));
        assert_eq!(n2, [qc(2, 1) * q(1, 4), qc(-3, 4) * q(1, 4)]);
    }

    #[test]
    fn field_along_z() {
        let b = MagneticField::new(0.0, 0.0, 2.0).with_moment(0.5);
        let h = hamiltonian(&b);
        assert_eq!(h.matrix, [[c(-1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
        let expected = &Multivector::scalar(spin_table(), c(-1.0, 0.0))
            + &(&Multivector::generator(spin_table(), XI).unwrap()
                * &Multivector::generator(spin_table(), XIBAR).unwrap())
                .scale(&c(2.0, 0.0));
        assert_eq!(hamiltonian_symbol(&b), expected);
        assert_eq!(h.symbol(), expected);
    }

    #[test]
    fn kernel_constant_term() {
        let b = MagneticField::new(0.3, -0.7, 1.1).with_moment(2.0);
        let k = hamiltonian(&b).kernel();
        assert!((k.scalar_part() - (-2.0 * c(0.3, 0.7))).norm() < 1e-15);
        let kxx = k.coefficient(&[1, 0, 1, 0]);
        assert!((kxx - 2.0 * c(0.3, -0.7)).norm() < 1e-15);
        assert!((k.coefficient(&[1, 0, 0, 0]) + 2.2).norm() < 1e-15);
        assert!((k.coefficient(&[0, 0, 1, 0]) + 2.2).norm() < 1e-15);
    }

    #[test]
    fn symbol_composition_is_matrix_product() {
        let a = [[qc(1, 2), q(-1, 3)], [qc(0, 1), q(4, 1)]];
        let b = [[q(2, 1), qc(1, -1)], [q(1, 5), qc(-3, 0)]];
        let prod = compose_symbols(&matrix_to_symbol(&a), &matrix_to_symbol(&b)).unwrap();
        let m = symbol_to_matrix(&prod);
        for i in 0..2 {
            for j in 0..2 {
                let e = a[i][0].clone() * b[0][j].clone() + a[i][1].clone() * b[1][j].clone();
                assert_eq!(m[i][j], e);
            }
        }
    }

    #[test]
    fn identity_symbol_is_neutral() {
        let u = matrix_to_symbol(&[[qc(1, 1), q(2, 1)], [q(0, 1), q(-1, 2)]]);
        let one = Multivector::one(spin_table());
        assert_eq!(compose_symbols(&one, &u).unwrap(), u);
        assert_eq!(compose_symbols(&u, &one).unwrap(), u);
    }

    #[test]
    fn kernel_matches_matrix() {
        let m = [[qc(1, 1), q(2, 3)], [q(-5, 1), qc(0, -1)]];
        assert_eq!(kernel_to_matrix(&integral_kernel(&matrix_to_symbol(&m)).unwrap()).unwrap(), m);
    }

    #[test]
    fn zero_field_and_zero_slices() {
        let b = MagneticField::new(0.0, 0.0, 0.0);
        assert_eq!(sliced_propagator(&b, 3.0, 7).unwrap(), Matrix2::identity());
        assert_eq!(sliced_propagator(&b, 1.0, 0), Err(SpinError::ZeroSlices));
        assert_eq!(pauli_evolve(&SpinState::up(), &b, 2.0), SpinState::up());
    }

    #[test]
    fn diagonal_pauli_evolution() {
        let b = MagneticField::new(0.0, 0.0, 1.5).with_moment(0.4);
        let t = 2.0;
        let out = pauli_evolve(&SpinState::up(), &b, t);
        assert!((out.psi0 - c(0.0, 0.6 * t).exp()).norm() < 1e-15);
        assert_eq!(out.psi1, c(0.0, 0.0));
    }

    #[test]
    fn sliced_propagator_along_z() {
        let b = MagneticField::new(0.0, 0.0, 1.0);
        let u = sliced_propagator(&b, 1.0, 1000).unwrap();
        let exact = Matrix2::new(c(0.0, 1.0).exp(), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0).exp());
        assert!(max_abs_diff(&u, &exact) <= 1e-2);
    }
}
