//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the layouts are documented per
//! function. Nothing here reads the clock, since `std::time` panics on
//! `wasm32-unknown-unknown`.

use num_complex::Complex64;
use spindeq_core::coadjoint::{classical_trajectory, total_hamiltonian, OrbitState};
use spindeq_core::spin::{max_abs_diff, pauli_propagator, sliced_propagator, MagneticField, SpinState};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Classical precession on the orbit of radius `lambda`, sampled at
/// `steps + 1` times in `[0, t]`. Rows of five: `t, x, y, z, H`.
#[wasm_bindgen]
pub fn precession_path(
    theta0: f64,
    phi0: f64,
    mu_b: f64,
    lambda: f64,
    t: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(js_err("lambda must be positive"));
    }
    let s0 = OrbitState::on_shell(theta0, phi0, lambda);
    let steps = steps.max(1);
    let mut out = Vec::with_capacity(5 * (steps + 1));
    for k in 0..=steps {
        let tk = t * k as f64 / steps as f64;
        let s = classical_trajectory(&s0, mu_b, 1.0, tk);
        let [x, y, z] = s.embedding();
        out.extend([tk, x, y, z, total_hamiltonian(&s, mu_b, 1.0)]);
    }
    Ok(out)
}

/// Spin expectation of the coherent state pointing at `(theta0, phi0)`,
/// evolved by the time-sliced Grassmann kernel (`slices` per step) and by
/// the exact propagator. Rows of seven: `t, sx, sy, sz, sx_exact, sy_exact, sz_exact`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn spin_precession(
    theta0: f64,
    phi0: f64,
    bx: f64,
    by: f64,
    bz: f64,
    mu_b: f64,
    t: f64,
    steps: usize,
    slices: usize,
) -> Result<Vec<f64>, JsError> {
    let b = MagneticField::new(bx, by, bz).with_moment(mu_b);
    let steps = steps.max(1);
    let dt = t / steps as f64;
    let sliced = sliced_propagator(&b, dt, slices).map_err(js_err)?;
    let exact = pauli_propagator(&b, dt);
    let start =
        SpinState::new(Complex64::new((theta0 / 2.0).cos(), 0.0), Complex64::from_polar((theta0 / 2.0).sin(), phi0));
    let (mut a, mut e) = (start, start);
    let mut out = Vec::with_capacity(7 * (steps + 1));
    for k in 0..=steps {
        if k > 0 {
            a = a.apply(&sliced);
            e = e.apply(&exact);
        }
        out.push(k as f64 * dt);
        out.extend(a.spin_expectation());
        out.extend(e.spin_expectation());
    }
    Ok(out)
}

/// Largest entry of `|U_n − U|` for each slice count in `ns`. Pairs: `n, error`.
#[wasm_bindgen]
pub fn propagator_errors(bx: f64, by: f64, bz: f64, mu_b: f64, t: f64, ns: &[u32]) -> Result<Vec<f64>, JsError> {
    let b = MagneticField::new(bx, by, bz).with_moment(mu_b);
    let exact = pauli_propagator(&b, t);
    let mut out = Vec::with_capacity(2 * ns.len());
    for &n in ns {
        let u = sliced_propagator(&b, t, n as usize).map_err(js_err)?;
        out.extend([n as f64, max_abs_diff(&u, &exact)]);
    }
    Ok(out)
}
