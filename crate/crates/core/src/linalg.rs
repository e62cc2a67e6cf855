//! Small dense linear algebra helpers.

use nalgebra::DMatrix;
use num::traits::Zero;
use num_complex::Complex64;

use crate::scalar::{q_inverse, QComplex};

/// Solves `a x = b` exactly by Gauss-Jordan elimination. Free variables are
/// set to zero; `None` if the system is inconsistent.
#[allow(clippy::needless_range_loop)]
pub fn solve_exact(a: &[Vec<QComplex>], b: &[QComplex]) -> Option<Vec<QComplex>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<QComplex>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut r = r.clone();
            r.push(v.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = q_inverse(&m[r][c]).expect("nonzero pivot");
        for v in m[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in c..=cols {
                    let d = m[r][k].clone() * f.clone();
                    m[i][k] = m[i][k].clone() - d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![QComplex::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Some(x)
}

/// `exp(m)` for a small complex matrix.
pub fn expm(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    m.clone().exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qc};

    #[test]
    fn exact_solutions() {
        let a = vec![vec![q(2, 1), q(1, 1)], vec![q(1, 1), qc(0, 1)], vec![q(3, 1), qc(1, 1)]];
        let x = [q(1, 3), q(-2, 1)];
        let b: Vec<QComplex> =
            a.iter().map(|r| r.iter().zip(&x).fold(QComplex::zero(), |s, (u, v)| s + u.clone() * v.clone())).collect();
        assert_eq!(solve_exact(&a, &b).unwrap(), x.to_vec());
        let inconsistent = [q(1, 1), q(1, 1), q(0, 1)];
        assert!(solve_exact(&a, &inconsistent).is_none());
    }

    #[test]
    fn underdetermined_sets_free_variables_to_zero() {
        let a = vec![vec![q(1, 1), q(1, 1)]];
        assert_eq!(solve_exact(&a, &[q(5, 1)]).unwrap(), vec![q(5, 1), q(0, 1)]);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 0.7;
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]).map(|x| Complex64::new(x, 0.0));
        let e = expm(&m);
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-14);
    }
}
