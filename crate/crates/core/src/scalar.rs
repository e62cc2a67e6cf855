//! Coefficient fields for the graded algebras.
//!
//! Two fields are supported: double-precision complex numbers for numerical
//! propagation, and exact complex rationals for identity checks where a
//! residual has to come out as the zero polynomial rather than a small float.

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num_complex::{Complex, Complex64};

/// Exact complex rational.
pub type QComplex = Complex<BigRational>;

pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// The imaginary unit.
    fn i() -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    /// `exp` of a scalar, when it is representable in the field.
    fn try_exp(&self) -> Option<Self>;

    fn to_complex64(&self) -> Complex64;
}

impl Scalar for Complex64 {
    fn i() -> Self {
        Complex64::new(0.0, 1.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn try_exp(&self) -> Option<Self> {
        Some(self.exp())
    }

    fn to_complex64(&self) -> Complex64 {
        *self
    }
}

impl Scalar for QComplex {
    fn i() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(BigRational::new(num.into(), den.into()), BigRational::zero())
    }

    fn try_exp(&self) -> Option<Self> {
        // exp(0) is the only rational value
        self.is_zero().then(Self::one)
    }

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

/// Builds an exact complex number from a real rational `num/den`.
pub fn q(num: i64, den: i64) -> QComplex {
    QComplex::from_ratio(num, den)
}

/// Exact complex number `re + i*im` with integer parts.
pub fn qc(re: i64, im: i64) -> QComplex {
    Complex::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
}

/// Multiplicative inverse, `None` for zero.
pub fn q_inverse(c: &QComplex) -> Option<QComplex> {
    if c.is_zero() {
        return None;
    }
    let norm = c.re.clone() * c.re.clone() + c.im.clone() * c.im.clone();
    Some(Complex::new(c.re.clone() / norm.clone(), -c.im.clone() / norm))
}

/// Converts an `f64` to the exact rational it represents.
pub fn q_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Prints an exact complex rational in the polynomial grammar, e.g. `3/2`,
/// `-i`, `(1/2 - 3*i)`.
pub struct QDisplay<'a>(pub &'a QComplex);

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl Display for QDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let QComplex { re, im } = self.0;
        match (re.is_zero(), im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rational(re)),
            (true, false) => {
                if im.is_one() {
                    write!(f, "i")
                } else if (-im).is_one() {
                    write!(f, "-i")
                } else {
                    write!(f, "{}*i", fmt_rational(im))
                }
            }
            (false, false) => {
                let sign = if im.is_negative() { '-' } else { '+' };
                let mag = im.abs();
                if mag.is_one() {
                    write!(f, "({} {} i)", fmt_rational(re), sign)
                } else {
                    write!(f, "({} {} {}*i)", fmt_rational(re), sign, fmt_rational(&mag))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_forms() {
        assert_eq!(QDisplay(&q(3, 2)).to_string(), "3/2");
        assert_eq!(QDisplay(&qc(0, -1)).to_string(), "-i");
        assert_eq!(QDisplay(&qc(2, -3)).to_string(), "(2 - 3*i)");
        assert_eq!(QDisplay(&qc(0, 1)).to_string(), "i");
    }

    #[test]
    fn exact_exp_only_at_zero() {
        assert_eq!(QComplex::zero().try_exp(), Some(QComplex::one()));
        assert_eq!(q(1, 2).try_exp(), None);
    }
}
