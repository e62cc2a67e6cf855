//! Graded-algebra toolkit for spin-1/2 path integrals and their classical
//! counterparts.

pub mod case;
pub mod coadjoint;
pub mod cpi;
pub mod grassmann;
pub mod linalg;
pub mod report;
pub mod scalar;
pub mod spin;
pub mod suite;
pub mod superfield;
pub mod symbolic;

pub use grassmann::{AlgebraError, GeneratorTable, Multivector, Parity};
pub use scalar::{QComplex, Scalar};
