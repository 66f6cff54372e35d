//! Numerical laboratory for Pick-Nevanlinna interpolation on the unit polydisc.
//!
//! The crate is layered bottom-up: [`torus`] holds Laurent polynomials, grids and
//! kernels; [`hardy`] builds weighted Gram matrices and reproducing kernels;
//! [`modulus`] approximates positive functions by squared moduli of zero-free
//! polynomials; [`pick`] assembles Pick matrices and searches weight families;
//! [`oracles`] provides independent classical solvers; [`extremal`] covers quotient
//! norms and the dual extremal problem.

pub mod error;
pub mod extremal;
pub mod hardy;
pub mod linalg;
pub mod modulus;
pub mod oracles;
pub mod pick;
pub mod serde_complex;
pub mod torus;

pub use error::{Error, Result};
pub use num_complex::Complex64;
