//! Laurent polynomials on the n-torus, uniform grids, the Szegő and Poisson kernels,
//! and nonvanishing certification on closed polydiscs.

mod certify;
pub(crate) mod fft;
mod grid;
mod kernel;
mod poly;

pub use certify::{certify_nonvanishing, torus_lower_bound, CertifiedPolynomial, MarginPolicy, Nonvanishing};
pub use grid::TorusGrid;
pub use kernel::{poisson_eval, szego_kernel, PolydiscPoint};
pub use poly::{laurent_mul, mod_squared, LaurentPolynomial, MultiIndex};
