//! Special functions and transform engines shared by the rest of the crate.

mod bessel;
mod ddouble;
mod hankel;
mod laplace;
mod quadrature;

pub use bessel::{bessel_j0, bessel_j1, j0, j1};
pub use hankel::{hankel0_forward, hankel0_forward_with, hankel0_with_tail, DEFAULT_TAIL_TOL};
pub(crate) use hankel::{tail_terms, TAIL_STENCIL, TAIL_STEP};
pub use laplace::{inverse_laplace, LaplaceInversionConfig, LaplaceMethod, TALBOT_SLOPE};
pub use quadrature::{
    adaptive_integrate, integrate, integrate_complex, legendre_rule, QuadratureGrid, Scheme,
    DEFAULT_ADAPTIVE_TOL,
};
