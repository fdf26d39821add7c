//! Self-contained special-function kernels: Jacobi elliptic functions,
//! Legendre integrals of the first and third kind via Carlson symmetric
//! forms, and adaptive quadrature that removes inverse-square-root
//! endpoint singularities.

pub mod carlson;
pub mod elliptic;
pub mod jacobi;
pub mod quad;

pub use elliptic::{elliptic_f, elliptic_k, elliptic_pi, elliptic_pi_complete};
pub use jacobi::jacobi_sn_cn_dn;
pub use quad::{adaptive_quad, quad_sqrt_endpoint, Quadrature, SingularEnd};
