//! Numerical kernels: semi-infinite quadrature, scalar minimization,
//! finite differences and a 4×4 eigensolver.

pub mod eigen;
pub mod finite_diff;
pub mod minimize;
pub mod quadrature;

pub use eigen::{characteristic_polynomial, eigen_4x4, EigenPair, Mat4};
pub use finite_diff::{fd_derivatives, fd_gradient_hessian, FdResult};
pub use minimize::{minimize_scalar, refine_minimum, MinimizeResult};
pub use quadrature::{integrate_semi_infinite, QuadratureResult, QuadratureSettings, UpperLimit};
