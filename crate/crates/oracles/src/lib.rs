//! Brute-force oracles for testing `jdoi-core`.
//!
//! Nothing here shares code with the closed forms under test: densities,
//! normal kernels and integration rules are written out independently.

// `!(x <= tol)` keeps looping on NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod fd;
mod quad;
mod toy;

pub use fd::{fd_greeks, FdBumps, FdGreeks};
pub use quad::{
    integrate, integrate_with_breaks, killed_lognormal_expectation, lognormal_expectation, mixture_density,
    quad_jump_integral, tail_cutoffs, QuadratureSpec,
};
pub use toy::{enumerate_toy_policy, ToyPolicy, MAX_TOY_DECISIONS};

/// Oracle failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("quadrature did not converge: estimate {estimate}, error bound {error} after {subdivisions} subdivisions")]
    NoConvergence { estimate: f64, error: f64, subdivisions: usize },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(&'static str),
    #[error("toy problem has {decisions} stopping decisions, the cap is {cap}")]
    TooLarge { decisions: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Standard normal CDF from `statrs`' complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
