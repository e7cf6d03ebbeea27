//! Jump-diffusion operator integral (JDOI) pricing under the Heston ⊕ 3/2 ⊕ jumps
//! model.
//!
//! The crate prices European and American puts and American up-and-out puts by
//! Monte Carlo. Every path carries two estimators: the plain discounted payoff
//! and the JDOI sample, which corrects the closed-form price of a generalized
//! Black–Scholes approximation by a pathwise integral of the difference between
//! the true and the approximate generators.
//!
//! Module map:
//!
//! - [`model`]: parameters, contracts, market states and their validation.
//! - [`jumps`]: the mixed-exponential jump law.
//! - [`gbs`]: closed-form analytics of the approximate market.
//! - [`sim`]: path simulation and barrier knockout marking.
//! - [`lsmc`]: Longstaff–Schwartz exercise policy.
//! - [`estimator`]: per-path samples and their aggregation.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. The `parallel` feature spreads path loops over rayon; results do not
//! depend on the thread count.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod estimator;
pub mod gbs;
pub mod jumps;
pub mod lsmc;
pub mod model;
pub mod normal;
pub mod sim;

pub use error::{Error, Result};
pub use estimator::{aggregate, EstimatorChoice, EstimatorStats, RunOptions, RunResult, SamplePair};
pub use jumps::{ExpComponent, MixedExpJump};
pub use model::{ContractKind, ContractSpec, ExerciseStyle, H32JParams, MarketState};
pub use sim::{PathBundle, TimeGrid};
