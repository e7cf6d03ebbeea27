//! Closed-form analytics of the generalized Black–Scholes (GBS) approximate market.
//!
//! In the approximate market the two variance factors follow their deterministic
//! trends, so a put with remaining maturity `τ` is priced by Black–Scholes with
//! the time-averaged variance `σ̄²_τ(ν, η)`. Everything here is a function of the
//! current state `(s, ν, η)` and `τ`: prices, the seven Greeks entering the
//! generator difference, and the jump integrals `∫ V(s·e^y) φ(y) dy`.

mod barrier;
pub(crate) mod generator;
mod put;
mod variance;

pub use barrier::{psi_barrier, uop_greeks_gbs, uop_jump_integral, uop_jump_integral_untruncated, uop_price_gbs};
pub use generator::{jump_integral, operator_difference, value_and_greeks};
pub use put::{psi_integrals, put_greeks_gbs, put_jump_integral, put_price_gbs};
pub use variance::{deterministic_variance, variance_sensitivities, VarianceSensitivities};

/// Remaining maturity below which prices collapse to intrinsic value.
pub const EPS_TAU: f64 = 1e-8;

/// Price, the seven derivatives of the generator difference, and the effective
/// volatility at one state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GbsEval {
    pub price: f64,
    pub d_s: f64,
    pub d_nu: f64,
    pub d_eta: f64,
    pub d2_nu: f64,
    pub d2_eta: f64,
    pub ds_dnu: f64,
    pub ds_deta: f64,
    pub sigma_bar: f64,
    pub tau: f64,
}

/// Spot-leg (`psi1`) and strike-leg (`psi2`) jump-averaged probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiPair {
    pub psi1: f64,
    pub psi2: f64,
}

/// Black–Scholes `d1`, `d2` and total volatility `v = σ̄√τ` for moneyness `chi = s/K`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Moneyness {
    pub d1: f64,
    pub d2: f64,
    pub v: f64,
}

impl Moneyness {
    #[inline]
    pub fn new(chi: f64, carry: f64, sigma_bar: f64, tau: f64) -> Self {
        let v = sigma_bar * libm::sqrt(tau);
        let d1 = (libm::log(chi) + carry * tau) / v + 0.5 * v;
        Self { d1, d2: d1 - v, v }
    }
}

pub(crate) fn check_spot_strike(s: f64, strike: f64) -> crate::Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(crate::Error::Domain("spot must be positive"));
    }
    if !(strike > 0.0 && strike.is_finite()) {
        return Err(crate::Error::Domain("strike must be positive"));
    }
    Ok(())
}

pub(crate) fn check_tau(tau: f64) -> crate::Result<()> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(crate::Error::Domain("remaining maturity must be nonnegative"));
    }
    Ok(())
}
