use super::barrier::{uop_greeks_gbs, uop_jump_integral_raw};
use super::put::{effective_vol, put_greeks_gbs, put_jump_integral_raw};
use super::{check_spot_strike, GbsEval, EPS_TAU};
use crate::model::{ContractKind, ContractSpec, H32JParams, MarketState};
use crate::{Error, Result};

fn tau_of(contract: &ContractSpec, state: &MarketState) -> f64 {
    (contract.maturity - state.t).max(0.0)
}

/// European GBS value and Greeks of `contract` at `state`. Knocked-out states
/// evaluate to zero.
pub fn value_and_greeks(contract: &ContractSpec, state: &MarketState, params: &H32JParams) -> Result<GbsEval> {
    let tau = tau_of(contract, state);
    if !state.alive {
        return Ok(GbsEval { tau, ..GbsEval::default() });
    }
    let (s, nu, eta, k) = (state.s, state.nu, state.eta, contract.strike);
    match contract.kind {
        ContractKind::VanillaPut => put_greeks_gbs(params, s, nu, eta, k, tau),
        ContractKind::UpAndOutPut => uop_greeks_gbs(params, s, nu, eta, k, contract.barrier_level(), tau),
    }
}

/// `∫ V(s·e^y) φ(y) dy` for the contract's GBS value at `state`.
pub fn jump_integral(contract: &ContractSpec, state: &MarketState, params: &H32JParams) -> Result<f64> {
    if !state.alive {
        return Ok(0.0);
    }
    let tau = tau_of(contract, state);
    check_spot_strike(state.s, contract.strike)?;
    let (sigma_bar, _, expired) = effective_vol(params, state.nu, state.eta, tau)?;
    Ok(match contract.kind {
        ContractKind::VanillaPut => put_jump_integral_raw(params, state.s, contract.strike, sigma_bar, tau, expired),
        ContractKind::UpAndOutPut => {
            uop_jump_integral_raw(params, state.s, contract.strike, contract.barrier_level(), sigma_bar, tau, expired)
        }
    })
}

/// Difference between the true and the approximate generators applied to the
/// GBS value:
///
/// ```text
/// (𝒜_X − 𝒜_X̄)V = −λζ s ∂_S V + ½σ1²ν ∂²_ν V + ρ1 c1 σ1 s ν ∂_S∂_ν V
///               + ½σ2²η³ ∂²_η V + ρ2 c2 σ2 s η² ∂_S∂_η V + λ(∫ V(s e^y) φ(y) dy − V)
/// ```
pub fn operator_difference(contract: &ContractSpec, state: &MarketState, params: &H32JParams) -> Result<f64> {
    if !state.alive {
        return Err(Error::DeadState);
    }
    if contract.maturity - state.t <= EPS_TAU {
        return Err(Error::Domain("generator difference needs positive remaining maturity"));
    }
    let g = value_and_greeks(contract, state, params)?;
    let zeta = params.jumps.zeta()?;
    assemble(params, state, zeta, &g, || jump_integral(contract, state, params))
}

/// Sums the generator terms. The jump integral is only evaluated when `λ > 0`.
pub(crate) fn assemble(
    params: &H32JParams,
    state: &MarketState,
    zeta: f64,
    g: &GbsEval,
    jump_integral: impl FnOnce() -> Result<f64>,
) -> Result<f64> {
    let (s, nu, eta) = (state.s, state.nu, state.eta);
    let diffusion = 0.5 * params.sigma1 * params.sigma1 * nu * g.d2_nu
        + params.rho1 * params.c1 * params.sigma1 * s * nu * g.ds_dnu
        + 0.5 * params.sigma2 * params.sigma2 * eta * eta * eta * g.d2_eta
        + params.rho2 * params.c2 * params.sigma2 * s * eta * eta * g.ds_deta;
    let jumps = if params.lambda > 0.0 { params.lambda * (jump_integral()? - g.price - zeta * s * g.d_s) } else { 0.0 };
    Ok(diffusion + jumps)
}
