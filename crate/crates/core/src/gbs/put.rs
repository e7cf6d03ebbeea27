use super::variance::{variance_sensitivities, VarianceSensitivities};
use super::{check_spot_strike, check_tau, GbsEval, Moneyness, PsiPair, EPS_TAU};
use crate::jumps::MixedExpJump;
use crate::model::H32JParams;
use crate::normal::{cdf, pdf, tilted_tail};
use crate::{Error, Result};

/// Black–Scholes put value and its sensitivities in `s` and `σ̄`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BsPut {
    pub price: f64,
    pub delta: f64,
    pub vega: f64,
    pub vomma: f64,
    pub vanna: f64,
}

pub(crate) fn bs_put(s: f64, strike: f64, r: f64, q: f64, sigma_bar: f64, tau: f64) -> BsPut {
    let m = Moneyness::new(s / strike, r - q, sigma_bar, tau);
    let disc_k = strike * libm::exp(-r * tau);
    let disc_s = s * libm::exp(-q * tau);
    let n_d1 = cdf(-m.d1);
    let price = disc_k * cdf(-m.d2) - disc_s * n_d1;
    let vega = disc_k * pdf(m.d2) * libm::sqrt(tau);
    BsPut {
        price: price.max(0.0),
        delta: -libm::exp(-q * tau) * n_d1,
        vega,
        vomma: vega * m.d1 * m.d2 / sigma_bar,
        vanna: -libm::exp(-q * tau) * pdf(m.d1) * m.d2 / sigma_bar,
    }
}

/// First and second derivatives of `σ̄` in `ν` and `η`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SigmaChain {
    pub d_nu: f64,
    pub d_eta: f64,
    pub d2_nu: f64,
    pub d2_eta: f64,
}

impl SigmaChain {
    pub fn new(vs: &VarianceSensitivities, sigma_bar: f64) -> Self {
        let inv2 = 0.5 / sigma_bar;
        let inv4c = 0.25 / (sigma_bar * sigma_bar * sigma_bar);
        Self {
            d_nu: vs.d_nu * inv2,
            d_eta: vs.d_eta * inv2,
            d2_nu: vs.d2_nu * inv2 - vs.d_nu * vs.d_nu * inv4c,
            d2_eta: vs.d2_eta * inv2 - vs.d_eta * vs.d_eta * inv4c,
        }
    }
}

/// Effective volatility at a state, with its variance sensitivities. `None` in
/// the expiry regime `τ < EPS_TAU`.
pub(crate) fn effective_vol(
    params: &H32JParams,
    nu: f64,
    eta: f64,
    tau: f64,
) -> Result<(f64, VarianceSensitivities, bool)> {
    let vs = variance_sensitivities(params, nu, eta, tau)?;
    let sigma_bar = libm::sqrt(vs.value.max(0.0));
    let expired = tau < EPS_TAU;
    if !expired && !(sigma_bar > 0.0) {
        return Err(Error::Domain("effective volatility vanishes"));
    }
    Ok((sigma_bar, vs, expired))
}

fn intrinsic_eval(s: f64, strike: f64, q: f64, sigma_bar: f64, tau: f64) -> GbsEval {
    GbsEval {
        price: (strike - s).max(0.0),
        d_s: if s < strike { -libm::exp(-q * tau) } else { 0.0 },
        sigma_bar,
        tau,
        ..GbsEval::default()
    }
}

/// GBS price of a European put with strike `strike` and remaining maturity `tau`.
pub fn put_price_gbs(params: &H32JParams, s: f64, nu: f64, eta: f64, strike: f64, tau: f64) -> Result<f64> {
    check_spot_strike(s, strike)?;
    check_tau(tau)?;
    let (sigma_bar, _, expired) = effective_vol(params, nu, eta, tau)?;
    if expired {
        return Ok((strike - s).max(0.0));
    }
    Ok(bs_put(s, strike, params.r, params.delta, sigma_bar, tau).price)
}

/// GBS put price together with the seven derivatives of the generator difference.
pub fn put_greeks_gbs(params: &H32JParams, s: f64, nu: f64, eta: f64, strike: f64, tau: f64) -> Result<GbsEval> {
    check_spot_strike(s, strike)?;
    check_tau(tau)?;
    let (sigma_bar, vs, expired) = effective_vol(params, nu, eta, tau)?;
    if expired {
        return Ok(intrinsic_eval(s, strike, params.delta, sigma_bar, tau));
    }
    let bs = bs_put(s, strike, params.r, params.delta, sigma_bar, tau);
    let c = SigmaChain::new(&vs, sigma_bar);
    Ok(GbsEval {
        price: bs.price,
        d_s: bs.delta,
        d_nu: bs.vega * c.d_nu,
        d_eta: bs.vega * c.d_eta,
        d2_nu: bs.vomma * c.d_nu * c.d_nu + bs.vega * c.d2_nu,
        d2_eta: bs.vomma * c.d_eta * c.d_eta + bs.vega * c.d2_eta,
        ds_dnu: bs.vanna * c.d_nu,
        ds_deta: bs.vanna * c.d_eta,
        sigma_bar,
        tau,
    })
}

/// Jump-averaged put probabilities at moneyness `chi = s/K`:
///
/// ```text
/// Ψ₂ = ∫ N(−d₂ − y/(σ̄√ξ)) φ(y) dy,   Ψ₁ = ∫ e^y N(−d₁ − y/(σ̄√ξ)) φ(y) dy
/// ```
///
/// `carry` is `r − δ`.
pub fn psi_integrals(chi: f64, vol: f64, xi: f64, carry: f64, jumps: &MixedExpJump) -> Result<PsiPair> {
    if !(chi > 0.0 && vol > 0.0 && xi > 0.0) {
        return Err(Error::Domain("psi integrals need positive moneyness, volatility and maturity"));
    }
    jumps.check()?;
    Ok(psi_put(Moneyness::new(chi, carry, vol, xi), jumps))
}

pub(crate) fn psi_put(m: Moneyness, jumps: &MixedExpJump) -> PsiPair {
    let (n1, n2, v) = (cdf(-m.d1), cdf(-m.d2), m.v);
    let (mut up1, mut up2) = (0.0, 0.0);
    for c in &jumps.up {
        let a = c.rate;
        up2 += c.weight * (n2 - tilted_tail(m.d2, a * v));
        up1 += c.weight * a / (a - 1.0) * (n1 - tilted_tail(m.d1, (a - 1.0) * v));
    }
    let (mut dn1, mut dn2) = (0.0, 0.0);
    for c in &jumps.down {
        let b = c.rate;
        dn2 += c.weight * (n2 + tilted_tail(-m.d2, b * v));
        dn1 += c.weight * b / (b + 1.0) * (n1 + tilted_tail(-m.d1, (b + 1.0) * v));
    }
    let (pu, qd) = (jumps.p_up, jumps.p_down());
    PsiPair { psi1: pu * up1 + qd * dn1, psi2: pu * up2 + qd * dn2 }
}

/// `∫ V(s·e^y) φ(y) dy` for the GBS put.
pub fn put_jump_integral(params: &H32JParams, s: f64, nu: f64, eta: f64, strike: f64, tau: f64) -> Result<f64> {
    check_spot_strike(s, strike)?;
    check_tau(tau)?;
    params.jumps.check()?;
    let (sigma_bar, _, expired) = effective_vol(params, nu, eta, tau)?;
    Ok(put_jump_integral_raw(params, s, strike, sigma_bar, tau, expired))
}

pub(crate) fn put_jump_integral_raw(
    params: &H32JParams,
    s: f64,
    strike: f64,
    sigma_bar: f64,
    tau: f64,
    expired: bool,
) -> f64 {
    if expired {
        return intrinsic_jump_integral(&params.jumps, s, strike, libm::log(strike / s));
    }
    let psi = psi_put(Moneyness::new(s / strike, params.carry(), sigma_bar, tau), &params.jumps);
    strike * libm::exp(-params.r * tau) * psi.psi2 - s * libm::exp(-params.delta * tau) * psi.psi1
}

/// `∫_{y < cut} (K − s·e^y) φ(y) dy`; with `cut = ln(K/s)` this is the jump
/// average of the put payoff.
pub(crate) fn intrinsic_jump_integral(jumps: &MixedExpJump, s: f64, strike: f64, cut: f64) -> f64 {
    let (pu, qd) = (jumps.p_up, jumps.p_down());
    // ∫_{−∞}^{cut} e^y φ(y) dy
    let exp_moment = if cut < 0.0 {
        qd * jumps
            .down
            .iter()
            .map(|c| c.weight * c.rate / (c.rate + 1.0) * libm::exp((c.rate + 1.0) * cut))
            .sum::<f64>()
    } else {
        qd * jumps.down.iter().map(|c| c.weight * c.rate / (c.rate + 1.0)).sum::<f64>()
            + pu * jumps
                .up
                .iter()
                .map(|c| c.weight * c.rate / (c.rate - 1.0) * -libm::expm1(-(c.rate - 1.0) * cut))
                .sum::<f64>()
    };
    (strike * jumps.cdf(cut) - s * exp_moment).max(0.0)
}
