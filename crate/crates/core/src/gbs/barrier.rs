use super::put::{bs_put, effective_vol, intrinsic_jump_integral, psi_put, BsPut, SigmaChain};
use super::{check_spot_strike, check_tau, GbsEval, Moneyness, PsiPair};
use crate::jumps::MixedExpJump;
use crate::model::H32JParams;
use crate::normal::{cdf, tilted_tail};
use crate::{Error, Result};

/// Rates closer to zero than this are nudged away; the blocks have a removable
/// singularity there.
const MIN_RATE: f64 = 1e-9;

#[inline]
fn nonzero(rate: f64) -> f64 {
    if rate.abs() < MIN_RATE {
        MIN_RATE.copysign(rate)
    } else {
        rate
    }
}

/// `x·y` that treats `0·∞` as 0. The reflection factor `(H/s)^m` can overflow
/// exactly when the reflected put underflows.
#[inline]
fn mul0(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        x * y
    }
}

/// Reflection data of the up-and-out decomposition `V(s) − (H/s)^m V(H²/s)`.
struct Reflection {
    m: f64,
    log_hs: f64,
    factor: f64,
    mirror: BsPut,
}

fn reflection(params: &H32JParams, s: f64, strike: f64, barrier: f64, sigma_bar: f64, tau: f64) -> Reflection {
    let m = 2.0 * params.carry() / (sigma_bar * sigma_bar) - 1.0;
    let log_hs = libm::log(barrier / s);
    Reflection {
        m,
        log_hs,
        factor: libm::exp(m * log_hs),
        mirror: bs_put(barrier * barrier / s, strike, params.r, params.delta, sigma_bar, tau),
    }
}

fn check_barrier(barrier: f64) -> Result<()> {
    if !(barrier > 0.0) {
        return Err(Error::Domain("barrier must be positive"));
    }
    Ok(())
}

/// GBS price of a European up-and-out put; zero at or above the barrier.
pub fn uop_price_gbs(
    params: &H32JParams,
    s: f64,
    nu: f64,
    eta: f64,
    strike: f64,
    barrier: f64,
    tau: f64,
) -> Result<f64> {
    check_spot_strike(s, strike)?;
    check_barrier(barrier)?;
    check_tau(tau)?;
    if s >= barrier {
        return Ok(0.0);
    }
    let (sigma_bar, _, expired) = effective_vol(params, nu, eta, tau)?;
    if expired {
        return Ok((strike - s).max(0.0));
    }
    let v = bs_put(s, strike, params.r, params.delta, sigma_bar, tau);
    let refl = reflection(params, s, strike, barrier, sigma_bar, tau);
    Ok(v.price - mul0(refl.factor, refl.mirror.price))
}

/// Up-and-out put price with the seven generator derivatives. The exponent
/// `m = 2(γ − 1)` depends on `σ̄`, which adds `ln(H/s)` terms to the `ν`/`η`
/// derivatives.
pub fn uop_greeks_gbs(
    params: &H32JParams,
    s: f64,
    nu: f64,
    eta: f64,
    strike: f64,
    barrier: f64,
    tau: f64,
) -> Result<GbsEval> {
    check_spot_strike(s, strike)?;
    check_barrier(barrier)?;
    check_tau(tau)?;
    let (sigma_bar, vs, expired) = effective_vol(params, nu, eta, tau)?;
    if s >= barrier {
        return Ok(GbsEval { sigma_bar, tau, ..GbsEval::default() });
    }
    if expired {
        return Ok(GbsEval {
            price: (strike - s).max(0.0),
            d_s: if s < strike { -libm::exp(-params.delta * tau) } else { 0.0 },
            sigma_bar,
            tau,
            ..GbsEval::default()
        });
    }

    let v = bs_put(s, strike, params.r, params.delta, sigma_bar, tau);
    let Reflection { m, log_hs: l, factor: p, mirror: w } = reflection(params, s, strike, barrier, sigma_bar, tau);
    let c = SigmaChain::new(&vs, sigma_bar);
    let h2 = (barrier / s) * (barrier / s);
    let carry = params.carry();
    let sb2 = sigma_bar * sigma_bar;
    let sb4 = sb2 * sb2;

    // (first, second, cross) derivatives in one variance factor.
    let factor = |dsig2: f64, d2sig2: f64, dsb: f64, d2sb: f64| {
        let g = -2.0 * carry / sb4 * dsig2;
        let dg = 4.0 * carry / (sb4 * sb2) * dsig2 * dsig2 - 2.0 * carry / sb4 * d2sig2;
        let w1 = w.vega * dsb;
        let w2 = w.vomma * dsb * dsb + w.vega * d2sb;
        let ws1 = w.vanna * dsb;
        let first = v.vega * dsb - mul0(p, l * g * w.price + w1);
        let second = v.vomma * dsb * dsb + v.vega * d2sb
            - mul0(p, l * l * g * g * w.price + 2.0 * l * g * w1 + l * dg * w.price + w2);
        let cross = v.vanna * dsb
            + mul0(p, g / s * w.price + m / s * l * g * w.price + m / s * w1 + l * g * h2 * w.delta + h2 * ws1);
        (first, second, cross)
    };
    let (d_nu, d2_nu, ds_dnu) = factor(vs.d_nu, vs.d2_nu, c.d_nu, c.d2_nu);
    let (d_eta, d2_eta, ds_deta) = factor(vs.d_eta, vs.d2_eta, c.d_eta, c.d2_eta);

    Ok(GbsEval {
        price: v.price - mul0(p, w.price),
        d_s: v.delta + mul0(p, m / s * w.price + h2 * w.delta),
        d_nu,
        d_eta,
        d2_nu,
        d2_eta,
        ds_dnu,
        ds_deta,
        sigma_bar,
        tau,
    })
}

/// Jump-averaged probabilities of the reflected put at `chi = H²/(sK)`, weighted
/// by `e^{−2(γ−1)y}`:
///
/// ```text
/// Ψ_{B,2} = ∫ N(−d₂ + y/(σ̄√ξ)) e^{−2(γ−1)y} φ(y) dy
/// Ψ_{B,1} = ∫ N(−d₁ + y/(σ̄√ξ)) e^{−(2γ−1)y} φ(y) dy
/// ```
///
/// Requires `a_i + 2(γ − 1) > 0` and `b_j − 2γ + 1 > 0` for every component.
pub fn psi_barrier(chi: f64, vol: f64, xi: f64, carry: f64, gamma: f64, jumps: &MixedExpJump) -> Result<PsiPair> {
    if !(chi > 0.0 && vol > 0.0 && xi > 0.0) {
        return Err(Error::Domain("psi integrals need positive moneyness, volatility and maturity"));
    }
    jumps.check()?;
    let m = 2.0 * (gamma - 1.0);
    check_integrability(m, jumps)?;
    Ok(psi_barrier_raw(Moneyness::new(chi, carry, vol, xi), m, jumps))
}

fn check_integrability(m: f64, jumps: &MixedExpJump) -> Result<()> {
    if let Some(index) = jumps.up.iter().position(|c| !(c.rate + m > 0.0)) {
        return Err(Error::BarrierIntegralDivergent { branch: "up", index, condition: "a_i + 2(gamma - 1) > 0" });
    }
    if let Some(index) = jumps.down.iter().position(|c| !(c.rate - m - 1.0 > 0.0)) {
        return Err(Error::BarrierIntegralDivergent { branch: "down", index, condition: "b_j - 2 gamma + 1 > 0" });
    }
    Ok(())
}

fn psi_barrier_raw(mb: Moneyness, m: f64, jumps: &MixedExpJump) -> PsiPair {
    let (n1, n2, v) = (cdf(-mb.d1), cdf(-mb.d2), mb.v);
    let (mut up1, mut up2) = (0.0, 0.0);
    for c in &jumps.up {
        let a = c.rate;
        let r2 = nonzero(a + m);
        let r1 = nonzero(a + m + 1.0);
        up2 += c.weight * a / r2 * (n2 + tilted_tail(-mb.d2, r2 * v));
        up1 += c.weight * a / r1 * (n1 + tilted_tail(-mb.d1, r1 * v));
    }
    let (mut dn1, mut dn2) = (0.0, 0.0);
    for c in &jumps.down {
        let b = c.rate;
        let r2 = nonzero(b - m);
        let r1 = nonzero(b - m - 1.0);
        dn2 += c.weight * b / r2 * (n2 - tilted_tail(mb.d2, r2 * v));
        dn1 += c.weight * b / r1 * (n1 - tilted_tail(mb.d1, r1 * v));
    }
    let (pu, qd) = (jumps.p_up, jumps.p_down());
    PsiPair { psi1: pu * up1 + qd * dn1, psi2: pu * up2 + qd * dn2 }
}

/// `∫_ℓ^∞ N(c + σ·y/v) ρ e^{−ρy} dy` with `σ = ±1`.
#[inline]
fn tail_block(c: f64, sign: f64, rho: f64, ell: f64, v: f64) -> f64 {
    libm::exp(-rho * ell) * (cdf(c + sign * ell / v) + sign * tilted_tail(sign * c + ell / v, rho * v))
}

/// Jump integral of the up-and-out put over the full real line, treating the
/// reflection formula as valid beyond the barrier. It differs from
/// [`uop_jump_integral`] by the contribution of jumps that land at or above `H`.
pub fn uop_jump_integral_untruncated(
    params: &H32JParams,
    s: f64,
    nu: f64,
    eta: f64,
    strike: f64,
    barrier: f64,
    tau: f64,
) -> Result<f64> {
    check_spot_strike(s, strike)?;
    check_barrier(barrier)?;
    check_tau(tau)?;
    params.jumps.check()?;
    let (sigma_bar, _, expired) = effective_vol(params, nu, eta, tau)?;
    if expired {
        return Err(Error::Domain("remaining maturity too short for the reflection formula"));
    }
    check_integrability(2.0 * params.carry() / (sigma_bar * sigma_bar) - 1.0, &params.jumps)?;
    Ok(untruncated_raw(params, s, strike, barrier, sigma_bar, tau).0)
}

struct UntruncatedParts {
    mk: Moneyness,
    mb: Moneyness,
    m: f64,
    factor: f64,
}

fn untruncated_raw(
    params: &H32JParams,
    s: f64,
    strike: f64,
    barrier: f64,
    sigma_bar: f64,
    tau: f64,
) -> (f64, UntruncatedParts) {
    let carry = params.carry();
    let disc_k = strike * libm::exp(-params.r * tau);
    let mk = Moneyness::new(s / strike, carry, sigma_bar, tau);
    let psi = psi_put(mk, &params.jumps);
    let direct = disc_k * psi.psi2 - s * libm::exp(-params.delta * tau) * psi.psi1;

    let m = 2.0 * carry / (sigma_bar * sigma_bar) - 1.0;
    let mirror_spot = barrier * barrier / s;
    let mb = Moneyness::new(mirror_spot / strike, carry, sigma_bar, tau);
    let psib = psi_barrier_raw(mb, m, &params.jumps);
    let reflected = disc_k * psib.psi2 - mirror_spot * libm::exp(-params.delta * tau) * psib.psi1;
    let factor = libm::exp(m * libm::log(barrier / s));
    (direct - mul0(factor, reflected), UntruncatedParts { mk, mb, m, factor })
}

/// `∫ V_UOP(s·e^y) φ(y) dy` with `V_UOP = 0` for `s·e^y ≥ H`.
///
/// Jumps through the barrier kill the contract, so the upward components are
/// integrated only up to `ln(H/s)`. The finite-interval blocks stay well
/// defined whatever the sign of `a_i + 2(γ − 1)` and `b_j − 2γ + 1`.
pub fn uop_jump_integral(
    params: &H32JParams,
    s: f64,
    nu: f64,
    eta: f64,
    strike: f64,
    barrier: f64,
    tau: f64,
) -> Result<f64> {
    check_spot_strike(s, strike)?;
    check_barrier(barrier)?;
    check_tau(tau)?;
    params.jumps.check()?;
    if s >= barrier {
        return Ok(0.0);
    }
    let (sigma_bar, _, expired) = effective_vol(params, nu, eta, tau)?;
    Ok(uop_jump_integral_raw(params, s, strike, barrier, sigma_bar, tau, expired))
}

pub(crate) fn uop_jump_integral_raw(
    params: &H32JParams,
    s: f64,
    strike: f64,
    barrier: f64,
    sigma_bar: f64,
    tau: f64,
    expired: bool,
) -> f64 {
    if s >= barrier {
        return 0.0;
    }
    let ell = libm::log(barrier / s);
    if expired {
        let cut = libm::log(strike / s).min(ell);
        return intrinsic_jump_integral(&params.jumps, s, strike, cut);
    }
    let (full, UntruncatedParts { mk, mb, m, factor }) = untruncated_raw(params, s, strike, barrier, sigma_bar, tau);
    let disc_k = strike * libm::exp(-params.r * tau);
    let disc_q = libm::exp(-params.delta * tau);
    let mirror_spot = barrier * barrier / s;
    let v = mk.v;

    let mut tail = 0.0;
    for c in &params.jumps.up {
        let a = c.rate;
        let direct = disc_k * tail_block(-mk.d2, -1.0, a, ell, v)
            - s * disc_q * a / (a - 1.0) * tail_block(-mk.d1, -1.0, a - 1.0, ell, v);
        let r2 = nonzero(a + m);
        let r1 = nonzero(a + m + 1.0);
        let reflected = disc_k * a / r2 * tail_block(-mb.d2, 1.0, r2, ell, v)
            - mirror_spot * disc_q * a / r1 * tail_block(-mb.d1, 1.0, r1, ell, v);
        tail += c.weight * (direct - mul0(factor, reflected));
    }
    full - params.jumps.p_up * tail
}

#[cfg(test)]
mod tests {
    use super::super::put::{psi_integrals, put_greeks_gbs, put_jump_integral, put_price_gbs};
    use super::*;
    use crate::jumps::ExpComponent;
    use alloc::vec;

    fn p() -> H32JParams {
        H32JParams::reference()
    }

    #[test]
    fn knocked_out_at_barrier() {
        assert_eq!(uop_price_gbs(&p(), 110.0, 0.01, 0.01, 100.0, 110.0, 0.5).unwrap(), 0.0);
        assert_eq!(uop_jump_integral(&p(), 111.0, 0.01, 0.01, 100.0, 110.0, 0.5).unwrap(), 0.0);
        let g = uop_greeks_gbs(&p(), 120.0, 0.01, 0.01, 100.0, 110.0, 0.5).unwrap();
        assert_eq!((g.price, g.d_s, g.d2_eta), (0.0, 0.0, 0.0));
    }

    #[test]
    fn atm_example() {
        let v = uop_price_gbs(&p(), 100.0, 0.01, 0.01, 100.0, 110.0, 0.5).unwrap();
        assert!((v - 2.944_773_685_399_185).abs() < 1e-12, "{v}");
    }

    #[test]
    fn remote_barrier_is_vanilla() {
        let q = p();
        let (s, nu, eta, k, tau) = (97.0, 0.012, 0.009, 100.0, 0.4);
        let v = put_price_gbs(&q, s, nu, eta, k, tau).unwrap();
        let u = uop_price_gbs(&q, s, nu, eta, k, 1e6, tau).unwrap();
        assert!((u - v).abs() < 1e-9);
        let gv = put_greeks_gbs(&q, s, nu, eta, k, tau).unwrap();
        let gu = uop_greeks_gbs(&q, s, nu, eta, k, 1e6, tau).unwrap();
        for (a, b) in [
            (gu.d_s, gv.d_s),
            (gu.d_nu, gv.d_nu),
            (gu.d_eta, gv.d_eta),
            (gu.d2_nu, gv.d2_nu),
            (gu.d2_eta, gv.d2_eta),
            (gu.ds_dnu, gv.ds_dnu),
            (gu.ds_deta, gv.ds_deta),
        ] {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        let ji = put_jump_integral(&q, s, nu, eta, k, tau).unwrap();
        let ju = uop_jump_integral(&q, s, nu, eta, k, 1e6, tau).unwrap();
        assert!((ji - ju).abs() < 1e-6);
    }

    #[test]
    fn jump_integral_ignores_intensity() {
        let mut q = p();
        let a = uop_jump_integral(&q, 100.0, 0.01, 0.01, 100.0, 110.0, 0.5).unwrap();
        q.lambda = 0.1;
        let b = uop_jump_integral(&q, 100.0, 0.01, 0.01, 100.0, 110.0, 0.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn divergence_is_named() {
        let jumps = MixedExpJump::double_exponential(0.3, 100.0, 4.0);
        // b = 2γ − 1 with γ = 2.5.
        let err = psi_barrier(1.2, 0.14, 0.5, 0.04, 2.5, &jumps).unwrap_err();
        assert_eq!(
            err,
            Error::BarrierIntegralDivergent { branch: "down", index: 0, condition: "b_j - 2 gamma + 1 > 0" }
        );
        let err = psi_barrier(1.2, 0.14, 0.5, 0.04, -60.0, &jumps).unwrap_err();
        assert!(matches!(err, Error::BarrierIntegralDivergent { branch: "up", .. }));
    }

    #[test]
    fn unit_gamma_mirrors_the_put_blocks() {
        let jumps = MixedExpJump::new(
            0.3,
            vec![ExpComponent::new(0.6, 30.0), ExpComponent::new(0.4, 80.0)],
            vec![ExpComponent::new(1.0, 25.0)],
        )
        .unwrap();
        let mirrored = MixedExpJump::new(
            0.7,
            vec![ExpComponent::new(1.0, 25.0)],
            vec![ExpComponent::new(0.6, 30.0), ExpComponent::new(0.4, 80.0)],
        )
        .unwrap();
        let (chi, vol, xi, carry) = (1.1, 0.15, 0.7, 0.03);
        let b = psi_barrier(chi, vol, xi, carry, 1.0, &jumps).unwrap();
        let mb = Moneyness::new(chi, carry, vol, xi);
        // Mirroring y → −y turns N(−d + y/v) into N(−d − y/v).
        let a = psi_put(mb, &mirrored);
        assert!((a.psi2 - b.psi2).abs() < 1e-14);
        assert!((a.psi1 - b.psi1).abs() < 1e-14);
        let _ = psi_integrals(chi, vol, xi, carry, &mirrored).unwrap();
    }

    #[test]
    fn drift_cancellation_leaves_direct_terms() {
        let mut q = p();
        q.delta = q.r;
        let (s, nu, eta, k, h, tau) = (95.0, 0.015, 0.007, 100.0, 112.0, 0.45);
        let g = uop_greeks_gbs(&q, s, nu, eta, k, h, tau).unwrap();
        // With r = δ the reflection factor is (H/s)^{-1} and independent of σ̄.
        let sb = g.sigma_bar;
        let vs = crate::gbs::variance_sensitivities(&q, nu, eta, tau).unwrap();
        let w = bs_put(h * h / s, k, q.r, q.delta, sb, tau);
        let v = bs_put(s, k, q.r, q.delta, sb, tau);
        let dsb = vs.d_nu / (2.0 * sb);
        let want = (v.vega - s / h * w.vega) * dsb;
        assert!((g.d_nu - want).abs() < 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn truncation_matters_near_the_barrier() {
        let q = p();
        let full = uop_jump_integral_untruncated(&q, 108.0, 0.01, 0.01, 100.0, 110.0, 0.5).unwrap();
        let cut = uop_jump_integral(&q, 108.0, 0.01, 0.01, 100.0, 110.0, 0.5).unwrap();
        // Beyond the barrier the reflection formula is negative, so removing it raises the value.
        assert!(cut > full);
    }
}
