use super::{check_tau, EPS_TAU};
use crate::model::H32JParams;
use crate::{Error, Result};

/// `σ̄²_τ` and its partial derivatives in the two variance factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceSensitivities {
    pub value: f64,
    pub d_nu: f64,
    pub d_eta: f64,
    pub d2_nu: f64,
    pub d2_eta: f64,
}

/// Time-averaged variance of the approximate market over `[0, τ]`:
///
/// ```text
/// σ̄²_τ = c1²θ1 + c2²θ2 + c1²(ν − θ1)(1 − e^{−κ1τ})/(κ1τ)
///        + c2²/(κ2τ) · ln(η/θ2 + (1 − η/θ2) e^{−κ2θ2τ})
/// ```
///
/// Below `EPS_TAU` the limit `c1²ν + c2²η` is returned.
pub fn deterministic_variance(params: &H32JParams, nu: f64, eta: f64, tau: f64) -> Result<f64> {
    variance_sensitivities(params, nu, eta, tau).map(|v| v.value)
}

pub fn variance_sensitivities(params: &H32JParams, nu: f64, eta: f64, tau: f64) -> Result<VarianceSensitivities> {
    check_tau(tau)?;
    if !(nu >= 0.0 && eta >= 0.0) {
        return Err(Error::Domain("variance factors must be nonnegative"));
    }
    let c1sq = params.c1 * params.c1;
    let c2sq = params.c2 * params.c2;
    if tau < EPS_TAU {
        return Ok(VarianceSensitivities {
            value: c1sq * nu + c2sq * eta,
            d_nu: c1sq,
            d_eta: c2sq,
            d2_nu: 0.0,
            d2_eta: 0.0,
        });
    }

    let x1 = params.kappa1 * tau;
    // (1 − e^{−x})/x
    let w1 = -libm::expm1(-x1) / x1;
    let one_minus_e2 = -libm::expm1(-params.kappa2 * params.theta2 * tau);
    let e2 = 1.0 - one_minus_e2;
    // η/θ2 + (1 − η/θ2)e^{−κ2θ2τ} = 1 + (η/θ2 − 1)(1 − e^{−κ2θ2τ})
    let u = (eta / params.theta2 - 1.0) * one_minus_e2;
    if !(u > -1.0) {
        return Err(Error::Domain("deterministic variance log argument must be positive"));
    }
    let scale2 = c2sq / (params.kappa2 * tau);
    let value =
        c1sq * params.theta1 + c2sq * params.theta2 + c1sq * (nu - params.theta1) * w1 + scale2 * libm::log1p(u);

    let ratio = one_minus_e2 / (eta + (params.theta2 - eta) * e2);
    Ok(VarianceSensitivities {
        value,
        d_nu: c1sq * w1,
        d_eta: scale2 * ratio,
        d2_nu: 0.0,
        d2_eta: -scale2 * ratio * ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_start_is_flat() {
        let p = H32JParams::reference();
        for tau in [1e-9, 1e-3, 0.1, 0.5, 2.0, 10.0] {
            let v = deterministic_variance(&p, 0.01, 0.01, tau).unwrap();
            assert!((v - 0.02).abs() < 1e-16, "tau {tau}: {v}");
        }
    }

    #[test]
    fn heston_only_example() {
        let mut p = H32JParams::reference();
        p.c2 = 0.0;
        let v = deterministic_variance(&p, 0.02, 0.5, 0.5).unwrap();
        assert!((v - 0.018_639_392_643_942_738).abs() < 1e-15);
    }

    #[test]
    fn small_tau_limit_is_continuous() {
        let p = H32JParams::reference();
        let below = deterministic_variance(&p, 0.03, 0.002, EPS_TAU * 0.999_999).unwrap();
        let above = deterministic_variance(&p, 0.03, 0.002, EPS_TAU).unwrap();
        assert!((below - 0.032).abs() < 1e-16);
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn derivatives_match_differences() {
        let p = H32JParams::reference();
        let (nu, eta, tau) = (0.013, 0.008, 0.37);
        let s = variance_sensitivities(&p, nu, eta, tau).unwrap();
        let f = |n: f64, e: f64| deterministic_variance(&p, n, e, tau).unwrap();
        let h = 1e-6;
        let fd_nu = (f(nu + h, eta) - f(nu - h, eta)) / (2.0 * h);
        let fd_eta = (f(nu, eta + h) - f(nu, eta - h)) / (2.0 * h);
        let h2 = 1e-4;
        let fd2_eta = (f(nu, eta + h2) - 2.0 * f(nu, eta) + f(nu, eta - h2)) / (h2 * h2);
        assert!((s.d_nu - fd_nu).abs() < 1e-8);
        assert!((s.d_eta - fd_eta).abs() < 1e-8);
        assert!((s.d2_eta - fd2_eta).abs() < 1e-4 * s.d2_eta.abs());
    }

    #[test]
    fn negative_factor_is_a_domain_error() {
        let p = H32JParams::reference();
        assert!(deterministic_variance(&p, -0.01, 0.01, 0.5).is_err());
    }
}
