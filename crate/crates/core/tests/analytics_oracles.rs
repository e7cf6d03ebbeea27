//! Closed forms against brute-force quadrature and finite differences.

use jdoi_core::gbs::{
    deterministic_variance, operator_difference, psi_barrier, psi_integrals, put_greeks_gbs, put_jump_integral,
    put_price_gbs, uop_greeks_gbs, uop_jump_integral, uop_price_gbs, GbsEval,
};
use jdoi_core::jumps::{ExpComponent, MixedExpJump};
use jdoi_core::{ContractSpec, ExerciseStyle, H32JParams, MarketState};
use jdoi_oracles::{
    fd_greeks, integrate, killed_lognormal_expectation, lognormal_expectation, normal_cdf, quad_jump_integral, FdBumps,
    FdGreeks, QuadratureSpec,
};

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn halton(mut i: usize, base: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `(s/K, τ, H/K)` over `[0.5, 2] × [0.05, 1] × [1.05, 1.5]`.
fn lattice(n: usize) -> Vec<(f64, f64, f64)> {
    (1..=n).map(|i| (0.5 + 1.5 * halton(i, 2), 0.05 + 0.95 * halton(i, 3), 1.05 + 0.45 * halton(i, 5))).collect()
}

/// σ̄² from integrating the deterministic variance trajectories over `[0, τ]`.
fn sigma_bar_sq(p: &H32JParams, nu: f64, eta: f64, tau: f64) -> f64 {
    let nu_t = |t: f64| p.theta1 + (nu - p.theta1) * (-p.kappa1 * t).exp();
    let eta_t = |t: f64| p.theta2 / (1.0 + (p.theta2 / eta - 1.0) * (-p.kappa2 * p.theta2 * t).exp());
    let f = |t: f64| p.c1 * p.c1 * nu_t(t) + p.c2 * p.c2 * eta_t(t);
    integrate(f, 0.0, tau, &spec()).unwrap() / tau
}

fn put_by_quadrature(p: &H32JParams, s: f64, nu: f64, eta: f64, k: f64, tau: f64) -> f64 {
    let vol = sigma_bar_sq(p, nu, eta, tau).sqrt();
    let carry = p.r - p.delta;
    (-p.r * tau).exp() * lognormal_expectation(|x| (k - x).max(0.0), s, carry, vol, tau, &[k], &spec()).unwrap()
}

fn uop_by_quadrature(p: &H32JParams, s: f64, nu: f64, eta: f64, k: f64, h: f64, tau: f64) -> f64 {
    let vol = sigma_bar_sq(p, nu, eta, tau).sqrt();
    let carry = p.r - p.delta;
    (-p.r * tau).exp()
        * killed_lognormal_expectation(|x| (k - x).max(0.0), s, carry, vol, tau, h, &[k], &spec()).unwrap()
}

#[test]
fn deterministic_variance_matches_integrated_trajectories() {
    let p = H32JParams::reference();
    for &(nu, eta, tau) in &[(0.01, 0.01, 0.5), (0.02, 0.01, 0.5), (0.004, 0.03, 1.0), (0.03, 0.002, 0.05)] {
        let got = deterministic_variance(&p, nu, eta, tau).unwrap();
        let want = sigma_bar_sq(&p, nu, eta, tau);
        assert!((got - want).abs() < 1e-12 * want, "{nu} {eta} {tau}: {got} vs {want}");
    }
    let mut heston = p.clone();
    heston.c2 = 0.0;
    let got = deterministic_variance(&heston, 0.02, 0.01, 0.5).unwrap();
    assert!((got - sigma_bar_sq(&heston, 0.02, 0.01, 0.5)).abs() < 1e-14);
    assert!((got - 0.018_639_392_643_942_74).abs() < 1e-15);
}

#[test]
fn put_price_matches_lognormal_quadrature() {
    let p = H32JParams::reference();
    let got = put_price_gbs(&p, 100.0, 0.01, 0.01, 100.0, 0.5).unwrap();
    assert!((got - put_by_quadrature(&p, 100.0, 0.01, 0.01, 100.0, 0.5)).abs() < 1e-9);
    assert!((got - 3.0368).abs() < 1e-4);
    for (chi, tau, _) in lattice(50) {
        let got = put_price_gbs(&p, 100.0 * chi, 0.012, 0.008, 100.0, tau).unwrap();
        let want = put_by_quadrature(&p, 100.0 * chi, 0.012, 0.008, 100.0, tau);
        assert!((got - want).abs() < 1e-9, "chi {chi} tau {tau}: {got} vs {want}");
    }
}

#[test]
fn uop_price_matches_killed_quadrature() {
    let p = H32JParams::reference();
    let got = uop_price_gbs(&p, 100.0, 0.01, 0.01, 100.0, 110.0, 0.5).unwrap();
    assert!((got - uop_by_quadrature(&p, 100.0, 0.01, 0.01, 100.0, 110.0, 0.5)).abs() < 1e-9);
    assert!((got - 2.94).abs() < 5e-3);
    for (chi, tau, hk) in lattice(50) {
        let s = 100.0 * chi;
        let got = uop_price_gbs(&p, s, 0.012, 0.008, 100.0, 100.0 * hk, tau).unwrap();
        let want = uop_by_quadrature(&p, s, 0.012, 0.008, 100.0, 100.0 * hk, tau);
        assert!((got - want).abs() < 1e-9, "chi {chi} tau {tau} H/K {hk}: {got} vs {want}");
    }
}

fn d12(x: f64, carry: f64, vol: f64, xi: f64) -> (f64, f64) {
    let v = vol * xi.sqrt();
    let d1 = (x.ln() + (carry + 0.5 * vol * vol) * xi) / v;
    (d1, d1 - v)
}

fn mixtures() -> Vec<MixedExpJump> {
    vec![
        MixedExpJump::double_exponential(0.3, 100.0, 25.0),
        MixedExpJump::new(
            0.45,
            vec![ExpComponent::new(1.4, 30.0), ExpComponent::new(-0.4, 60.0)],
            vec![ExpComponent::new(0.6, 12.0), ExpComponent::new(0.4, 40.0)],
        )
        .unwrap(),
    ]
}

#[test]
fn psi_blocks_match_quadrature() {
    let carry = 0.04;
    for jumps in mixtures() {
        for (chi, xi, _) in lattice(50) {
            let vol = 0.02f64.sqrt() * (0.7 + 0.6 * chi / 2.0);
            let got = psi_integrals(chi, vol, xi, carry, &jumps).unwrap();
            // Integrands as functions of x = e^y.
            let psi2 =
                quad_jump_integral(|x| normal_cdf(-d12(chi * x, carry, vol, xi).1), 1.0, &[], &jumps, &spec()).unwrap();
            let psi1 =
                quad_jump_integral(|x| x * normal_cdf(-d12(chi * x, carry, vol, xi).0), 1.0, &[], &jumps, &spec())
                    .unwrap();
            assert!((got.psi2 - psi2).abs() < 1e-8, "psi2 at chi {chi} xi {xi}: {} vs {psi2}", got.psi2);
            assert!((got.psi1 - psi1).abs() < 1e-8, "psi1 at chi {chi} xi {xi}: {} vs {psi1}", got.psi1);
        }
    }
}

#[test]
fn barrier_psi_blocks_match_quadrature() {
    let carry = 0.04;
    for jumps in mixtures() {
        for (chi, xi, hk) in lattice(50) {
            let vol = 0.02f64.sqrt() * (0.7 + 0.6 * chi / 2.0);
            let gamma = carry / (vol * vol) + 0.5;
            let m = 2.0 * (gamma - 1.0);
            let mirror = hk * hk / chi;
            let got = psi_barrier(mirror, vol, xi, carry, gamma, &jumps).unwrap();
            // N(−d(χ) + y/v) = N(−d(χ·e^{−y})).
            let psi2 = quad_jump_integral(
                |x| normal_cdf(-d12(mirror / x, carry, vol, xi).1) * x.powf(-m),
                1.0,
                &[],
                &jumps,
                &spec(),
            )
            .unwrap();
            let psi1 = quad_jump_integral(
                |x| normal_cdf(-d12(mirror / x, carry, vol, xi).0) * x.powf(-m - 1.0),
                1.0,
                &[],
                &jumps,
                &spec(),
            )
            .unwrap();
            let tol = 1e-8 * psi2.abs().max(1.0);
            assert!((got.psi2 - psi2).abs() < tol, "psiB2 at {chi} {xi} {hk}: {} vs {psi2}", got.psi2);
            assert!((got.psi1 - psi1).abs() < 1e-8 * psi1.abs().max(1.0), "psiB1: {} vs {psi1}", got.psi1);
        }
    }
}

#[test]
fn jump_integrals_match_quadrature_on_the_lattice() {
    let p = H32JParams::reference();
    let (nu, eta, k) = (0.01, 0.01, 100.0);
    for (chi, tau, hk) in lattice(50) {
        let s = k * chi;
        let h = k * hk;
        let put = |x: f64| put_price_gbs(&p, x, nu, eta, k, tau).unwrap();
        let want = quad_jump_integral(put, s, &[], &p.jumps, &spec()).unwrap();
        let got = put_jump_integral(&p, s, nu, eta, k, tau).unwrap();
        assert!((got - want).abs() < 1e-6, "put at chi {chi} tau {tau}: {got} vs {want}");

        let got = uop_jump_integral(&p, s, nu, eta, k, h, tau).unwrap();
        if s >= h {
            assert_eq!(got, 0.0, "knocked-out state");
            continue;
        }
        let uop = |x: f64| uop_price_gbs(&p, x, nu, eta, k, h, tau).unwrap();
        let want = quad_jump_integral(uop, s, &[h], &p.jumps, &spec()).unwrap();
        assert!((got - want).abs() < 1e-6, "uop at chi {chi} tau {tau} H/K {hk}: {got} vs {want}");
    }
}

#[test]
fn uop_jump_integral_at_the_reference_state() {
    let p = H32JParams::reference();
    let uop = |x: f64| uop_price_gbs(&p, x, 0.01, 0.01, 100.0, 110.0, 0.5).unwrap();
    let want = quad_jump_integral(uop, 100.0, &[110.0], &p.jumps, &spec()).unwrap();
    let got = uop_jump_integral(&p, 100.0, 0.01, 0.01, 100.0, 110.0, 0.5).unwrap();
    assert!((got - want).abs() < 1e-6, "{got} vs {want}");
}

#[test]
fn zeta_matches_quadrature() {
    for jumps in mixtures() {
        let mean = quad_jump_integral(|x| x, 1.0, &[], &jumps, &spec()).unwrap() - 1.0;
        assert!((jumps.zeta().unwrap() - mean).abs() < 1e-10, "{mean}");
    }
}

fn agree(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= (rel * want.abs()).max(1e-8)
}

fn assert_greeks(g: &GbsEval, fd: &FdGreeks, rel: f64, what: &str) {
    let pairs = [
        ("price", g.price, fd.price),
        ("dS", g.d_s, fd.d_s),
        ("dNu", g.d_nu, fd.d_nu),
        ("dEta", g.d_eta, fd.d_eta),
        ("d2Nu", g.d2_nu, fd.d2_nu),
        ("d2Eta", g.d2_eta, fd.d2_eta),
        ("dSdNu", g.ds_dnu, fd.ds_dnu),
        ("dSdEta", g.ds_deta, fd.ds_deta),
    ];
    for (name, a, b) in pairs {
        assert!(agree(a, b, rel), "{what} {name}: closed form {a:e}, finite difference {b:e}");
    }
}

/// Twenty states `(s, ν, η, τ)` spread over the region the estimator visits.
fn sampled_states() -> Vec<(f64, f64, f64, f64)> {
    (1..=20)
        .map(|i| {
            (
                75.0 + 33.0 * halton(i, 2),
                0.003 + 0.03 * halton(i, 3),
                0.003 + 0.03 * halton(i, 5),
                0.05 + 0.9 * halton(i, 7),
            )
        })
        .collect()
}

#[test]
fn put_greeks_match_finite_differences() {
    let p = H32JParams::reference();
    let v = |s, nu, eta| put_price_gbs(&p, s, nu, eta, 100.0, 0.5).unwrap();
    let g = put_greeks_gbs(&p, 100.0, 0.01, 0.01, 100.0, 0.5).unwrap();
    assert_greeks(&g, &fd_greeks(v, 100.0, 0.01, 0.01, &FdBumps::default()), 1e-5, "put at the reference state");
    for (s, nu, eta, tau) in sampled_states() {
        let v = |s, nu, eta| put_price_gbs(&p, s, nu, eta, 100.0, tau).unwrap();
        let g = put_greeks_gbs(&p, s, nu, eta, 100.0, tau).unwrap();
        assert_greeks(
            &g,
            &fd_greeks(v, s, nu, eta, &FdBumps::default()),
            1e-4,
            &format!("put at {s} {nu} {eta} {tau}"),
        );
    }
}

#[test]
fn uop_greeks_match_finite_differences() {
    let p = H32JParams::reference();
    for (s, nu, eta, tau) in sampled_states() {
        let v = |s, nu, eta| uop_price_gbs(&p, s, nu, eta, 100.0, 110.0, tau).unwrap();
        let g = uop_greeks_gbs(&p, s, nu, eta, 100.0, 110.0, tau).unwrap();
        assert_greeks(
            &g,
            &fd_greeks(v, s, nu, eta, &FdBumps::default()),
            1e-4,
            &format!("uop at {s} {nu} {eta} {tau}"),
        );
    }
}

#[test]
fn operator_difference_matches_independent_assembly() {
    let p = H32JParams::reference();
    let zeta = quad_jump_integral(|x| x, 1.0, &[], &p.jumps, &spec()).unwrap() - 1.0;
    for contract in [
        ContractSpec::put(ExerciseStyle::European, 100.0, 0.5),
        ContractSpec::up_and_out_put(ExerciseStyle::American, 100.0, 110.0, 0.5),
    ] {
        for &(s, nu, eta) in &[(100.0, 0.01, 0.01), (93.0, 0.015, 0.006), (106.0, 0.008, 0.02)] {
            let x = MarketState::new(0.1, s, nu, eta);
            let tau = 0.4;
            let v = |s: f64, nu, eta| match contract.barrier {
                Some(h) => uop_price_gbs(&p, s, nu, eta, 100.0, h, tau).unwrap(),
                None => put_price_gbs(&p, s, nu, eta, 100.0, tau).unwrap(),
            };
            let g = fd_greeks(v, s, nu, eta, &FdBumps::default());
            let ji = quad_jump_integral(
                |y| v(y, nu, eta),
                s,
                &contract.barrier.into_iter().collect::<Vec<_>>(),
                &p.jumps,
                &spec(),
            )
            .unwrap();
            let want = -p.lambda * zeta * s * g.d_s
                + 0.5 * p.sigma1 * p.sigma1 * nu * g.d2_nu
                + p.rho1 * p.c1 * p.sigma1 * s * nu * g.ds_dnu
                + 0.5 * p.sigma2 * p.sigma2 * eta.powi(3) * g.d2_eta
                + p.rho2 * p.c2 * p.sigma2 * s * eta * eta * g.ds_deta
                + p.lambda * (ji - g.price);
            let got = operator_difference(&contract, &x, &p).unwrap();
            assert!((got - want).abs() <= 1e-4 * want.abs(), "{:?} at {s}: {got} vs {want}", contract.kind);
        }
    }
}
