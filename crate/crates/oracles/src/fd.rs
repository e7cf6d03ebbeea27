/// Bump sizes. Each variable is bumped by `rel · max(|x|, floor)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdBumps {
    pub first_rel: f64,
    pub second_rel: f64,
    /// Scale floor in the spot variable.
    pub spot_floor: f64,
    /// Scale floor in the variance variables.
    pub var_floor: f64,
}

impl Default for FdBumps {
    fn default() -> Self {
        Self { first_rel: 1e-4, second_rel: 1e-3, spot_floor: 1e-2, var_floor: 1e-3 }
    }
}

/// Finite-difference derivatives named like the analytic Greeks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FdGreeks {
    pub price: f64,
    pub d_s: f64,
    pub d_nu: f64,
    pub d_eta: f64,
    pub d2_nu: f64,
    pub d2_eta: f64,
    pub ds_dnu: f64,
    pub ds_deta: f64,
}

/// Richardson-extrapolated central differences of `v(s, ν, η)`: the step-`h`
/// and step-`h/2` estimates are combined as `(4·D(h/2) − D(h)) / 3`.
pub fn fd_greeks(v: impl Fn(f64, f64, f64) -> f64, s: f64, nu: f64, eta: f64, bumps: &FdBumps) -> FdGreeks {
    let step = |x: f64, rel: f64, floor: f64| rel * x.abs().max(floor);
    let rich = |d: &dyn Fn(f64) -> f64, h: f64| (4.0 * d(0.5 * h) - d(h)) / 3.0;

    let first = |f: &dyn Fn(f64) -> f64, h: f64| rich(&|h| (f(h) - f(-h)) / (2.0 * h), h);
    let second = |f: &dyn Fn(f64) -> f64, h: f64| rich(&|h| (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h), h);
    let cross = |f: &dyn Fn(f64, f64) -> f64, h: f64, k: f64| {
        let d = |t: f64| {
            let (h, k) = (t * h, t * k);
            (f(h, k) - f(h, -k) - f(-h, k) + f(-h, -k)) / (4.0 * h * k)
        };
        (4.0 * d(0.5) - d(1.0)) / 3.0
    };

    let (hs1, hn1, he1) = (
        step(s, bumps.first_rel, bumps.spot_floor),
        step(nu, bumps.first_rel, bumps.var_floor),
        step(eta, bumps.first_rel, bumps.var_floor),
    );
    let (hs2, hn2, he2) = (
        step(s, bumps.second_rel, bumps.spot_floor),
        step(nu, bumps.second_rel, bumps.var_floor),
        step(eta, bumps.second_rel, bumps.var_floor),
    );
    let along_s = |h: f64| v(s + h, nu, eta);
    let along_nu = |h: f64| v(s, nu + h, eta);
    let along_eta = |h: f64| v(s, nu, eta + h);
    FdGreeks {
        price: v(s, nu, eta),
        d_s: first(&along_s, hs1),
        d_nu: first(&along_nu, hn1),
        d_eta: first(&along_eta, he1),
        d2_nu: second(&along_nu, hn2),
        d2_eta: second(&along_eta, he2),
        ds_dnu: cross(&|h, k| v(s + h, nu + k, eta), hs2, hn2),
        ds_deta: cross(&|h, k| v(s + h, nu, eta + k), hs2, he2),
    }
}
