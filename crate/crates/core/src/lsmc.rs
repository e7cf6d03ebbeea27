//! Longstaff–Schwartz exercise policy.
//!
//! Continuation values are regressed on Laguerre polynomials of `s/K` plus
//! linear terms in `ν` and `η`, over alive, strictly in-the-money paths only.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{ContractSpec, ExerciseStyle, H32JParams, MarketState};
use crate::sim::PathBundle;
use crate::{Error, Result};

/// Laguerre polynomial `L_k(x)` by the three-term recurrence.
pub fn laguerre(x: f64, k: usize) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 - x) * cur - j * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Regression basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSpec {
    /// Highest Laguerre order in `s/K`.
    pub spot_order: usize,
    pub include_nu: bool,
    pub include_eta: bool,
    /// Adds `ν·s/K` and `η·s/K`.
    pub cross_terms: bool,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self { spot_order: 2, include_nu: true, include_eta: true, cross_terms: false }
    }
}

impl BasisSpec {
    pub fn n_columns(&self) -> usize {
        self.spot_order
            + 1
            + usize::from(self.include_nu)
            + usize::from(self.include_eta)
            + 2 * usize::from(self.cross_terms)
    }

    fn fill(&self, s: f64, nu: f64, eta: f64, strike: f64, row: &mut [f64]) {
        let x = s / strike;
        let mut i = 0;
        let (mut prev, mut cur) = (1.0, 1.0 - x);
        for k in 0..=self.spot_order {
            row[i] = match k {
                0 => 1.0,
                1 => cur,
                _ => {
                    let j = (k - 1) as f64;
                    let next = ((2.0 * j + 1.0 - x) * cur - j * prev) / (j + 1.0);
                    prev = cur;
                    cur = next;
                    next
                }
            };
            i += 1;
        }
        if self.include_nu {
            row[i] = nu;
            i += 1;
        }
        if self.include_eta {
            row[i] = eta;
            i += 1;
        }
        if self.cross_terms {
            row[i] = nu * x;
            row[i + 1] = eta * x;
        }
    }
}

/// Basis functions evaluated at a state, spot scaled by the strike.
pub fn design_row(state: &MarketState, spec: &BasisSpec, strike: f64) -> Vec<f64> {
    let mut row = vec![0.0; spec.n_columns()];
    spec.fill(state.s, state.nu, state.eta, strike, &mut row);
    row
}

/// Fitted exercise rule, reusable on an independent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct ExerciseRule {
    pub basis: BasisSpec,
    /// Continuation-value coefficients per grid index; `None` where the step
    /// never exercises (index 0, index N, or too few in-the-money paths).
    pub coefficients: Vec<Option<Vec<f64>>>,
    pub exercise_at_t0: bool,
}

impl ExerciseRule {
    /// First exercise index of each path of `bundle` under this rule; knocked-out
    /// paths stop at their knockout index with zero cashflow.
    pub fn apply(&self, bundle: &PathBundle, contract: &ContractSpec) -> StoppingPolicy {
        let n_steps = bundle.grid.n_steps;
        let mut row = vec![0.0; self.basis.n_columns()];
        let mut exercise_idx = Vec::with_capacity(bundle.n_paths);
        let mut cashflow = Vec::with_capacity(bundle.n_paths);
        for p in 0..bundle.n_paths {
            let mut stop = (bundle.knockout(p).unwrap_or(n_steps), 0.0);
            for n in 0..=n_steps {
                let x = bundle.state(p, n);
                if !x.alive {
                    break;
                }
                let payoff = contract.payoff(x.s, true);
                let exercise = payoff > 0.0
                    && if n == 0 {
                        self.exercise_at_t0
                    } else if n == n_steps {
                        true
                    } else if let Some(beta) = &self.coefficients[n] {
                        self.basis.fill(x.s, x.nu, x.eta, contract.strike, &mut row);
                        payoff >= dot(&row, beta)
                    } else {
                        false
                    };
                if exercise {
                    stop = (n, payoff);
                    break;
                }
            }
            exercise_idx.push(stop.0);
            cashflow.push(stop.1);
        }
        StoppingPolicy { exercise_idx, cashflow, rule: None }
    }
}

/// Per-path stopping decision.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingPolicy {
    /// Grid index at which the path stops: exercise, knockout, or `N`.
    pub exercise_idx: Vec<usize>,
    /// Payoff received at `exercise_idx`; zero for knockouts and worthless expiry.
    pub cashflow: Vec<f64>,
    /// Regression rule behind the policy, if it came from backward induction.
    pub rule: Option<ExerciseRule>,
}

impl StoppingPolicy {
    /// Hold-to-maturity policy of a European contract.
    pub fn european(bundle: &PathBundle, contract: &ContractSpec) -> Self {
        let n_steps = bundle.grid.n_steps;
        let (exercise_idx, cashflow) = (0..bundle.n_paths)
            .map(|p| match bundle.knockout(p) {
                Some(k) if k <= n_steps => (k, 0.0),
                _ => (n_steps, contract.payoff(bundle.state(p, n_steps).s, true)),
            })
            .unzip();
        Self { exercise_idx, cashflow, rule: None }
    }

    /// Discounted cashflow of each path.
    pub fn discounted(&self, bundle: &PathBundle, r: f64) -> Vec<f64> {
        self.exercise_idx.iter().zip(&self.cashflow).map(|(&n, &cf)| cf * libm::exp(-r * bundle.grid.time(n))).collect()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Longstaff–Schwartz backward induction on `bundle` (in-sample).
pub fn backward_induct(
    bundle: &PathBundle,
    contract: &ContractSpec,
    params: &H32JParams,
    spec: &BasisSpec,
) -> Result<StoppingPolicy> {
    contract.check()?;
    if contract.style != ExerciseStyle::American {
        return Err(Error::Contract("backward induction needs an American contract"));
    }
    if contract.barrier.is_some() && bundle.knockout_idx.is_none() {
        return Err(Error::Contract("barrier contract needs knockout marks on the bundle"));
    }
    let n_steps = bundle.grid.n_steps;
    let dt = bundle.grid.dt();
    let cols = spec.n_columns();

    let mut policy = StoppingPolicy::european(bundle, contract);
    let mut coefficients = vec![None; n_steps + 1];
    let mut rows: Vec<f64> = Vec::new();
    let mut targets: Vec<f64> = Vec::new();
    let mut members: Vec<(usize, f64)> = Vec::new();

    for n in (1..n_steps).rev() {
        rows.clear();
        targets.clear();
        members.clear();
        let t = n as f64 * dt;
        for p in 0..bundle.n_paths {
            let x = bundle.state(p, n);
            if !x.alive {
                continue;
            }
            let payoff = contract.payoff(x.s, true);
            if payoff <= 0.0 {
                continue;
            }
            let start = rows.len();
            rows.resize(start + cols, 0.0);
            spec.fill(x.s, x.nu, x.eta, contract.strike, &mut rows[start..]);
            let later = bundle.grid.time(policy.exercise_idx[p]);
            targets.push(policy.cashflow[p] * libm::exp(-params.r * (later - t)));
            members.push((p, payoff));
        }
        if members.len() < cols {
            log::warn!("step {n}: {} in-the-money paths for {cols} regressors, not exercising", members.len());
            continue;
        }
        let beta = least_squares(&rows, &targets, cols);
        for (i, &(p, payoff)) in members.iter().enumerate() {
            if payoff >= dot(&rows[i * cols..(i + 1) * cols], &beta) {
                policy.exercise_idx[p] = n;
                policy.cashflow[p] = payoff;
            }
        }
        coefficients[n] = Some(beta);
    }

    let x0 = bundle.state(0, 0);
    let payoff0 = contract.payoff(x0.s, x0.alive);
    let mean = policy.discounted(bundle, params.r).iter().sum::<f64>() / bundle.n_paths as f64;
    let exercise_at_t0 = payoff0 > 0.0 && payoff0 >= mean;
    if exercise_at_t0 {
        policy.exercise_idx.iter_mut().for_each(|n| *n = 0);
        policy.cashflow.iter_mut().for_each(|c| *c = payoff0);
    }
    policy.rule = Some(ExerciseRule { basis: *spec, coefficients, exercise_at_t0 });
    Ok(policy)
}

/// Relative threshold on `|R_ii|` below which the design is treated as rank
/// deficient, and the relative ridge used then.
const RANK_TOL: f64 = 1e-10;

/// Least-squares fit of `y ≈ X β` for row-major `X` with `cols` columns.
///
/// Columns are scaled to unit norm and factorized by Householder QR. If `R` is
/// numerically singular the scaled normal equations are solved with a ridge of
/// `1e-10` times the largest diagonal entry instead.
pub fn least_squares(x: &[f64], y: &[f64], cols: usize) -> Vec<f64> {
    let m = y.len();
    // Column-major copy, equilibrated.
    let mut a = vec![0.0; m * cols];
    let mut scale = vec![1.0; cols];
    for j in 0..cols {
        let col = &mut a[j * m..(j + 1) * m];
        for i in 0..m {
            col[i] = x[i * cols + j];
        }
        let norm = libm::sqrt(col.iter().map(|v| v * v).sum::<f64>());
        if norm > 0.0 {
            scale[j] = norm;
            col.iter_mut().for_each(|v| *v /= norm);
        }
    }
    let mut b = y.to_vec();

    let k_max = cols.min(m);
    for k in 0..k_max {
        let (head, tail) = a.split_at_mut((k + 1) * m);
        let col = &mut head[k * m..];
        let norm = libm::sqrt(col[k..].iter().map(|v| v * v).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let alpha = if col[k] > 0.0 { -norm } else { norm };
        // v = x − αe₁, stored in place; R_kk = α.
        col[k] -= alpha;
        let vnorm2 = col[k..].iter().map(|v| v * v).sum::<f64>();
        if vnorm2 > 0.0 {
            for j in (k + 1)..cols {
                let other = &mut tail[(j - k - 1) * m..(j - k) * m];
                let f = 2.0 * dot(&col[k..], &other[k..]) / vnorm2;
                other[k..].iter_mut().zip(&col[k..]).for_each(|(o, v)| *o -= f * v);
            }
            let f = 2.0 * dot(&col[k..], &b[k..]) / vnorm2;
            b[k..].iter_mut().zip(&col[k..]).for_each(|(o, v)| *o -= f * v);
        }
        col[k] = alpha;
    }

    // R is upper triangular in a[j*m + i], i <= j.
    let r = |i: usize, j: usize| if i <= j && i < m { a[j * m + i] } else { 0.0 };
    let rmax = (0..cols).map(|i| r(i, i).abs()).fold(0.0, f64::max);
    let deficient = k_max < cols || (0..cols).any(|i| !(r(i, i).abs() > RANK_TOL * rmax));

    let mut beta = vec![0.0; cols];
    if !deficient {
        for i in (0..cols).rev() {
            let s: f64 = ((i + 1)..cols).map(|j| r(i, j) * beta[j]).sum();
            beta[i] = (b[i] - s) / r(i, i);
        }
    } else {
        // (RᵀR + μI) β = Rᵀ (Qᵀy)[..cols]
        let mut g = vec![0.0; cols * cols];
        for i in 0..cols {
            for j in 0..cols {
                g[i * cols + j] = (0..cols).map(|k| r(k, i) * r(k, j)).sum();
            }
        }
        let mu = RANK_TOL * (0..cols).map(|i| g[i * cols + i]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        (0..cols).for_each(|i| g[i * cols + i] += mu);
        let rhs: Vec<f64> = (0..cols).map(|i| (0..cols.min(m)).map(|k| r(k, i) * b[k]).sum()).collect();
        beta = cholesky_solve(&mut g, rhs, cols);
    }
    beta.iter_mut().zip(&scale).for_each(|(bj, s)| *bj /= s);
    beta
}

fn cholesky_solve(g: &mut [f64], mut rhs: Vec<f64>, n: usize) -> Vec<f64> {
    for j in 0..n {
        let d = g[j * n + j] - (0..j).map(|k| g[j * n + k] * g[j * n + k]).sum::<f64>();
        let d = libm::sqrt(d.max(f64::MIN_POSITIVE));
        g[j * n + j] = d;
        for i in (j + 1)..n {
            let s = g[i * n + j] - (0..j).map(|k| g[i * n + k] * g[j * n + k]).sum::<f64>();
            g[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        rhs[i] = (rhs[i] - (0..i).map(|k| g[i * n + k] * rhs[k]).sum::<f64>()) / g[i * n + i];
    }
    for i in (0..n).rev() {
        rhs[i] = (rhs[i] - ((i + 1)..n).map(|k| g[k * n + i] * rhs[k]).sum::<f64>()) / g[i * n + i];
    }
    rhs
}
