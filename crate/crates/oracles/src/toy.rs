use jdoi_core::model::MarketState;
use jdoi_core::sim::PathBundle;

use crate::{OracleError, Result};

/// Cap on `paths · steps`, the number of free stopping decisions.
pub const MAX_TOY_DECISIONS: usize = 12;

/// Best stopping rule found by exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyPolicy {
    /// Mean discounted payoff under the best rule.
    pub value: f64,
    pub exercise_idx: Vec<usize>,
}

/// Searches every stopping rule on a tiny bundle and returns the one with the
/// largest mean discounted payoff `e^{−r t_τ}·payoff(X_τ)`.
///
/// A rule may stop at any grid index `0..N`, and always stops at `N`. It must
/// be measurable: paths whose states coincide up to step `n` take the same
/// decision at `n`. Dead states pay `payoff` evaluated with `alive = false`.
pub fn enumerate_toy_policy(bundle: &PathBundle, payoff: impl Fn(&MarketState) -> f64, r: f64) -> Result<ToyPolicy> {
    let n_paths = bundle.n_paths;
    let n_steps = bundle.grid.n_steps;
    let decisions = n_paths * n_steps;
    if decisions > MAX_TOY_DECISIONS {
        return Err(OracleError::TooLarge { decisions, cap: MAX_TOY_DECISIONS });
    }

    // Information classes: class[n][p] is the smallest path index sharing p's history up to n.
    let same_prefix = |p: usize, q: usize, n: usize| {
        (0..=n).all(|k| {
            let (a, b) = (bundle.state(p, k), bundle.state(q, k));
            a.s == b.s && a.nu == b.nu && a.eta == b.eta && a.alive == b.alive
        })
    };
    let mut var_of = vec![vec![0usize; n_paths]; n_steps];
    let mut n_vars = 0;
    for (n, row) in var_of.iter_mut().enumerate() {
        for p in 0..n_paths {
            row[p] = match (0..p).find(|&q| same_prefix(p, q, n)) {
                Some(q) => row[q],
                None => {
                    n_vars += 1;
                    n_vars - 1
                }
            };
        }
    }

    let cash: Vec<Vec<f64>> = (0..n_paths)
        .map(|p| (0..=n_steps).map(|n| (-r * bundle.grid.time(n)).exp() * payoff(&bundle.state(p, n))).collect())
        .collect();

    let mut best = ToyPolicy { value: f64::NEG_INFINITY, exercise_idx: vec![n_steps; n_paths] };
    let mut idx = vec![0usize; n_paths];
    for mask in 0u32..(1u32 << n_vars) {
        let mut total = 0.0;
        for p in 0..n_paths {
            let stop = (0..n_steps).find(|&n| mask >> var_of[n][p] & 1 == 1).unwrap_or(n_steps);
            idx[p] = stop;
            total += cash[p][stop];
        }
        let value = total / n_paths as f64;
        if value > best.value {
            best = ToyPolicy { value, exercise_idx: idx.clone() };
        }
    }
    Ok(best)
}
