//! Per-path Monte Carlo and JDOI samples and their aggregation.
//!
//! With stopping index `τ*` (exercise, knockout or maturity) and `D(t) = e^{−rt}`,
//! each path yields
//!
//! ```text
//! mc   = D(τ*) G(τ*, X_τ*) 1{alive at τ*}
//! jdoi = V̄(0, x0) + 1{alive at τ*} D(τ*) (G − V̄)(τ*, X_τ*)
//!        + Σ_{n < τ*} D(t_n) (𝒜_X − 𝒜_X̄)V̄(t_n, X_{t_n}) dt
//! ```
//!
//! where `V̄` is the European value in the approximate market.

use alloc::vec::Vec;

use crate::gbs::{self, GbsEval};
use crate::lsmc::{backward_induct, BasisSpec, StoppingPolicy};
use crate::model::{ContractSpec, ExerciseStyle, H32JParams, MarketState};
use crate::sim::{simulate, PathBundle, TimeGrid};
use crate::{Error, Result};

/// Paired samples of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePair {
    pub path_id: usize,
    pub mc: f64,
    pub jdoi: f64,
}

/// Sample statistics with a normal-approximation 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorStats {
    pub n: usize,
    pub mean: f64,
    pub sample_std: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub min: f64,
    pub max: f64,
}

/// Aggregates samples in their given order (Bessel-corrected standard deviation).
pub fn aggregate(samples: &[f64]) -> Result<EstimatorStats> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    let sample_std = libm::sqrt(var);
    let half = 1.96 * sample_std / libm::sqrt(n as f64);
    let (min, max) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    Ok(EstimatorStats {
        n,
        mean,
        sample_std,
        ci95_lo: mean - half,
        ci95_hi: mean + half,
        min: min.min(mean),
        max: max.max(mean),
    })
}

/// Which estimators a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorChoice {
    /// Plain Monte Carlo only; no approximate-market analytics are evaluated.
    Mc,
    Jdoi,
    #[default]
    Both,
}

impl EstimatorChoice {
    pub fn wants_mc(self) -> bool {
        self != EstimatorChoice::Jdoi
    }

    pub fn wants_jdoi(self) -> bool {
        self != EstimatorChoice::Mc
    }
}

/// Options of a pricing run beyond the model, contract and grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub estimators: EstimatorChoice,
    pub basis: BasisSpec,
    /// Fit the exercise policy on an independent bundle instead of the pricing one.
    pub out_of_sample: bool,
}

/// Outcome of one run: per-path samples and their statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Per-path samples; `jdoi` is 0 when the JDOI estimator was not requested.
    pub samples: Vec<SamplePair>,
    pub mc: EstimatorStats,
    pub jdoi: Option<EstimatorStats>,
}

/// Per-run constants of the JDOI estimator.
pub struct JdoiContext<'a> {
    pub params: &'a H32JParams,
    pub contract: &'a ContractSpec,
    /// `V̄(0, x0)`.
    pub v0: f64,
    zeta: f64,
}

impl<'a> JdoiContext<'a> {
    pub fn new(params: &'a H32JParams, contract: &'a ContractSpec, x0: &MarketState) -> Result<Self> {
        let v0 = gbs::value_and_greeks(contract, x0, params)?.price;
        Ok(Self { params, contract, v0, zeta: params.jumps.zeta()? })
    }

    fn generator(&self, x: &MarketState) -> Result<f64> {
        if !x.alive {
            return Err(Error::DeadState);
        }
        let g: GbsEval = gbs::value_and_greeks(self.contract, x, self.params)?;
        gbs::generator::assemble(self.params, x, self.zeta, &g, || gbs::jump_integral(self.contract, x, self.params))
    }
}

/// MC and JDOI samples of path `p` under `policy`. Pass `ctx = None` for the MC
/// sample alone.
pub fn jdoi_sample(
    bundle: &PathBundle,
    p: usize,
    policy: &StoppingPolicy,
    contract: &ContractSpec,
    r: f64,
    ctx: Option<&JdoiContext<'_>>,
) -> Result<SamplePair> {
    let stop = policy.exercise_idx[p];
    let x_stop = bundle.state(p, stop);
    let disc = |n: usize| libm::exp(-r * bundle.grid.time(n));
    let payoff = contract.payoff(x_stop.s, x_stop.alive);
    let mc = disc(stop) * payoff;

    let jdoi = match ctx {
        None => 0.0,
        Some(ctx) => {
            let dt = bundle.grid.dt();
            let mut integral = 0.0;
            for n in 0..stop {
                integral += disc(n) * ctx.generator(&bundle.state(p, n))? * dt;
            }
            let terminal = if x_stop.alive {
                disc(stop) * (payoff - gbs::value_and_greeks(contract, &x_stop, ctx.params)?.price)
            } else {
                0.0
            };
            ctx.v0 + terminal + integral
        }
    };
    Ok(SamplePair { path_id: p, mc, jdoi })
}

/// Seed of the independent bundle used to fit an out-of-sample policy.
const FIT_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Simulates, builds the stopping policy and evaluates both estimators.
#[allow(clippy::too_many_arguments)]
pub fn run(
    params: &H32JParams,
    x0: &MarketState,
    contract: &ContractSpec,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    options: &RunOptions,
) -> Result<RunResult> {
    contract.check()?;
    if (grid.maturity - contract.maturity).abs() > 1e-12 * contract.maturity {
        return Err(Error::Contract("grid and contract maturities differ"));
    }
    let mut bundle = simulate(params, x0, grid, n_paths, seed)?;
    let barrier = contract.barrier_level();
    if barrier.is_finite() {
        bundle.mark_knockout(barrier);
    }

    let policy = match contract.style {
        ExerciseStyle::European => StoppingPolicy::european(&bundle, contract),
        ExerciseStyle::American if options.out_of_sample => {
            let mut fit = simulate(params, x0, grid, n_paths, seed ^ FIT_SEED_SALT)?;
            if barrier.is_finite() {
                fit.mark_knockout(barrier);
            }
            let fitted = backward_induct(&fit, contract, params, &options.basis)?;
            fitted.rule.as_ref().map(|rule| rule.apply(&bundle, contract)).unwrap_or(fitted)
        }
        ExerciseStyle::American => backward_induct(&bundle, contract, params, &options.basis)?,
    };

    let ctx = if options.estimators.wants_jdoi() { Some(JdoiContext::new(params, contract, x0)?) } else { None };
    let sample = |p: usize| jdoi_sample(&bundle, p, &policy, contract, params.r, ctx.as_ref());

    #[cfg(feature = "parallel")]
    let samples: Result<Vec<SamplePair>> = {
        use rayon::prelude::*;
        (0..n_paths).into_par_iter().map(sample).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let samples: Result<Vec<SamplePair>> = (0..n_paths).map(sample).collect();
    let samples = samples?;

    let mc_values: Vec<f64> = samples.iter().map(|s| s.mc).collect();
    let mc = aggregate(&mc_values)?;
    let jdoi = if ctx.is_some() {
        let values: Vec<f64> = samples.iter().map(|s| s.jdoi).collect();
        Some(aggregate(&values)?)
    } else {
        None
    };
    Ok(RunResult { samples, mc, jdoi })
}

/// European contract, both estimators on the same paths.
pub fn european_jdoi(
    params: &H32JParams,
    x0: &MarketState,
    contract: &ContractSpec,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<(EstimatorStats, EstimatorStats)> {
    if contract.style != ExerciseStyle::European {
        return Err(Error::Contract("european_jdoi needs a European contract"));
    }
    let out = run(params, x0, contract, grid, n_paths, seed, &RunOptions::default())?;
    Ok((out.mc, out.jdoi.expect("both estimators requested")))
}

/// American contract: in-sample Longstaff–Schwartz policy, then both estimators.
pub fn american_jdoi(
    params: &H32JParams,
    x0: &MarketState,
    contract: &ContractSpec,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<(EstimatorStats, EstimatorStats)> {
    if contract.style != ExerciseStyle::American {
        return Err(Error::Contract("american_jdoi needs an American contract"));
    }
    let out = run(params, x0, contract, grid, n_paths, seed, &RunOptions::default())?;
    Ok((out.mc, out.jdoi.expect("both estimators requested")))
}
