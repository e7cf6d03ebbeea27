//! Path simulation of the Heston ⊕ 3/2 ⊕ jumps market on a uniform grid.
//!
//! Each step draws four independent standard normals `Z1..Z4` and builds
//! `Wᵛ = ρ1 Z1 + √(1−ρ1²) Z3`, `Wᵉ = ρ2 Z2 + √(1−ρ2²) Z4`. The variance factors
//! advance by full-truncation Euler, log-spot by Euler with loadings `c1√ν⁺`,
//! `c2√η⁺`, and a Poisson(λ·dt) number of multiplicative jumps `e^Y` is applied
//! at the end of the step. Every path owns a ChaCha8 stream selected by its
//! index, so the output depends on the seed only, never on scheduling.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::jumps::JumpSampler;
use crate::model::{H32JParams, MarketState};
use crate::{Error, Result};

/// Uniform grid `t_n = n·T/N`, `n = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub maturity: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(maturity: f64, n_steps: usize) -> Result<Self> {
        if !(maturity > 0.0 && maturity.is_finite()) {
            return Err(Error::InvalidParameter("grid maturity must be positive".into()));
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter("grid needs at least one step".into()));
        }
        Ok(Self { maturity, n_steps })
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.maturity / self.n_steps as f64
    }

    /// `t_n`, with `t_N = T` exactly.
    #[inline]
    pub fn time(&self, n: usize) -> f64 {
        if n == self.n_steps {
            self.maturity
        } else {
            n as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|n| self.time(n)).collect()
    }
}

/// Simulated trajectories, stored row-major: the value of path `p` at grid
/// index `n` sits at `p·(N+1) + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub grid: TimeGrid,
    pub n_paths: usize,
    pub seed: u64,
    pub s: Vec<f64>,
    /// Truncated factor `ν⁺`.
    pub nu: Vec<f64>,
    /// Truncated factor `η⁺`.
    pub eta: Vec<f64>,
    /// Number of jumps during each step, row-major `p·N + n`.
    pub jump_counts: Vec<u32>,
    /// First grid index with `s ≥ H`, per path; `None` unless a barrier was marked.
    pub knockout_idx: Option<Vec<Option<usize>>>,
}

impl PathBundle {
    /// Builds a bundle from given trajectories (row-major, `N + 1` values per path).
    pub fn from_rows(grid: TimeGrid, s: Vec<f64>, nu: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        let stride = grid.n_steps + 1;
        if s.is_empty() || !s.len().is_multiple_of(stride) || nu.len() != s.len() || eta.len() != s.len() {
            return Err(Error::InvalidParameter("trajectory arrays do not match the grid".into()));
        }
        if s.iter().any(|&x| !(x > 0.0)) || nu.iter().chain(&eta).any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidParameter("trajectories need s > 0 and nonnegative factors".into()));
        }
        let n_paths = s.len() / stride;
        Ok(Self {
            grid,
            n_paths,
            seed: 0,
            s,
            nu,
            eta,
            jump_counts: vec![0; n_paths * grid.n_steps],
            knockout_idx: None,
        })
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.grid.n_steps + 1
    }

    #[inline]
    fn at(&self, p: usize, n: usize) -> usize {
        p * self.stride() + n
    }

    pub fn spot_path(&self, p: usize) -> &[f64] {
        let k = self.at(p, 0);
        &self.s[k..k + self.stride()]
    }

    /// Knockout index of path `p`, if any.
    #[inline]
    pub fn knockout(&self, p: usize) -> Option<usize> {
        self.knockout_idx.as_ref().and_then(|k| k[p])
    }

    /// Whether path `p` is still alive at grid index `n`.
    #[inline]
    pub fn is_alive(&self, p: usize, n: usize) -> bool {
        self.knockout(p).is_none_or(|k| n < k)
    }

    pub fn state(&self, p: usize, n: usize) -> MarketState {
        let k = self.at(p, n);
        MarketState { t: self.grid.time(n), s: self.s[k], nu: self.nu[k], eta: self.eta[k], alive: self.is_alive(p, n) }
    }

    /// Total number of jumps on path `p`.
    pub fn jumps_on_path(&self, p: usize) -> u32 {
        let n = self.grid.n_steps;
        self.jump_counts[p * n..(p + 1) * n].iter().sum()
    }

    /// Records the first grid index at which each path reaches `barrier`.
    pub fn mark_knockout(&mut self, barrier: f64) {
        let stride = self.stride();
        self.knockout_idx =
            Some(self.s.chunks_exact(stride).map(|path| path.iter().position(|&s| s >= barrier)).collect());
    }
}

/// Marks knockouts with discrete monitoring at the grid points only.
pub fn mark_knockout(mut bundle: PathBundle, barrier: f64) -> PathBundle {
    bundle.mark_knockout(barrier);
    bundle
}

/// Per-step constants shared by all paths.
struct Stepper {
    dt: f64,
    sqrt_dt: f64,
    drift: f64,
    c1: f64,
    c2: f64,
    kappa1: f64,
    theta1: f64,
    sigma1: f64,
    kappa2: f64,
    theta2: f64,
    sigma2: f64,
    rho1: f64,
    rho1_perp: f64,
    rho2: f64,
    rho2_perp: f64,
    poisson: Option<Poisson<f64>>,
    sampler: JumpSampler,
}

impl Stepper {
    fn new(params: &H32JParams, grid: &TimeGrid) -> Result<Self> {
        params.check_simulable()?;
        let dt = grid.dt();
        let zeta = params.jumps.zeta()?;
        let poisson = if params.lambda > 0.0 {
            Some(
                Poisson::new(params.lambda * dt)
                    .map_err(|_| Error::InvalidParameter("jump intensity too large for the grid".into()))?,
            )
        } else {
            None
        };
        Ok(Self {
            dt,
            sqrt_dt: libm::sqrt(dt),
            drift: params.r - params.delta - params.lambda * zeta,
            c1: params.c1,
            c2: params.c2,
            kappa1: params.kappa1,
            theta1: params.theta1,
            sigma1: params.sigma1,
            kappa2: params.kappa2,
            theta2: params.theta2,
            sigma2: params.sigma2,
            rho1: params.rho1,
            rho1_perp: libm::sqrt(1.0 - params.rho1 * params.rho1),
            rho2: params.rho2,
            rho2_perp: libm::sqrt(1.0 - params.rho2 * params.rho2),
            poisson,
            sampler: params.jumps.sampler()?,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn path(
        &self,
        x0: &MarketState,
        seed: u64,
        index: usize,
        s: &mut [f64],
        nu: &mut [f64],
        eta: &mut [f64],
        jumps: &mut [u32],
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let (mut x, mut v, mut w) = (libm::log(x0.s), x0.nu, x0.eta);
        s[0] = x0.s;
        nu[0] = v.max(0.0);
        eta[0] = w.max(0.0);
        for n in 0..jumps.len() {
            let z: [f64; 4] = core::array::from_fn(|_| StandardNormal.sample(&mut rng));
            let (vp, wp) = (v.max(0.0), w.max(0.0));
            let (sv, sw) = (libm::sqrt(vp), libm::sqrt(wp));
            let w_nu = self.rho1 * z[0] + self.rho1_perp * z[2];
            let w_eta = self.rho2 * z[1] + self.rho2_perp * z[3];

            x += (self.drift - 0.5 * (self.c1 * self.c1 * vp + self.c2 * self.c2 * wp)) * self.dt
                + (self.c1 * sv * z[0] + self.c2 * sw * z[1]) * self.sqrt_dt;
            v += self.kappa1 * (self.theta1 - vp) * self.dt + self.sigma1 * sv * self.sqrt_dt * w_nu;
            w += self.kappa2 * (self.theta2 - wp) * wp * self.dt + self.sigma2 * wp * sw * self.sqrt_dt * w_eta;

            if let Some(poisson) = &self.poisson {
                let k = poisson.sample(&mut rng) as u32;
                for _ in 0..k {
                    x += self.sampler.sample(&mut rng);
                }
                jumps[n] = k;
            }
            s[n + 1] = libm::exp(x);
            nu[n + 1] = v.max(0.0);
            eta[n + 1] = w.max(0.0);
        }
    }
}

/// Simulates `n_paths` trajectories from `x0`. The result is a deterministic
/// function of the arguments.
pub fn simulate(
    params: &H32JParams,
    x0: &MarketState,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<PathBundle> {
    if n_paths == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    x0.check()?;
    if !x0.alive {
        return Err(Error::DeadState);
    }
    let stepper = Stepper::new(params, grid)?;
    let stride = grid.n_steps + 1;
    let mut s = vec![0.0; n_paths * stride];
    let mut nu = vec![0.0; n_paths * stride];
    let mut eta = vec![0.0; n_paths * stride];
    let mut jump_counts = vec![0u32; n_paths * grid.n_steps];

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        s.par_chunks_mut(stride)
            .zip(nu.par_chunks_mut(stride))
            .zip(eta.par_chunks_mut(stride))
            .zip(jump_counts.par_chunks_mut(grid.n_steps))
            .enumerate()
            .for_each(|(p, (((s, nu), eta), jc))| stepper.path(x0, seed, p, s, nu, eta, jc));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (p, (((s, nu), eta), jc)) in s
            .chunks_mut(stride)
            .zip(nu.chunks_mut(stride))
            .zip(eta.chunks_mut(stride))
            .zip(jump_counts.chunks_mut(grid.n_steps))
            .enumerate()
        {
            stepper.path(x0, seed, p, s, nu, eta, jc);
        }
    }

    Ok(PathBundle { grid: *grid, n_paths, seed, s, nu, eta, jump_counts, knockout_idx: None })
}
