//! Mixed-exponential jump law for log-returns.
//!
//! The density is
//!
//! ```text
//! φ(y) = p_u Σ p_i a_i e^{-a_i y} 1{y ≥ 0} + q_d Σ q_j b_j e^{b_j y} 1{y < 0},   q_d = 1 − p_u
//! ```
//!
//! with weights that may be negative as long as the density stays nonnegative.
//! Analytics accept signed weights; the sampler does not.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::{Error, Result};

/// One exponential component: a weight and a decay rate (per unit log-return).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpComponent {
    pub weight: f64,
    pub rate: f64,
}

impl ExpComponent {
    pub const fn new(weight: f64, rate: f64) -> Self {
        Self { weight, rate }
    }
}

/// A constraint on the mixture that failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpIssue {
    UpProbabilityRange,
    UpWeightsSum,
    DownWeightsSum,
    EmptyBranch,
    UpRateAboveOne {
        index: usize,
    },
    DownRatePositive {
        index: usize,
    },
    FirstUpWeightPositive,
    FirstDownWeightPositive,
    UpMomentNonnegative,
    DownMomentNonnegative,
    /// Partial sums Σ_{i≤k} p_i a_i ≥ 0 and Σ_{j≤l} q_j b_j ≥ 0. Only sufficient for
    /// a valid density, so its failure is a warning.
    SufficientPartialSums,
}

impl JumpIssue {
    /// Whether the issue is only a failed sufficient condition.
    pub fn is_warning(self) -> bool {
        matches!(self, JumpIssue::SufficientPartialSums)
    }
}

impl fmt::Display for JumpIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JumpIssue::UpProbabilityRange => f.write_str("p_u in [0,1]"),
            JumpIssue::UpWeightsSum => f.write_str("sum p_i = 1"),
            JumpIssue::DownWeightsSum => f.write_str("sum q_j = 1"),
            JumpIssue::EmptyBranch => f.write_str("each branch has at least one component"),
            JumpIssue::UpRateAboveOne { index } => write!(f, "a_i > 1 (i = {})", index + 1),
            JumpIssue::DownRatePositive { index } => write!(f, "b_j > 0 (j = {})", index + 1),
            JumpIssue::FirstUpWeightPositive => f.write_str("p_1 > 0"),
            JumpIssue::FirstDownWeightPositive => f.write_str("q_1 > 0"),
            JumpIssue::UpMomentNonnegative => f.write_str("sum p_i a_i >= 0"),
            JumpIssue::DownMomentNonnegative => f.write_str("sum q_j b_j >= 0"),
            JumpIssue::SufficientPartialSums => f.write_str("partial sums of p_i a_i and q_j b_j nonnegative"),
        }
    }
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Mixed-exponential jump distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedExpJump {
    /// Probability of the upward branch, `p_u`.
    pub p_up: f64,
    pub up: Vec<ExpComponent>,
    pub down: Vec<ExpComponent>,
}

impl MixedExpJump {
    /// Builds a mixture and checks the necessary validity conditions.
    pub fn new(p_up: f64, up: Vec<ExpComponent>, down: Vec<ExpComponent>) -> Result<Self> {
        let jumps = Self { p_up, up, down };
        jumps.check()?;
        Ok(jumps)
    }

    /// Double-exponential law: one upward component with rate `a`, one downward
    /// with rate `b`, upward probability `p`.
    pub fn double_exponential(p: f64, a: f64, b: f64) -> Self {
        Self { p_up: p, up: vec![ExpComponent::new(1.0, a)], down: vec![ExpComponent::new(1.0, b)] }
    }

    /// `q_d = 1 − p_u`.
    #[inline]
    pub fn p_down(&self) -> f64 {
        1.0 - self.p_up
    }

    /// Every violated condition, necessary ones first, the sufficient-condition
    /// warning last.
    pub fn issues(&self) -> Vec<JumpIssue> {
        let mut out = Vec::new();
        if !(0.0..=1.0).contains(&self.p_up) {
            out.push(JumpIssue::UpProbabilityRange);
        }
        if self.up.is_empty() || self.down.is_empty() {
            out.push(JumpIssue::EmptyBranch);
        }
        if !self.up.is_empty() && (self.up.iter().map(|c| c.weight).sum::<f64>() - 1.0).abs() > WEIGHT_SUM_TOL {
            out.push(JumpIssue::UpWeightsSum);
        }
        if !self.down.is_empty() && (self.down.iter().map(|c| c.weight).sum::<f64>() - 1.0).abs() > WEIGHT_SUM_TOL {
            out.push(JumpIssue::DownWeightsSum);
        }
        for (index, c) in self.up.iter().enumerate() {
            if !(c.rate > 1.0) {
                out.push(JumpIssue::UpRateAboveOne { index });
            }
        }
        for (index, c) in self.down.iter().enumerate() {
            if !(c.rate > 0.0) {
                out.push(JumpIssue::DownRatePositive { index });
            }
        }
        if self.up.first().is_some_and(|c| !(c.weight > 0.0)) {
            out.push(JumpIssue::FirstUpWeightPositive);
        }
        if self.down.first().is_some_and(|c| !(c.weight > 0.0)) {
            out.push(JumpIssue::FirstDownWeightPositive);
        }
        if self.up.iter().map(|c| c.weight * c.rate).sum::<f64>() < 0.0 {
            out.push(JumpIssue::UpMomentNonnegative);
        }
        if self.down.iter().map(|c| c.weight * c.rate).sum::<f64>() < 0.0 {
            out.push(JumpIssue::DownMomentNonnegative);
        }
        let partial_ok = |cs: &[ExpComponent]| {
            let mut acc = 0.0;
            cs.iter().all(|c| {
                acc += c.weight * c.rate;
                acc >= 0.0
            })
        };
        if !(partial_ok(&self.up) && partial_ok(&self.down)) {
            out.push(JumpIssue::SufficientPartialSums);
        }
        out
    }

    /// Fails on the first violated necessary condition.
    pub fn check(&self) -> Result<()> {
        match self.issues().into_iter().find(|i| !i.is_warning()) {
            None => Ok(()),
            Some(issue) => Err(Error::InvalidParameter(alloc::format!("jump mixture: {issue}"))),
        }
    }

    /// Density at `y`, validating the mixture first.
    pub fn density(&self, y: f64) -> Result<f64> {
        self.check()?;
        Ok(self.pdf(y))
    }

    /// Density at `y` without validation. `y = 0` belongs to the upward branch.
    pub fn pdf(&self, y: f64) -> f64 {
        if y >= 0.0 {
            self.p_up * self.up.iter().map(|c| c.weight * c.rate * libm::exp(-c.rate * y)).sum::<f64>()
        } else {
            self.p_down() * self.down.iter().map(|c| c.weight * c.rate * libm::exp(c.rate * y)).sum::<f64>()
        }
    }

    /// Distribution function `P(Y ≤ y)`.
    pub fn cdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            self.p_down() * self.down.iter().map(|c| c.weight * libm::exp(c.rate * y)).sum::<f64>()
        } else {
            self.p_down() + self.p_up * self.up.iter().map(|c| c.weight * -libm::expm1(-c.rate * y)).sum::<f64>()
        }
    }

    /// Mean relative jump size `ζ = E[e^Y − 1]`.
    pub fn zeta(&self) -> Result<f64> {
        if let Some((index, c)) = self.up.iter().enumerate().find(|(_, c)| !(c.rate > 1.0)) {
            return Err(Error::DivergentJumpMean { index, rate: c.rate });
        }
        let up: f64 = self.up.iter().map(|c| c.weight * c.rate / (c.rate - 1.0)).sum();
        let down: f64 = self.down.iter().map(|c| c.weight * c.rate / (c.rate + 1.0)).sum();
        Ok(self.p_up * up + self.p_down() * down - 1.0)
    }

    /// Prepares inverse-transform sampling. Requires nonnegative weights.
    pub fn sampler(&self) -> Result<JumpSampler> {
        self.check()?;
        let cumulative = |cs: &[ExpComponent], branch: &'static str| -> Result<Vec<(f64, f64)>> {
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(cs.len());
            for (index, c) in cs.iter().enumerate() {
                if c.weight < 0.0 {
                    return Err(Error::UnsupportedSampler { branch, index, weight: c.weight });
                }
                acc += c.weight;
                out.push((acc, c.rate));
            }
            // Guard the last bucket against rounding in the weight sum.
            if let Some(last) = out.last_mut() {
                last.0 = f64::INFINITY;
            }
            Ok(out)
        };
        Ok(JumpSampler { p_up: self.p_up, up: cumulative(&self.up, "up")?, down: cumulative(&self.down, "down")? })
    }

    /// One draw from three uniforms on `[0,1)`: branch, component, magnitude.
    pub fn sample_with(&self, u_branch: f64, u_component: f64, u_size: f64) -> Result<f64> {
        Ok(self.sampler()?.from_uniforms(u_branch, u_component, u_size))
    }
}

/// Inverse-transform sampler for a nonnegative-weight mixture.
#[derive(Debug, Clone)]
pub struct JumpSampler {
    p_up: f64,
    up: Vec<(f64, f64)>,
    down: Vec<(f64, f64)>,
}

impl JumpSampler {
    /// Maps three uniforms to a jump: up with probability `p_u`, component by
    /// weight, then exponential inversion `−ln(1−u)/rate` (negated downward).
    pub fn from_uniforms(&self, u_branch: f64, u_component: f64, u_size: f64) -> f64 {
        let (table, sign) = if u_branch < self.p_up { (&self.up, 1.0) } else { (&self.down, -1.0) };
        let rate = table.iter().find(|(cum, _)| u_component < *cum).map_or(table[table.len() - 1].1, |&(_, rate)| rate);
        sign * -libm::log1p(-u_size) / rate
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let u_branch = uniform(rng);
        let u_component = if self.up.len() > 1 || self.down.len() > 1 { uniform(rng) } else { 0.0 };
        self.from_uniforms(u_branch, u_component, uniform(rng))
    }
}

/// Uniform on `[0,1)` with 53 random bits.
#[inline]
pub(crate) fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
