//! Model parameters, market states and contracts.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::jumps::MixedExpJump;
use crate::{Error, Result};

/// Parameters of the Heston ⊕ 3/2 ⊕ jumps market.
///
/// ```text
/// dS/S = (r − δ − λζ) dt + c1 √ν dW¹ + c2 √η dW² + d(Σ (e^{Y} − 1))
/// dν   = κ1 (θ1 − ν) dt + σ1 √ν dWᵛ
/// dη   = κ2 (θ2 − η) η dt + σ2 η^{3/2} dWᵉ
/// ```
///
/// with `corr(W¹, Wᵛ) = ρ1`, `corr(W², Wᵉ) = ρ2` and all other pairs independent.
#[derive(Debug, Clone, PartialEq)]
pub struct H32JParams {
    pub r: f64,
    pub delta: f64,
    pub lambda: f64,
    pub c1: f64,
    pub c2: f64,
    pub kappa1: f64,
    pub theta1: f64,
    pub sigma1: f64,
    pub rho1: f64,
    pub kappa2: f64,
    pub theta2: f64,
    pub sigma2: f64,
    pub rho2: f64,
    pub jumps: MixedExpJump,
}

/// Severity of a reported constraint breach.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Violation,
    Warning,
}

/// One named constraint that does not hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub name: String,
    pub severity: Severity,
}

/// Outcome of [`H32JParams::validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    /// No hard violations (warnings allowed).
    pub fn is_valid(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn violations(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Violation)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    /// Whether an issue whose name starts with `name` was reported.
    pub fn contains(&self, name: &str) -> bool {
        self.issues.iter().any(|i| i.name.starts_with(name))
    }

    fn push(&mut self, name: impl Into<String>, severity: Severity) {
        self.issues.push(Issue { name: name.into(), severity });
    }
}

impl H32JParams {
    /// Reference parameter set (with `c1 = c2 = 1`).
    pub fn reference() -> Self {
        Self {
            r: 0.04,
            delta: 0.0,
            lambda: 5.0,
            c1: 1.0,
            c2: 1.0,
            kappa1: 0.6,
            theta1: 0.01,
            sigma1: 0.1,
            rho1: -0.15,
            kappa2: 60.0,
            theta2: 0.01,
            sigma2: 10.0,
            rho2: 0.15,
            jumps: MixedExpJump::double_exponential(0.3, 100.0, 25.0),
        }
    }

    /// Checks every model constraint and lists the ones that fail.
    pub fn validate(&self) -> ValidationReport {
        use Severity::*;
        let mut report = ValidationReport::default();
        for (name, value) in [
            ("kappa1 > 0", self.kappa1),
            ("theta1 > 0", self.theta1),
            ("sigma1 > 0", self.sigma1),
            ("kappa2 > 0", self.kappa2),
            ("theta2 > 0", self.theta2),
            ("sigma2 > 0", self.sigma2),
        ] {
            if !(value > 0.0) {
                report.push(name, Violation);
            }
        }
        if !(self.lambda >= 0.0) {
            report.push("lambda >= 0", Violation);
        }
        if !(-1.0..=1.0).contains(&self.rho1) {
            report.push("rho1 in [-1, 1]", Violation);
        }
        if !(-1.0..=1.0).contains(&self.rho2) {
            report.push("rho2 in [-1, 1]", Violation);
        }
        for (name, value) in [("r", self.r), ("delta", self.delta), ("c1", self.c1), ("c2", self.c2)] {
            if !value.is_finite() {
                report.push(format!("{name} finite"), Violation);
            }
        }
        if !(2.0 * self.kappa1 * self.theta1 >= self.sigma1 * self.sigma1) {
            report.push("Feller factor 1", Violation);
        }
        // The 3/2 factor is the reciprocal of a CIR process with these parameters.
        let kappa_star = self.kappa2 * self.theta2;
        let theta_star = (self.kappa2 + self.sigma2 * self.sigma2) / kappa_star;
        if !(2.0 * kappa_star * theta_star >= self.sigma2 * self.sigma2) {
            report.push("Feller factor 2", Violation);
        }
        for issue in self.jumps.issues() {
            let severity = if issue.is_warning() { Warning } else { Violation };
            report.push(issue.to_string(), severity);
        }
        report
    }

    /// Fails on the first hard violation.
    pub fn check(&self) -> Result<()> {
        match self.validate().violations().next() {
            None => Ok(()),
            Some(issue) => Err(Error::InvalidParameter(issue.name.clone())),
        }
    }

    /// Weaker check for simulation and estimation: degenerate factors
    /// (`σ = 0`, `λ = 0`) and Feller breaches are allowed, ill-defined inputs are not.
    pub fn check_simulable(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.kappa1 > 0.0 && self.theta1 > 0.0 && self.kappa2 > 0.0 && self.theta2 > 0.0) {
            return fail("kappa1, theta1, kappa2, theta2 > 0");
        }
        if !(self.sigma1 >= 0.0 && self.sigma2 >= 0.0) {
            return fail("sigma1, sigma2 >= 0");
        }
        if !(self.lambda >= 0.0) {
            return fail("lambda >= 0");
        }
        if !((-1.0..=1.0).contains(&self.rho1) && (-1.0..=1.0).contains(&self.rho2)) {
            return fail("rho1, rho2 in [-1, 1]");
        }
        if !(self.r.is_finite() && self.delta.is_finite() && self.c1.is_finite() && self.c2.is_finite()) {
            return fail("r, delta, c1, c2 finite");
        }
        self.jumps.check()
    }

    /// Cost of carry `r − δ`.
    #[inline]
    pub fn carry(&self) -> f64 {
        self.r - self.delta
    }
}

/// Barrier reflection exponent `γ = (r − δ)/σ̄² + 1/2`.
pub fn gamma_exponent(r: f64, delta: f64, sigma_bar_sq: f64) -> Result<f64> {
    if !(sigma_bar_sq > 0.0) {
        return Err(Error::Domain("gamma exponent needs a positive variance"));
    }
    Ok((r - delta) / sigma_bar_sq + 0.5)
}

/// State of the market at time `t`. `alive = false` marks the cemetery state of a
/// knocked-out barrier contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState {
    pub t: f64,
    pub s: f64,
    pub nu: f64,
    pub eta: f64,
    pub alive: bool,
}

impl MarketState {
    pub fn new(t: f64, s: f64, nu: f64, eta: f64) -> Self {
        Self { t, s, nu, eta, alive: true }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.t >= 0.0) {
            return Err(Error::Domain("state time must be nonnegative"));
        }
        if !(self.nu >= 0.0 && self.eta >= 0.0) {
            return Err(Error::Domain("variance factors must be nonnegative"));
        }
        if self.alive && !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::Domain("spot must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContractKind {
    VanillaPut,
    UpAndOutPut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExerciseStyle {
    European,
    American,
}

/// A put contract, optionally with an upper knock-out barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractSpec {
    pub kind: ContractKind,
    pub style: ExerciseStyle,
    pub strike: f64,
    /// Required for [`ContractKind::UpAndOutPut`], ignored otherwise.
    pub barrier: Option<f64>,
    pub maturity: f64,
}

impl ContractSpec {
    pub fn put(style: ExerciseStyle, strike: f64, maturity: f64) -> Self {
        Self { kind: ContractKind::VanillaPut, style, strike, barrier: None, maturity }
    }

    pub fn up_and_out_put(style: ExerciseStyle, strike: f64, barrier: f64, maturity: f64) -> Self {
        Self { kind: ContractKind::UpAndOutPut, style, strike, barrier: Some(barrier), maturity }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(Error::Contract("strike must be positive"));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(Error::Contract("maturity must be positive"));
        }
        match (self.kind, self.barrier) {
            (ContractKind::UpAndOutPut, None) => Err(Error::Contract("up-and-out put needs a barrier")),
            (ContractKind::UpAndOutPut, Some(h)) if !(h > 0.0) => Err(Error::Contract("barrier must be positive")),
            _ => Ok(()),
        }
    }

    /// Barrier level, or infinity for a vanilla put.
    pub fn barrier_level(&self) -> f64 {
        match self.kind {
            ContractKind::VanillaPut => f64::INFINITY,
            ContractKind::UpAndOutPut => self.barrier.unwrap_or(f64::INFINITY),
        }
    }

    /// Exercise value `(K − s)⁺` of a live state; zero on knockout.
    pub fn payoff(&self, s: f64, alive: bool) -> f64 {
        if !alive || s >= self.barrier_level() {
            0.0
        } else {
            (self.strike - s).max(0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jumps::ExpComponent;

    #[test]
    fn reference_is_clean() {
        let report = H32JParams::reference().validate();
        assert!(report.is_empty(), "{report:?}");
    }

    #[test]
    fn slow_upward_rate_is_reported() {
        let mut p = H32JParams::reference();
        p.jumps.up = alloc::vec![ExpComponent::new(1.0, 0.5)];
        let report = p.validate();
        assert!(report.contains("a_i > 1"));
        assert!(!report.is_valid());
    }

    #[test]
    fn feller_boundary() {
        let mut p = H32JParams::reference();
        p.sigma1 = libm::sqrt(2.0 * p.kappa1 * p.theta1 + 1e-6);
        let report = p.validate();
        assert_eq!(report.issues.len(), 1);
        assert!(report.contains("Feller factor 1"));
        p.sigma1 = libm::sqrt(2.0 * p.kappa1 * p.theta1);
        assert!(p.validate().is_empty());
    }

    #[test]
    fn degenerate_factors_are_simulable() {
        let mut p = H32JParams::reference();
        p.sigma1 = 0.0;
        p.sigma2 = 0.0;
        p.lambda = 0.0;
        assert!(p.validate().contains("sigma1 > 0"));
        assert!(p.check_simulable().is_ok());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_exponent(0.04, 0.0, 0.02).unwrap(), 2.5);
        assert_eq!(gamma_exponent(0.03, 0.03, 0.02).unwrap(), 0.5);
        assert!((gamma_exponent(0.04, 0.0, 0.04).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(gamma_exponent(0.04, 0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn payoff_respects_barrier() {
        let c = ContractSpec::up_and_out_put(ExerciseStyle::American, 100.0, 110.0, 0.5);
        assert_eq!(c.payoff(90.0, true), 10.0);
        assert_eq!(c.payoff(90.0, false), 0.0);
        assert_eq!(c.payoff(110.0, true), 0.0);
        assert!(ContractSpec { barrier: None, ..c }.check().is_err());
    }
}
