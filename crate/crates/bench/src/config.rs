//! Flat TOML run configuration.
//!
//! Model keys are the usual parameter symbols (`S0`, `nu0`, `kappa1`, ...);
//! contract, grid, Monte Carlo and output keys sit alongside them. Every key is
//! optional and falls back to the reference parameter set.

use std::path::Path;

use jdoi_core::{ContractSpec, ExerciseStyle, H32JParams, MarketState, MixedExpJump, TimeGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ContractKind {
    Put,
    Uop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    Euro,
    Amer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Mc,
    Jdoi,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Model parameters keyed by their symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "S0")]
    pub s0: f64,
    pub nu0: f64,
    pub eta0: f64,
    pub r: f64,
    pub d: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub lambda: f64,
    #[serde(rename = "T")]
    pub maturity: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let t = H32JParams::reference();
        Self {
            s0: 100.0,
            nu0: 0.01,
            eta0: 0.01,
            r: t.r,
            d: t.delta,
            kappa1: t.kappa1,
            kappa2: t.kappa2,
            theta1: t.theta1,
            theta2: t.theta2,
            sigma1: t.sigma1,
            sigma2: t.sigma2,
            rho1: t.rho1,
            rho2: t.rho2,
            a: 100.0,
            b: 25.0,
            p: 0.3,
            lambda: t.lambda,
            maturity: 0.5,
            c1: t.c1,
            c2: t.c2,
        }
    }
}

impl ModelConfig {
    pub fn params(&self) -> H32JParams {
        H32JParams {
            r: self.r,
            delta: self.d,
            lambda: self.lambda,
            c1: self.c1,
            c2: self.c2,
            kappa1: self.kappa1,
            theta1: self.theta1,
            sigma1: self.sigma1,
            rho1: self.rho1,
            kappa2: self.kappa2,
            theta2: self.theta2,
            sigma2: self.sigma2,
            rho2: self.rho2,
            jumps: MixedExpJump::double_exponential(self.p, self.a, self.b),
        }
    }

    pub fn start(&self) -> MarketState {
        MarketState::new(0.0, self.s0, self.nu0, self.eta0)
    }
}

/// A fully resolved configuration. Everything that can change the numbers is
/// here; output destination and thread count are not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub contract: ContractKind,
    pub style: Style,
    pub strike: f64,
    pub barrier: Option<f64>,
    pub steps: usize,
    pub paths: usize,
    pub runs: usize,
    pub seed: u64,
    pub estimator: Estimator,
    pub out_of_sample: bool,
    pub laguerre_order: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            contract: ContractKind::Put,
            style: Style::Amer,
            strike: 100.0,
            barrier: None,
            steps: 100,
            paths: 10_000,
            runs: 20,
            seed: 1,
            estimator: Estimator::Both,
            out_of_sample: false,
            laguerre_order: 2,
        }
    }
}

macro_rules! file_config {
    ($($field:ident $(as $key:literal)?),* $(,)?) => {
        /// What a config file may contain.
        #[derive(Debug, Default, Deserialize)]
        #[serde(deny_unknown_fields)]
        struct FileConfig {
            $( $(#[serde(rename = $key)])? $field: Option<f64>, )*
            contract: Option<ContractKind>,
            style: Option<Style>,
            #[serde(rename = "K")]
            strike: Option<f64>,
            #[serde(rename = "H")]
            barrier: Option<f64>,
            steps: Option<usize>,
            paths: Option<usize>,
            runs: Option<usize>,
            seed: Option<u64>,
            estimator: Option<Estimator>,
            out_of_sample: Option<bool>,
            laguerre_order: Option<usize>,
            format: Option<Format>,
            out: Option<String>,
            threads: Option<usize>,
        }

        impl FileConfig {
            fn apply_model(&self, m: &mut ModelConfig) {
                $( if let Some(v) = self.$field { m.$field = v; } )*
            }
        }
    };
}

file_config!(
    s0 as "S0", nu0, eta0, r, d, kappa1, kappa2, theta1, theta2, sigma1, sigma2, rho1, rho2, a, b, p, lambda,
    maturity as "T", c1, c2,
);

/// Output settings, kept out of the config hash.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputConfig {
    pub format: Format,
    pub out: Option<String>,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub paths: Option<usize>,
    pub steps: Option<usize>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub contract: Option<ContractKind>,
    pub style: Option<Style>,
    pub strike: Option<f64>,
    pub barrier: Option<f64>,
    pub estimator: Option<Estimator>,
    pub format: Option<Format>,
    pub out: Option<String>,
    pub threads: Option<usize>,
}

/// Reads `path` (if any), applies `overrides` and validates the result.
pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<(RunConfig, OutputConfig), BenchError> {
    let file = match path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
            parse(&text)?
        }
        None => FileConfig::default(),
    };
    resolve(file, overrides)
}

/// Parses config text and applies `overrides`.
pub fn from_str(text: &str, overrides: &Overrides) -> Result<(RunConfig, OutputConfig), BenchError> {
    resolve(parse(text)?, overrides)
}

fn parse(text: &str) -> Result<FileConfig, BenchError> {
    toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
}

fn resolve(file: FileConfig, o: &Overrides) -> Result<(RunConfig, OutputConfig), BenchError> {
    let mut cfg = RunConfig::default();
    file.apply_model(&mut cfg.model);
    cfg.contract = o.contract.or(file.contract).unwrap_or(cfg.contract);
    cfg.style = o.style.or(file.style).unwrap_or(cfg.style);
    cfg.strike = o.strike.or(file.strike).unwrap_or(cfg.strike);
    cfg.barrier = o.barrier.or(file.barrier);
    cfg.steps = o.steps.or(file.steps).unwrap_or(cfg.steps);
    cfg.paths = o.paths.or(file.paths).unwrap_or(cfg.paths);
    cfg.runs = o.runs.or(file.runs).unwrap_or(cfg.runs);
    cfg.seed = o.seed.or(file.seed).unwrap_or(cfg.seed);
    cfg.estimator = o.estimator.or(file.estimator).unwrap_or(cfg.estimator);
    cfg.out_of_sample = file.out_of_sample.unwrap_or(cfg.out_of_sample);
    cfg.laguerre_order = file.laguerre_order.unwrap_or(cfg.laguerre_order);
    let output = OutputConfig {
        format: o.format.or(file.format).unwrap_or_default(),
        out: o.out.clone().or(file.out),
        threads: o.threads.or(file.threads).unwrap_or(0),
    };
    cfg.validate()?;
    Ok((cfg, output))
}

impl RunConfig {
    /// Field-level checks; model constraints that only warn are logged.
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::Config(msg));
        if self.runs < 1 {
            return bad("runs: must be at least 1".into());
        }
        if self.paths < 2 {
            return bad("paths: must be at least 2".into());
        }
        if self.steps < 1 {
            return bad("steps: must be at least 1".into());
        }
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return bad(format!("K: must be positive, got {}", self.strike));
        }
        match (self.contract, self.barrier) {
            (ContractKind::Uop, None) => return bad("H: required for contract = \"uop\"".into()),
            (ContractKind::Put, Some(_)) => return bad("H: only valid for contract = \"uop\"".into()),
            (_, Some(h)) if !(h > 0.0 && h.is_finite()) => return bad(format!("H: must be positive, got {h}")),
            _ => {}
        }
        let m = &self.model;
        if !(m.maturity > 0.0 && m.maturity.is_finite()) {
            return bad(format!("T: must be positive, got {}", m.maturity));
        }
        if !(m.s0 > 0.0 && m.s0.is_finite()) {
            return bad(format!("S0: must be positive, got {}", m.s0));
        }
        if !(m.nu0 >= 0.0 && m.eta0 >= 0.0) {
            return bad("nu0, eta0: must be nonnegative".into());
        }
        let params = self.params();
        params.check_simulable().map_err(|e| BenchError::Config(e.to_string()))?;
        for issue in params.validate().issues {
            log::warn!("model constraint not met: {}", issue.name);
        }
        Ok(())
    }

    pub fn params(&self) -> H32JParams {
        self.model.params()
    }

    pub fn grid(&self) -> Result<TimeGrid, BenchError> {
        Ok(TimeGrid::new(self.model.maturity, self.steps)?)
    }

    pub fn contract_spec(&self) -> ContractSpec {
        let style = match self.style {
            Style::Euro => ExerciseStyle::European,
            Style::Amer => ExerciseStyle::American,
        };
        match self.barrier {
            Some(h) if self.contract == ContractKind::Uop => {
                ContractSpec::up_and_out_put(style, self.strike, h, self.model.maturity)
            }
            _ => ContractSpec::put(style, self.strike, self.model.maturity),
        }
    }

    /// SHA-256 of the canonical JSON form, first 16 hex digits.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
