//! The four subcommands, as pure functions of a resolved config.

use std::io::Write;

use jdoi_core::estimator::{aggregate, run, EstimatorChoice, RunOptions, RunResult};
use jdoi_core::lsmc::BasisSpec;
use jdoi_core::sim::simulate;
use jdoi_core::EstimatorStats;
use rayon::prelude::*;

use crate::config::{ContractKind, Estimator, RunConfig, Style};
use crate::report::{Cell, Report};
use crate::BenchError;

/// Starting spots and barriers of the reference barrier sweep.
pub const SWEEP_SPOTS: [f64; 5] = [90.0, 95.0, 100.0, 105.0, 110.0];
pub const SWEEP_BARRIERS: [f64; 3] = [110.0, 115.0, 120.0];

const STATS_COLUMNS: [&str; 7] = ["mean", "stddev", "ci_lo", "ci_hi", "min", "max", "n"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Steps,
    Paths,
}

/// Run-level statistics of one configuration: each run contributes its mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mc: Option<EstimatorStats>,
    pub jdoi: Option<EstimatorStats>,
    pub runs: Vec<RunResult>,
}

impl Summary {
    fn blocks(&self) -> impl Iterator<Item = (&'static str, &EstimatorStats)> {
        [("mc", self.mc.as_ref()), ("jdoi", self.jdoi.as_ref())]
            .into_iter()
            .filter_map(|(name, s)| s.map(|s| (name, s)))
    }
}

fn options(cfg: &RunConfig) -> RunOptions {
    RunOptions {
        estimators: match cfg.estimator {
            Estimator::Mc => EstimatorChoice::Mc,
            Estimator::Jdoi => EstimatorChoice::Jdoi,
            Estimator::Both => EstimatorChoice::Both,
        },
        basis: BasisSpec { spot_order: cfg.laguerre_order, ..BasisSpec::default() },
        out_of_sample: cfg.out_of_sample,
    }
}

/// Runs `cfg.runs` repetitions with seeds `seed + run_index`, in run order.
pub fn run_all(cfg: &RunConfig) -> Result<Vec<RunResult>, BenchError> {
    let params = cfg.params();
    let x0 = cfg.model.start();
    let contract = cfg.contract_spec();
    let grid = cfg.grid()?;
    let opts = options(cfg);
    let results: Result<Vec<_>, _> = (0..cfg.runs)
        .into_par_iter()
        .map(|i| run(&params, &x0, &contract, &grid, cfg.paths, cfg.seed.wrapping_add(i as u64), &opts))
        .collect();
    Ok(results?)
}

fn across_runs(means: &[f64]) -> Result<EstimatorStats, BenchError> {
    if let [only] = means {
        let x = *only;
        return Ok(EstimatorStats { n: 1, mean: x, sample_std: f64::NAN, ci95_lo: x, ci95_hi: x, min: x, max: x });
    }
    Ok(aggregate(means)?)
}

/// Runs `cfg` and summarizes the run-level estimates of each requested estimator.
pub fn summarize(cfg: &RunConfig) -> Result<Summary, BenchError> {
    let runs = run_all(cfg)?;
    let mc_means: Vec<f64> = runs.iter().map(|r| r.mc.mean).collect();
    let jdoi_means: Option<Vec<f64>> = runs.iter().map(|r| r.jdoi.map(|s| s.mean)).collect();
    let mc = if cfg.estimator == Estimator::Jdoi { None } else { Some(across_runs(&mc_means)?) };
    let jdoi = jdoi_means.map(|m| across_runs(&m)).transpose()?;
    Ok(Summary { mc, jdoi, runs })
}

fn stats_cells(s: &EstimatorStats) -> Vec<Cell> {
    vec![
        Cell::Float(s.mean),
        Cell::Float(s.sample_std),
        Cell::Float(s.ci95_lo),
        Cell::Float(s.ci95_hi),
        Cell::Float(s.min),
        Cell::Float(s.max),
        Cell::Int(s.n as u64),
    ]
}

fn columns(lead: &[&'static str]) -> Vec<&'static str> {
    lead.iter().chain(&STATS_COLUMNS).copied().collect()
}

/// Per-run path statistics followed by the run-level summary of each estimator.
pub fn price(cfg: &RunConfig) -> Result<Report, BenchError> {
    let summary = summarize(cfg)?;
    let mut report = Report::new("price", columns(&["record", "run", "seed", "estimator"]));
    for (i, r) in summary.runs.iter().enumerate() {
        let per_run = [("mc", (cfg.estimator != Estimator::Jdoi).then_some(&r.mc)), ("jdoi", r.jdoi.as_ref())];
        for (name, stats) in per_run {
            if let Some(stats) = stats {
                let mut row = vec![
                    Cell::Text("run".into()),
                    Cell::Int(i as u64),
                    Cell::Int(cfg.seed.wrapping_add(i as u64)),
                    Cell::Text(name.into()),
                ];
                row.extend(stats_cells(stats));
                report.push(row);
            }
        }
    }
    for (name, stats) in summary.blocks() {
        let mut row = vec![Cell::Text("summary".into()), Cell::Empty, Cell::Empty, Cell::Text(name.into())];
        row.extend(stats_cells(stats));
        report.push(row);
    }
    Ok(report)
}

/// Configuration of one barrier-sweep cell: American up-and-out put at spot `s0` and barrier `h`.
pub fn sweep_cell(cfg: &RunConfig, s0: f64, h: f64) -> RunConfig {
    let mut cell = cfg.clone();
    cell.model.s0 = s0;
    cell.contract = ContractKind::Uop;
    cell.style = Style::Amer;
    cell.barrier = Some(h);
    cell
}

/// Barrier sweep over `spots × barriers`, American up-and-out puts.
pub fn table2(cfg: &RunConfig, spots: &[f64], barriers: &[f64]) -> Result<Report, BenchError> {
    let mut report = Report::new("table2", columns(&["S0", "H", "estimator"]));
    for &s0 in spots {
        for &h in barriers {
            let summary = summarize(&sweep_cell(cfg, s0, h))?;
            for (name, stats) in summary.blocks() {
                let mut row = vec![Cell::Float(s0), Cell::Float(h), Cell::Text(name.into())];
                row.extend(stats_cells(stats));
                report.push(row);
            }
        }
    }
    Ok(report)
}

/// Default sweep values of each axis.
pub fn default_axis_values(axis: Axis) -> Vec<usize> {
    match axis {
        Axis::Steps => (3..=11).map(|n| 1 << n).collect(),
        Axis::Paths => (9..=17).map(|n| 1 << n).collect(),
    }
}

/// Reruns `cfg` with the step count or path count set to each of `values`.
pub fn scaling(cfg: &RunConfig, axis: Axis, values: &[usize]) -> Result<Report, BenchError> {
    let mut report = Report::new("scaling", columns(&["axis", "value", "estimator"]));
    let label = match axis {
        Axis::Steps => "steps",
        Axis::Paths => "paths",
    };
    for &v in values {
        let mut point = cfg.clone();
        match axis {
            Axis::Steps => point.steps = v,
            Axis::Paths => point.paths = v,
        }
        point.validate()?;
        let summary = summarize(&point)?;
        for (name, stats) in summary.blocks() {
            let mut row = vec![Cell::Text(label.into()), Cell::Int(v as u64), Cell::Text(name.into())];
            row.extend(stats_cells(stats));
            report.push(row);
        }
    }
    Ok(report)
}

/// One row per (run, estimator) holding that run's price estimate.
pub fn histogram(cfg: &RunConfig) -> Result<Report, BenchError> {
    let summary = summarize(cfg)?;
    let mut report = Report::new("histogram", vec!["run", "seed", "estimator", "estimate"]);
    for (i, r) in summary.runs.iter().enumerate() {
        let estimates =
            [("mc", (cfg.estimator != Estimator::Jdoi).then_some(r.mc.mean)), ("jdoi", r.jdoi.map(|s| s.mean))];
        for (name, value) in estimates {
            if let Some(value) = value {
                report.push(vec![
                    Cell::Int(i as u64),
                    Cell::Int(cfg.seed.wrapping_add(i as u64)),
                    Cell::Text(name.into()),
                    Cell::Float(value),
                ]);
            }
        }
    }
    Ok(report)
}

/// Writes the paths of the first run as CSV: `path,step,t,s,nu,eta,alive`.
pub fn dump_paths(cfg: &RunConfig, out: &mut impl Write) -> Result<(), BenchError> {
    let mut bundle = simulate(&cfg.params(), &cfg.model.start(), &cfg.grid()?, cfg.paths, cfg.seed)?;
    if let Some(h) = cfg.barrier {
        bundle.mark_knockout(h);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path", "step", "t", "s", "nu", "eta", "alive"])?;
    for p in 0..bundle.n_paths {
        for n in 0..=bundle.grid.n_steps {
            let x = bundle.state(p, n);
            w.write_record([
                p.to_string(),
                n.to_string(),
                x.t.to_string(),
                x.s.to_string(),
                x.nu.to_string(),
                x.eta.to_string(),
                u8::from(x.alive).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
