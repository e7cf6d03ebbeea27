use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jdoi_bench::commands::{self, default_axis_values, SWEEP_BARRIERS, SWEEP_SPOTS};
use jdoi_bench::config::{self, ContractKind, Estimator, Format, Style};
use jdoi_bench::{Axis, BenchError, Overrides, Report, RunConfig};

#[derive(Parser)]
#[command(name = "jdoi", version, about = "MC and JDOI pricing of puts and up-and-out puts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Flat TOML config; unspecified keys take the reference values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    paths: Option<usize>,
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long, global = true)]
    runs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    contract: Option<ContractKind>,
    #[arg(long, global = true, value_enum)]
    style: Option<Style>,
    #[arg(long, global = true)]
    strike: Option<f64>,
    #[arg(long, global = true)]
    barrier: Option<f64>,
    #[arg(long, global = true, value_enum)]
    estimator: Option<Estimator>,
    /// Output file; stdout if absent.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Steps,
    Paths,
}

#[derive(Subcommand)]
enum Command {
    /// Price the configured contract over several seeded runs.
    Price {
        /// Also write the first run's simulated paths to this CSV file.
        #[arg(long)]
        dump_paths: Option<PathBuf>,
    },
    /// Sweep American up-and-out puts over starting spots and barriers.
    Table2 {
        #[arg(long, value_delimiter = ',', default_values_t = SWEEP_SPOTS)]
        spots: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = SWEEP_BARRIERS)]
        barriers: Vec<f64>,
    },
    /// Rerun the configured contract across step or path counts.
    Scaling {
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Axis values; powers of two by default.
        #[arg(long, value_delimiter = ',')]
        values: Vec<usize>,
    },
    /// Per-run estimates for external histogram plotting.
    Histogram,
}

fn execute(cli: Cli) -> Result<(), BenchError> {
    let c = cli.common;
    let overrides = Overrides {
        paths: c.paths,
        steps: c.steps,
        runs: c.runs,
        seed: c.seed,
        contract: c.contract,
        style: c.style,
        strike: c.strike,
        barrier: c.barrier,
        estimator: c.estimator,
        format: c.format,
        out: c.out,
        threads: c.threads,
    };
    let (cfg, output) = config::load(c.config.as_deref(), &overrides)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(output.threads)
        .build()
        .map_err(|e| BenchError::Config(format!("threads: {e}")))?;
    let report = pool.install(|| build(&cli.command, &cfg))?;

    let hash = cfg.hash();
    match &output.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| BenchError::Config(format!("cannot create {path}: {e}")))?;
            let mut w = BufWriter::new(file);
            report.write(output.format, &hash, &mut w)?;
            w.flush()?;
        }
        None => report.write(output.format, &hash, io::stdout().lock())?,
    }
    Ok(())
}

fn build(command: &Command, cfg: &RunConfig) -> Result<Report, BenchError> {
    match command {
        Command::Price { dump_paths } => {
            if let Some(path) = dump_paths {
                let file = File::create(path)
                    .map_err(|e| BenchError::Config(format!("cannot create {}: {e}", path.display())))?;
                commands::dump_paths(cfg, &mut BufWriter::new(file))?;
            }
            commands::price(cfg)
        }
        Command::Table2 { spots, barriers } => commands::table2(cfg, spots, barriers),
        Command::Scaling { axis, values } => {
            let axis = match axis {
                AxisArg::Steps => Axis::Steps,
                AxisArg::Paths => Axis::Paths,
            };
            let values = if values.is_empty() { default_axis_values(axis) } else { values.clone() };
            commands::scaling(cfg, axis, &values)
        }
        Command::Histogram => commands::histogram(cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
