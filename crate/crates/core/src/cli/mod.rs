//! The `sepdiag` command line.
//!
//! Exit codes: 0 on success (any classification), 1 on other failures and
//! failed reproductions, 2 on configuration or argument errors, 3 when a
//! grid budget or sampling window is exceeded.

pub mod reproduce;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::analysis::{
    diagnose_with, run_checker, AnalysisError, CheckConfig, CheckerReport, DiagnoseOptions, DiagnosisReport, Property,
};
use crate::config::{ConfigError, ProblemConfig};
use crate::geometry::GeometryError;
use crate::sep::{approx_solution_set, Grids, SepError};

#[derive(Debug, Parser)]
#[command(name = "sepdiag", version, about = "Well-posedness diagnostics for split equilibrium problems")]
pub struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the problem and write report.json, curves.csv and clouds/.
    Diagnose {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Write at most this many rows per cloud CSV.
        #[arg(long)]
        cloud_rows: Option<usize>,
    },
    /// Run hypothesis checkers on f over C and g over Q; prints JSON.
    Check {
        #[command(flatten)]
        problem: ProblemArgs,
        /// A property name or `all`.
        #[arg(long, default_value = "all")]
        property: String,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample S(eps) and write it as CSV.
    Set {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the built-in examples and check their claims.
    Reproduce {
        #[arg(long, conflicts_with = "example", required_unless_present = "example")]
        all: bool,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        example: Option<u8>,
        /// Also write each example's report.json under this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Path to a JSON problem file, or builtin:example1..3.
    pub config: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Window radius for unbounded sets without one.
    #[arg(long)]
    pub window_radius: Option<f64>,
    #[arg(long)]
    pub h_out: Option<f64>,
    #[arg(long)]
    pub h_in: Option<f64>,
}

impl ProblemArgs {
    /// The config with command-line overrides applied and validated.
    pub fn load(&self) -> Result<ProblemConfig, ConfigError> {
        let mut config = ProblemConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(r) = self.window_radius {
            config.set_window_radius(r);
        }
        if let Some(h) = self.h_out {
            config.grids.h_out = h;
        }
        if let Some(h) = self.h_in {
            config.grids.h_in = h;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Sep(#[from] SepError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("{0} claim(s) failed")]
    Reproduction(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        let geometry = match self {
            CliError::Config(_) | CliError::Usage(_) => return 2,
            CliError::Analysis(AnalysisError::InvalidArgument(_) | AnalysisError::InvalidSchedule(_)) => return 2,
            CliError::Analysis(AnalysisError::Geometry(g)) => Some(g),
            CliError::Analysis(AnalysisError::Sep(e)) | CliError::Sep(e) => match e {
                SepError::InvalidEpsilon(_) | SepError::InvalidSchedule(_) | SepError::InvalidProblem(_) => return 2,
                SepError::WorkBudgetExceeded { .. } => return 3,
                SepError::Geometry(g) => Some(g),
                _ => None,
            },
            _ => None,
        };
        match geometry {
            Some(GeometryError::BudgetExceeded { .. } | GeometryError::Unbounded) => 3,
            _ => 1,
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(format!("creating {}", path.display())))
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // a reader such as `head` closed stdout early
        Err(CliError::Io { source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Runs a parsed command inside a pool of `--threads` workers when given.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?
            .install(|| run(cli.command)),
        None => run(cli.command),
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let stdout = io::stdout();
    match command {
        Command::Diagnose { problem, out, cloud_rows } => cmd_diagnose(&problem, &out, cloud_rows, &mut stdout.lock()),
        Command::Check { problem, property, out } => {
            let reports = cmd_check(&problem, &property)?;
            let text = serde_json::to_string_pretty(&reports).expect("reports serialize");
            emit(out.as_deref(), &text)
        }
        Command::Set { problem, eps, out } => {
            let config = problem.load()?;
            let prob = config.build()?;
            let set = approx_solution_set(&prob, eps, config.grids.h_out, config.grids.h_in)?;
            for note in &set.notes {
                eprintln!("warning: {note}");
            }
            let n = config.dims.n;
            match out {
                Some(path) => {
                    let mut w = create(&path)?;
                    set.write_csv(&mut w, n, None).and_then(|_| w.flush())
                }
                None => set.write_csv(stdout.lock(), n, None),
            }
            .map_err(io_err("writing cloud"))
        }
        Command::Reproduce { all, example, out } => {
            let examples: Vec<u8> = if all { vec![1, 2, 3] } else { example.into_iter().collect() };
            let mut failed = 0;
            let mut w = stdout.lock();
            for k in examples {
                let outcome = reproduce::reproduce_example(k)?;
                outcome.print(&mut w).map_err(io_err("writing output"))?;
                failed += outcome.claims.iter().filter(|c| !c.passed).count();
                if let Some(dir) = &out {
                    let dir = dir.join(format!("example{k}"));
                    fs::create_dir_all(&dir).map_err(io_err(format!("creating {}", dir.display())))?;
                    write_json(&dir.join("report.json"), &outcome.report.to_json())?;
                }
            }
            match failed {
                0 => Ok(()),
                n => Err(CliError::Reproduction(n)),
            }
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(io_err(format!("writing {}", p.display()))),
        None => writeln!(io::stdout().lock(), "{text}").map_err(io_err("writing output")),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json serializes");
    fs::write(path, format!("{text}\n")).map_err(io_err(format!("writing {}", path.display())))
}

/// Diagnoses a config with its schedule, thresholds, budget and seed.
pub fn diagnose_config(config: &ProblemConfig) -> Result<DiagnosisReport, CliError> {
    let prob = config.build()?;
    let mut options = DiagnoseOptions::new(config.schedule.clone(), Grids::new(config.grids.h_out, config.grids.h_in)?);
    options.thresholds = config.thresholds();
    options.kuratowski_budget = config.limits.kuratowski_budget;
    options.checks = Some(CheckConfig::with_seed(config.seed));
    Ok(diagnose_with(&prob, &options)?)
}

/// Diagnoses the problem, writes the report files under `out` and the
/// summary table to `table`.
pub fn cmd_diagnose<W: Write>(
    problem: &ProblemArgs,
    out: &Path,
    cloud_rows: Option<usize>,
    table: &mut W,
) -> Result<(), CliError> {
    let config = problem.load()?;
    let report = diagnose_config(&config)?;

    let clouds = out.join("clouds");
    fs::create_dir_all(&clouds).map_err(io_err(format!("creating {}", clouds.display())))?;
    let mut json = report.to_json();
    json["config"] = serde_json::to_value(&config).expect("config serializes");
    write_json(&out.join("report.json"), &json)?;
    let curves = out.join("curves.csv");
    let mut w = create(&curves)?;
    report.write_curves_csv(&mut w).and_then(|_| w.flush()).map_err(io_err(format!("writing {}", curves.display())))?;
    let n = config.dims.n;
    let named = report
        .clouds
        .iter()
        .enumerate()
        .map(|(i, c)| (format!("level{i}.csv"), c))
        .chain(report.solution_cloud.iter().map(|c| ("solution.csv".to_string(), c)));
    for (name, cloud) in named {
        let path = clouds.join(name);
        let mut w = create(&path)?;
        cloud
            .write_csv(&mut w, n, cloud_rows)
            .and_then(|_| w.flush())
            .map_err(io_err(format!("writing {}", path.display())))?;
    }
    write!(table, "{}", report.to_table()).map_err(io_err("writing output"))
}

/// Runs one property (or `all`) on `f` over `C` and `g` over `Q`.
pub fn cmd_check(problem: &ProblemArgs, property: &str) -> Result<Vec<CheckerReport>, CliError> {
    let properties: Vec<Property> = if property == "all" {
        Property::ALL.to_vec()
    } else {
        let names = Property::ALL.map(|p| p.name()).join(", ");
        vec![Property::from_name(property)
            .ok_or_else(|| CliError::Usage(format!("unknown property `{property}`; expected all, {names}")))?]
    };
    let config = problem.load()?;
    let prob = config.build()?;
    let check = CheckConfig::with_seed(config.seed);
    let mut reports = Vec::new();
    for p in properties {
        reports.push(run_checker(p, "f", prob.f(), prob.c(), &check)?);
        reports.push(run_checker(p, "g", prob.g(), prob.q(), &check)?);
    }
    Ok(reports)
}
