//! `tbpsa`: single runs, experiment grids, score matrices, exports and the
//! Monte Carlo verifiers.
//!
//! Exit status: 0 on success or PASS, 1 on FAIL or a runtime error, 2 on a
//! usage error (bad flags or invalid argument values).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use tbpsa::benchmarks::{make_constant, FunctionKind, ObjectiveRecord};
use tbpsa::harness::{
    export_matrix, export_records, import_records, parse_grid, run_experiment_labeled, run_grid, score_matrix,
    ExportFormat, RunRecord, ScoreMatrix,
};
use tbpsa::optimizers::{Algorithm, OptimizerConfig};
use tbpsa::theory::{
    verify_martingale, verify_plateau_escape, verify_plateau_monotonicity, verify_retention_monotonicity,
    verify_sigma_convergence, verify_trap_retention, verify_variance_bound, VerificationConfig, VerificationReport,
};

#[derive(Parser)]
#[command(name = "tbpsa", version, about = "TBPSA evolution strategies: experiments and verifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimizer on one objective.
    Run(RunArgs),
    /// Run an experiment grid described in a plain-text file.
    Grid(GridArgs),
    /// Score matrix from exported JSON records.
    Score(ScoreArgs),
    /// Convert exported JSON records to CSV or JSON.
    Export(ExportArgs),
    /// log σ drift on the constant objective (expected 0).
    VerifyMartingale(VerifyArgs),
    /// Var log σ_n with λ doubled every generation (bounded by 2τ²/μ₀).
    VerifyVariance(VerifyArgs),
    /// Tail oscillation of log σ over growing horizons.
    VerifySigma(VerifyArgs),
    /// Escape from a plateau of radius R.
    VerifyPlateau(PlateauArgs),
    /// Retention inside a trap's local basin.
    VerifyTrap(TrapArgs),
}

#[derive(Args)]
struct Output {
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json (default: from the file extension, else json).
    #[arg(long)]
    format: Option<ExportFormat>,
}

impl Output {
    fn format(&self) -> ExportFormat {
        self.format.unwrap_or_else(|| match self.out.as_deref().and_then(Path::extension).and_then(|e| e.to_str()) {
            Some("csv") => ExportFormat::Csv,
            _ => ExportFormat::Json,
        })
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "tbpsa")]
    algo: Algorithm,
    #[arg(long = "fn", default_value = "sphere")]
    function: FunctionKind,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1000)]
    budget: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scale of the seeded random translation of the objective (0 = none).
    #[arg(long, default_value_t = 0.0)]
    shift: f64,
    /// Apply a seeded random rotation to the objective.
    #[arg(long)]
    rotate: bool,
    /// Seed of the objective's translation and rotation.
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
    /// Plateau radius or trap local radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Trap optimum distance along the first axis.
    #[arg(long)]
    offset: Option<f64>,
    /// Trap depth.
    #[arg(long)]
    depth: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GridArgs {
    /// Grid description file.
    config: PathBuf,
    /// Where to write the records.
    #[command(flatten)]
    output: Output,
    /// Where to write the score matrix (format from extension, else json).
    #[arg(long)]
    score_out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    /// JSON records written by `run`, `grid` or `export`.
    records: Vec<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ExportArgs {
    /// JSON records.
    records: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    format: Option<ExportFormat>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Override the pass threshold.
    #[arg(long)]
    threshold: Option<f64>,
    /// Double λ every generation instead of running the stagnation test.
    #[arg(long)]
    force_doubling: bool,
    /// Write the full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlateauArgs {
    #[command(flatten)]
    common: VerifyArgs,
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    #[arg(long, default_value_t = 10.0)]
    radius: f64,
    /// Also check that the median first escape is nondecreasing over these radii.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<f64>,
}

#[derive(Args)]
struct TrapArgs {
    #[command(flatten)]
    common: VerifyArgs,
    #[arg(long, default_value_t = 20_000)]
    budget: u64,
    /// Local radius K'.
    #[arg(long, default_value_t = 10.0)]
    radius: f64,
    #[arg(long, default_value_t = 40.0)]
    offset: f64,
    #[arg(long, default_value_t = 1.0)]
    depth: f64,
    /// Also check that retention is nondecreasing over these K' (offset scaled in proportion).
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<f64>,
}

/// An error whose exit status is 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Library argument errors become usage errors.
fn lib<T>(r: tbpsa::Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        tbpsa::Error::InvalidArgument(_) => anyhow::Error::new(Usage(e.to_string())),
        other => anyhow::Error::new(other),
    })
}

impl VerifyArgs {
    fn config(&self, dim: usize, generations: usize, runs: usize) -> VerificationConfig {
        VerificationConfig {
            dimension: self.dim.unwrap_or(dim),
            generations: self.generations.unwrap_or(generations),
            runs: self.runs.unwrap_or(runs),
            seed: self.seed,
            tau: self.tau,
            force_doubling: self.force_doubling,
            threshold: self.threshold,
            ..VerificationConfig::default()
        }
    }
}

fn finish_report(reports: &[VerificationReport], out: Option<&Path>) -> Result<bool> {
    for r in reports {
        println!("{}", r.summary_line());
    }
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(reports)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(reports.iter().all(|r| r.passed))
}

fn print_matrix(m: &ScoreMatrix) {
    println!("score matrix over {} cells", m.cells);
    for (a, s) in m.algorithms.iter().zip(&m.scores) {
        println!("{a:>14}  {s:.4}");
    }
}

fn load(paths: &[PathBuf]) -> Result<Vec<RunRecord>> {
    if paths.is_empty() {
        return Err(Usage("need at least one records file".into()).into());
    }
    let mut all = Vec::new();
    for p in paths {
        all.extend(import_records(p)?);
    }
    Ok(all)
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Run(a) => {
            let mut rec = ObjectiveRecord::new(a.function, a.dim);
            rec.seed = a.instance_seed;
            rec.shift = a.shift;
            rec.rotate = a.rotate;
            rec.radius = a.radius;
            rec.offset = a.offset;
            rec.depth = a.depth;
            let objective = lib(rec.build())?;
            let config = OptimizerConfig::new(a.algo, a.dim, a.budget).with_workers(a.workers).with_seed(a.seed);
            let record = lib(run_experiment_labeled(&config, &objective, &rec.to_string(), 0))?;
            let regret = record.regret.map_or("none".to_string(), |r| format!("{r:e}"));
            println!(
                "{} [{}] evaluations={} generations={} regret={regret} status={:?}",
                record.algorithm(),
                record.objective,
                record.evaluations,
                record.trace.len(),
                record.status
            );
            if let Some(out) = &a.output.out {
                export_records(std::slice::from_ref(&record), a.output.format(), out)?;
            }
            Ok(true)
        }
        Command::Grid(a) => {
            let text = std::fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
            let grid = parse_grid(&text).with_context(|| format!("parsing {}", a.config.display()))?;
            let records = lib(run_grid(&grid))?;
            println!("{} runs", records.len());
            if let Some(out) = &a.output.out {
                export_records(&records, a.output.format(), out)?;
            }
            if grid.algorithms.len() > 1 {
                let m = lib(score_matrix(&records))?;
                print_matrix(&m);
                if let Some(out) = &a.score_out {
                    let fmt = Output { out: Some(out.clone()), format: None }.format();
                    export_matrix(&m, fmt, out)?;
                }
            }
            Ok(true)
        }
        Command::Score(a) => {
            let m = lib(score_matrix(&load(&a.records)?))?;
            print_matrix(&m);
            if let Some(out) = &a.output.out {
                export_matrix(&m, a.output.format(), out)?;
            }
            Ok(true)
        }
        Command::Export(a) => {
            let records = load(&a.records)?;
            let format = Output { out: Some(a.out.clone()), format: a.format }.format();
            export_records(&records, format, &a.out)?;
            println!("wrote {} records to {}", records.len(), a.out.display());
            Ok(true)
        }
        Command::VerifyMartingale(a) => {
            let cfg = a.config(2, 30, 1000);
            let r = lib(verify_martingale(&cfg, &lib(make_constant(cfg.dimension))?))?;
            finish_report(&[r], a.out.as_deref())
        }
        Command::VerifyVariance(a) => {
            let cfg = VerificationConfig { force_doubling: true, ..a.config(1, 12, 2000) };
            finish_report(&[lib(verify_variance_bound(&cfg))?], a.out.as_deref())
        }
        Command::VerifySigma(a) => {
            let cfg = a.config(2, 16, 500);
            finish_report(&[lib(verify_sigma_convergence(&cfg))?], a.out.as_deref())
        }
        Command::VerifyPlateau(a) => {
            let cfg = VerificationConfig { budget: a.budget, radius: a.radius, ..a.common.config(2, 0, 100) };
            let mut reports = vec![lib(verify_plateau_escape(&cfg))?];
            if !a.sweep.is_empty() {
                reports.push(lib(verify_plateau_monotonicity(&cfg, &a.sweep))?);
            }
            finish_report(&reports, a.common.out.as_deref())
        }
        Command::VerifyTrap(a) => {
            let cfg = VerificationConfig {
                budget: a.budget,
                radius: a.radius,
                trap_offset: a.offset,
                trap_depth: a.depth,
                ..a.common.config(2, 0, 100)
            };
            let mut reports = vec![lib(verify_trap_retention(&cfg))?];
            if !a.sweep.is_empty() {
                reports.push(lib(verify_retention_monotonicity(&cfg, &a.sweep))?);
            }
            finish_report(&reports, a.common.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
