//! Experiment runner: ask/tell loops with simulated batch parallelism, grids
//! of runs, the pairwise win-frequency score and CSV/JSON export.

mod export;
mod grid;
mod score;

use serde::{Deserialize, Serialize};

use crate::benchmarks::ObjectiveSpec;
use crate::error::{invalid, Error, Result};
use crate::optimizers::{self, Algorithm, OptimizerConfig};

pub use export::{
    export_matrix, export_records, import_records, records_from_json, records_to_csv, records_to_json, ExportFormat,
    CSV_COLUMNS,
};
pub use grid::{parse_grid, run_grid, ExperimentGrid, GridRun};
pub use score::{score_matrix, ScoreMatrix};

/// One trace row, written after every completed generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Evaluations told so far.
    pub eval_index: u64,
    pub sigma: f64,
    pub lambda_eff: usize,
    pub best_fitness: f64,
    /// Objective value at the current recommendation, if one exists yet.
    pub reco_fitness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Aborted { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: u64,
    pub config: OptimizerConfig,
    /// Objective label; runs on the same label are comparable.
    pub objective: String,
    /// Known global minimum value, if any.
    pub optimum: Option<f64>,
    pub evaluations: u64,
    pub trace: Vec<TraceRow>,
    pub recommendation: Option<Vec<f64>>,
    pub reco_fitness: Option<f64>,
    /// `f(recommendation) − f(x*)`.
    pub regret: Option<f64>,
    pub status: RunStatus,
}

impl RunRecord {
    pub fn algorithm(&self) -> Algorithm {
        self.config.algorithm
    }

    /// Regret used for comparisons: missing regret ranks last.
    pub fn comparable_regret(&self) -> f64 {
        self.regret.unwrap_or(f64::INFINITY)
    }
}

/// Default label of an objective: `fn=<name> dim=<d>`, with markers for
/// translation and rotation.
pub fn objective_label(objective: &ObjectiveSpec) -> String {
    let mut s = format!("fn={} dim={}", objective.function.kind(), objective.dimension);
    if objective.translation.is_some() {
        s.push_str(" translated");
    }
    if objective.rotation.is_some() {
        s.push_str(" rotated");
    }
    s
}

/// [`run_experiment_labeled`] with the default [`objective_label`].
pub fn run_experiment(config: &OptimizerConfig, objective: &ObjectiveSpec) -> Result<RunRecord> {
    run_experiment_labeled(config, objective, &objective_label(objective), 0)
}

/// Runs the ask/tell loop until the budget is spent. Each step asks for up to
/// `num_workers` proposals and evaluates them as one batch. A non-finite
/// objective value stops the run with status [`RunStatus::Aborted`].
pub fn run_experiment_labeled(
    config: &OptimizerConfig,
    objective: &ObjectiveSpec,
    label: &str,
    run_id: u64,
) -> Result<RunRecord> {
    config.validate()?;
    if objective.dimension != config.dimension {
        return Err(invalid(format!(
            "objective dimension {} does not match optimizer dimension {}",
            objective.dimension, config.dimension
        )));
    }
    let mut opt = optimizers::build(config)?;
    let mut trace = Vec::new();
    let mut generation = opt.status().generation;
    let mut status = RunStatus::Completed;
    let reco_fitness = |opt: &dyn optimizers::Optimizer| opt.recommend().ok().map(|x| objective.evaluate_unchecked(&x));

    'outer: while opt.remaining_budget() > 0 {
        let batch = opt.ask(config.num_workers)?;
        if batch.is_empty() {
            return Err(invalid("optimizer returned an empty batch with nothing outstanding"));
        }
        let mut results = Vec::with_capacity(batch.len());
        for p in batch {
            let f = objective.evaluate_unchecked(p.x());
            if !f.is_finite() {
                status = RunStatus::Aborted {
                    reason: Error::NonFiniteFitness { eval_index: p.eval_index, value: f }.to_string(),
                };
                break 'outer;
            }
            results.push(p.evaluated(f));
        }
        opt.tell(&results)?;
        let s = opt.status();
        if s.generation != generation {
            generation = s.generation;
            trace.push(TraceRow {
                eval_index: s.evaluations,
                sigma: s.sigma,
                lambda_eff: s.lambda,
                best_fitness: opt.best_so_far().map_or(f64::INFINITY, |b| b.fitness),
                reco_fitness: reco_fitness(opt.as_ref()),
            });
        }
    }

    let recommendation = opt.recommend().ok();
    let reco_fitness = recommendation.as_ref().map(|x| objective.evaluate_unchecked(x)).filter(|f| f.is_finite());
    let optimum = objective.optimum_value();
    let regret = match (status.clone(), reco_fitness, optimum) {
        (RunStatus::Completed, Some(f), Some(o)) => Some(f - o),
        _ => None,
    };
    Ok(RunRecord {
        run_id,
        config: config.clone(),
        objective: label.to_string(),
        optimum,
        evaluations: opt.status().evaluations,
        trace,
        recommendation,
        reco_fitness,
        regret,
        status,
    })
}
