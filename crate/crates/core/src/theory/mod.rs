//! Monte Carlo verifiers for the step-size and escape behaviour of TBPSA.
//!
//! | verifier                      | property checked                                                     |
//! |-------------------------------|----------------------------------------------------------------------|
//! | [`verify_martingale`]         | on a constant objective `E log σ_n` does not drift                   |
//! | [`verify_variance_bound`]     | with λ doubling every generation, `Var log σ_n ≤ 2τ²/μ₀`             |
//! | [`verify_sigma_convergence`]  | tail oscillation of `log σ_n` shrinks as the horizon grows           |
//! | [`verify_plateau_escape`]     | the ES leaves any bounded plateau                                    |
//! | [`verify_trap_retention`]     | a locally converging run never leaves the basin of a trap            |
//!
//! Almost-sure statements are checked as high-probability thresholds at fixed
//! budgets. Each Monte Carlo repetition draws from its own substream
//! `(seed, run)`, runs execute in parallel and are reduced in run order, so
//! reports are reproducible up to the wall-clock field.

mod convergence;
mod martingale;
mod plateau;
mod trap;
mod variance;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::ObjectiveSpec;
use crate::error::{invalid, Result};
use crate::optimizers::{Algorithm, Optimizer, OptimizerConfig, Proposal, Schedule, Tbpsa, TbpsaParams};
use crate::rng;

pub use convergence::{reduced_log_sigma_chain, verify_sigma_convergence};
pub use martingale::{log_sigma_drift, verify_martingale};
pub use plateau::{displacement_records, plateau_escape_sweep, verify_plateau_escape, verify_plateau_monotonicity};
pub use trap::{fit_h1_constant, trap_retention_sweep, verify_retention_monotonicity, verify_trap_retention};
pub use variance::verify_variance_bound;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationConfig {
    pub dimension: usize,
    pub generations: usize,
    pub runs: usize,
    pub seed: u64,
    pub tau: f64,
    /// Evaluation budget per run (plateau and trap verifiers).
    pub budget: u64,
    /// Plateau radius R, or the trap's local radius K'.
    pub radius: f64,
    /// Distance of the trap's deep optimum along the first axis.
    pub trap_offset: f64,
    pub trap_depth: f64,
    /// Double λ every generation instead of running the stagnation test.
    pub force_doubling: bool,
    /// Overrides the verifier's default pass threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            dimension: 2,
            generations: 30,
            runs: 1000,
            seed: 0,
            tau: 1.0,
            budget: 100_000,
            radius: 10.0,
            trap_offset: 40.0,
            trap_depth: 1.0,
            force_doubling: false,
            threshold: None,
        }
    }
}

/// Minimum repetitions for verifiers relying on normal-approximation intervals.
pub const MIN_RUNS: usize = 30;

impl VerificationConfig {
    fn validate(&self, normal_ci: bool) -> Result<()> {
        if self.dimension == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if self.runs == 0 || (normal_ci && self.runs < MIN_RUNS) {
            return Err(invalid(format!("need at least {MIN_RUNS} runs, got {}", self.runs)));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(invalid(format!("tau must be finite and >= 0, got {}", self.tau)));
        }
        Ok(())
    }

    fn schedule(&self) -> Schedule {
        if self.force_doubling {
            Schedule::ForceDoubling
        } else {
            Schedule::TestBased
        }
    }

    fn params(&self) -> TbpsaParams {
        TbpsaParams { tau: self.tau, schedule: self.schedule(), ..TbpsaParams::default() }
    }

    /// A TBPSA instance for repetition `run`, on its own substream.
    fn optimizer(&self, budget: u64, run: usize) -> Result<Tbpsa> {
        let config = OptimizerConfig::new(Algorithm::Tbpsa, self.dimension, budget);
        Tbpsa::with_rng(&config, self.params(), rng::stream(self.seed, run as u64))
    }
}

/// How `passed` follows from estimate, interval and threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    IntervalContains,
    LowerBoundAtMost,
    EstimateAtLeast,
    EstimateAtMost,
    EstimateBelow,
}

impl Rule {
    pub fn passes(self, estimate: f64, interval: (f64, f64), threshold: f64) -> bool {
        match self {
            Rule::IntervalContains => interval.0 <= threshold && threshold <= interval.1,
            Rule::LowerBoundAtMost => interval.0 <= threshold,
            Rule::EstimateAtLeast => estimate >= threshold,
            Rule::EstimateAtMost => estimate <= threshold,
            Rule::EstimateBelow => estimate < threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub statistic: String,
    pub estimate: f64,
    pub interval: (f64, f64),
    /// Half-width multiplier of `interval` in standard errors (1.96 for 95%).
    pub interval_z: f64,
    pub threshold: f64,
    pub rule: Rule,
    pub passed: bool,
    pub runs: usize,
    pub wall_clock_secs: f64,
    #[serde(default)]
    pub scalars: Vec<(String, f64)>,
    #[serde(default)]
    pub series: Vec<(String, Vec<f64>)>,
}

impl VerificationReport {
    fn new(
        statistic: &str,
        estimate: f64,
        interval: (f64, f64),
        interval_z: f64,
        threshold: f64,
        rule: Rule,
        runs: usize,
    ) -> Self {
        Self {
            statistic: statistic.to_string(),
            estimate,
            interval,
            interval_z,
            threshold,
            rule,
            passed: rule.passes(estimate, interval, threshold),
            runs,
            wall_clock_secs: 0.0,
            scalars: Vec::new(),
            series: Vec::new(),
        }
    }

    fn scalar(mut self, name: &str, value: f64) -> Self {
        self.scalars.push((name.to_string(), value));
        self
    }

    fn with_series(mut self, name: &str, values: Vec<f64>) -> Self {
        self.series.push((name.to_string(), values));
        self
    }

    fn timed(mut self, start: Instant) -> Self {
        self.wall_clock_secs = start.elapsed().as_secs_f64();
        self
    }

    pub fn get_scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn get_series(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// `PASS <statistic> estimate=… ci=[…, …] threshold=… runs=… time=…s`
    pub fn summary_line(&self) -> String {
        format!(
            "{} {} estimate={:.6} ci=[{:.6}, {:.6}] threshold={} rule={:?} runs={} time={:.2}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.statistic,
            self.estimate,
            self.interval.0,
            self.interval.1,
            self.threshold,
            self.rule,
            self.runs,
            self.wall_clock_secs
        )
    }
}

/// Runs `f(run)` for every repetition in parallel, collecting in run order.
fn par_runs<T, F>(runs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..runs).into_par_iter().map(f).collect()
}

/// Asks the rest of the current generation (capped by the budget), evaluates
/// it and tells it back. Returns the proposals and their fitnesses.
fn step_generation(opt: &mut Tbpsa, objective: &ObjectiveSpec) -> Result<Vec<(Proposal, f64)>> {
    let batch = opt.ask(usize::MAX)?;
    let fitness: Vec<f64> = batch.iter().map(|p| objective.evaluate(p.x())).collect::<Result<_>>()?;
    let results: Vec<_> = batch.iter().cloned().zip(&fitness).map(|(p, &f)| p.evaluated(f)).collect();
    opt.tell(&results)?;
    Ok(batch.into_iter().zip(fitness).collect())
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules() {
        assert!(Rule::IntervalContains.passes(0.1, (-0.1, 0.2), 0.0));
        assert!(!Rule::IntervalContains.passes(0.3, (0.1, 0.5), 0.0));
        assert!(Rule::LowerBoundAtMost.passes(2.1, (1.9, 2.3), 2.0));
        assert!(Rule::EstimateAtLeast.passes(0.99, (0.9, 1.0), 0.99));
        assert!(!Rule::EstimateBelow.passes(0.0, (0.0, 0.0), 0.0));
        assert!(Rule::EstimateAtMost.passes(0.0, (0.0, 0.0), 0.0));
    }

    #[test]
    fn too_few_runs_rejected() {
        let cfg = VerificationConfig { runs: 10, ..VerificationConfig::default() };
        assert!(cfg.validate(true).is_err());
        assert!(cfg.validate(false).is_ok());
    }
}
