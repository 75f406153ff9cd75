use std::time::Instant;

use crate::benchmarks::{make_constant, make_plateau};
use crate::error::{invalid, Error, Result};
use crate::stats::{self, wilson_interval, Z95};

use super::{norm, par_runs, step_generation, Rule, VerificationConfig, VerificationReport};

pub const DEFAULT_ESCAPE_THRESHOLD: f64 = 0.99;

/// First evaluation index at which a sampled point or the parent leaves the
/// closed ball of radius `cfg.radius` around the start, or `None` within budget.
fn first_escape(cfg: &VerificationConfig, run: usize) -> Result<Option<u64>> {
    let objective = make_plateau(cfg.dimension, cfg.radius)?;
    let mut opt = cfg.optimizer(cfg.budget, run)?;
    loop {
        let batch = match step_generation(&mut opt, &objective) {
            Ok(b) => b,
            Err(Error::BudgetExhausted { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        if let Some((p, _)) = batch.iter().find(|(p, _)| norm(p.x()) > cfg.radius) {
            return Ok(Some(p.eval_index));
        }
        if norm(&opt.parent().center) > cfg.radius {
            return Ok(Some(batch.last().map_or(0, |(p, _)| p.eval_index + 1)));
        }
    }
}

/// Fraction of runs that leave the plateau within the budget (pass iff
/// ≥ 0.99 by default) and the median first-escape index (infinite when fewer
/// than half of the runs escape).
pub fn verify_plateau_escape(cfg: &VerificationConfig) -> Result<VerificationReport> {
    cfg.validate(false)?;
    if cfg.radius.is_nan() || cfg.radius < 0.0 || cfg.radius.is_infinite() {
        return Err(invalid(format!("plateau radius must be finite and >= 0, got {}", cfg.radius)));
    }
    let start = Instant::now();
    let escapes = par_runs(cfg.runs, |run| first_escape(cfg, run))?;
    let escaped = escapes.iter().filter(|e| e.is_some()).count();
    let fraction = escaped as f64 / cfg.runs as f64;
    let indices: Vec<f64> = escapes.iter().map(|e| e.map_or(f64::INFINITY, |i| i as f64)).collect();
    let threshold = cfg.threshold.unwrap_or(DEFAULT_ESCAPE_THRESHOLD);
    Ok(VerificationReport::new(
        "escape_fraction",
        fraction,
        wilson_interval(escaped, cfg.runs, Z95),
        Z95,
        threshold,
        Rule::EstimateAtLeast,
        cfg.runs,
    )
    .scalar("radius", cfg.radius)
    .scalar("budget", cfg.budget as f64)
    .scalar("median_first_escape", stats::median(&indices))
    .with_series("first_escape", indices)
    .timed(start))
}

/// [`verify_plateau_escape`] at each radius.
pub fn plateau_escape_sweep(cfg: &VerificationConfig, radii: &[f64]) -> Result<Vec<VerificationReport>> {
    radii.iter().map(|&r| verify_plateau_escape(&VerificationConfig { radius: r, ..cfg.clone() })).collect()
}

/// Median first-escape index must be finite and nondecreasing in the radius.
/// Estimate: largest decrease between consecutive radii (pass iff ≤ 0).
pub fn verify_plateau_monotonicity(cfg: &VerificationConfig, radii: &[f64]) -> Result<VerificationReport> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("need at least two strictly increasing radii"));
    }
    let start = Instant::now();
    let reports = plateau_escape_sweep(cfg, radii)?;
    let medians: Vec<f64> =
        reports.iter().map(|r| r.get_scalar("median_first_escape").unwrap_or(f64::INFINITY)).collect();
    let estimate = if medians.iter().all(|m| m.is_finite()) {
        medians.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max)
    } else {
        f64::INFINITY
    };
    let threshold = cfg.threshold.unwrap_or(0.0);
    Ok(VerificationReport::new(
        "max_median_escape_decrease",
        estimate,
        (estimate, estimate),
        0.0,
        threshold,
        Rule::EstimateAtMost,
        cfg.runs,
    )
    .with_series("radii", radii.to_vec())
    .with_series("median_first_escape", medians)
    .with_series("escape_fraction", reports.iter().map(|r| r.estimate).collect())
    .timed(start))
}

/// Running maximum of `‖x_{n,i} − x_n‖` per generation on the constant
/// objective, for one run.
pub fn displacement_records(cfg: &VerificationConfig, run: usize) -> Result<Vec<f64>> {
    cfg.validate(false)?;
    let objective = make_constant(cfg.dimension)?;
    let mut opt = cfg.optimizer(u64::MAX, run)?;
    let mut best = 0.0f64;
    let mut out = Vec::with_capacity(cfg.generations);
    for _ in 0..cfg.generations {
        let center = opt.parent().center.clone();
        let batch = step_generation(&mut opt, &objective)?;
        for (p, _) in &batch {
            let d = p.x().iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            best = best.max(d);
        }
        out.push(best);
    }
    Ok(out)
}
