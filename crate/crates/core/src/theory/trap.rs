use std::time::Instant;

use crate::benchmarks::make_trap;
use crate::error::{invalid, Error, Result};
use crate::stats::{self, wilson_interval, Z95};

use super::{norm, par_runs, step_generation, Rule, VerificationConfig, VerificationReport};

pub const DEFAULT_RETENTION_THRESHOLD: f64 = 0.95;

struct TrapRun {
    exited: bool,
    max_center_norm: f64,
    fitted_k: Option<f64>,
}

/// Smallest `K` with `‖x_n‖ ≤ K` and `σ_{n,i} ≤ K e^{−n/K}` for every
/// generation `n` of the trace, given per-generation `‖x_n‖` and
/// `max_i σ_{n,i}`. `None` if no `K ≤ 1e12` works.
pub fn fit_h1_constant(center_norms: &[f64], max_sigmas: &[f64]) -> Option<f64> {
    let feasible = |k: f64| {
        center_norms.iter().all(|&c| c <= k)
            && max_sigmas.iter().enumerate().all(|(n, &s)| s.ln() <= k.ln() - n as f64 / k)
    };
    let mut lo = center_norms.iter().chain(max_sigmas.first()).copied().fold(f64::MIN_POSITIVE, f64::max);
    if feasible(lo) {
        return Some(lo);
    }
    let mut hi = 1e12;
    if !feasible(hi) {
        return None;
    }
    // log σ ≤ log K − n/K is monotone in K, so bisection finds the boundary
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-9 * hi {
            break;
        }
    }
    Some(hi)
}

fn trap_run(cfg: &VerificationConfig, run: usize) -> Result<TrapRun> {
    let mut offset = vec![0.0; cfg.dimension];
    offset[0] = cfg.trap_offset;
    let objective = make_trap(cfg.dimension, cfg.radius, offset, cfg.trap_depth)?;
    let mut opt = cfg.optimizer(cfg.budget, run)?;
    let mut center_norms = vec![norm(&opt.parent().center)];
    let mut max_sigmas = Vec::new();
    let mut exited = false;
    loop {
        let batch = match step_generation(&mut opt, &objective) {
            Ok(b) => b,
            Err(Error::BudgetExhausted { .. }) => break,
            Err(e) => return Err(e),
        };
        max_sigmas.push(batch.iter().map(|(p, _)| p.candidate.sigma).fold(0.0, f64::max));
        if batch.iter().any(|(p, _)| norm(p.x()) > cfg.radius) {
            exited = true;
            break;
        }
        center_norms.push(norm(&opt.parent().center));
    }
    let max_center_norm = center_norms.iter().copied().fold(0.0, f64::max);
    Ok(TrapRun { exited, max_center_norm, fitted_k: fit_h1_constant(&center_norms, &max_sigmas) })
}

/// Starts TBPSA at the center of the trap's local basin and counts the runs
/// in which no evaluated point ever leaves `B(0, K')` within the budget. Passes
/// iff the retention fraction is ≥ 0.95 by default. Per-run H1 diagnostics
/// (largest parent norm, fitted constant K) are reported, not judged.
pub fn verify_trap_retention(cfg: &VerificationConfig) -> Result<VerificationReport> {
    cfg.validate(false)?;
    if !(cfg.radius.is_finite() && cfg.radius >= 0.0) {
        return Err(invalid(format!("trap radius must be finite and >= 0, got {}", cfg.radius)));
    }
    let start = Instant::now();
    let runs = par_runs(cfg.runs, |run| trap_run(cfg, run))?;
    let retained = runs.iter().filter(|r| !r.exited).count();
    let fraction = retained as f64 / cfg.runs as f64;
    let fitted: Vec<f64> = runs.iter().map(|r| r.fitted_k.unwrap_or(f64::INFINITY)).collect();
    let finite_k = runs.iter().filter(|r| r.fitted_k.is_some()).count() as f64 / cfg.runs as f64;
    let threshold = cfg.threshold.unwrap_or(DEFAULT_RETENTION_THRESHOLD);
    Ok(VerificationReport::new(
        "retention_fraction",
        fraction,
        wilson_interval(retained, cfg.runs, Z95),
        Z95,
        threshold,
        Rule::EstimateAtLeast,
        cfg.runs,
    )
    .scalar("local_radius", cfg.radius)
    .scalar("budget", cfg.budget as f64)
    .scalar("median_max_center_norm", stats::median(&runs.iter().map(|r| r.max_center_norm).collect::<Vec<_>>()))
    .scalar("median_fitted_k", stats::median(&fitted))
    .scalar("fraction_finite_k", finite_k)
    .with_series("fitted_k", fitted)
    .timed(start))
}

/// Retention at each local radius, with the trap offset scaled in proportion.
pub fn trap_retention_sweep(cfg: &VerificationConfig, radii: &[f64]) -> Result<Vec<VerificationReport>> {
    if cfg.radius <= 0.0 {
        return Err(invalid("base radius must be positive to scale the offset"));
    }
    let ratio = cfg.trap_offset / cfg.radius;
    radii
        .iter()
        .map(|&k| verify_trap_retention(&VerificationConfig { radius: k, trap_offset: ratio * k, ..cfg.clone() }))
        .collect()
}

/// Retention must be nondecreasing in `K'`. Estimate: largest decrease.
pub fn verify_retention_monotonicity(cfg: &VerificationConfig, radii: &[f64]) -> Result<VerificationReport> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("need at least two strictly increasing radii"));
    }
    let start = Instant::now();
    let reports = trap_retention_sweep(cfg, radii)?;
    let fractions: Vec<f64> = reports.iter().map(|r| r.estimate).collect();
    let estimate = fractions.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max);
    Ok(VerificationReport::new(
        "max_retention_decrease",
        estimate,
        (estimate, estimate),
        0.0,
        0.0,
        Rule::EstimateAtMost,
        cfg.runs,
    )
    .with_series("radii", radii.to_vec())
    .with_series("retention", fractions)
    .timed(start))
}
