use std::time::Instant;

use crate::benchmarks::make_constant;
use crate::error::Result;
use crate::stats;

use super::{par_runs, step_generation, Rule, VerificationConfig, VerificationReport};

/// Interval half-width, in standard errors of the variance estimate.
const SE_MULTIPLIER: f64 = 3.0;

/// Under λ doubling on a constant objective, each generation adds `τ²/μ_n` to
/// `Var log σ`, so the variance stays below `2τ²/μ₀` (2 for d = 1, τ = 1).
///
/// The report's estimate is the variance at the generation closest to
/// violating the bound (largest `var − 3·SE`); the run passes iff that
/// interval's lower end is at most the bound, i.e. every generation is within
/// 3 SE of it. The variance per generation and λ per generation are returned
/// as series.
pub fn verify_variance_bound(cfg: &VerificationConfig) -> Result<VerificationReport> {
    cfg.validate(true)?;
    let start = Instant::now();
    let mut forced = cfg.clone();
    forced.force_doubling = true;
    let objective = make_constant(cfg.dimension)?;
    let traces = par_runs(cfg.runs, |run| {
        let mut opt = forced.optimizer(u64::MAX, run)?;
        let mut logs = Vec::with_capacity(cfg.generations + 1);
        let mut lambdas = Vec::with_capacity(cfg.generations + 1);
        logs.push(opt.parent().sigma.ln());
        lambdas.push(opt.population().lambda());
        for _ in 0..cfg.generations {
            step_generation(&mut opt, &objective)?;
            logs.push(opt.parent().sigma.ln());
            lambdas.push(opt.population().lambda());
        }
        Ok((logs, lambdas))
    })?;

    let mu0 = crate::population::PopulationSize::initial(cfg.dimension, 1)?.mu() as f64;
    let threshold = cfg.threshold.unwrap_or(2.0 * cfg.tau * cfg.tau / mu0);
    let gens = cfg.generations + 1;
    let mut variances = Vec::with_capacity(gens);
    let mut errors = Vec::with_capacity(gens);
    for n in 0..gens {
        let column: Vec<f64> = traces.iter().map(|(logs, _)| logs[n]).collect();
        variances.push(stats::sample_variance(&column));
        errors.push(stats::variance_standard_error(&column));
    }
    let worst = (0..gens)
        .max_by(|&a, &b| {
            let ma = variances[a] - SE_MULTIPLIER * errors[a];
            let mb = variances[b] - SE_MULTIPLIER * errors[b];
            ma.total_cmp(&mb)
        })
        .unwrap_or(0);
    let estimate = variances[worst];
    let interval = (estimate - SE_MULTIPLIER * errors[worst], estimate + SE_MULTIPLIER * errors[worst]);
    let lambdas: Vec<f64> = traces[0].1.iter().map(|&l| l as f64).collect();
    let max_var = variances.iter().copied().fold(0.0, f64::max);
    Ok(VerificationReport::new(
        "var_log_sigma",
        estimate,
        interval,
        SE_MULTIPLIER,
        threshold,
        Rule::LowerBoundAtMost,
        cfg.runs,
    )
    .scalar("worst_generation", worst as f64)
    .scalar("max_variance", max_var)
    .with_series("variance", variances)
    .with_series("variance_se", errors)
    .with_series("lambda", lambdas)
    .timed(start))
}
