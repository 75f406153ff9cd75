//! Tail-oscillation check of `log σ_n` on a constant objective.
//!
//! Long horizons need populations of millions (λ doubles every few
//! generations), so this verifier samples the step-size process directly.
//! On a constant objective selection is independent of the step-size draws,
//! hence the μ selected `g_i` are i.i.d. standard normal and
//! `log σ_{n+1} = log σ_n + τ·mean(g_i)` has exactly the law
//! `log σ_n + τ Z_n / √μ_n` with `Z_n ~ N(0,1)`. The μ_n sequence is the one
//! the archive-driven schedule produces on constant fitness.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::population::{constant_fitness_schedule, PopulationSize};
use crate::rng::{self, RngStream};
use crate::stats;

use super::{par_runs, Rule, VerificationConfig, VerificationReport};

/// `log σ_0, …, log σ_generations` of one constant-objective run.
pub fn reduced_log_sigma_chain(cfg: &VerificationConfig, generations: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    let sizes = PopulationSize::initial(cfg.dimension, 1)?;
    let schedule = constant_fitness_schedule(sizes, generations, cfg.force_doubling);
    let mut log_sigma = -0.5 * (cfg.dimension as f64).ln();
    let mut out = Vec::with_capacity(generations + 1);
    out.push(log_sigma);
    for (_, mu) in schedule {
        let z: f64 = rng.sample(StandardNormal);
        log_sigma += cfg.tau * z / (mu as f64).sqrt();
        out.push(log_sigma);
    }
    Ok(out)
}

/// `sup_{n ≥ h - h/4} |log σ_n − log σ_h|` for the prefix of length `h + 1`.
fn tail_oscillation(chain: &[f64], horizon: usize) -> f64 {
    let end = chain[horizon];
    let from = horizon - horizon / 4;
    chain[from..=horizon].iter().map(|v| (v - end).abs()).fold(0.0, f64::max)
}

/// Median tail oscillation at horizons `G`, `2G`, `4G` (`G = cfg.generations`);
/// passes iff the three medians strictly decrease. The estimate is the largest
/// successive change of the median (must be < 0).
pub fn verify_sigma_convergence(cfg: &VerificationConfig) -> Result<VerificationReport> {
    cfg.validate(false)?;
    if cfg.generations < 4 {
        return Err(invalid("sigma convergence needs a base horizon of at least 4 generations"));
    }
    let start = Instant::now();
    let horizons = [cfg.generations, 2 * cfg.generations, 4 * cfg.generations];
    let longest = horizons[2];
    let per_run = par_runs(cfg.runs, |run| {
        let mut r = rng::stream(cfg.seed, run as u64);
        let chain = reduced_log_sigma_chain(cfg, longest, &mut r)?;
        let tails: Vec<f64> = horizons.iter().map(|&h| tail_oscillation(&chain, h)).collect();
        Ok((tails, if run == 0 { Some(chain) } else { None }))
    })?;
    let medians: Vec<f64> =
        (0..3).map(|k| stats::median(&per_run.iter().map(|(t, _)| t[k]).collect::<Vec<_>>())).collect();
    let estimate = (medians[1] - medians[0]).max(medians[2] - medians[1]);
    let threshold = cfg.threshold.unwrap_or(0.0);
    let trace = per_run.into_iter().next().and_then(|(_, c)| c).unwrap_or_default();
    Ok(VerificationReport::new(
        "max_median_tail_change",
        estimate,
        (estimate, estimate),
        0.0,
        threshold,
        Rule::EstimateBelow,
        cfg.runs,
    )
    .with_series("horizons", horizons.iter().map(|&h| h as f64).collect())
    .with_series("median_tail_oscillation", medians)
    .with_series("log_sigma_trace", trace)
    .timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::make_constant;
    use crate::theory::step_generation;

    #[test]
    fn tau_zero_has_no_oscillation() {
        let cfg = VerificationConfig { tau: 0.0, generations: 8, runs: 10, ..VerificationConfig::default() };
        let r = verify_sigma_convergence(&cfg).unwrap();
        assert!(r.get_series("median_tail_oscillation").unwrap().iter().all(|&m| m == 0.0));
        assert!(!r.passed);
    }

    #[test]
    fn trace_has_expected_length() {
        let cfg = VerificationConfig { generations: 8, runs: 10, ..VerificationConfig::default() };
        let r = verify_sigma_convergence(&cfg).unwrap();
        assert_eq!(r.get_series("log_sigma_trace").unwrap().len(), 33);
    }

    /// The reduced chain and the full ES on a constant objective must agree in
    /// law; both are compared against the exact variance `τ² Σ 1/μ_n`.
    #[test]
    fn reduced_chain_matches_full_es() {
        let cfg = VerificationConfig { dimension: 2, runs: 2000, ..VerificationConfig::default() };
        let generations = 12;
        let sizes = PopulationSize::initial(2, 1).unwrap();
        let exact_var: f64 =
            constant_fitness_schedule(sizes, generations, false).iter().map(|&(_, mu)| 1.0 / mu as f64).sum();
        let objective = make_constant(2).unwrap();

        let full: Vec<f64> = par_runs(cfg.runs, |run| {
            let mut opt = cfg.optimizer(u64::MAX, run)?;
            for _ in 0..generations {
                step_generation(&mut opt, &objective)?;
            }
            Ok(opt.parent().sigma.ln())
        })
        .unwrap();
        let reduced: Vec<f64> = (0..cfg.runs)
            .map(|run| {
                reduced_log_sigma_chain(&cfg, generations, &mut rng::stream(99, run as u64)).unwrap()[generations]
            })
            .collect();
        let start = -0.5 * 2f64.ln();
        for sample in [&full, &reduced] {
            let m = stats::mean(sample);
            assert!((m - start).abs() <= 4.0 * stats::standard_error(sample), "mean {m}");
            let v = stats::sample_variance(sample);
            assert!(
                (v - exact_var).abs() <= 4.0 * exact_var * (2.0 / (cfg.runs as f64 - 1.0)).sqrt(),
                "var {v} vs {exact_var}"
            );
        }
    }
}
