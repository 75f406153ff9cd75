use std::time::Instant;

use crate::benchmarks::ObjectiveSpec;
use crate::error::{invalid, Result};
use crate::stats::{self, Z95};

use super::{par_runs, step_generation, Rule, VerificationConfig, VerificationReport};

/// Mean drift of `log σ` over `cfg.generations` on a constant objective; passes
/// when the 95% interval of the drift contains 0.
pub fn verify_martingale(cfg: &VerificationConfig, objective: &ObjectiveSpec) -> Result<VerificationReport> {
    if !objective.is_constant() {
        return Err(invalid("the martingale check needs a constant objective (random selection)"));
    }
    log_sigma_drift(cfg, objective)
}

/// Same measurement as [`verify_martingale`] on any objective. On objectives
/// with real selection pressure the drift is expected to be negative.
pub fn log_sigma_drift(cfg: &VerificationConfig, objective: &ObjectiveSpec) -> Result<VerificationReport> {
    cfg.validate(true)?;
    if objective.dimension != cfg.dimension {
        return Err(invalid("objective dimension does not match the configuration"));
    }
    let start = Instant::now();
    let drifts = par_runs(cfg.runs, |run| {
        let mut opt = cfg.optimizer(u64::MAX, run)?;
        let initial = opt.parent().sigma;
        for _ in 0..cfg.generations {
            step_generation(&mut opt, objective)?;
        }
        Ok((opt.parent().sigma / initial).ln())
    })?;
    let m = stats::mean(&drifts);
    let se = stats::standard_error(&drifts);
    let interval = (m - Z95 * se, m + Z95 * se);
    let threshold = cfg.threshold.unwrap_or(0.0);
    Ok(VerificationReport::new("log_sigma_drift", m, interval, Z95, threshold, Rule::IntervalContains, cfg.runs)
        .scalar("std_error", se)
        .scalar("generations", cfg.generations as f64)
        .timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{make_constant, FunctionKind};

    fn cfg(generations: usize, tau: f64) -> VerificationConfig {
        VerificationConfig { dimension: 2, generations, runs: 40, tau, ..VerificationConfig::default() }
    }

    #[test]
    fn zero_generations_zero_drift() {
        let r = verify_martingale(&cfg(0, 1.0), &make_constant(2).unwrap()).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn tau_zero_zero_drift() {
        let r = verify_martingale(&cfg(8, 0.0), &make_constant(2).unwrap()).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.interval, (0.0, 0.0));
        assert!(r.passed);
    }

    #[test]
    fn rejects_non_constant_objective() {
        let sphere = ObjectiveSpec::simple(FunctionKind::Sphere, 2).unwrap();
        assert!(verify_martingale(&cfg(4, 1.0), &sphere).is_err());
    }

    #[test]
    fn selection_pressure_is_detected() {
        // on the sphere, truncation selection shrinks sigma: the drift test fails
        let sphere = ObjectiveSpec::simple(FunctionKind::Sphere, 2).unwrap();
        let r = log_sigma_drift(&VerificationConfig { runs: 200, ..cfg(30, 1.0) }, &sphere).unwrap();
        assert!(!r.passed, "{}", r.summary_line());
        assert!(r.interval.1 < 0.0);
    }

    #[test]
    fn too_few_runs() {
        let c = VerificationConfig { runs: 5, ..cfg(4, 1.0) };
        assert!(verify_martingale(&c, &make_constant(2).unwrap()).is_err());
    }
}
