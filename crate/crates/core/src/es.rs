//! (μ/μ,λ) evolution-strategy primitives.
//!
//! Random draws are consumed in a fixed order so that a seed reproduces a run
//! bit for bit:
//!
//! - [`mutate`] draws, for each candidate in turn, one scalar normal for the
//!   step-size followed by `d` normals for the direction;
//! - [`select_mu_best`] shuffles the pool indices once (Fisher–Yates) and then
//!   stable-sorts by fitness, which breaks ties uniformly at random.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A search point paired with its own step-size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub x: Vec<f64>,
    pub sigma: f64,
}

impl Candidate {
    pub fn new(x: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(format!("candidate step-size must be positive and finite, got {sigma}")));
        }
        if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("candidate coordinates must be non-empty and finite"));
        }
        Ok(Self { x, sigma })
    }

    pub fn dimension(&self) -> usize {
        self.x.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedCandidate {
    pub candidate: Candidate,
    pub fitness: f64,
    pub eval_index: u64,
}

/// Center, step-size and self-adaptation scale of the current parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentState {
    pub center: Vec<f64>,
    pub sigma: f64,
    /// Lognormal self-adaptation scale; 0 gives every offspring the parent step-size.
    pub tau: f64,
    pub generation: u64,
}

impl ParentState {
    pub fn new(center: Vec<f64>, sigma: f64, tau: f64) -> Result<Self> {
        let parent = Self { center, sigma, tau, generation: 0 };
        parent.validate()?;
        Ok(parent)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(invalid(format!("parent step-size must be positive and finite, got {}", self.sigma)));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(invalid(format!("tau must be finite and nonnegative, got {}", self.tau)));
        }
        if self.center.is_empty() || self.center.iter().any(|v| !v.is_finite()) {
            return Err(invalid("parent center must be non-empty and finite"));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }
}

/// Samples `count` offspring: `σ_i = σ·exp(τ g_i)`, `x_i = center + σ_i z_i`.
pub fn mutate<R: Rng + ?Sized>(parent: &ParentState, count: usize, rng: &mut R) -> Result<Vec<Candidate>> {
    mutate_with(parent, count, || rng.sample(StandardNormal))
}

/// [`mutate`] with an explicit source of standard normal draws.
pub fn mutate_with<F: FnMut() -> f64>(parent: &ParentState, count: usize, mut normal: F) -> Result<Vec<Candidate>> {
    if count == 0 {
        return Err(invalid("mutate needs count >= 1"));
    }
    parent.validate()?;
    let out = (0..count)
        .map(|_| {
            let sigma = parent.sigma * (parent.tau * normal()).exp();
            let x = parent.center.iter().map(|c| c + sigma * normal()).collect();
            Candidate { x, sigma }
        })
        .collect();
    Ok(out)
}

/// Indices of the `mu` smallest fitnesses, in ascending fitness order.
pub fn select_mu_best<R: Rng + ?Sized>(pool: &[EvaluatedCandidate], mu: usize, rng: &mut R) -> Result<Vec<usize>> {
    let fitness: Vec<f64> = pool.iter().map(|e| e.fitness).collect();
    select_mu_best_by_fitness(&fitness, mu, rng)
}

pub fn select_mu_best_by_fitness<R: Rng + ?Sized>(fitness: &[f64], mu: usize, rng: &mut R) -> Result<Vec<usize>> {
    if mu == 0 || mu > fitness.len() {
        return Err(invalid(format!("mu must lie in 1..={}, got {mu}", fitness.len())));
    }
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.shuffle(rng);
    order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
    order.truncate(mu);
    Ok(order)
}

/// Arithmetic mean of the positions and geometric mean of the step-sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Recombination {
    pub center: Vec<f64>,
    pub sigma: f64,
}

pub fn recombine(selected: &[EvaluatedCandidate]) -> Result<Recombination> {
    recombine_candidates(selected.iter().map(|e| &e.candidate))
}

pub fn recombine_candidates<'a, I>(selected: I) -> Result<Recombination>
where
    I: IntoIterator<Item = &'a Candidate>,
{
    let mut iter = selected.into_iter();
    let first = iter.next().ok_or_else(|| invalid("recombine needs at least one candidate"))?;
    let d = first.x.len();
    let mut center = first.x.clone();
    // log-ratios against the first step-size, so equal step-sizes give the
    // exact same value back
    let reference = first.sigma;
    let mut log_ratio_sum = 0.0;
    let mut n = 1usize;
    for c in iter {
        if c.x.len() != d {
            return Err(invalid("recombine: candidates of differing dimension"));
        }
        for (acc, v) in center.iter_mut().zip(&c.x) {
            *acc += v;
        }
        log_ratio_sum += (c.sigma / reference).ln();
        n += 1;
    }
    let inv = 1.0 / n as f64;
    if n > 1 {
        center.iter_mut().for_each(|v| *v *= inv);
    }
    let sigma = (reference * (log_ratio_sum * inv).exp()).max(f64::MIN_POSITIVE);
    Ok(Recombination { center, sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::stats;

    fn evaluated(x: Vec<f64>, sigma: f64, fitness: f64, i: u64) -> EvaluatedCandidate {
        EvaluatedCandidate { candidate: Candidate { x, sigma }, fitness, eval_index: i }
    }

    #[test]
    fn zero_draws_reproduce_parent() {
        let parent = ParentState::new(vec![0.0, 0.0], 1.0, 1.0).unwrap();
        let c = mutate_with(&parent, 1, || 0.0).unwrap();
        assert_eq!(c, vec![Candidate { x: vec![0.0, 0.0], sigma: 1.0 }]);
    }

    #[test]
    fn draw_order_is_sigma_then_direction() {
        let parent = ParentState::new(vec![1.0, 1.0], 1.0, 1.0).unwrap();
        let draws = [0.5, 1.0, -1.0, 0.0, 2.0, 3.0];
        let mut it = draws.iter().copied();
        let c = mutate_with(&parent, 2, || it.next().unwrap()).unwrap();
        let s0 = 0.5f64.exp();
        assert_eq!(c[0].sigma, s0);
        assert_eq!(c[0].x, vec![1.0 + s0, 1.0 - s0]);
        assert_eq!(c[1].sigma, 1.0);
        assert_eq!(c[1].x, vec![3.0, 4.0]);
    }

    #[test]
    fn mutate_rejects_bad_input() {
        let parent = ParentState { center: vec![0.0], sigma: 1.0, tau: 1.0, generation: 0 };
        assert!(mutate(&parent, 0, &mut stream(0, 0)).is_err());
        let bad = ParentState { sigma: f64::NAN, ..parent.clone() };
        assert!(mutate(&bad, 3, &mut stream(0, 0)).is_err());
        let bad = ParentState { center: vec![f64::INFINITY], ..parent };
        assert!(mutate(&bad, 3, &mut stream(0, 0)).is_err());
    }

    #[test]
    fn lognormal_step_size_mean() {
        let parent = ParentState::new(vec![0.0], 1.0, 1.0).unwrap();
        let mut rng = stream(11, 0);
        let sig: Vec<f64> = mutate(&parent, 1_000_000, &mut rng).unwrap().iter().map(|c| c.sigma).collect();
        let m = stats::mean(&sig);
        let se = stats::standard_error(&sig);
        let expected = 0.5f64.exp();
        assert!((m - expected).abs() <= 3.0 * se, "mean {m} vs {expected}, se {se}");
    }

    #[test]
    fn selection_strict_order() {
        let pool: Vec<_> =
            [3.0, 1.0, 2.0].iter().enumerate().map(|(i, &f)| evaluated(vec![0.0], 1.0, f, i as u64)).collect();
        let idx = select_mu_best(&pool, 2, &mut stream(0, 0)).unwrap();
        assert_eq!(idx, vec![1, 2]);
        assert!(select_mu_best(&pool, 4, &mut stream(0, 0)).is_err());
        assert!(select_mu_best(&pool, 0, &mut stream(0, 0)).is_err());
    }

    #[test]
    fn selection_breaks_two_way_tie_evenly() {
        let mut rng = stream(5, 0);
        let trials = 10_000;
        let mut first = 0;
        for _ in 0..trials {
            let idx = select_mu_best_by_fitness(&[1.0, 1.0, 2.0], 1, &mut rng).unwrap();
            assert!(idx[0] < 2);
            if idx[0] == 0 {
                first += 1;
            }
        }
        let freq = first as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 0.02, "{freq}");
    }

    #[test]
    fn selection_on_constant_fitness_is_uniform() {
        let mut rng = stream(6, 0);
        let trials = 10_000;
        let mut hits = [0usize; 20];
        for _ in 0..trials {
            let idx = select_mu_best_by_fitness(&[4.0; 20], 5, &mut rng).unwrap();
            let mut sorted = idx.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), 5);
            for i in idx {
                hits[i] += 1;
            }
        }
        for h in hits {
            let freq = h as f64 / trials as f64;
            assert!((freq - 0.25).abs() <= 0.02, "{freq}");
        }
    }

    #[test]
    fn recombine_examples() {
        let r = recombine(&[evaluated(vec![3.0, 4.0], 2.0, 0.0, 0)]).unwrap();
        assert_eq!(r.center, vec![3.0, 4.0]);
        assert_eq!(r.sigma, 2.0);

        let r = recombine(&[evaluated(vec![0.0, 0.0], 1.0, 0.0, 0), evaluated(vec![2.0, 2.0], 4.0, 0.0, 1)]).unwrap();
        assert_eq!(r.center, vec![1.0, 1.0]);
        assert!((r.sigma - 2.0).abs() < 1e-15);

        assert!(recombine(&[]).is_err());
    }

    #[test]
    fn recombined_log_sigma_concentrates() {
        // mean of 1000 standard normals has sd 0.0316, so |mean| <= 0.1 is a 3.16 sd event
        let mut rng = stream(9, 0);
        let trials = 1000;
        let parent = ParentState::new(vec![0.0], 1.0, 1.0).unwrap();
        let mut inside = 0;
        for _ in 0..trials {
            let pool = mutate(&parent, 1000, &mut rng).unwrap();
            let r = recombine_candidates(&pool).unwrap();
            if r.sigma.ln().abs() <= 0.1 {
                inside += 1;
            }
        }
        assert!(inside as f64 / trials as f64 >= 0.99, "{inside}");
    }

    #[test]
    fn tau_zero_keeps_sigma_exactly() {
        let parent = ParentState::new(vec![0.3, -1.2, 5.0], 0.123456789, 0.0).unwrap();
        for seed in 0..20 {
            let pool = mutate(&parent, 37, &mut stream(seed, 0)).unwrap();
            assert!(pool.iter().all(|c| c.sigma == parent.sigma));
            let r = recombine_candidates(&pool).unwrap();
            assert_eq!(r.sigma, parent.sigma);
        }
    }

    #[test]
    fn mutation_is_unbiased() {
        let parent = ParentState::new(vec![2.0, -3.0], 0.7, 1.0).unwrap();
        let pool = mutate(&parent, 100_000, &mut stream(3, 0)).unwrap();
        for j in 0..2 {
            let dev: Vec<f64> = pool.iter().map(|c| c.x[j] - parent.center[j]).collect();
            let m = stats::mean(&dev);
            assert!(m.abs() <= 4.0 * stats::standard_error(&dev), "coord {j}: {m}");
        }
    }

    #[test]
    fn log_step_size_is_normal_with_variance_tau_squared() {
        for tau in [0.5, 1.0, 2.0] {
            let parent = ParentState::new(vec![0.0], 1.5, tau).unwrap();
            let pool = mutate(&parent, 100_000, &mut stream(4, tau.to_bits())).unwrap();
            let logs: Vec<f64> = pool.iter().map(|c| c.sigma.ln() - parent.sigma.ln()).collect();
            let m = stats::mean(&logs);
            assert!(m.abs() <= 4.0 * stats::standard_error(&logs));
            let v = stats::sample_variance(&logs);
            assert!((v / (tau * tau) - 1.0).abs() <= 0.05, "tau {tau}: var {v}");
        }
    }
}
