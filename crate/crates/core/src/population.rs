//! Test-based population-size control.
//!
//! The archive keeps the fitnesses of the last `5λ` evaluations. Once full,
//! the oldest `λ` and the newest `λ` of that window are compared: if their
//! means are not more than two standard errors apart the search is
//! stagnating and λ, μ double; otherwise both shrink by `2^{-1/4}`, never
//! below the initial λ or the number of parallel workers.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::es::EvaluatedCandidate;

/// Archive window length, in multiples of λ.
pub const WINDOW_FACTOR: usize = 5;
/// Ratio μ/λ, fixed at initialization (μ = d, λ = 4d).
pub const MU_RATIO: f64 = 0.25;
pub const GROW_FACTOR: f64 = 2.0;
/// `2^{-1/4}`.
pub const SHRINK_FACTOR: f64 = 0.840_896_415_253_714_5;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitnessArchive {
    entries: VecDeque<(u64, f64)>,
}

impl FitnessArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(eval_index, fitness)` pairs, oldest first.
    pub fn entries(&self) -> impl ExactSizeIterator<Item = (u64, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn capacity_for(lambda: usize) -> usize {
        WINDOW_FACTOR * lambda
    }

    pub fn push(&mut self, batch: &[EvaluatedCandidate], lambda: usize) -> Result<()> {
        self.push_entries(batch.iter().map(|e| (e.eval_index, e.fitness)), lambda)
    }

    /// Appends entries (strictly increasing eval indices) and drops the oldest
    /// beyond `5λ`. Nothing is modified if the batch is rejected.
    pub fn push_entries<I>(&mut self, batch: I, lambda: usize) -> Result<()>
    where
        I: IntoIterator<Item = (u64, f64)>,
    {
        let batch: Vec<(u64, f64)> = batch.into_iter().collect();
        let mut last = self.entries.back().map(|e| e.0);
        for &(idx, _) in &batch {
            if last.is_some_and(|l| idx <= l) {
                return Err(invalid(format!("archive push: eval_index {idx} is not after {}", last.unwrap())));
            }
            last = Some(idx);
        }
        self.entries.extend(batch);
        let cap = Self::capacity_for(lambda);
        while self.entries.len() > cap {
            self.entries.pop_front();
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StagnationDecision {
    Stagnating,
    Progressing,
    Insufficient,
}

/// Compares the λ oldest and λ newest fitnesses of the last `5λ` entries.
///
/// `Δ = |mean(A) − mean(B)|`, `s = sqrt(var(A)/λ + var(B)/λ)` with unbiased
/// variances; progressing iff `Δ > 2s`. With `Δ = s = 0` this reports
/// stagnation, so a constant objective always grows the population.
pub fn stagnation_test(archive: &FitnessArchive, lambda: usize) -> StagnationDecision {
    let window = FitnessArchive::capacity_for(lambda);
    if lambda == 0 || archive.len() < window {
        return StagnationDecision::Insufficient;
    }
    let start = archive.len() - window;
    let fit: Vec<f64> = archive.entries.range(start..).map(|e| e.1).collect();
    let oldest = &fit[..lambda];
    let newest = &fit[window - lambda..];
    let (ma, va) = mean_var(oldest);
    let (mb, vb) = mean_var(newest);
    let delta = (ma - mb).abs();
    let s = (va / lambda as f64 + vb / lambda as f64).sqrt();
    if delta > 2.0 * s {
        StagnationDecision::Progressing
    } else {
        StagnationDecision::Stagnating
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Continuous λ and μ; rounded only where a population is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationSize {
    pub lambda_real: f64,
    pub mu_real: f64,
    pub lambda_init: usize,
    pub num_workers: usize,
}

impl PopulationSize {
    /// λ = 4d, μ = d, raised to the worker count if that is larger.
    pub fn initial(dimension: usize, num_workers: usize) -> Result<Self> {
        if dimension == 0 || num_workers == 0 {
            return Err(invalid("dimension and num_workers must be positive"));
        }
        let lambda_init = 4 * dimension;
        let sizes = Self { lambda_real: lambda_init as f64, mu_real: dimension as f64, lambda_init, num_workers };
        Ok(sizes.clamped())
    }

    pub fn floor(&self) -> usize {
        self.lambda_init.max(self.num_workers)
    }

    pub fn lambda(&self) -> usize {
        self.lambda_real.round() as usize
    }

    pub fn mu(&self) -> usize {
        (self.mu_real.round() as usize).clamp(1, self.lambda().max(1))
    }

    pub fn update(self, decision: StagnationDecision) -> Self {
        let factor = match decision {
            StagnationDecision::Stagnating => GROW_FACTOR,
            StagnationDecision::Progressing => SHRINK_FACTOR,
            StagnationDecision::Insufficient => return self,
        };
        Self { lambda_real: self.lambda_real * factor, mu_real: self.mu_real * factor, ..self }.clamped()
    }

    fn clamped(self) -> Self {
        let floor = self.floor();
        if self.lambda() >= floor {
            return self;
        }
        let lambda_real = floor as f64;
        Self { lambda_real, mu_real: lambda_real * MU_RATIO, ..self }
    }
}

/// Population sizes the test-based schedule produces on a constant objective.
///
/// Only the archive length matters there (every full-window test stagnates),
/// so this replays the push/trim/test sequence on counts alone. Element `n`
/// is the `(λ, μ)` used for generation `n`.
pub fn constant_fitness_schedule(
    initial: PopulationSize,
    generations: usize,
    force_doubling: bool,
) -> Vec<(usize, usize)> {
    let mut sizes = initial;
    let mut len = 0usize;
    let mut out = Vec::with_capacity(generations);
    for _ in 0..generations {
        let lambda = sizes.lambda();
        out.push((lambda, sizes.mu()));
        let decision = if force_doubling {
            StagnationDecision::Stagnating
        } else {
            len = (len + lambda).min(FitnessArchive::capacity_for(lambda));
            if len >= FitnessArchive::capacity_for(lambda) {
                StagnationDecision::Stagnating
            } else {
                StagnationDecision::Insufficient
            }
        };
        sizes = sizes.update(decision);
    }
    out
}
