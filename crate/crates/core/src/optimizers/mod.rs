//! Ask/tell optimizers.
//!
//! Every optimizer hands out [`Proposal`]s tagged with a global evaluation
//! index (the n-th proposal ever asked has index n) and expects each one back
//! exactly once, as an [`EvaluatedCandidate`], in any order.

mod one_plus_one;
mod random_search;
mod tbpsa;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::es::{Candidate, EvaluatedCandidate};

pub use one_plus_one::{one_plus_one_step, OnePlusOne, OnePlusOneState};
pub use random_search::RandomSearch;
pub use tbpsa::{Recommendation, Schedule, Tbpsa, TbpsaParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Tbpsa,
    NaiveTbpsa,
    OnePlusOne,
    RandomSearch,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::Tbpsa, Algorithm::NaiveTbpsa, Algorithm::OnePlusOne, Algorithm::RandomSearch];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Tbpsa => "tbpsa",
            Algorithm::NaiveTbpsa => "naive_tbpsa",
            Algorithm::OnePlusOne => "one_plus_one",
            Algorithm::RandomSearch => "random_search",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', '+', '(', ')'], "_");
        match key.as_str() {
            "tbpsa" => Ok(Algorithm::Tbpsa),
            "naive_tbpsa" | "naivetbpsa" => Ok(Algorithm::NaiveTbpsa),
            "one_plus_one" | "oneplusone" | "1_1" | "_1_1_" => Ok(Algorithm::OnePlusOne),
            "random_search" | "randomsearch" | "random" => Ok(Algorithm::RandomSearch),
            _ => Err(Error::Parse(format!("unknown algorithm '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub dimension: usize,
    pub budget: u64,
    pub num_workers: usize,
    pub seed: u64,
    /// Defaults to the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_center: Option<Vec<f64>>,
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm, dimension: usize, budget: u64) -> Self {
        Self { algorithm, dimension, budget, num_workers: 1, seed: 0, initial_center: None }
    }

    pub fn with_workers(mut self, num_workers: usize) -> Self {
        self.num_workers = num_workers;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if self.budget == 0 {
            return Err(invalid("budget must be positive"));
        }
        if self.num_workers == 0 || self.num_workers as u64 > self.budget {
            return Err(invalid(format!("num_workers must lie in 1..=budget, got {}", self.num_workers)));
        }
        if let Some(c) = &self.initial_center {
            if c.len() != self.dimension || c.iter().any(|v| !v.is_finite()) {
                return Err(invalid("initial center must be finite and match the dimension"));
            }
        }
        Ok(())
    }

    pub fn center(&self) -> Vec<f64> {
        self.initial_center.clone().unwrap_or_else(|| vec![0.0; self.dimension])
    }
}

/// A candidate handed out by `ask`, to be returned through `tell`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub eval_index: u64,
    pub candidate: Candidate,
}

impl Proposal {
    pub fn x(&self) -> &[f64] {
        &self.candidate.x
    }

    pub fn evaluated(self, fitness: f64) -> EvaluatedCandidate {
        EvaluatedCandidate { candidate: self.candidate, fitness, eval_index: self.eval_index }
    }
}

/// Lowest fitness told so far; ties keep the earliest evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSoFar {
    pub point: Vec<f64>,
    pub fitness: f64,
    pub eval_index: u64,
}

impl BestSoFar {
    pub(crate) fn offer(best: &mut Option<BestSoFar>, e: &EvaluatedCandidate) {
        let better = match best {
            None => true,
            Some(b) => (e.fitness, e.eval_index) < (b.fitness, b.eval_index),
        };
        if better {
            *best = Some(BestSoFar { point: e.candidate.x.clone(), fitness: e.fitness, eval_index: e.eval_index });
        }
    }
}

/// Snapshot for traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Status {
    pub generation: u64,
    pub evaluations: u64,
    pub sigma: f64,
    pub lambda: usize,
}

pub trait Optimizer: Send {
    /// Returns up to `max_batch` new proposals. Errors once the budget has been
    /// handed out completely. May return an empty batch while a generation is
    /// waiting for outstanding results.
    fn ask(&mut self, max_batch: usize) -> Result<Vec<Proposal>>;

    fn tell(&mut self, results: &[EvaluatedCandidate]) -> Result<()>;

    fn recommend(&self) -> Result<Vec<f64>>;

    fn best_so_far(&self) -> Option<&BestSoFar>;

    fn status(&self) -> Status;

    fn budget(&self) -> u64;

    fn asked(&self) -> u64;

    fn remaining_budget(&self) -> u64 {
        self.budget() - self.asked()
    }
}

pub fn build(config: &OptimizerConfig) -> Result<Box<dyn Optimizer>> {
    Ok(match config.algorithm {
        Algorithm::Tbpsa => Box::new(Tbpsa::new(config, TbpsaParams::default())?),
        Algorithm::NaiveTbpsa => Box::new(Tbpsa::new(
            config,
            TbpsaParams { recommendation: Recommendation::BestSoFar, ..TbpsaParams::default() },
        )?),
        Algorithm::OnePlusOne => Box::new(OnePlusOne::new(config)?),
        Algorithm::RandomSearch => Box::new(RandomSearch::new(config)?),
    })
}

/// Pending proposals of one ask/tell round, indexed by eval index.
#[derive(Debug, Clone, Default)]
pub(crate) struct Pending {
    first: u64,
    slots: Vec<Option<Candidate>>,
}

impl Pending {
    pub(crate) fn new(first: u64) -> Self {
        Self { first, slots: Vec::new() }
    }

    pub(crate) fn issue(&mut self, c: &Candidate) -> u64 {
        self.slots.push(Some(c.clone()));
        self.first + self.slots.len() as u64 - 1
    }

    /// Checks that every result matches an outstanding proposal, then marks
    /// them told. Validation happens before any slot is consumed.
    pub(crate) fn take(&mut self, results: &[EvaluatedCandidate]) -> Result<()> {
        let mut seen = std::collections::HashSet::with_capacity(results.len());
        for r in results {
            let slot = r
                .eval_index
                .checked_sub(self.first)
                .map(|o| o as usize)
                .filter(|&o| o < self.slots.len())
                .ok_or_else(|| invalid(format!("tell: unknown eval_index {}", r.eval_index)))?;
            match &self.slots[slot] {
                None => return Err(invalid(format!("tell: eval_index {} already told", r.eval_index))),
                Some(c) if *c != r.candidate => {
                    return Err(invalid(format!(
                        "tell: candidate for eval_index {} does not match the proposal",
                        r.eval_index
                    )))
                }
                Some(_) => {}
            }
            if !seen.insert(r.eval_index) {
                return Err(invalid(format!("tell: eval_index {} repeated in batch", r.eval_index)));
            }
            if !r.fitness.is_finite() {
                return Err(Error::NonFiniteFitness { eval_index: r.eval_index, value: r.fitness });
            }
        }
        for r in results {
            self.slots[(r.eval_index - self.first) as usize] = None;
        }
        Ok(())
    }

    /// Drops fully told prefix so long runs do not accumulate slots.
    pub(crate) fn compact(&mut self) {
        let done = self.slots.iter().take_while(|s| s.is_none()).count();
        if done > 0 {
            self.slots.drain(..done);
            self.first += done as u64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("NaiveTBPSA".parse::<Algorithm>().unwrap(), Algorithm::NaiveTbpsa);
        assert_eq!("one-plus-one".parse::<Algorithm>().unwrap(), Algorithm::OnePlusOne);
        assert!("cma".parse::<Algorithm>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::new(Algorithm::Tbpsa, 0, 10).validate().is_err());
        assert!(OptimizerConfig::new(Algorithm::Tbpsa, 2, 10).with_workers(11).validate().is_err());
        assert!(OptimizerConfig::new(Algorithm::Tbpsa, 2, 10).with_workers(10).validate().is_ok());
    }

    #[test]
    fn best_so_far_ties_keep_earliest() {
        let mk = |f: f64, i: u64| EvaluatedCandidate {
            candidate: Candidate { x: vec![i as f64], sigma: 1.0 },
            fitness: f,
            eval_index: i,
        };
        let mut best = None;
        for e in [mk(5.0, 0), mk(2.0, 2), mk(2.0, 1), mk(9.0, 3), mk(2.0, 4)] {
            BestSoFar::offer(&mut best, &e);
        }
        let b = best.unwrap();
        assert_eq!((b.fitness, b.eval_index), (2.0, 1));
    }
}
