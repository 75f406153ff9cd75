use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::es::{Candidate, EvaluatedCandidate};
use crate::rng::{self, RngStream};

use super::{BestSoFar, Optimizer, OptimizerConfig, Pending, Proposal, Status};

/// Independent standard-normal samples around the initial center.
pub struct RandomSearch {
    budget: u64,
    center: Vec<f64>,
    rng: RngStream,
    pending: Pending,
    asked: u64,
    told: u64,
    rounds: u64,
    best: Option<BestSoFar>,
}

impl RandomSearch {
    pub fn new(config: &OptimizerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            budget: config.budget,
            center: config.center(),
            rng: rng::stream(config.seed, 0),
            pending: Pending::new(0),
            asked: 0,
            told: 0,
            rounds: 0,
            best: None,
        })
    }

    /// One fresh sample.
    pub fn random_search_step(&mut self) -> Candidate {
        let x = self.center.iter().map(|c| c + self.rng.sample::<f64, _>(StandardNormal)).collect();
        Candidate { x, sigma: 1.0 }
    }
}

impl Optimizer for RandomSearch {
    fn ask(&mut self, max_batch: usize) -> Result<Vec<Proposal>> {
        if max_batch == 0 {
            return Err(invalid("ask: max_batch must be positive"));
        }
        if self.asked >= self.budget {
            return Err(Error::BudgetExhausted { budget: self.budget });
        }
        let n = (max_batch as u64).min(self.budget - self.asked) as usize;
        let out = (0..n)
            .map(|_| {
                let candidate = self.random_search_step();
                Proposal { eval_index: self.pending.issue(&candidate), candidate }
            })
            .collect();
        self.asked += n as u64;
        Ok(out)
    }

    fn tell(&mut self, results: &[EvaluatedCandidate]) -> Result<()> {
        self.pending.take(results)?;
        for r in results {
            BestSoFar::offer(&mut self.best, r);
        }
        self.told += results.len() as u64;
        self.rounds += 1;
        self.pending.compact();
        Ok(())
    }

    fn recommend(&self) -> Result<Vec<f64>> {
        self.best.as_ref().map(|b| b.point.clone()).ok_or(Error::NoRecommendation("nothing has been told yet"))
    }

    fn best_so_far(&self) -> Option<&BestSoFar> {
        self.best.as_ref()
    }

    fn status(&self) -> Status {
        Status { generation: self.rounds, evaluations: self.told, sigma: 1.0, lambda: 1 }
    }

    fn budget(&self) -> u64 {
        self.budget
    }

    fn asked(&self) -> u64 {
        self.asked
    }
}
