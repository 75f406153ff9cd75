use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::es::{Candidate, EvaluatedCandidate};
use crate::population::{GROW_FACTOR, SHRINK_FACTOR};
use crate::rng::{self, RngStream};

use super::{BestSoFar, Optimizer, OptimizerConfig, Pending, Proposal, Status};

/// Elitist parent and step-size of the (1+1)-ES.
#[derive(Debug, Clone, PartialEq)]
pub struct OnePlusOneState {
    pub parent: Vec<f64>,
    pub parent_fitness: f64,
    pub sigma: f64,
}

/// One selection step: the child replaces the parent iff it is not worse;
/// the step-size doubles on success and shrinks by `2^{-1/4}` otherwise.
pub fn one_plus_one_step(state: &OnePlusOneState, child: &[f64], child_fitness: f64) -> OnePlusOneState {
    if child_fitness <= state.parent_fitness {
        OnePlusOneState { parent: child.to_vec(), parent_fitness: child_fitness, sigma: state.sigma * GROW_FACTOR }
    } else {
        OnePlusOneState { sigma: state.sigma * SHRINK_FACTOR, ..state.clone() }
    }
}

/// (1+1)-ES with the doubling/`2^{-1/4}` step-size rule.
///
/// The very first proposal is the initial center itself, which establishes the
/// parent fitness. With batches, every child of a batch is drawn around the
/// parent current at ask time; results are applied in eval-index order.
pub struct OnePlusOne {
    budget: u64,
    rng: RngStream,
    state: OnePlusOneState,
    parent_known: bool,
    pending: Pending,
    asked: u64,
    told: u64,
    rounds: u64,
    best: Option<BestSoFar>,
}

impl OnePlusOne {
    pub fn new(config: &OptimizerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            budget: config.budget,
            rng: rng::stream(config.seed, 0),
            state: OnePlusOneState {
                parent: config.center(),
                parent_fitness: f64::INFINITY,
                sigma: 1.0 / (config.dimension as f64).sqrt(),
            },
            parent_known: false,
            pending: Pending::new(0),
            asked: 0,
            told: 0,
            rounds: 0,
            best: None,
        })
    }

    pub fn state(&self) -> &OnePlusOneState {
        &self.state
    }
}

impl Optimizer for OnePlusOne {
    fn ask(&mut self, max_batch: usize) -> Result<Vec<Proposal>> {
        if max_batch == 0 {
            return Err(invalid("ask: max_batch must be positive"));
        }
        if self.asked >= self.budget {
            return Err(Error::BudgetExhausted { budget: self.budget });
        }
        let n = (max_batch as u64).min(self.budget - self.asked) as usize;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let x = if self.asked == 0 {
                self.state.parent.clone()
            } else {
                let s = self.state.sigma;
                self.state.parent.iter().map(|p| p + s * self.rng.sample::<f64, _>(StandardNormal)).collect()
            };
            let candidate = Candidate { x, sigma: self.state.sigma };
            out.push(Proposal { eval_index: self.pending.issue(&candidate), candidate });
            self.asked += 1;
        }
        Ok(out)
    }

    fn tell(&mut self, results: &[EvaluatedCandidate]) -> Result<()> {
        self.pending.take(results)?;
        let mut sorted: Vec<&EvaluatedCandidate> = results.iter().collect();
        sorted.sort_by_key(|r| r.eval_index);
        for r in sorted {
            BestSoFar::offer(&mut self.best, r);
            if self.parent_known {
                self.state = one_plus_one_step(&self.state, &r.candidate.x, r.fitness);
            } else {
                self.state.parent = r.candidate.x.clone();
                self.state.parent_fitness = r.fitness;
                self.parent_known = true;
            }
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
        Status { generation: self.rounds, evaluations: self.told, sigma: self.state.sigma, lambda: 1 }
    }

    fn budget(&self) -> u64 {
        self.budget
    }

    fn asked(&self) -> u64 {
        self.asked
    }
}
