use crate::error::{invalid, Error, Result};
use crate::es::{self, Candidate, EvaluatedCandidate, ParentState};
use crate::population::{stagnation_test, FitnessArchive, PopulationSize, StagnationDecision};
use crate::rng::{self, RngStream};

use super::{BestSoFar, Optimizer, OptimizerConfig, Pending, Proposal, Status};

/// What `recommend` returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Recommendation {
    /// The current parent center (TBPSA).
    #[default]
    ParentCenter,
    /// The best evaluated point (NaiveTBPSA).
    BestSoFar,
}

/// How λ evolves between generations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    TestBased,
    /// Double λ and μ every generation regardless of the stagnation test.
    ForceDoubling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TbpsaParams {
    pub tau: f64,
    pub recommendation: Recommendation,
    pub schedule: Schedule,
    /// Defaults to `1/√d`.
    pub initial_sigma: Option<f64>,
}

impl Default for TbpsaParams {
    fn default() -> Self {
        Self {
            tau: 1.0,
            recommendation: Recommendation::ParentCenter,
            schedule: Schedule::TestBased,
            initial_sigma: None,
        }
    }
}

/// Self-adaptive (μ/μ,λ)-ES with test-based population size.
///
/// A generation of λ offspring is sampled lazily on the first `ask` after the
/// previous generation closed and may be handed out over several asks. The
/// parent moves only once all λ results are told.
pub struct Tbpsa {
    params: TbpsaParams,
    budget: u64,
    rng: RngStream,
    parent: ParentState,
    sizes: PopulationSize,
    archive: FitnessArchive,
    pool: Option<Vec<Candidate>>,
    gen_mu: usize,
    handed_out: usize,
    fitness: Vec<Option<f64>>,
    told_in_generation: usize,
    pending: Pending,
    asked: u64,
    told: u64,
    best: Option<BestSoFar>,
    last_decision: Option<StagnationDecision>,
}

impl Tbpsa {
    pub fn new(config: &OptimizerConfig, params: TbpsaParams) -> Result<Self> {
        Self::with_rng(config, params, rng::stream(config.seed, 0))
    }

    /// Like [`new`](Self::new) but drawing from a caller-provided stream
    /// (`config.seed` is ignored).
    pub fn with_rng(config: &OptimizerConfig, params: TbpsaParams, rng: RngStream) -> Result<Self> {
        config.validate()?;
        let d = config.dimension;
        let sigma = params.initial_sigma.unwrap_or(1.0 / (d as f64).sqrt());
        let parent = ParentState::new(config.center(), sigma, params.tau)?;
        let sizes = PopulationSize::initial(d, config.num_workers)?;
        Ok(Self {
            params,
            budget: config.budget,
            rng,
            parent,
            sizes,
            archive: FitnessArchive::new(),
            pool: None,
            gen_mu: sizes.mu(),
            handed_out: 0,
            fitness: Vec::new(),
            told_in_generation: 0,
            pending: Pending::new(0),
            asked: 0,
            told: 0,
            best: None,
            last_decision: None,
        })
    }

    pub fn parent(&self) -> &ParentState {
        &self.parent
    }

    pub fn population(&self) -> &PopulationSize {
        &self.sizes
    }

    pub fn archive(&self) -> &FitnessArchive {
        &self.archive
    }

    pub fn params(&self) -> &TbpsaParams {
        &self.params
    }

    pub fn last_decision(&self) -> Option<StagnationDecision> {
        self.last_decision
    }

    pub fn completed_generations(&self) -> u64 {
        self.parent.generation
    }

    /// Offspring of the current generation not yet handed out.
    pub fn generation_remaining(&self) -> usize {
        match &self.pool {
            Some(p) => p.len() - self.handed_out,
            None => self.sizes.lambda(),
        }
    }

    fn close_generation(&mut self) -> Result<()> {
        let pool = self.pool.take().expect("generation closes only with a pool");
        let fitness: Vec<f64> = self.fitness.drain(..).map(|f| f.expect("all results told")).collect();
        let first = self.asked - pool.len() as u64;
        let lambda = pool.len();
        self.archive.push_entries(fitness.iter().enumerate().map(|(i, &f)| (first + i as u64, f)), lambda)?;

        let selected = es::select_mu_best_by_fitness(&fitness, self.gen_mu, &mut self.rng)?;
        let next = es::recombine_candidates(selected.iter().map(|&i| &pool[i]))?;
        self.parent.center = next.center;
        self.parent.sigma = next.sigma;
        self.parent.generation += 1;

        let decision = match self.params.schedule {
            Schedule::ForceDoubling => StagnationDecision::Stagnating,
            Schedule::TestBased => stagnation_test(&self.archive, lambda),
        };
        self.sizes = self.sizes.update(decision);
        self.last_decision = Some(decision);
        self.handed_out = 0;
        self.told_in_generation = 0;
        self.pending.compact();
        Ok(())
    }
}

impl Optimizer for Tbpsa {
    fn ask(&mut self, max_batch: usize) -> Result<Vec<Proposal>> {
        if max_batch == 0 {
            return Err(invalid("ask: max_batch must be positive"));
        }
        if self.asked >= self.budget {
            return Err(Error::BudgetExhausted { budget: self.budget });
        }
        if self.pool.is_none() {
            let lambda = self.sizes.lambda();
            self.pool = Some(es::mutate(&self.parent, lambda, &mut self.rng)?);
            self.gen_mu = self.sizes.mu();
            self.fitness = vec![None; lambda];
        }
        let pool = self.pool.as_ref().expect("pool just ensured");
        let n =
            max_batch.min(pool.len() - self.handed_out).min((self.budget - self.asked).min(usize::MAX as u64) as usize);
        let out: Vec<Proposal> = pool[self.handed_out..self.handed_out + n]
            .iter()
            .map(|c| Proposal { eval_index: self.pending.issue(c), candidate: c.clone() })
            .collect();
        self.handed_out += n;
        self.asked += n as u64;
        Ok(out)
    }

    fn tell(&mut self, results: &[EvaluatedCandidate]) -> Result<()> {
        self.pending.take(results)?;
        let first = self.asked - self.handed_out as u64;
        for r in results {
            let slot = (r.eval_index - first) as usize;
            self.fitness[slot] = Some(r.fitness);
            BestSoFar::offer(&mut self.best, r);
        }
        self.told += results.len() as u64;
        self.told_in_generation += results.len();
        let lambda = self.pool.as_ref().map_or(usize::MAX, Vec::len);
        if self.told_in_generation == lambda {
            self.close_generation()?;
        }
        Ok(())
    }

    fn recommend(&self) -> Result<Vec<f64>> {
        match self.params.recommendation {
            Recommendation::ParentCenter => {
                if self.parent.generation == 0 {
                    return Err(Error::NoRecommendation("no generation has completed yet"));
                }
                Ok(self.parent.center.clone())
            }
            Recommendation::BestSoFar => {
                self.best.as_ref().map(|b| b.point.clone()).ok_or(Error::NoRecommendation("nothing has been told yet"))
            }
        }
    }

    fn best_so_far(&self) -> Option<&BestSoFar> {
        self.best.as_ref()
    }

    fn status(&self) -> Status {
        Status {
            generation: self.parent.generation,
            evaluations: self.told,
            sigma: self.parent.sigma,
            lambda: self.sizes.lambda(),
        }
    }

    fn budget(&self) -> u64 {
        self.budget
    }

    fn asked(&self) -> u64 {
        self.asked
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::{build, Algorithm};

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn config(d: usize, budget: u64) -> OptimizerConfig {
        OptimizerConfig::new(Algorithm::Tbpsa, d, budget).with_seed(1)
    }

    fn tell_all(opt: &mut dyn Optimizer, batch: Vec<Proposal>, f: impl Fn(&[f64]) -> f64) {
        let results: Vec<_> = batch
            .into_iter()
            .map(|p| {
                let y = f(p.x());
                p.evaluated(y)
            })
            .collect();
        opt.tell(&results).unwrap();
    }

    #[test]
    fn initial_generation_and_step_size() {
        let mut t = Tbpsa::new(&config(5, 1000), TbpsaParams::default()).unwrap();
        assert!((t.parent().sigma - 0.4472135954999579).abs() < 1e-15);
        assert_eq!(t.ask(1000).unwrap().len(), 20);

        let mut t = Tbpsa::new(&config(5, 1000), TbpsaParams::default()).unwrap();
        assert_eq!(t.ask(7).unwrap().len(), 7);
        assert_eq!(t.ask(1000).unwrap().len(), 13);
        assert!(t.ask(5).unwrap().is_empty());
    }

    #[test]
    fn parent_updates_at_generation_boundary() {
        let mut t = Tbpsa::new(&config(5, 1000), TbpsaParams::default()).unwrap();
        let batch = t.ask(20).unwrap();
        let mut results: Vec<_> = batch
            .into_iter()
            .map(|p| {
                let y = sphere(p.x());
                p.evaluated(y)
            })
            .collect();
        let last = results.pop().unwrap();
        t.tell(&results).unwrap();
        assert_eq!(t.completed_generations(), 0);
        assert!(t.recommend().is_err());
        t.tell(&[last]).unwrap();
        assert_eq!(t.completed_generations(), 1);
        assert_eq!(t.recommend().unwrap(), t.parent().center);
    }

    #[test]
    fn out_of_order_tells_are_accepted() {
        let mut t = Tbpsa::new(&config(2, 100), TbpsaParams::default()).unwrap();
        let batch = t.ask(8).unwrap();
        let mut results: Vec<_> = batch
            .into_iter()
            .map(|p| {
                let y = sphere(p.x());
                p.evaluated(y)
            })
            .collect();
        results.reverse();
        for r in results.chunks(3) {
            t.tell(r).unwrap();
        }
        assert_eq!(t.completed_generations(), 1);
    }

    #[test]
    fn unknown_and_duplicate_tells_fail() {
        let mut t = Tbpsa::new(&config(2, 100), TbpsaParams::default()).unwrap();
        let batch = t.ask(4).unwrap();
        let r0 = batch[0].clone().evaluated(1.0);
        t.tell(std::slice::from_ref(&r0)).unwrap();
        assert!(t.tell(std::slice::from_ref(&r0)).is_err());
        let mut bogus = batch[1].clone().evaluated(1.0);
        bogus.eval_index = 99;
        assert!(t.tell(&[bogus]).is_err());
        let twice = batch[2].clone().evaluated(1.0);
        assert!(t.tell(&[twice.clone(), twice]).is_err());
        let nan = batch[3].clone().evaluated(f64::NAN);
        assert!(matches!(t.tell(&[nan]), Err(Error::NonFiniteFitness { .. })));
    }

    #[test]
    fn constant_stream_doubles_lambda_after_window_fills() {
        let mut t = Tbpsa::new(&config(2, 10_000), TbpsaParams::default()).unwrap();
        let mut lambdas = Vec::new();
        for _ in 0..6 {
            lambdas.push(t.population().lambda());
            let batch = t.ask(usize::MAX).unwrap();
            tell_all(&mut t, batch, |_| 1.0);
        }
        assert_eq!(t.archive().len(), 56);
        assert_eq!(lambdas, vec![8, 8, 8, 8, 8, 16]);
        assert_eq!(t.last_decision(), Some(StagnationDecision::Insufficient));
    }

    #[test]
    fn best_so_far_tracks_minimum() {
        let mut t = Tbpsa::new(&config(1, 100), TbpsaParams::default()).unwrap();
        let batch = t.ask(3).unwrap();
        let fits = [3.0, 1.0, 2.0];
        let results: Vec<_> = batch.into_iter().zip(fits).map(|(p, f)| p.evaluated(f)).collect();
        t.tell(&results).unwrap();
        assert_eq!(t.best_so_far().unwrap().fitness, 1.0);
    }

    #[test]
    fn naive_recommends_best_point() {
        let cfg = OptimizerConfig::new(Algorithm::NaiveTbpsa, 1, 100).with_seed(3);
        let mut t = build(&cfg).unwrap();
        assert!(t.recommend().is_err());
        let batch = t.ask(3).unwrap();
        let points: Vec<Vec<f64>> = batch.iter().map(|p| p.x().to_vec()).collect();
        let results: Vec<_> = batch.into_iter().zip([5.0, 2.0, 9.0]).map(|(p, f)| p.evaluated(f)).collect();
        t.tell(&results).unwrap();
        assert_eq!(t.recommend().unwrap(), points[1]);
    }

    #[test]
    fn naive_tie_prefers_earliest() {
        let cfg = OptimizerConfig::new(Algorithm::NaiveTbpsa, 1, 100).with_seed(3);
        let mut t = build(&cfg).unwrap();
        let batch = t.ask(2).unwrap();
        let first = batch[0].x().to_vec();
        let mut results: Vec<_> = batch.into_iter().map(|p| p.evaluated(2.0)).collect();
        results.reverse();
        t.tell(&results).unwrap();
        assert_eq!(t.recommend().unwrap(), first);
    }

    #[test]
    fn budget_is_never_exceeded() {
        let mut t = Tbpsa::new(&config(3, 30), TbpsaParams::default()).unwrap();
        let mut total = 0;
        loop {
            match t.ask(5) {
                Ok(batch) => {
                    total += batch.len();
                    tell_all(&mut t, batch, sphere);
                }
                Err(Error::BudgetExhausted { .. }) => break,
                Err(e) => panic!("{e}"),
            }
        }
        assert_eq!(total, 30);
        assert!(t.ask(1).is_err());
    }

    #[test]
    fn force_doubling_grows_every_generation() {
        let params = TbpsaParams { schedule: Schedule::ForceDoubling, ..TbpsaParams::default() };
        let mut t = Tbpsa::new(&config(1, u64::MAX), params).unwrap();
        for n in 0..8 {
            assert_eq!(t.population().lambda(), 4 << n);
            let batch = t.ask(usize::MAX).unwrap();
            tell_all(&mut t, batch, sphere);
        }
    }
}
