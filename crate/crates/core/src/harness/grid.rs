use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::ObjectiveRecord;
use crate::error::{invalid, Error, Result};
use crate::optimizers::{Algorithm, OptimizerConfig};

use super::{run_experiment_labeled, RunRecord};

/// Algorithms × objectives × budgets × worker counts × seeds.
///
/// Every algorithm in a cell shares the cell's seed, so paired comparisons
/// use common random numbers wherever the algorithms draw alike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub algorithms: Vec<Algorithm>,
    pub objectives: Vec<ObjectiveRecord>,
    pub budgets: Vec<u64>,
    pub num_workers: Vec<usize>,
    pub seeds_per_cell: usize,
    /// Run seeds are `base_seed, base_seed + 1, …`.
    #[serde(default)]
    pub base_seed: u64,
}

/// One entry of the canonical run order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRun {
    pub run_id: u64,
    pub objective: ObjectiveRecord,
    pub config: OptimizerConfig,
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty()
            || self.objectives.is_empty()
            || self.budgets.is_empty()
            || self.num_workers.is_empty()
            || self.seeds_per_cell == 0
        {
            return Err(invalid("every grid axis needs at least one entry"));
        }
        Ok(())
    }

    pub fn total_runs(&self) -> usize {
        self.algorithms.len()
            * self.objectives.len()
            * self.budgets.len()
            * self.num_workers.len()
            * self.seeds_per_cell
    }

    /// Runs in canonical order: objective, budget, workers, seed, algorithm.
    pub fn runs(&self) -> Result<Vec<GridRun>> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.total_runs());
        for obj in &self.objectives {
            for &budget in &self.budgets {
                for &workers in &self.num_workers {
                    for s in 0..self.seeds_per_cell as u64 {
                        for &alg in &self.algorithms {
                            let config = OptimizerConfig::new(alg, obj.dimension, budget)
                                .with_workers(workers)
                                .with_seed(self.base_seed.wrapping_add(s));
                            config.validate()?;
                            out.push(GridRun { run_id: out.len() as u64, objective: obj.clone(), config });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Executes the grid in parallel; records come back in canonical order.
pub fn run_grid(grid: &ExperimentGrid) -> Result<Vec<RunRecord>> {
    let runs = grid.runs()?;
    let objectives = grid.objectives.iter().map(|o| o.build()).collect::<Result<Vec<_>>>()?;
    runs.par_iter()
        .map(|r| {
            let i = grid.objectives.iter().position(|o| *o == r.objective).expect("objective from this grid");
            run_experiment_labeled(&r.config, &objectives[i], &r.objective.to_string(), r.run_id)
        })
        .collect()
}

/// Parses a plain-text grid description:
///
/// ```text
/// # comment
/// algorithms: tbpsa naive_tbpsa one_plus_one
/// objective: fn=sphere dim=2
/// objective: fn=trap dim=2 radius=10 offset=40
/// budgets: 1000 5000
/// workers: 1 4
/// seeds: 10
/// seed: 0
/// ```
///
/// List values may be separated by whitespace or commas; `objective:` may
/// repeat. `workers` defaults to 1, `seed` to 0.
pub fn parse_grid(text: &str) -> Result<ExperimentGrid> {
    let mut grid = ExperimentGrid {
        algorithms: Vec::new(),
        objectives: Vec::new(),
        budgets: Vec::new(),
        num_workers: Vec::new(),
        seeds_per_cell: 0,
        base_seed: 0,
    };
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse(format!("line {}: {msg}", n + 1));
        let (key, value) = line.split_once(':').ok_or_else(|| err(format!("expected 'key: value', got '{line}'")))?;
        let items = || value.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty());
        let int = |t: &str| t.parse::<u64>().map_err(|_| err(format!("bad integer '{t}'")));
        match key.trim() {
            "algorithms" | "algorithm" => {
                for t in items() {
                    grid.algorithms.push(t.parse().map_err(|e: Error| err(e.to_string()))?);
                }
            }
            "objective" | "objectives" => grid.objectives.push(value.parse().map_err(|e: Error| err(e.to_string()))?),
            "budgets" | "budget" => {
                for t in items() {
                    grid.budgets.push(int(t)?);
                }
            }
            "workers" | "num_workers" => {
                for t in items() {
                    grid.num_workers.push(int(t)? as usize);
                }
            }
            "seeds" | "seeds_per_cell" => grid.seeds_per_cell = int(value.trim())? as usize,
            "seed" | "base_seed" => grid.base_seed = int(value.trim())?,
            other => return Err(err(format!("unknown key '{other}'"))),
        }
    }
    if grid.num_workers.is_empty() {
        grid.num_workers.push(1);
    }
    grid.validate()?;
    Ok(grid)
}
