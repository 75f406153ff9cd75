use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::RunRecord;

/// Pairwise win-frequency scores, sorted by descending score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub algorithms: Vec<String>,
    pub scores: Vec<f64>,
    /// `wins[i][j]`: cells where `algorithms[i]` had lower regret than
    /// `algorithms[j]`, ties counting one half.
    pub wins: Vec<Vec<f64>>,
    pub cells: usize,
}

impl ScoreMatrix {
    pub fn score(&self, algorithm: &str) -> Option<f64> {
        self.algorithms.iter().position(|a| a == algorithm).map(|i| self.scores[i])
    }

    pub fn wins_between(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.algorithms.iter().position(|x| x == a)?;
        let j = self.algorithms.iter().position(|x| x == b)?;
        Some(self.wins[i][j])
    }
}

type CellKey = (String, usize, u64, usize, u64);

fn cell_key(r: &RunRecord) -> CellKey {
    (r.objective.clone(), r.config.dimension, r.config.budget, r.config.num_workers, r.config.seed)
}

/// Compares every pair of algorithms on every cell (objective, dimension,
/// budget, workers, seed) by final regret: lower wins, equal regrets split
/// the point. A record without regret ranks behind any finite regret. Each
/// algorithm's score is its mean win frequency over opponents and cells.
///
/// Every algorithm must appear exactly once in every cell.
pub fn score_matrix(records: &[RunRecord]) -> Result<ScoreMatrix> {
    let mut cells: BTreeMap<CellKey, BTreeMap<String, f64>> = BTreeMap::new();
    let mut names: Vec<String> = Vec::new();
    for r in records {
        let name = r.algorithm().name().to_string();
        if !names.contains(&name) {
            names.push(name.clone());
        }
        let cell = cells.entry(cell_key(r)).or_default();
        if cell.insert(name.clone(), r.comparable_regret()).is_some() {
            return Err(invalid(format!("algorithm {name} appears twice in cell {:?}", cell_key(r))));
        }
    }
    if names.len() < 2 {
        return Err(invalid(format!("need at least two algorithms to score, got {}", names.len())));
    }
    names.sort();
    let n = names.len();
    let mut wins = vec![vec![0.0; n]; n];
    for (key, cell) in &cells {
        if cell.len() != n {
            return Err(invalid(format!("ragged grid: cell {key:?} has {} of {n} algorithms", cell.len())));
        }
        let regrets: Vec<f64> = names.iter().map(|a| cell[a]).collect();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    wins[i][j] += match regrets[i].partial_cmp(&regrets[j]) {
                        Some(std::cmp::Ordering::Less) => 1.0,
                        Some(std::cmp::Ordering::Equal) => 0.5,
                        _ => 0.0,
                    };
                }
            }
        }
    }
    let denom = ((n - 1) * cells.len()) as f64;
    let scores: Vec<f64> = wins.iter().map(|row| row.iter().sum::<f64>() / denom).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(names[a].cmp(&names[b])));
    Ok(ScoreMatrix {
        algorithms: order.iter().map(|&i| names[i].clone()).collect(),
        scores: order.iter().map(|&i| scores[i]).collect(),
        wins: order.iter().map(|&i| order.iter().map(|&j| wins[i][j]).collect()).collect(),
        cells: cells.len(),
    })
}
