//! Hypervolume indicator (minimization, reference point componentwise worse).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoSet {
    pub points: Vec<Vec<f64>>,
    pub reference: Vec<f64>,
}

impl ParetoSet {
    pub fn new(points: Vec<Vec<f64>>, reference: Vec<f64>) -> Self {
        Self { points, reference }
    }

    pub fn objectives(&self) -> usize {
        self.reference.len()
    }

    /// Points that strictly dominate the reference; everything else is dropped.
    pub fn dominating(&self) -> Result<Vec<&[f64]>> {
        let k = self.objectives();
        if k < 2 || self.reference.iter().any(|r| !r.is_finite()) {
            return Err(invalid("reference must be finite with at least 2 objectives"));
        }
        let mut out = Vec::with_capacity(self.points.len());
        for p in &self.points {
            if p.len() != k {
                return Err(invalid(format!("point has {} objectives, reference has {k}", p.len())));
            }
            if p.iter().zip(&self.reference).all(|(v, r)| v.is_finite() && v < r) {
                out.push(p.as_slice());
            }
        }
        Ok(out)
    }
}

/// Exact two-objective hypervolume by a sweep over the first objective.
pub fn hypervolume(set: &ParetoSet) -> Result<f64> {
    if set.objectives() != 2 {
        return Err(invalid(format!("exact hypervolume supports 2 objectives, got {}", set.objectives())));
    }
    let mut pts: Vec<(f64, f64)> = set.dominating()?.into_iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let (r0, r1) = (set.reference[0], set.reference[1]);
    let mut level = r1;
    let mut area = 0.0;
    for (a, b) in pts {
        if b < level {
            area += (r0 - a) * (level - b);
            level = b;
        }
    }
    Ok(area)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypervolumeEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte Carlo hypervolume for any number of objectives: uniform samples in
/// the box spanned by the componentwise minimum of the points and the
/// reference, counted when some point dominates them.
pub fn hypervolume_monte_carlo<R: Rng + ?Sized>(
    set: &ParetoSet,
    samples: usize,
    rng: &mut R,
) -> Result<HypervolumeEstimate> {
    if samples == 0 {
        return Err(invalid("need at least one Monte Carlo sample"));
    }
    let pts = set.dominating()?;
    if pts.is_empty() {
        return Ok(HypervolumeEstimate { value: 0.0, std_error: 0.0 });
    }
    let k = set.objectives();
    let lower: Vec<f64> = (0..k).map(|j| pts.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min)).collect();
    let volume: f64 = lower.iter().zip(&set.reference).map(|(l, r)| r - l).product();
    let mut sample = vec![0.0; k];
    let mut hits = 0usize;
    for _ in 0..samples {
        for j in 0..k {
            sample[j] = lower[j] + (set.reference[j] - lower[j]) * rng.random::<f64>();
        }
        if pts.iter().any(|p| p.iter().zip(&sample).all(|(a, s)| a <= s)) {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    Ok(HypervolumeEstimate { value: volume * frac, std_error: volume * (frac * (1.0 - frac) / samples as f64).sqrt() })
}

type Objective = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Turns a two-objective problem into a single objective: each call records
/// the new objective vector and returns minus the hypervolume of everything
/// seen so far.
///
/// Stateful and order-dependent: the same point can score differently
/// depending on what was evaluated before it. Calls must be serialized.
pub struct HypervolumeScalarizer {
    objectives: Vec<Objective>,
    reference: Vec<f64>,
    archive: Vec<Vec<f64>>,
}

impl HypervolumeScalarizer {
    pub fn new(objectives: Vec<Objective>, reference: Vec<f64>) -> Result<Self> {
        if objectives.len() != 2 || reference.len() != 2 {
            return Err(invalid("hypervolume scalarization supports exactly 2 objectives"));
        }
        Ok(Self { objectives, reference, archive: Vec::new() })
    }

    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        let y: Vec<f64> = self.objectives.iter().map(|f| f(x)).collect();
        self.push(y)
    }

    /// Same as [`evaluate`](Self::evaluate) for an already computed objective vector.
    pub fn push(&mut self, y: Vec<f64>) -> Result<f64> {
        if y.len() != 2 {
            return Err(invalid("objective vector must have 2 entries"));
        }
        let dominated = self.archive.iter().any(|a| a.iter().zip(&y).all(|(p, q)| p <= q));
        if !dominated {
            self.archive.retain(|a| !y.iter().zip(a).all(|(p, q)| p <= q));
            self.archive.push(y);
        }
        let set = ParetoSet::new(self.archive.clone(), self.reference.clone());
        Ok(-hypervolume(&set)?)
    }

    /// Nondominated objective vectors recorded so far.
    pub fn archive(&self) -> &[Vec<f64>] {
        &self.archive
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rng::stream;

    /// Midpoint-grid area count, independent of the sweep.
    pub(crate) fn grid_area(points: &[(f64, f64)], reference: (f64, f64), cells: usize) -> f64 {
        let lo0 = points.iter().map(|p| p.0).fold(reference.0, f64::min);
        let lo1 = points.iter().map(|p| p.1).fold(reference.1, f64::min);
        let h0 = (reference.0 - lo0) / cells as f64;
        let h1 = (reference.1 - lo1) / cells as f64;
        let mut count = 0usize;
        for i in 0..cells {
            let u = lo0 + (i as f64 + 0.5) * h0;
            for j in 0..cells {
                let v = lo1 + (j as f64 + 0.5) * h1;
                if points.iter().any(|p| p.0 <= u && p.1 <= v) {
                    count += 1;
                }
            }
        }
        count as f64 * h0 * h1
    }

    #[test]
    fn small_examples() {
        let hv = |pts: Vec<Vec<f64>>, r: Vec<f64>| hypervolume(&ParetoSet::new(pts, r)).unwrap();
        assert_eq!(hv(vec![vec![1.0, 1.0]], vec![2.0, 2.0]), 1.0);
        assert_eq!(hv(vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![3.0, 3.0]), 3.0);
        assert_eq!(hv(vec![vec![1.0, 1.0], vec![1.5, 1.5]], vec![2.0, 2.0]), 1.0);
        assert_eq!(hv(vec![], vec![2.0, 2.0]), 0.0);
        // not dominating the reference: dropped
        assert_eq!(hv(vec![vec![2.0, 0.0], vec![0.5, 3.0]], vec![2.0, 2.0]), 0.0);
        assert!((grid_area(&[(1.0, 2.0), (2.0, 1.0)], (3.0, 3.0), 400) - 3.0).abs() < 1e-9);
        assert!((grid_area(&[(1.0, 1.0), (1.5, 1.5)], (2.0, 2.0), 400) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_rejects_three_objectives() {
        let set = ParetoSet::new(vec![vec![0.0; 3]], vec![1.0; 3]);
        assert!(hypervolume(&set).is_err());
        let est = hypervolume_monte_carlo(&set, 1000, &mut stream(0, 0)).unwrap();
        assert_eq!(est.value, 1.0);
    }

    #[test]
    fn monte_carlo_three_objectives() {
        // union of two unit-ish boxes against reference (2,2,2):
        // (0,1,1) → 2·1·1 = 2, (1,0,1) → 1·2·1 = 2, overlap 1·1·1 = 1 → 3
        let set = ParetoSet::new(vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0]], vec![2.0; 3]);
        let est = hypervolume_monte_carlo(&set, 200_000, &mut stream(1, 0)).unwrap();
        assert!((est.value - 3.0).abs() <= 4.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn scalarizer_examples() {
        let objs: Vec<Objective> = vec![Box::new(|x: &[f64]| x[0]), Box::new(|x: &[f64]| x[1])];
        let mut s = HypervolumeScalarizer::new(objs, vec![3.0, 3.0]).unwrap();
        assert_eq!(s.evaluate(&[2.0, 2.0]).unwrap(), -1.0);
        assert_eq!(s.evaluate(&[2.5, 2.5]).unwrap(), -1.0);
        let objs: Vec<Objective> = vec![Box::new(|x: &[f64]| x[0]), Box::new(|x: &[f64]| x[1])];
        let mut s = HypervolumeScalarizer::new(objs, vec![3.0, 3.0]).unwrap();
        s.evaluate(&[1.0, 2.0]).unwrap();
        assert_eq!(s.evaluate(&[2.0, 1.0]).unwrap(), -3.0);
        assert_eq!(s.archive().len(), 2);
    }
}
