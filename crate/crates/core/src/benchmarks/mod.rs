//! Noise-free objective suite.
//!
//! | name        | form                                                          | optimum          |
//! |-------------|---------------------------------------------------------------|------------------|
//! | sphere      | `Σ x²`                                                        | 0 at 0           |
//! | cigar       | `x₁² + 10⁶ Σ_{i>1} x_i²`                                      | 0 at 0           |
//! | ellipsoid   | `Σ 10^{6(i−1)/(d−1)} x_i²`                                    | 0 at 0           |
//! | discus      | `10⁶ x₁² + Σ_{i>1} x_i²`                                      | 0 at 0           |
//! | rastrigin   | `10d + Σ (x² − 10 cos 2πx)`                                   | 0 at 0           |
//! | griewank    | `1 + Σ x²/4000 − Π cos(x_i/√i)`                               | 0 at 0           |
//! | rosenbrock  | `Σ 100(x_{i+1} − x_i²)² + (1 − x_i)²` (d ≥ 2)                 | 0 at 1           |
//! | ackley      | `−20e^{−0.2√(Σx²/d)} − e^{Σcos(2πx)/d} + 20 + e`             | 0 at 0           |
//! | lunacek     | bi-Rastrigin, see [`functions::lunacek`]                      | 0 at 2.5         |
//! | schwefel    | `418.98d − Σ x sin√|x|`                                       | ≈0 at 420.97     |
//! | plateau     | `max(0, ‖x‖ − R)`; `R = ∞` is the constant function           | 0 on `B(0,R)`    |
//! | trap        | `min(‖x‖², ‖x − c‖² − δ)`, equal to the sphere on `B(0,K')`   | −δ at c          |
//!
//! The trap stands in for a deceptive multimodal function: a convex basin
//! around the origin hides a deeper optimum outside the ball `B(0, K')`.
//! Every objective is evaluated as `f(Rᵀ(x − t))` for an optional rotation `R`
//! and translation `t`.

pub mod functions;
pub mod hypervolume;
mod record;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use hypervolume::{hypervolume, hypervolume_monte_carlo, HypervolumeEstimate, HypervolumeScalarizer, ParetoSet};
pub use record::ObjectiveRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    Sphere,
    Cigar,
    Ellipsoid,
    Discus,
    Rastrigin,
    Griewank,
    Rosenbrock,
    Ackley,
    Lunacek,
    Schwefel,
    Plateau,
    Trap,
}

impl FunctionKind {
    pub const ALL: [FunctionKind; 12] = [
        FunctionKind::Sphere,
        FunctionKind::Cigar,
        FunctionKind::Ellipsoid,
        FunctionKind::Discus,
        FunctionKind::Rastrigin,
        FunctionKind::Griewank,
        FunctionKind::Rosenbrock,
        FunctionKind::Ackley,
        FunctionKind::Lunacek,
        FunctionKind::Schwefel,
        FunctionKind::Plateau,
        FunctionKind::Trap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionKind::Sphere => "sphere",
            FunctionKind::Cigar => "cigar",
            FunctionKind::Ellipsoid => "ellipsoid",
            FunctionKind::Discus => "discus",
            FunctionKind::Rastrigin => "rastrigin",
            FunctionKind::Griewank => "griewank",
            FunctionKind::Rosenbrock => "rosenbrock",
            FunctionKind::Ackley => "ackley",
            FunctionKind::Lunacek => "lunacek",
            FunctionKind::Schwefel => "schwefel",
            FunctionKind::Plateau => "plateau",
            FunctionKind::Trap => "trap",
        }
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        FunctionKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Parse(format!("unknown function '{s}'")))
    }
}

/// Base function with its shape parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Function {
    Sphere,
    Cigar,
    Ellipsoid,
    Discus,
    Rastrigin,
    Griewank,
    Rosenbrock,
    Ackley,
    Lunacek,
    Schwefel,
    /// Constant on the closed ball of radius `radius`; infinite radius is constant everywhere.
    Plateau {
        radius: f64,
    },
    /// Sphere inside `B(0, radius)` with a deeper optimum `−depth` at `offset`.
    Trap {
        radius: f64,
        offset: Vec<f64>,
        depth: f64,
    },
}

impl Function {
    pub fn kind(&self) -> FunctionKind {
        match self {
            Function::Sphere => FunctionKind::Sphere,
            Function::Cigar => FunctionKind::Cigar,
            Function::Ellipsoid => FunctionKind::Ellipsoid,
            Function::Discus => FunctionKind::Discus,
            Function::Rastrigin => FunctionKind::Rastrigin,
            Function::Griewank => FunctionKind::Griewank,
            Function::Rosenbrock => FunctionKind::Rosenbrock,
            Function::Ackley => FunctionKind::Ackley,
            Function::Lunacek => FunctionKind::Lunacek,
            Function::Schwefel => FunctionKind::Schwefel,
            Function::Plateau { .. } => FunctionKind::Plateau,
            Function::Trap { .. } => FunctionKind::Trap,
        }
    }

    /// Parameter-free functions by kind; plateau and trap need their constructors.
    pub fn simple(kind: FunctionKind) -> Option<Function> {
        Some(match kind {
            FunctionKind::Sphere => Function::Sphere,
            FunctionKind::Cigar => Function::Cigar,
            FunctionKind::Ellipsoid => Function::Ellipsoid,
            FunctionKind::Discus => Function::Discus,
            FunctionKind::Rastrigin => Function::Rastrigin,
            FunctionKind::Griewank => Function::Griewank,
            FunctionKind::Rosenbrock => Function::Rosenbrock,
            FunctionKind::Ackley => Function::Ackley,
            FunctionKind::Lunacek => Function::Lunacek,
            FunctionKind::Schwefel => Function::Schwefel,
            FunctionKind::Plateau | FunctionKind::Trap => return None,
        })
    }

    fn base(&self, y: &[f64]) -> f64 {
        match self {
            Function::Sphere => functions::sphere(y),
            Function::Cigar => functions::cigar(y),
            Function::Ellipsoid => functions::ellipsoid(y),
            Function::Discus => functions::discus(y),
            Function::Rastrigin => functions::rastrigin(y),
            Function::Griewank => functions::griewank(y),
            Function::Rosenbrock => functions::rosenbrock(y),
            Function::Ackley => functions::ackley(y),
            Function::Lunacek => functions::lunacek(y),
            Function::Schwefel => functions::schwefel(y),
            Function::Plateau { radius } => functions::plateau(y, *radius),
            Function::Trap { offset, depth, .. } => functions::trap(y, offset, *depth),
        }
    }

    /// Minimizer of the base form in dimension `d`.
    fn argmin(&self, d: usize) -> Vec<f64> {
        match self {
            Function::Rosenbrock => vec![1.0; d],
            Function::Lunacek => vec![functions::LUNACEK_MU1; d],
            Function::Schwefel => vec![functions::SCHWEFEL_ARGMIN; d],
            Function::Trap { offset, .. } => offset.clone(),
            _ => vec![0.0; d],
        }
    }
}

/// A benchmark instance: base function, dimension, optional translation and rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub function: Function,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<Vec<f64>>,
    /// Row-major orthogonal matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Vec<Vec<f64>>>,
}

impl ObjectiveSpec {
    pub fn new(function: Function, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("objective dimension must be at least 1"));
        }
        match &function {
            Function::Rosenbrock if dimension < 2 => return Err(invalid("rosenbrock needs dimension >= 2")),
            Function::Plateau { radius } if radius.is_nan() || *radius < 0.0 => {
                return Err(invalid(format!("plateau radius must be >= 0, got {radius}")))
            }
            Function::Trap { radius, offset, depth } => check_trap(dimension, *radius, offset, *depth)?,
            _ => {}
        }
        Ok(Self { function, dimension, translation: None, rotation: None })
    }

    pub fn simple(kind: FunctionKind, dimension: usize) -> Result<Self> {
        let f = Function::simple(kind).ok_or_else(|| invalid(format!("{kind} needs explicit parameters")))?;
        Self::new(f, dimension)
    }

    pub fn with_translation(mut self, t: Vec<f64>) -> Result<Self> {
        if t.len() != self.dimension || t.iter().any(|v| !v.is_finite()) {
            return Err(invalid("translation must be finite and match the dimension"));
        }
        self.translation = Some(t);
        Ok(self)
    }

    pub fn with_rotation(mut self, r: Vec<Vec<f64>>) -> Result<Self> {
        check_orthogonal(&r, self.dimension)?;
        self.rotation = Some(r);
        Ok(self)
    }

    /// `f(Rᵀ(x − t))`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(invalid(format!("point has dimension {}, objective expects {}", x.len(), self.dimension)));
        }
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &[f64]) -> f64 {
        let shifted: Vec<f64> = match &self.translation {
            Some(t) => x.iter().zip(t).map(|(a, b)| a - b).collect(),
            None => x.to_vec(),
        };
        match &self.rotation {
            Some(r) => {
                let d = self.dimension;
                let y: Vec<f64> = (0..d).map(|i| (0..d).map(|j| r[j][i] * shifted[j]).sum()).collect();
                self.function.base(&y)
            }
            None => self.function.base(&shifted),
        }
    }

    /// Location of the global minimum in the search space, `R·x* + t`.
    pub fn optimum_location(&self) -> Vec<f64> {
        let base = self.function.argmin(self.dimension);
        let d = self.dimension;
        let mut x = match &self.rotation {
            Some(r) => (0..d).map(|i| (0..d).map(|j| r[i][j] * base[j]).sum()).collect(),
            None => base,
        };
        if let Some(t) = &self.translation {
            x.iter_mut().zip(t).for_each(|(a, b)| *a += b);
        }
        x
    }

    /// Known global minimum value, used for simple regret.
    pub fn optimum_value(&self) -> Option<f64> {
        Some(match &self.function {
            Function::Schwefel => functions::schwefel(&vec![functions::SCHWEFEL_ARGMIN; self.dimension]),
            Function::Trap { depth, .. } => -depth,
            _ => 0.0,
        })
    }

    /// True when the objective is the same everywhere.
    pub fn is_constant(&self) -> bool {
        matches!(self.function, Function::Plateau { radius } if radius == f64::INFINITY)
    }
}

/// `max(0, ‖x‖ − R)`; the closed ball of radius R is the constant region.
pub fn make_plateau(dimension: usize, radius: f64) -> Result<ObjectiveSpec> {
    ObjectiveSpec::new(Function::Plateau { radius }, dimension)
}

pub fn make_constant(dimension: usize) -> Result<ObjectiveSpec> {
    make_plateau(dimension, f64::INFINITY)
}

/// `min(‖x‖², ‖x − c‖² − δ)`; requires `‖c‖ ≥ K' + √(K'² + δ)` so the
/// function equals the sphere on all of `B(0, K')`.
pub fn make_trap(dimension: usize, local_radius: f64, offset: Vec<f64>, depth: f64) -> Result<ObjectiveSpec> {
    ObjectiveSpec::new(Function::Trap { radius: local_radius, offset, depth }, dimension)
}

/// Smallest offset norm accepted by [`make_trap`].
pub fn trap_min_offset(local_radius: f64, depth: f64) -> f64 {
    local_radius + (local_radius * local_radius + depth).sqrt()
}

fn check_trap(dimension: usize, radius: f64, offset: &[f64], depth: f64) -> Result<()> {
    if offset.len() != dimension || offset.iter().any(|v| !v.is_finite()) {
        return Err(invalid("trap offset must be finite and match the dimension"));
    }
    if !(depth.is_finite() && depth > 0.0) {
        return Err(invalid(format!("trap depth must be positive, got {depth}")));
    }
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(invalid(format!("trap radius must be finite and >= 0, got {radius}")));
    }
    let norm = functions::sphere(offset).sqrt();
    let need = trap_min_offset(radius, depth);
    if norm < need {
        return Err(invalid(format!(
            "trap offset norm {norm} is below {need}; the basin would not be a sphere on B(0, {radius})"
        )));
    }
    Ok(())
}

fn check_orthogonal(r: &[Vec<f64>], d: usize) -> Result<()> {
    if r.len() != d || r.iter().any(|row| row.len() != d) {
        return Err(invalid(format!("rotation must be {d}x{d}")));
    }
    for i in 0..d {
        for j in 0..d {
            let dot: f64 = (0..d).map(|k| r[k][i] * r[k][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot - target).abs() > 1e-10 {
                return Err(invalid("rotation is not orthogonal to 1e-10"));
            }
        }
    }
    Ok(())
}

/// Orthonormalized Gaussian matrix (Gram–Schmidt on the columns, which fixes
/// the triangular factor's diagonal to be positive). Row-major.
pub fn random_rotation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    loop {
        let mut cols: Vec<Vec<f64>> = (0..d).map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let mut ok = true;
        for j in 0..d {
            for k in 0..j {
                let dot: f64 = cols[j].iter().zip(&cols[k]).map(|(a, b)| a * b).sum();
                let (head, tail) = cols.split_at_mut(j);
                tail[0].iter_mut().zip(&head[k]).for_each(|(a, b)| *a -= dot * b);
            }
            let norm = functions::sphere(&cols[j]).sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols[j].iter_mut().for_each(|v| *v /= norm);
        }
        if ok {
            return (0..d).map(|i| (0..d).map(|j| cols[j][i]).collect()).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn evaluate_rejects_wrong_dimension() {
        let s = ObjectiveSpec::simple(FunctionKind::Sphere, 3).unwrap();
        assert!(s.evaluate(&[0.0, 0.0]).is_err());
        assert_eq!(s.evaluate(&[0.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn plateau_examples() {
        let p = make_plateau(2, 3.0).unwrap();
        assert_eq!(p.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(p.evaluate(&[4.0, 0.0]).unwrap(), 1.0);
        assert!(make_plateau(2, -1.0).is_err());
        let c = make_constant(3).unwrap();
        assert!(c.is_constant());
        let mut rng = stream(0, 0);
        for _ in 0..1_000_000 {
            let x: Vec<f64> = (0..3).map(|_| rng.sample::<f64, _>(StandardNormal) * 1e3).collect();
            assert_eq!(c.evaluate(&x).unwrap(), 0.0);
        }
    }

    #[test]
    fn trap_examples() {
        let t = make_trap(2, 5.0, vec![20.0, 0.0], 1.0).unwrap();
        assert_eq!(t.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(t.evaluate(&[20.0, 0.0]).unwrap(), -1.0);
        assert_eq!(t.evaluate(&[3.0, 0.0]).unwrap(), 9.0);
        assert_eq!(t.optimum_value(), Some(-1.0));
        assert!((trap_min_offset(5.0, 1.0) - (5.0 + 26f64.sqrt())).abs() < 1e-15);
        assert!(make_trap(2, 5.0, vec![10.0, 0.0], 1.0).is_err());
        assert!(make_trap(2, 5.0, vec![20.0, 0.0], 0.0).is_err());
        assert!(make_trap(3, 5.0, vec![20.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn rosenbrock_needs_two_dimensions() {
        assert!(ObjectiveSpec::simple(FunctionKind::Rosenbrock, 1).is_err());
    }

    #[test]
    fn random_rotation_is_orthogonal() {
        for d in 1..8 {
            let r = random_rotation(d, &mut stream(d as u64, 0));
            check_orthogonal(&r, d).unwrap();
        }
    }

    #[test]
    fn rejects_non_orthogonal_rotation() {
        let s = ObjectiveSpec::simple(FunctionKind::Sphere, 2).unwrap();
        assert!(s.with_rotation(vec![vec![1.0, 0.1], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn optimum_location_maps_through_transforms() {
        let mut rng = stream(2, 0);
        for kind in FunctionKind::ALL {
            let spec = match Function::simple(kind) {
                Some(f) => ObjectiveSpec::new(f, 3).unwrap(),
                None => continue,
            };
            let spec = spec
                .with_rotation(random_rotation(3, &mut rng))
                .unwrap()
                .with_translation(vec![0.3, -0.7, 1.1])
                .unwrap();
            let at = spec.evaluate(&spec.optimum_location()).unwrap();
            assert!((at - spec.optimum_value().unwrap()).abs() < 1e-8, "{kind}: {at}");
        }
    }
}
