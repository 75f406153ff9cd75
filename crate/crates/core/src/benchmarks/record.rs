//! Plain-text objective records.
//!
//! One record per line, `key=value` tokens separated by whitespace:
//!
//! ```text
//! fn=rastrigin dim=2 seed=3 shift=1 rotate=true
//! fn=trap dim=2 radius=10 offset=40 depth=1
//! fn=plateau dim=2 radius=inf
//! ```
//!
//! `shift` scales a seeded standard-normal translation (0 = none), `rotate`
//! applies a seeded random rotation. For the trap, `offset` is the distance of
//! the deep optimum along the first axis.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

use super::{make_plateau, make_trap, random_rotation, FunctionKind, ObjectiveSpec};

const TRANSLATION_STREAM: u64 = 1;
const ROTATION_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRecord {
    pub function: FunctionKind,
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub shift: f64,
    #[serde(default)]
    pub rotate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<f64>,
}

impl ObjectiveRecord {
    pub const DEFAULT_PLATEAU_RADIUS: f64 = 10.0;
    pub const DEFAULT_TRAP_RADIUS: f64 = 10.0;
    pub const DEFAULT_TRAP_OFFSET: f64 = 40.0;
    pub const DEFAULT_TRAP_DEPTH: f64 = 1.0;

    pub fn new(function: FunctionKind, dimension: usize) -> Self {
        Self { function, dimension, seed: 0, shift: 0.0, rotate: false, radius: None, offset: None, depth: None }
    }

    pub fn build(&self) -> Result<ObjectiveSpec> {
        let d = self.dimension;
        let mut spec = match self.function {
            FunctionKind::Plateau => make_plateau(d, self.radius.unwrap_or(Self::DEFAULT_PLATEAU_RADIUS))?,
            FunctionKind::Trap => {
                let mut c = vec![0.0; d];
                if d > 0 {
                    c[0] = self.offset.unwrap_or(Self::DEFAULT_TRAP_OFFSET);
                }
                make_trap(
                    d,
                    self.radius.unwrap_or(Self::DEFAULT_TRAP_RADIUS),
                    c,
                    self.depth.unwrap_or(Self::DEFAULT_TRAP_DEPTH),
                )?
            }
            kind => ObjectiveSpec::simple(kind, d)?,
        };
        if self.shift != 0.0 {
            let mut r = rng::stream(self.seed, TRANSLATION_STREAM);
            let t = (0..d).map(|_| self.shift * r.sample::<f64, _>(StandardNormal)).collect();
            spec = spec.with_translation(t)?;
        }
        if self.rotate {
            let mut r = rng::stream(self.seed, ROTATION_STREAM);
            spec = spec.with_rotation(random_rotation(d, &mut r))?;
        }
        Ok(spec)
    }
}

impl fmt::Display for ObjectiveRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fn={} dim={}", self.function, self.dimension)?;
        if self.seed != 0 {
            write!(f, " seed={}", self.seed)?;
        }
        if self.shift != 0.0 {
            write!(f, " shift={}", self.shift)?;
        }
        if self.rotate {
            write!(f, " rotate=true")?;
        }
        if let Some(r) = self.radius {
            write!(f, " radius={r}")?;
        }
        if let Some(c) = self.offset {
            write!(f, " offset={c}")?;
        }
        if let Some(d) = self.depth {
            write!(f, " depth={d}")?;
        }
        Ok(())
    }
}

impl FromStr for ObjectiveRecord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut function = None;
        let mut rec = ObjectiveRecord::new(FunctionKind::Sphere, 0);
        for token in s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let (key, value) =
                token.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got '{token}'")))?;
            let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{v}' for {key}")));
            match key {
                "fn" | "name" => {
                    if value == "constant" {
                        function = Some(FunctionKind::Plateau);
                        rec.radius = Some(f64::INFINITY);
                    } else {
                        function = Some(value.parse()?);
                    }
                }
                "dim" | "dimension" => {
                    rec.dimension = value.parse().map_err(|_| Error::Parse(format!("bad dimension '{value}'")))?
                }
                "seed" => rec.seed = value.parse().map_err(|_| Error::Parse(format!("bad seed '{value}'")))?,
                "shift" => rec.shift = num(value)?,
                "rotate" => {
                    rec.rotate = match value {
                        "true" | "1" | "yes" => true,
                        "false" | "0" | "no" => false,
                        _ => return Err(Error::Parse(format!("bad boolean '{value}' for rotate"))),
                    }
                }
                "radius" => rec.radius = Some(num(value)?),
                "offset" => rec.offset = Some(num(value)?),
                "depth" => rec.depth = Some(num(value)?),
                _ => return Err(Error::Parse(format!("unknown key '{key}'"))),
            }
        }
        rec.function = function.ok_or_else(|| Error::Parse("record needs fn=<name>".into()))?;
        if rec.dimension == 0 {
            return Err(Error::Parse("record needs dim=<positive integer>".into()));
        }
        Ok(rec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let r: ObjectiveRecord = "fn=trap dim=2 radius=10 offset=40 depth=1".parse().unwrap();
        assert_eq!(r.function, FunctionKind::Trap);
        assert_eq!(r.to_string(), "fn=trap dim=2 radius=10 offset=40 depth=1");
        let spec = r.build().unwrap();
        assert_eq!(spec.evaluate(&[40.0, 0.0]).unwrap(), -1.0);

        let c: ObjectiveRecord = "fn=constant, dim=3".parse().unwrap();
        assert!(c.build().unwrap().is_constant());
        assert_eq!(c.to_string(), "fn=plateau dim=3 radius=inf");
        assert_eq!(c.to_string().parse::<ObjectiveRecord>().unwrap(), c);
    }

    #[test]
    fn parse_errors() {
        assert!("dim=2".parse::<ObjectiveRecord>().is_err());
        assert!("fn=sphere".parse::<ObjectiveRecord>().is_err());
        assert!("fn=sphere dim=2 color=red".parse::<ObjectiveRecord>().is_err());
        assert!("fn=nope dim=2".parse::<ObjectiveRecord>().is_err());
        assert!("fn=sphere dim=2 rotate=maybe".parse::<ObjectiveRecord>().is_err());
    }

    #[test]
    fn seeded_transforms_are_reproducible() {
        let r: ObjectiveRecord = "fn=rastrigin dim=3 seed=5 shift=2 rotate=true".parse().unwrap();
        let a = r.build().unwrap();
        let b = r.build().unwrap();
        assert_eq!(a, b);
        assert!(a.translation.is_some() && a.rotation.is_some());
        let x = a.optimum_location();
        assert!(a.evaluate(&x).unwrap().abs() < 1e-9);
    }
}
