//! Test-based population-size adaptation (TBPSA) evolution strategies.
//!
//! The crate is organised bottom-up:
//!
//! - [`es`]: the (μ/μ,λ) primitives (lognormal self-adaptive mutation,
//!   truncation selection with random tie-breaking, recombination).
//! - [`population`]: the 5λ fitness archive and the stagnation test that
//!   doubles or shrinks λ and μ.
//! - [`optimizers`]: ask/tell state machines for TBPSA, NaiveTBPSA and the
//!   (1+1)-ES and random-search baselines.
//! - [`benchmarks`]: noise-free objective suite, plateau and trap
//!   constructions, hypervolume.
//! - [`theory`]: Monte Carlo verifiers for the step-size martingale,
//!   plateau escape and local-minimum retention.
//! - [`harness`]: experiment runner, pairwise score matrix, CSV/JSON export.

pub mod benchmarks;
pub mod error;
pub mod es;
pub mod harness;
pub mod optimizers;
pub mod population;
pub mod rng;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
