//! Perturbative graph calculus for a Gaussian random cubic resonant system.
//!
//! The expansion of `<alpha_r(t) conj(alpha_r(t))>` runs over heap-ordered
//! 2-rooted trees whose leaves are paired by the average over initial data
//! and whose vertices are paired by the average over couplings. This crate
//! enumerates those graphs, evaluates their amplitudes, classifies melonic
//! graphs, assembles Sobolev-norm series coefficients and checks them
//! against Monte Carlo integration of the truncated flow.

pub mod amplitude;
pub mod checks;
pub mod ensemble;
pub mod error;
pub mod exact;
pub mod graph;
pub mod melonic;
pub mod scalar;
pub mod series;
pub mod stranded;
pub mod trees;

pub use amplitude::{AmplitudeValue, EvalOptions, FaceSumOptions, Method};
pub use error::{Error, Result};
pub use graph::{ExpansionGraph, GraphFamily, Propagator};
pub use scalar::Real;
pub use series::{Scope, SeriesCoefficient};
pub use trees::{HeapTree, TwoRootedTree};

/// Double-precision instances of the generic numeric types.
pub type AmplitudeF64 = amplitude::AmplitudeValue<f64>;
pub type BoundCheckF64 = amplitude::BoundCheck<f64>;
pub type ChainTableF64 = amplitude::ChainTable<f64>;
pub type CouplingsF64 = ensemble::CouplingSample<f64>;
pub type ModeStateF64 = ensemble::ModeState<f64>;
pub type TrajectoryF64 = ensemble::Trajectory<f64>;

/// Single-precision instances, for throughput experiments.
pub type AmplitudeF32 = amplitude::AmplitudeValue<f32>;
pub type CouplingsF32 = ensemble::CouplingSample<f32>;
