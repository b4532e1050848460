//! Two-allele Mendelian population dynamics with density-dependent
//! recruitment and mortality.
//!
//! The crate provides the heredity operator ([`genetics`]), parametric rate
//! families and the implicit competition density `b*` ([`rates`]), the vector
//! fields of the two-phase model and of its fast/slow reductions ([`models`]),
//! a nonnegativity-preserving integrator ([`integrate`]), equilibrium and
//! population-bound solvers ([`equilibria`]), and numerical certification of
//! the qualitative behaviour of trajectories ([`analysis`]).

// `!(x > 0.0)` is used deliberately so NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod equilibria;
pub mod error;
pub mod genetics;
pub mod integrate;
pub mod models;
pub mod par;
pub mod presets;
pub mod rates;
pub mod roots;
pub mod sampling;

pub use error::{Error, Result};
pub use genetics::{Allele, GenotypeVector};
pub use integrate::{Method, SimConfig, Trajectory};
pub use models::{ReducedKind, ReducedModel, ScalingMode, TwoPhaseParams, TwoPhaseState};
pub use par::Execution;
pub use rates::{RateFunction, RateModel};
