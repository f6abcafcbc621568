//! Monte Carlo path engine.
//!
//! Uniform time grids, reproducible driver ensembles (Brownian, jump
//! semimartingales), recursive discretization schemes (direct and
//! driver-integral Euler, state-dependent time changes, interacting
//! particles), a backward iteration on finite tree drivers, and the clipped
//! path metric.  All randomness flows through counter-based streams, so any
//! path can be re-simulated in isolation.

pub mod bsde;
pub mod brownian;
pub mod ensemble;
pub mod euler;
pub mod grid;
pub mod levy;
pub mod mckean;
pub mod metric;
pub mod timechange;

pub use bsde::{
    bsde_solve, conditional_variation, conditional_variation_on, integrated_bound, BsdeSolution,
    Generator, TreeDriver,
};
pub use brownian::{brownian, brownian_at, BridgeCache};
pub use ensemble::{mean_sup_distance, PathEnsemble};
pub use euler::{
    euler_ito, euler_semimartingale, time_augmented, Integrand, ItoIntegrand, ItoModel, PathView,
};
pub use grid::TimeGrid;
pub use levy::{levy_driver, JumpLaw, LevyConfig, SemimartingaleDecomp};
pub use mckean::{mckean_vlasov, Empirical, InitialLaw, MvModel};
pub use metric::dm_metric;
pub use timechange::{time_change_euler, TimeChangeModel, TimeChangeOutput};

use core::fmt;

/// Precondition and runtime failures of the path engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathError {
    /// Horizon must be positive and finite.
    InvalidHorizon,
    /// A grid needs at least one step.
    InvalidSteps,
    /// Operands discretized on different grids.
    GridMismatch,
    /// Dimension of a state, driver, or coefficient did not match.
    DimensionMismatch { expected: usize, got: usize },
    /// A query time was negative.
    NegativeTime,
    /// A coefficient or state blew up; carries the first offending path.
    NonFiniteValue { path: usize, step: usize },
    /// Jump intensity must be nonnegative.
    NegativeRate,
    /// A jump law needs at least one outcome with positive probability.
    InvalidJumpLaw,
    /// A clock rate came back negative; carries the offending path.
    NegativeClockRate { path: usize, step: usize },
    /// Interacting particle systems need at least two particles.
    TooFewParticles,
    /// Tree depth capped so the leaf count stays enumerable.
    TreeTooDeep,
    /// Branch probabilities must be nonnegative and sum to one.
    InvalidProbability,
    /// Window length must be positive and below the stage resolution.
    InvalidWindow,
}

impl fmt::Display for PathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathError::InvalidHorizon => write!(f, "horizon must be positive and finite"),
            PathError::InvalidSteps => write!(f, "grid needs at least one step"),
            PathError::GridMismatch => write!(f, "operands use different time grids"),
            PathError::DimensionMismatch { expected, got } => {
                write!(f, "expected dimension {expected}, got {got}")
            }
            PathError::NegativeTime => write!(f, "query time is negative"),
            PathError::NonFiniteValue { path, step } => {
                write!(f, "non-finite value on path {path} at step {step}")
            }
            PathError::NegativeRate => write!(f, "jump intensity must be nonnegative"),
            PathError::InvalidJumpLaw => {
                write!(f, "jump law needs positive total probability")
            }
            PathError::NegativeClockRate { path, step } => {
                write!(f, "negative clock rate on path {path} at step {step}")
            }
            PathError::TooFewParticles => write!(f, "need at least two particles"),
            PathError::TreeTooDeep => write!(f, "tree depth exceeds the leaf budget"),
            PathError::InvalidProbability => {
                write!(f, "branch probabilities must be nonnegative and sum to one")
            }
            PathError::InvalidWindow => {
                write!(f, "window length must be positive and below the resolution")
            }
        }
    }
}

impl core::error::Error for PathError {}
