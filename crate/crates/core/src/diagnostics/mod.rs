//! Statistical verification on simulated ensembles.
//!
//! The exact engine settles questions by enumeration; this module answers
//! the same questions about path-valued models by regression. The central
//! tool compares two least-squares prediction errors for a test functional
//! of the output: one using the output's own past, one additionally using
//! the candidate solution's past. A positive gap beyond estimation noise
//! witnesses information leaking from the solution into the output's
//! future. Martingale checks, two-copy strong-solution probes, and
//! refinement ladders round out the toolkit.

pub mod copies;
pub mod features;
pub mod gap;
pub mod martingale;
pub mod ridge;

pub use copies::{
    strong_copy_test, uniqueness_probe, AuxStream, CopyReport, DrivenSolver, ProbeTable,
    StreamSpec, TanakaSolver,
};
pub use features::{features_rc, features_temporal, FeatureMatrix, RcSide};
pub use gap::{
    bonferroni_multiplier, compat_test, default_h_set, l2_gap, AlphaFeatures, AlphaSpec,
    GapEntry, GapReport, HFunctional, TestConfig,
};
pub use martingale::{martingale_test, MartingaleReport};

use core::fmt;

use crate::paths::PathError;

/// Failures of the diagnostic layer.
#[derive(Clone, Debug, PartialEq)]
pub enum DiagError {
    /// Ensembles being compared were generated with different seeds, grids,
    /// or path counts.
    ProvenanceMismatch,
    /// Not enough rows for a meaningful fit.
    TooFewRows { needed: usize, got: usize },
    /// Row counts of paired inputs differ.
    LengthMismatch { expected: usize, got: usize },
    /// A query time lies outside the grid horizon.
    BeyondHorizon,
    /// The window length must stay below the declared resolution bound.
    WindowTooWide,
    /// A configuration field is out of range.
    InvalidConfig(&'static str),
    /// Refinement ladders need at least two rungs.
    LadderTooShort,
    /// An underlying path computation failed.
    Path(PathError),
}

impl From<PathError> for DiagError {
    fn from(e: PathError) -> Self {
        DiagError::Path(e)
    }
}

impl fmt::Display for DiagError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagError::ProvenanceMismatch => {
                write!(f, "ensembles have mismatched seed, grid, or path count")
            }
            DiagError::TooFewRows { needed, got } => {
                write!(f, "need at least {needed} rows, got {got}")
            }
            DiagError::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} rows, got {got}")
            }
            DiagError::BeyondHorizon => write!(f, "query time lies outside the horizon"),
            DiagError::WindowTooWide => {
                write!(f, "window length must stay below the resolution bound")
            }
            DiagError::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            DiagError::LadderTooShort => write!(f, "ladder needs at least two rungs"),
            DiagError::Path(e) => write!(f, "path computation failed: {e}"),
        }
    }
}

impl core::error::Error for DiagError {}
