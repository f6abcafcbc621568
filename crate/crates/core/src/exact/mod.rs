//! Exact engine on finite probability spaces.
//!
//! Sample spaces are explicit atom lists with rational (or double) weights,
//! σ-algebras are partitions of the atoms, and conditional expectations are
//! weighted block averages.  On top of that sit the compatibility checks
//! (does knowing X at stage α help predict Y beyond Y's own stage-α
//! information?), disintegration of joint laws into kernels, noise-outsourcing
//! samplers, couplings of two solutions driven by one input, and the
//! uniqueness equivalence they decide.

pub mod checks;
pub mod coupling;
pub mod measure;
pub mod random;
pub mod scalar;
pub mod space;
pub mod structure;
pub mod zeta;

pub use checks::{
    check_adapted, check_compatibility, check_dual, check_joint_compatibility,
    check_martingale_condition, AdaptedReport, CheckReport, LevelCheck,
};
pub use coupling::{canonical_coupling, theorem_gyw_check, Coupling};
pub use measure::{
    disintegrate, is_strong, mix_solutions, sampler_from_kernel, JointMeasure, Kernel,
    SamplerTable, StrongMap,
};
pub use scalar::Scalar;
pub use space::{cond_exp, join, sigma_of, FiniteSpace, Partition, Rv};
pub use structure::{AlphaLevel, AlphaOrder, CompatStructure, GridFn, ValueGrid};
pub use zeta::{zeta_counterexample, ZetaReport};

use core::fmt;

/// Structural and precondition failures of the exact engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactError {
    /// No atoms left after pruning zero-mass entries.
    EmptySpace,
    /// A probability weight or mass was negative.
    NegativeWeight,
    /// Weights did not sum to one within the mode's mass tolerance.
    TotalMassNotOne,
    /// Two random variables or partitions live on different spaces.
    MismatchedSpaces,
    /// An input had the wrong length for its space or grid.
    LengthMismatch { expected: usize, got: usize },
    /// An operation received an empty list where at least one item is needed.
    EmptyInput,
    /// A partition block was empty or carried no mass.
    EmptyBlock,
    /// Partition blocks failed to disjointly cover the index range.
    InvalidPartition,
    /// A random variable took a value not listed on its declared grid.
    ValueOffGrid,
    /// Joint measures or kernels were built over different value grids.
    GridMismatch,
    /// Declared coarser/finer levels are not nested (not a filtration).
    NotAFiltration,
    /// A martingale candidate was not measurable at its own level.
    NotMeasurable { alpha: usize },
    /// Martingale checking needs a declared order on the levels.
    NoOrderDeclared,
    /// Two joint measures to be coupled disagree on the input marginal.
    MarginalMismatch,
    /// A strong map is undefined on a positive-mass input value.
    DomainMismatch,
    /// A measure in a family stand-in failed its compatibility constraint.
    IncompatibleFamilyMember { index: usize },
    /// The two sides of the uniqueness equivalence disagreed.
    UniquenessEquivalenceViolated { pointwise: bool, unique_strong: bool },
}

impl fmt::Display for ExactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactError::EmptySpace => write!(f, "no atoms with positive probability"),
            ExactError::NegativeWeight => write!(f, "negative probability weight"),
            ExactError::TotalMassNotOne => write!(f, "weights do not sum to one"),
            ExactError::MismatchedSpaces => {
                write!(f, "operands are defined on different sample spaces")
            }
            ExactError::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} entries, got {got}")
            }
            ExactError::EmptyInput => write!(f, "empty input list"),
            ExactError::EmptyBlock => write!(f, "partition block without mass"),
            ExactError::InvalidPartition => {
                write!(f, "blocks do not disjointly cover the index range")
            }
            ExactError::ValueOffGrid => write!(f, "value does not appear on the declared grid"),
            ExactError::GridMismatch => write!(f, "operands use different value grids"),
            ExactError::NotAFiltration => {
                write!(f, "declared level order is not respected by the partitions")
            }
            ExactError::NotMeasurable { alpha } => {
                write!(f, "candidate at level {alpha} is not measurable there")
            }
            ExactError::NoOrderDeclared => {
                write!(f, "martingale check requires an ordered structure")
            }
            ExactError::MarginalMismatch => {
                write!(f, "joint measures disagree on the input marginal")
            }
            ExactError::DomainMismatch => {
                write!(f, "map undefined on an input value with positive mass")
            }
            ExactError::IncompatibleFamilyMember { index } => {
                write!(f, "family member {index} violates the compatibility constraint")
            }
            ExactError::UniquenessEquivalenceViolated {
                pointwise,
                unique_strong,
            } => write!(
                f,
                "uniqueness equivalence violated: pointwise={pointwise}, unique-strong={unique_strong}"
            ),
        }
    }
}

impl core::error::Error for ExactError {}
