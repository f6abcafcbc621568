//! Two engines for studying stochastic models of the form "output = solution,
//! input = noise" together with the filtration structure tying them together.
//!
//! The [`exact`] engine works on finite probability spaces with rational
//! arithmetic, so every conditional expectation, compatibility check, and
//! coupling construction is decided exactly.  The [`paths`] engine simulates
//! recursive discretizations (Euler schemes, time changes, interacting
//! particles, backward equations on trees) with a counter-based random stream
//! that makes every path reproducible and replayable.  The [`diagnostics`]
//! engine sits on top of simulated ensembles and estimates conditional
//! expectations by ridge regression on feature windows, turning compatibility
//! of a model with its noise into a testable hypothesis.
//!
//! The crate is `no_std` (with `alloc`) so the engines can be embedded; all
//! file formats and command-line plumbing live in the companion CLI crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod diagnostics;
pub mod exact;
pub mod paths;
pub mod stream;
