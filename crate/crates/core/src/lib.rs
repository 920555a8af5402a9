//! Certification toolkit for two-qubit correlation experiments: quantum
//! values and classical bounds of linear correlation functionals, steering
//! functionals with local-model construction, and joint-measurability
//! thresholds for unsharp qubit measurements.
//!
//! Module map:
//! - [`algebra`] — complex 2×2/4×4 matrices, Bloch vectors, Hermitian
//!   eigensolvers, tensor products and partial traces.
//! - [`scenario`] — observables, functional relations, shared states, and
//!   the built-in scenarios.
//! - [`format`] — the JSON scenario-file grammar.
//! - [`bell`] — functional evaluation, operator spectra, see-saw ascent.
//! - [`bounds`] — local and relation-constrained classical bounds with
//!   certificates.
//! - [`steering`] — assemblages, local-hidden-state models, steering
//!   functionals and their hidden-state ceilings.
//! - [`jm`] — critical-sharpness thresholds and parent-measurement
//!   feasibility.

pub mod algebra;
pub mod bell;
pub mod bounds;
pub mod error;
mod feasibility;
pub mod format;
pub mod jm;
pub mod scenario;
pub mod steering;

pub use error::{Error, Result};
