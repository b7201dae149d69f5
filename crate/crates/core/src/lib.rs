//! Bipartite no-signalling boxes and the unified operator formalism: every
//! box arises from Born-rule measurements on a unit-trace Hermitian
//! *pseudo-state*, and non-locality becomes an operator resource measured by
//! trace-norm negativity. The crate computes the robustness-based
//! quantifiers (local, generalized, best-local-approximation) by exact LP
//! with verifiable dual certificates, builds explicit realizations (the
//! noisy PR family, flag-qubit combinations, classical-register separable
//! states), applies classical wirings, and assembles device-independent
//! certificates from correlation data alone.

pub mod cli;
pub mod constructions;
pub mod correlations;
pub mod di_bounds;
pub mod error;
pub mod lp;
pub mod operators;
pub mod robustness;

pub use error::{Error, Result};
