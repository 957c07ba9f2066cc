//! Rigorous finite-n bounds on the block entropy of patterns of i.i.d. sequences.
//!
//! The pattern of a sequence replaces each symbol by the order of its first
//! occurrence, so `lossless` and `76887288` share the pattern `12331433`.
//! This crate computes two-sided numeric bounds on the pattern block entropy
//! `H(Psi^n)` for several distribution families (uniform, distributions over
//! the integers with slow and Zipf decay, geometric, linearly increasing, and
//! explicit vectors), exact pattern entropies for small instances, and the
//! conditional next-index entropy.
//!
//! Every approximate quantity is carried as an [`numerics::EntropyInterval`]
//! so that assembled bounds stay valid: a lower bound always consumes the
//! pessimistic endpoint of each sub-quantity, an upper bound the optimistic
//! one.

pub mod cli;
pub mod closed_form;
pub mod distributions;
pub mod exact;
pub mod general_bounds;
pub mod grids;
pub mod numerics;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A tail sum or integral does not converge.
    #[error("divergent tail: {0}")]
    Divergent(String),
    /// A distribution specification could not be parsed or validated.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    /// Grid parameters violate the monotonicity / range constraints.
    #[error("invalid grid parameters: {0}")]
    InvalidGrid(String),
    /// No parameter point in the search produced a valid bound.
    #[error("infeasible bound: {0}")]
    Infeasible(String),
    /// An exact computation would exceed the configured instance caps.
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    /// The requested mode/operation is not defined for this family.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Sweep or search specification problems.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
