//! Hausdorff-distortion codecs for Cantor sets on the unit interval.
//!
//! Everything metric is exact: points are [`Q`] (arbitrary-precision
//! rationals) and every distance assertion is a strict rational comparison.
//! Floating point only shows up in fitting, dimension slopes and the
//! heuristics that *pick* witnesses which are then confirmed exactly.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod ck;
pub mod codec;
pub mod dimension;
pub mod ifs;
pub mod numeric;
pub mod packing;
pub mod random_cantor;
pub mod rng;
pub mod stats;

use alloc::string::String;

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational as Q;

/// Default cap on materialized endpoints (overridable by callers).
pub const DEFAULT_BUDGET_POINTS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("empty set has no Hausdorff distance")]
    EmptySet,
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("value outside declared range")]
    OutOfRange,
    #[error("budget exceeded: {needed} points needed, limit is {limit}")]
    Budget { needed: u128, limit: usize },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("IFS too fragile at this ε")]
    Fragile,
    #[error("itinerary escaped cover")]
    EscapedCover,
    #[error("malformed description: {0}")]
    Format(String),
    #[error("contract violated: {0}")]
    Contract(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
