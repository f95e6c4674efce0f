//! Exact simplicial Deligne cochains over finite cell-complex models of the
//! levels G^q, with the bi-complex differential, cocycle and coboundary
//! checks, the constructors from global forms, the integer lift κ of the
//! multiplicative class, and the pair (H, ρ).

use num_rational::Ratio;
use thiserror::Error;

mod cochain;
mod constructors;
mod model;
mod projective;

pub use cochain::*;
pub use constructors::*;
pub use model::*;
pub use projective::*;

/// Exact rational scalar; arithmetic overflow panics.
pub type Q = Ratio<i64>;

#[derive(Debug, Error)]
pub enum DeligneError {
    #[error("model: {0}")]
    Model(String),
    #[error("degree: {0}")]
    Degree(String),
    #[error("not Δ-closed: {0}")]
    NotDeltaClosed(String),
    #[error("preconditions fail: {}", .0.join("; "))]
    Precondition(Vec<String>),
    #[error("not a cocycle: {0}")]
    NotCocycle(String),
    #[error(transparent)]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[cfg(test)]
mod tests;
