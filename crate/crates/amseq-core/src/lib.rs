//! Sequence-level calculus of arithmetic means: Cesàro means, means at
//! infinity, growth classification via Matuszewska indices, principal-ideal
//! membership, and the constructive block sequences that witness the sharp
//! cases. Exact rational arithmetic on rational inputs, certified interval
//! brackets on transcendental ones.

pub mod classify;
pub mod constructions;
pub mod expr;
pub mod ideals;
pub mod par;
pub mod powlog;
pub mod verify;
pub mod seq;
pub mod value;
pub mod xf;

pub use classify::{ClassReport, Cross412, IndexEstimate, Verdict, Window};
pub use expr::SeqExpr;
pub use ideals::{AmInftyImage, PrincipalIdeal, TraceDim, TraceVerdict};
pub use seq::Sequence;
pub use value::{Q, TailSum, Tri, V};

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index 0 is outside the domain; sequences start at n = 1")]
    IndexZero,
    #[error("ampliation/dilution factor must be >= 1")]
    ZeroFactor,
    #[error("negative entry at position {0}")]
    NegativeEntry(usize),
    #[error("sequence is not summable; {0}")]
    NotSummable(&'static str),
    #[error("summability is unknown; decide it first (symbolic_summability)")]
    UnknownSummability,
    #[error("tail sums unavailable: {0}")]
    TailUnavailable(String),
    #[error("window rejected: {0}")]
    BadWindow(String),
    #[error("zero entry at index {0} inside the probed window")]
    ZeroInWindow(u64),
    #[error("invalid sequence expression: {0}")]
    BadExpr(String),
    #[error("construction precondition violated: {0}")]
    Precondition(String),
    #[error("construction ran out of budget: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
