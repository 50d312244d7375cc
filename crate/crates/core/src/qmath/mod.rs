//! Density operators over labelled tensor factors and the quantum
//! information quantities built on them.
//!
//! All logarithms are base 2. Eigenvalues at or below
//! [`linalg::SUPPORT_CUTOFF`] count as zero whenever a support matters.

pub mod compression;
pub mod facts;
pub mod linalg;
pub mod maxinfo;
pub mod measures;
pub mod random;
pub mod space;
pub mod state;
pub mod uhlmann;

use thiserror::Error;

use crate::distrib::DistribError;

pub use linalg::{CMatrix, CVector};
pub use maxinfo::{max_information, MaxInfoWitness};
pub use measures::{
    conditional_mutual_information, entropy, fidelity, mutual_information, relative_entropy,
    relative_min_entropy, smooth_min_entropy_witness, trace_distance, SmoothWitness,
};
pub use space::{Factor, HilbertSpace, MAX_DIM};
pub use state::{purify, CQState, DensityOperator, Operator, Povm, PureState};
pub use uhlmann::{uhlmann_unitary, UhlmannResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmathError {
    #[error("operators live on different spaces: {0}")]
    SpaceMismatch(String),
    #[error("unknown factor `{0}`")]
    UnknownFactor(String),
    #[error("duplicate factor `{0}`")]
    DuplicateFactor(String),
    #[error("total dimension {0} exceeds the guard")]
    DimensionGuard(usize),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("support of the first argument is not contained in the second")]
    SupportViolation,
    #[error("smoothing search did not find a witness")]
    WitnessNotFound,
    #[error("fixed factors leave no complement")]
    TrivialComplement,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("Kraus operators are not trace preserving (gap {0})")]
    KrausIncomplete(f64),
    #[error("POVM elements do not sum to the identity (gap {0})")]
    PovmIncomplete(f64),
    #[error("input is not of the form Σ√P(x)|xx⟩|σ_x⟩: {0}")]
    FormViolation(String),
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Distrib(#[from] DistribError),
}

pub type Result<T> = std::result::Result<T, QmathError>;
