//! Hypergraph orientability thresholds and CDN absorbed load.

mod cdn;
mod cuckoo;
mod sim;

use thiserror::Error;

use crate::gen::GenError;
use crate::limits::LawError;

pub use cdn::{cdn_capacity, cdn_laws, CdnReport, CdnScenario, ContentClass, ServerClass};
pub use cuckoo::{
    cuckoo_laws, cuckoo_limit, cuckoo_threshold, orient_decide, CuckooParams, ThresholdReport, THRESHOLD_TOL_M,
};
pub use sim::{cuckoo_lln_trial, law_lln_trial, orientable_fraction, orientable_trial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AppError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("threshold predicate does not change sign on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("inconsistent laws: {0}")]
    InconsistentLaws(String),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Gen(#[from] GenError),
}
