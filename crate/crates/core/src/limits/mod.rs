//! Galton-Watson vertex laws, the recursive distributional equation on
//! edge messages, and the limit of `M(G_n) / |A_n|`.

mod law;
mod rde;

use thiserror::Error;

pub use law::{check_consistency, size_biased, Atom, PoissonSpec, SizeBiasedLaw, VertexLaw, CONSISTENCY_TOL};
pub use rde::{
    limit_functional, limit_m, limit_report, rde_step, EdgeLawPair, FixedPoint, InteriorPoint, LimitReport, RdeSystem,
    RDE_MAX_SWEEPS, RDE_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("atom {index}: {reason}")]
    InvalidAtom { index: usize, reason: String },
    #[error("law has no positive mass")]
    Empty,
    #[error("invalid Poisson law (rate {rate}, truncation {trunc})")]
    InvalidPoisson { rate: f64, trunc: f64 },
    #[error("no atom carries an edge of capacity {c0}")]
    ZeroMass { c0: usize },
    #[error("edge-capacity laws of the two sides are inconsistent")]
    Inconsistent,
    #[error("edge law for capacity {c} must have length c + 1")]
    BadEdgeLaw { c: usize },
    #[error("fixed-point iteration did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}
