use serde::{Deserialize, Serialize};

use super::AppError;
use crate::gen::Hypergraph;
use crate::graph::max_allocation_flow;
use crate::limits::{limit_report, LimitReport, VertexLaw, RDE_MAX_SWEEPS, RDE_TOL};

/// Slack in the threshold predicate `M < l − THRESHOLD_TOL_M`.
pub const THRESHOLD_TOL_M: f64 = 1e-9;

const POISSON_TRUNC: f64 = 1e-12;
const BRACKET_LOW: f64 = 1e-3;

/// Orientability parameters: hyperedge size `h`, vertex in-degree bound
/// `k`, marks per hyperedge `l`, marks per incidence `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuckooParams {
    pub h: usize,
    pub k: usize,
    pub l: usize,
    pub r: usize,
}

impl CuckooParams {
    pub fn new(h: usize, k: usize, l: usize, r: usize) -> Result<Self, AppError> {
        let p = CuckooParams { h, k, l, r };
        p.validate()?;
        Ok(p)
    }

    /// Reports the first violated constraint.
    pub fn validate(&self) -> Result<(), AppError> {
        let CuckooParams { h, k, l, r } = *self;
        let fail = |s: String| Err(AppError::InvalidParams(s));
        if h == 0 || k == 0 || l == 0 || r == 0 {
            return fail(format!("h, k, l, r must be positive (got {h}, {k}, {l}, {r})"));
        }
        if k < r {
            return fail(format!("k ≥ r fails: k = {k}, r = {r}"));
        }
        if l < r {
            return fail(format!("l ≥ r fails: l = {l}, r = {r}"));
        }
        if (h - 1) * r < l {
            return fail(format!("(h−1)r ≥ l fails: (h−1)r = {}, l = {l}", (h - 1) * r));
        }
        Ok(())
    }

    /// `k + (h−2)r − l > 0`, under which almost-sure orientability below
    /// the threshold is guaranteed. The classical case (2,1,1,1) sits on
    /// the boundary and is accepted anyway.
    pub fn strict(&self) -> bool {
        self.k + self.h.saturating_sub(2) * self.r > self.l
    }
}

/// Hyperedge law `δ_(h, l, {r,…,r})` and vertex law `(Poi(τh), k, {r,…})`.
pub fn cuckoo_laws(p: &CuckooParams, tau: f64) -> Result<(VertexLaw, VertexLaw), AppError> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(AppError::InvalidParams(format!("τ must be positive, got {tau}")));
    }
    let a = VertexLaw::point(p.l, vec![p.r; p.h]);
    let b = VertexLaw::poisson(tau * p.h as f64, p.k, p.r, POISSON_TRUNC)?;
    Ok((a, b))
}

/// Limit of the maximum allocation per hyperedge at load `τ`. Does not fail
/// on the sweep cap, which can be hit right at the threshold.
pub fn cuckoo_limit(p: &CuckooParams, tau: f64) -> Result<LimitReport, AppError> {
    let (a, b) = cuckoo_laws(p, tau)?;
    Ok(limit_report(&a, &b, RDE_TOL, RDE_MAX_SWEEPS)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub tau: f64,
    /// Final bracket; the predicate is false at `lo` and true at `hi`.
    pub lo: f64,
    pub hi: f64,
    pub probes: usize,
    /// Whether every probe's fixed-point iteration converged.
    pub converged: bool,
}

/// `τ* = inf{τ : M(τ) < l}` by bisection; `M` is non-increasing in `τ`.
/// The result is within `tol` of the final bracket's end points.
pub fn cuckoo_threshold(p: &CuckooParams, tol: f64) -> Result<ThresholdReport, AppError> {
    p.validate()?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(AppError::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    let target = p.l as f64 - THRESHOLD_TOL_M;
    let mut probes = 0;
    let mut converged = true;
    let mut above = |tau: f64| -> Result<bool, AppError> {
        let rep = cuckoo_limit(p, tau)?;
        probes += 1;
        converged &= rep.converged;
        Ok(rep.value < target)
    };
    // counting bound: l·m ≤ k·n forces τ* ≤ k / l
    let (mut lo, mut hi) = (BRACKET_LOW, 2.0 * p.k as f64 / p.l as f64);
    if above(lo)? || !above(hi)? {
        return Err(AppError::BracketFailure { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdReport { tau: 0.5 * (lo + hi), lo, hi, probes, converged })
}

/// Whether `hg` has a `(k, l, r)`-orientation, via the incidence graph
/// (hyperedges with capacity `l`, vertices with capacity `k`, links `r`).
pub fn orient_decide(hg: &Hypergraph, p: &CuckooParams) -> bool {
    let g = hg
        .incidence_graph(p.k, p.l, p.r)
        .expect("hypergraph vertices are in range");
    max_allocation_flow(&g).0 == p.l * hg.num_edges()
}
