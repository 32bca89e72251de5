use rayon::prelude::*;

use crate::distkit::is_log_concave;
use crate::graph::CapGraph;

use super::ops::{op_d, op_r};
use super::{BpError, MessageState};

/// Largest λ accepted by the finite-temperature engine.
pub const MAX_LAMBDA: f64 = 1e6;

// below this many directed edges a sweep runs on the calling thread
const PAR_THRESHOLD: usize = 512;

#[derive(Debug, Clone)]
pub struct BpOptions {
    /// Stop once the largest per-message L1 change is at most `tol`.
    pub tol: f64,
    /// Defaults to [`default_max_sweeps`].
    pub max_sweeps: Option<usize>,
    /// Keep every iterate, starting with the initial state.
    pub record: bool,
    /// Require log-concave messages with 0 in their support after each sweep.
    pub check_log_concave: bool,
}

impl Default for BpOptions {
    fn default() -> Self {
        BpOptions {
            tol: 1e-10,
            max_sweeps: None,
            record: false,
            check_log_concave: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BpRun {
    pub messages: MessageState,
    pub sweeps: usize,
    pub residual: f64,
    /// `history[t]` is the state after `t` sweeps when recording.
    pub history: Vec<MessageState>,
}

pub fn default_max_sweeps(g: &CapGraph) -> usize {
    10 * (g.diameter() + g.edge_caps().iter().sum::<usize>()) + 1000
}

/// One synchronous application of `R` on every directed edge.
pub fn sweep(g: &CapGraph, m: &MessageState, lambda: f64) -> MessageState {
    let n = g.num_directed();
    let msgs = if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(|d| op_r(g, d, m, lambda)).collect()
    } else {
        (0..n).map(|d| op_r(g, d, m, lambda)).collect()
    };
    MessageState::new(msgs)
}

/// Mean occupancy `D_v` at every vertex.
pub fn occupancies(g: &CapGraph, m: &MessageState) -> Vec<f64> {
    (0..g.num_vertices()).map(|v| op_d(g, v, m)).collect()
}

/// Synchronous iteration from an arbitrary start.
pub fn run_bp(g: &CapGraph, lambda: f64, start: MessageState, opts: &BpOptions) -> Result<BpRun, BpError> {
    if !(lambda > 0.0 && lambda <= MAX_LAMBDA) {
        return Err(BpError::LambdaOutOfRange(lambda));
    }
    start.check(g)?;
    let max_sweeps = opts.max_sweeps.unwrap_or_else(|| default_max_sweeps(g));
    let mut history = Vec::new();
    let mut cur = start;
    let mut residual = f64::INFINITY;
    for t in 1..=max_sweeps {
        let next = sweep(g, &cur, lambda);
        if opts.check_log_concave {
            if let Some(edge) = next
                .messages()
                .iter()
                .position(|m| m.support_min() != 0 || !is_log_concave(m))
            {
                return Err(BpError::NotLogConcave { sweep: t, edge });
            }
        }
        residual = next.distance(&cur);
        if opts.record {
            history.push(std::mem::replace(&mut cur, next));
        } else {
            cur = next;
        }
        if residual <= opts.tol {
            if opts.record {
                history.push(cur.clone());
            }
            return Ok(BpRun {
                messages: cur,
                sweeps: t,
                residual,
                history,
            });
        }
    }
    Err(BpError::NoConvergence {
        sweeps: max_sweeps,
        residual,
    })
}

/// Fixed point of `R^(λ)` reached from the all-`δ_0` start.
pub fn bp_finite_lambda(
    g: &CapGraph,
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<(MessageState, usize), BpError> {
    let opts = BpOptions {
        tol,
        max_sweeps: Some(max_sweeps),
        ..BpOptions::default()
    };
    let run = run_bp(g, lambda, MessageState::canonical(g), &opts)?;
    Ok((run.messages, run.sweeps))
}
