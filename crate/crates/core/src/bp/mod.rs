//! Multivariate belief propagation for maximum allocations.
//!
//! Messages live on directed edges and are distributions on `{0, …, c_e}`.
//! The finite-λ engine iterates `R` synchronously; the zero-temperature
//! engine finds the support infima of the limiting messages, starting from
//! the least fixed point of the integer map `S ∘ S`.

mod engine;
mod ops;
mod tree;
mod zero;

use std::ops::Index;

use rand::Rng;
use thiserror::Error;

use crate::distkit::{lr_le, FiniteDist};
use crate::graph::CapGraph;

pub use engine::{
    bp_finite_lambda, default_max_sweeps, occupancies, run_bp, sweep, BpOptions, BpRun, MAX_LAMBDA,
};
pub use ops::{d_local, op_d, op_q, op_r, op_s, op_s_edge, q_local, r_local};
pub use tree::tree_leaf_removal;
pub use zero::{
    bp_zero_temperature, f_total, f_v, least_two_step_fixed_point, s_map, two_step_fixed_points, ZeroTemperature,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BpError {
    #[error("no convergence after {sweeps} sweeps (last change {residual:.3e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("λ = {0} is outside (0, 1e6]; use the zero-temperature solver for larger values")]
    LambdaOutOfRange(f64),
    #[error("message on directed edge {edge} lost log-concavity at sweep {sweep}")]
    NotLogConcave { sweep: usize, edge: usize },
    #[error("graph is not a forest")]
    NotATree,
    #[error("message state has {got} entries, graph has {expected} directed edges")]
    StateMismatch { expected: usize, got: usize },
    #[error("fixed-point enumeration box of size {size:.3e} is too large")]
    TooLarge { size: f64 },
}

/// Inverse temperature; `Infinite` selects the zero-temperature limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Finite(f64),
    Infinite,
}

/// One message per directed edge.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState {
    msgs: Vec<FiniteDist>,
}

impl Index<usize> for MessageState {
    type Output = FiniteDist;
    fn index(&self, d: usize) -> &FiniteDist {
        &self.msgs[d]
    }
}

impl MessageState {
    pub fn new(msgs: Vec<FiniteDist>) -> Self {
        MessageState { msgs }
    }

    /// Every message equal to `δ_0`.
    pub fn canonical(g: &CapGraph) -> Self {
        MessageState {
            msgs: vec![FiniteDist::point(0); g.num_directed()],
        }
    }

    /// Random messages with support `{0, …, k}`, `k ≤ c_e` drawn uniformly,
    /// and independent uniform weights.
    pub fn random<R: Rng + ?Sized>(g: &CapGraph, rng: &mut R) -> Self {
        let msgs = (0..g.num_directed())
            .map(|d| {
                let k = rng.random_range(0..=g.dcap(d));
                let w: Vec<f64> = (0..=k).map(|_| rng.random_range(0.05..1.0)).collect();
                FiniteDist::from_dense(&w).expect("positive weights")
            })
            .collect();
        MessageState { msgs }
    }

    pub fn len(&self) -> usize {
        self.msgs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.msgs.is_empty()
    }

    pub fn messages(&self) -> &[FiniteDist] {
        &self.msgs
    }

    pub fn into_messages(self) -> Vec<FiniteDist> {
        self.msgs
    }

    /// Support infima per directed edge.
    pub fn alphas(&self) -> Vec<usize> {
        self.msgs.iter().map(|m| m.support_min()).collect()
    }

    /// Support suprema per directed edge.
    pub fn betas(&self) -> Vec<usize> {
        self.msgs.iter().map(|m| m.support_max()).collect()
    }

    /// Largest L1 distance between corresponding messages.
    pub fn distance(&self, other: &MessageState) -> f64 {
        self.msgs
            .iter()
            .zip(&other.msgs)
            .map(|(a, b)| a.l1_distance(b))
            .fold(0.0, f64::max)
    }

    /// Componentwise lr↑ comparison.
    pub fn lr_le(&self, other: &MessageState) -> bool {
        self.msgs.iter().zip(&other.msgs).all(|(a, b)| lr_le(a, b))
    }

    pub(crate) fn check(&self, g: &CapGraph) -> Result<(), BpError> {
        if self.msgs.len() != g.num_directed() {
            return Err(BpError::StateMismatch {
                expected: g.num_directed(),
                got: self.msgs.len(),
            });
        }
        Ok(())
    }
}
