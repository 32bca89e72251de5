//! Local message-passing operators at a single vertex.

use crate::distkit::{convolve, convolve_seq, reweight_seq, shifted_reversal, tilt, FiniteDist};
use crate::graph::CapGraph;

use super::{Lambda, MessageState};

/// `[b − sum]` clipped to `{0, …, c}`.
pub fn op_s(b: usize, c: usize, sum: usize) -> usize {
    b.saturating_sub(sum).min(c)
}

/// Outgoing message from a vertex with capacity `b` along an edge of
/// capacity `c`, given the messages on the other incoming edges.
///
/// Returns `δ_0` when the incoming supports already exceed `b`.
pub fn r_local(b: usize, c: usize, incoming: &[&FiniteDist], lambda: f64) -> FiniteDist {
    let theta = convolve(incoming.iter().copied());
    if theta.support_min() > b {
        return FiniteDist::point(0);
    }
    // (δ_[0,b] ∗ θ)^R(x) = P(θ ≤ b − x)
    let window = convolve_seq(&vec![1.0; b + 1], &theta.to_dense());
    let reversed = shifted_reversal(&window, b);
    let box_c: Vec<f64> = (0..=b).map(|x| if x <= c { 1.0 } else { 0.0 }).collect();
    let base = reweight_seq(&reversed, &box_c).expect("x = 0 is always feasible");
    if lambda == 1.0 {
        base
    } else {
        tilt(&base, lambda)
    }
}

/// Mean occupancy at a vertex of capacity `b` given all incoming messages.
pub fn d_local(b: usize, incoming: &[&FiniteDist]) -> f64 {
    let theta = convolve(incoming.iter().copied());
    if theta.support_min() >= b {
        return b as f64;
    }
    let (num, den) = theta
        .iter()
        .take_while(|&(x, _)| x <= b)
        .fold((0.0, 0.0), |(n, d), (x, p)| (n + x as f64 * p, d + p));
    num / den
}

/// `R` applied to geometrically tilted inputs; at `λ = ∞` the limit of
/// that family.
///
/// For `λ = ∞` the result puts mass `∝ θ(K − x)` on `x ≤ c`, where `θ` is
/// the law of the incoming sum and `K` the largest attainable `x + t` with
/// `t ∈ supp θ`, `x ≤ c`, `x + t ≤ b`. When the inputs contain 0 in their
/// support this is `∝ θ(b − x)` if `β ≥ b − c`, and `δ_c` otherwise.
pub fn q_local(b: usize, c: usize, incoming: &[&FiniteDist], lambda: Lambda) -> FiniteDist {
    match lambda {
        Lambda::Finite(l) => {
            let tilted: Vec<FiniteDist> = incoming.iter().map(|m| tilt(m, l)).collect();
            let refs: Vec<&FiniteDist> = tilted.iter().collect();
            r_local(b, c, &refs, l)
        }
        Lambda::Infinite => {
            let theta = convolve(incoming.iter().copied());
            let mut top: Option<usize> = None;
            for x in 0..=c.min(b) {
                let reach = theta.iter().take_while(|&(t, _)| t <= b - x).last();
                if let Some((t, _)) = reach {
                    top = top.max(Some(x + t));
                }
            }
            let Some(k) = top else {
                return FiniteDist::point(0);
            };
            let w: Vec<f64> = (0..=c.min(k)).map(|x| theta.pmf(k - x)).collect();
            FiniteDist::from_raw(0, w).expect("the maximizing pair has mass")
        }
    }
}

/// `R` along directed edge `d` using the messages on its feeders.
pub fn op_r(g: &CapGraph, d: usize, m: &MessageState, lambda: f64) -> FiniteDist {
    let incoming: Vec<&FiniteDist> = g.feeders(d).map(|f| &m[f]).collect();
    r_local(g.b(g.tail(d)), g.dcap(d), &incoming, lambda)
}

/// `D` at vertex `v` using the messages on every edge into `v`.
pub fn op_d(g: &CapGraph, v: usize, m: &MessageState) -> f64 {
    let incoming: Vec<&FiniteDist> = g.in_edges(v).map(|f| &m[f]).collect();
    d_local(g.b(v), &incoming)
}

pub fn op_q(g: &CapGraph, d: usize, n: &MessageState, lambda: Lambda) -> FiniteDist {
    let incoming: Vec<&FiniteDist> = g.feeders(d).map(|f| &n[f]).collect();
    q_local(g.b(g.tail(d)), g.dcap(d), &incoming, lambda)
}

/// `S` along directed edge `d` for an integer vector on directed edges.
pub fn op_s_edge(g: &CapGraph, d: usize, alpha: &[usize]) -> usize {
    let sum: usize = g.feeders(d).map(|f| alpha[f]).sum();
    op_s(g.b(g.tail(d)), g.dcap(d), sum)
}
