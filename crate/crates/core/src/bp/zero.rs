use crate::distkit::FiniteDist;
use crate::graph::CapGraph;

use super::ops::{op_q, op_r, op_s};
use super::{BpError, Lambda, MessageState};

/// Output of the integer zero-temperature iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroTemperature {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    /// `Σ_v F_v(alpha)`; twice the allocation size estimate.
    pub estimate: usize,
    pub sweeps: usize,
}

impl ZeroTemperature {
    /// Estimated maximum allocation size, `estimate / 2`.
    pub fn size_estimate(&self) -> f64 {
        self.estimate as f64 / 2.0
    }
}

/// `S_G`: every directed edge gets `[b_tail − Σ_feeders x]` clipped to `[0, c]`.
pub fn s_map(g: &CapGraph, x: &[usize]) -> Vec<usize> {
    let mut into = vec![0usize; g.num_vertices()];
    for (d, &v) in x.iter().enumerate() {
        into[g.head(d)] += v;
    }
    (0..g.num_directed())
        .map(|d| {
            let v = g.tail(d);
            op_s(g.b(v), g.dcap(d), into[v] - x[d ^ 1])
        })
        .collect()
}

/// `min(b, Σ_in α) + (b − Σ_out α)^+`, the second term counted only when
/// the vertex capacity can actually bind (`b < Σ c_e` around `v`).
pub fn f_v(g: &CapGraph, v: usize, alpha: &[usize]) -> usize {
    let b = g.b(v);
    let inflow: usize = g.in_edges(v).map(|d| alpha[d]).sum();
    let outflow: usize = g.out_edges(v).iter().map(|&d| alpha[d]).sum();
    let cap_sum: usize = g.out_edges(v).iter().map(|&d| g.dcap(d)).sum();
    let slack = if b < cap_sum { b.saturating_sub(outflow) } else { 0 };
    b.min(inflow) + slack
}

pub fn f_total(g: &CapGraph, alpha: &[usize]) -> usize {
    (0..g.num_vertices()).map(|v| f_v(g, v, alpha)).sum()
}

/// Bottom masses below this, and still shrinking, are taken to vanish.
const VANISHING_MASS: f64 = 1e-12;
/// An extrapolated bottom mass below this fraction of the current one is
/// taken to vanish; above `1 − ZERO_EXTRAPOLATION` it is taken to survive.
const ZERO_EXTRAPOLATION: f64 = 0.05;
const ZERO_FIRST_CHECKPOINT: usize = 32;
const ZERO_MAX_SWEEPS: usize = 1 << 15;

enum Trend {
    Steady,
    Vanishing,
    Surviving,
    Unclear,
}

/// Aitken-style reading of the last three checkpoint masses.
fn trend(h: &[f64]) -> Trend {
    let [x0, x1, x2] = h[h.len() - 3..] else { unreachable!() };
    if (x1 - x2).abs() <= 1e-9 * x2 {
        return Trend::Steady;
    }
    let (d1, d2) = (x0 - x1, x1 - x2);
    if d1 <= 0.0 || d2 <= 0.0 || d2 >= d1 {
        return Trend::Unclear;
    }
    let rho = d2 / d1;
    let limit = x2 - d2 * rho / (1.0 - rho);
    if limit < ZERO_EXTRAPOLATION * x2 {
        Trend::Vanishing
    } else if limit > (1.0 - ZERO_EXTRAPOLATION) * x2 {
        Trend::Surviving
    } else {
        Trend::Unclear
    }
}

/// `msg` conditioned on `x ≥ lo`.
fn at_least(msg: &FiniteDist, lo: usize) -> FiniteDist {
    let w: Vec<f64> = msg.iter().map(|(x, p)| if x >= lo { p } else { 0.0 }).collect();
    FiniteDist::from_raw(msg.support_min(), w).unwrap_or_else(|_| FiniteDist::point(lo))
}

fn drop_bottom(msg: &FiniteDist) -> FiniteDist {
    let a = msg.support_min();
    let w: Vec<f64> = msg.iter().map(|(x, p)| if x == a { 0.0 } else { p }).collect();
    FiniteDist::from_raw(a, w).expect("non-point message keeps mass")
}

/// Zero-temperature support infima and the resulting size estimate.
///
/// The infima are those of the limiting messages `m = Q(R(m))`. The least
/// fixed point of `S_G ∘ S_G` is only a lower bound for them: bottom masses
/// can be forced to zero. At a fixed point `α` with `β = S_G(α)`, call the
/// bottom of `m_e` tight when `α_e = b_v − |β_∂e|` with room above it, and
/// the top of `n_f` tight when `β_f = b_u − |α_∂f| ∈ [1, c_f]`. A tight mass
/// is strictly smaller than the product of the masses it is built from, so
/// a cycle of tight masses, and anything built on one, cannot survive;
/// those infima are raised outright. Bottoms that are sums of such products
/// are settled by running the message iteration from `δ_α`, which stays
/// below the limit, and dropping masses that decay to nothing. Near a
/// critical point that decay is only algebraic, so at doubling checkpoints
/// each shrinking bottom mass is extrapolated from its last three values.
pub fn bp_zero_temperature(g: &CapGraph) -> ZeroTemperature {
    let nd = g.num_directed();
    let (alpha, mut sweeps) = least_two_step_fixed_point(g);
    let mut m = MessageState::new(alpha.iter().map(|&a| FiniteDist::point(a)).collect());
    // bottom masses at checkpoints, cleared when the infimum moves
    let mut hist: Vec<(usize, Vec<f64>)> = alpha.iter().map(|&a| (a, Vec::new())).collect();
    let mut floor = alpha;
    let mut checkpoint = ZERO_FIRST_CHECKPOINT;
    for it in 1..=ZERO_MAX_SWEEPS {
        let n = MessageState::new((0..nd).map(|d| op_r(g, d, &m, 1.0)).collect());
        let mut next: Vec<FiniteDist> = (0..nd).map(|d| op_q(g, d, &n, Lambda::Infinite)).collect();
        sweeps += 1;
        // dropped bottoms stay dropped; conditioning keeps the iterate below the limit
        for (d, msg) in next.iter_mut().enumerate() {
            if msg.support_min() < floor[d] {
                *msg = at_least(msg, floor[d]);
            }
            floor[d] = msg.support_min();
        }
        let alpha = floor.clone();
        let fixed = s_map(g, &s_map(g, &alpha)) == alpha;
        let mut doomed = vec![false; nd];
        if fixed {
            for d in vanishing_bottoms(g, &alpha) {
                doomed[d] = true;
            }
        }
        let at_checkpoint = it == checkpoint;
        if at_checkpoint {
            checkpoint *= 2;
        }
        // `settled`: nothing moves; `decided`: whatever moves will survive
        let (mut settled, mut decided) = (fixed, fixed);
        for (d, msg) in next.iter_mut().enumerate() {
            if msg.is_point() {
                continue;
            }
            let a = msg.support_min();
            let (now, before) = (msg.pmf(a), m[d].pmf(a));
            let shrinking = now < before * (1.0 - 1e-9);
            if hist[d].0 != a {
                hist[d] = (a, Vec::new());
            }
            let mut vanish = doomed[d] || (shrinking && now < VANISHING_MASS);
            if at_checkpoint {
                hist[d].1.push(now);
                if hist[d].1.len() >= 3 {
                    match trend(&hist[d].1) {
                        Trend::Vanishing => vanish = true,
                        Trend::Steady | Trend::Surviving => {}
                        Trend::Unclear => decided = false,
                    }
                } else if shrinking {
                    decided = false;
                }
            }
            if vanish {
                *msg = drop_bottom(msg);
                floor[d] = msg.support_min();
                hist[d].1.clear();
                settled = false;
                decided = false;
            } else if shrinking {
                settled = false;
            }
        }
        let next = MessageState::new(next);
        let dist = next.distance(&m);
        m = next;
        if (settled && dist < 1e-14) || (at_checkpoint && decided) {
            break;
        }
    }
    let mut alpha = m.alphas();
    loop {
        let up = s_map(g, &s_map(g, &alpha));
        if up == alpha {
            break;
        }
        alpha = up;
    }
    let beta = s_map(g, &alpha);
    let estimate = f_total(g, &alpha);
    ZeroTemperature {
        alpha,
        beta,
        estimate,
        sweeps,
    }
}

/// Directed edges whose bottom mass at the fixed point `alpha` depends,
/// through tight masses only, on a cycle of tight masses.
fn vanishing_bottoms(g: &CapGraph, alpha: &[usize]) -> Vec<usize> {
    let nd = g.num_directed();
    let beta = s_map(g, alpha);
    let inflow = |x: &[usize], d: usize| -> usize { g.feeders(d).map(|f| x[f]).sum() };
    let m_tight: Vec<bool> = (0..nd)
        .map(|d| {
            let b = g.b(g.tail(d));
            let top = g.dcap(d).min(b);
            let load = inflow(&beta, d);
            load <= b && b - load == alpha[d] && alpha[d] < top
        })
        .collect();
    let n_tight: Vec<bool> = (0..nd)
        .map(|d| {
            let b = g.b(g.tail(d));
            let load = inflow(alpha, d);
            load < b && b - load == beta[d]
        })
        .collect();
    // nodes 0..nd are m-bottoms, nd..2nd are n-tops; arcs point to what a
    // mass is built from
    let node_tight = |x: usize| if x < nd { m_tight[x] } else { n_tight[x - nd] };
    let succ = |x: usize| -> Vec<usize> {
        let (d, off) = if x < nd { (x, nd) } else { (x - nd, 0) };
        g.feeders(d).map(|f| f + off).filter(|&y| node_tight(y)).collect()
    };
    let mut out_deg = vec![0usize; 2 * nd];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); 2 * nd];
    for x in (0..2 * nd).filter(|&x| node_tight(x)) {
        for y in succ(x) {
            out_deg[x] += 1;
            preds[y].push(x);
        }
    }
    // peel nodes that cannot reach a cycle
    let mut alive: Vec<bool> = (0..2 * nd).map(node_tight).collect();
    let mut stack: Vec<usize> = (0..2 * nd).filter(|&x| alive[x] && out_deg[x] == 0).collect();
    while let Some(x) = stack.pop() {
        alive[x] = false;
        for &p in &preds[x] {
            out_deg[p] -= 1;
            if out_deg[p] == 0 && alive[p] {
                stack.push(p);
            }
        }
    }
    (0..nd).filter(|&d| alive[d]).collect()
}

/// Least fixed point of `α = S_G(S_G(α))`, by the monotone integer
/// iteration from zero. Returns the fixed point and the number of sweeps.
///
/// This is a lower bound on the zero-temperature support infima and can
/// sit strictly below them.
pub fn least_two_step_fixed_point(g: &CapGraph) -> (Vec<usize>, usize) {
    let mut alpha = vec![0usize; g.num_directed()];
    let mut sweeps = 0;
    loop {
        let next = s_map(g, &s_map(g, &alpha));
        sweeps += 1;
        debug_assert!(next.iter().zip(&alpha).all(|(a, b)| a >= b));
        if next == alpha {
            return (alpha, sweeps);
        }
        alpha = next;
    }
}

/// Every integer vector with `α = S_G(S_G(α))`, by exhaustive search.
pub fn two_step_fixed_points(g: &CapGraph, limit: f64) -> Result<Vec<Vec<usize>>, BpError> {
    let size: f64 = (0..g.num_directed()).map(|d| (g.dcap(d) + 1) as f64).product();
    if size > limit {
        return Err(BpError::TooLarge { size });
    }
    let n = g.num_directed();
    let mut found = Vec::new();
    let mut alpha = vec![0usize; n];
    loop {
        if s_map(g, &s_map(g, &alpha)) == alpha {
            found.push(alpha.clone());
        }
        // odometer increment
        let mut i = 0;
        while i < n && alpha[i] == g.dcap(i) {
            alpha[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        alpha[i] += 1;
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let g = CapGraph::new(vec![2, 3], &[(0, 1, 2)]).unwrap();
        let z = bp_zero_temperature(&g);
        assert_eq!(z.alpha, vec![2, 2]);
        assert_eq!(z.estimate, 4);
        assert_eq!(z.size_estimate(), 2.0);
        assert_eq!(s_map(&g, &z.beta), z.alpha);
    }

    #[test]
    fn star() {
        let g = CapGraph::new(vec![2, 1, 1, 1], &[(0, 1, 1), (0, 2, 1), (0, 3, 1)]).unwrap();
        assert_eq!(bp_zero_temperature(&g).estimate, 4);
    }

    #[test]
    fn degenerate_capacities() {
        let g = CapGraph::new(vec![0, 3, 2], &[(0, 1, 2), (1, 2, 0)]).unwrap();
        let z = bp_zero_temperature(&g);
        assert_eq!(z.estimate, 0);
    }

    #[test]
    fn enumeration_contains_minimal_start() {
        let g = CapGraph::new(vec![1; 4], &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]).unwrap();
        let fps = two_step_fixed_points(&g, 1e7).unwrap();
        let z = bp_zero_temperature(&g);
        assert!(fps.contains(&z.alpha));
        let best = fps.iter().map(|a| f_total(&g, a)).min().unwrap();
        assert_eq!(best, z.estimate);
        assert_eq!(z.estimate, 4);
    }
}
