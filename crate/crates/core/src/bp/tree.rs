use std::collections::VecDeque;

use crate::graph::CapGraph;

use super::ops::op_s;
use super::zero::f_total;
use super::BpError;

/// Exact solution on a forest by peeling from the leaves.
///
/// For an edge leaving a leaf both the infimum and the supremum of the
/// message equal `min(b, c)`. Climbing towards a root, the infimum on an
/// edge is `S` of the suprema below it and the supremum is `S` of the
/// infima below it; a second pass from the root fills in the edges
/// pointing away from it. Returns the fixed point `α` of `S ∘ S` and the
/// maximum allocation size `½ Σ_v F_v(α)`.
pub fn tree_leaf_removal(g: &CapGraph) -> Result<(Vec<usize>, usize), BpError> {
    if !g.is_forest() {
        return Err(BpError::NotATree);
    }
    let n = g.num_vertices();
    let nd = g.num_directed();
    let mut alpha = vec![0usize; nd];
    let mut beta = vec![0usize; nd];

    let mut order = Vec::with_capacity(n);
    let mut up_edge = vec![usize::MAX; n]; // directed edge vertex -> parent
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &d in g.out_edges(u) {
                let w = g.head(d);
                if !seen[w] {
                    seen[w] = true;
                    up_edge[w] = d ^ 1;
                    queue.push_back(w);
                }
            }
        }
    }

    // in-sums over the directed edges into each vertex that are already known
    let mut sum_a = vec![0usize; n];
    let mut sum_b = vec![0usize; n];

    for &u in order.iter().rev() {
        let d = up_edge[u];
        if d == usize::MAX {
            continue;
        }
        // feeders of u -> parent are exactly the child edges into u
        let (b, c) = (g.b(u), g.dcap(d));
        alpha[d] = op_s(b, c, sum_b[u]);
        beta[d] = op_s(b, c, sum_a[u]);
        let p = g.head(d);
        sum_a[p] += alpha[d];
        sum_b[p] += beta[d];
    }
    for &u in &order {
        for &d in g.out_edges(u) {
            if d == up_edge[u] {
                continue;
            }
            let back = d ^ 1;
            let (b, c) = (g.b(u), g.dcap(d));
            alpha[d] = op_s(b, c, sum_b[u] - beta[back]);
            beta[d] = op_s(b, c, sum_a[u] - alpha[back]);
            let w = g.head(d);
            sum_a[w] += alpha[d];
            sum_b[w] += beta[d];
        }
    }
    let total = f_total(g, &alpha);
    debug_assert!(total.is_multiple_of(2));
    Ok((alpha, total / 2))
}
