use std::collections::VecDeque;

use petgraph::algo::maximum_matching;
use petgraph::graph::{NodeIndex, UnGraph};

use super::{Allocation, CapGraph};

struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<usize>,
    level: Vec<usize>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    // returns the arc id; its residual twin is id ^ 1
    fn add(&mut self, u: usize, v: usize, c: usize) -> usize {
        let id = self.to.len();
        self.head[u].push(id);
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(id + 1);
        self.to.push(u);
        self.cap.push(0);
        id
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = usize::MAX);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &a in &self.head[u] {
                let v = self.to[a];
                if self.cap[a] > 0 && self.level[v] == usize::MAX {
                    self.level[v] = self.level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        self.level[t] != usize::MAX
    }

    // iterative blocking-flow augmentation along level graph
    fn dfs(&mut self, s: usize, t: usize) -> usize {
        let mut stack: Vec<usize> = Vec::new(); // arcs on current path
        let mut u = s;
        let mut total = 0;
        loop {
            if u == t {
                let f = stack.iter().map(|&a| self.cap[a]).min().unwrap();
                for &a in &stack {
                    self.cap[a] -= f;
                    self.cap[a ^ 1] += f;
                }
                total += f;
                // retreat to the first saturated arc
                let k = stack.iter().position(|&a| self.cap[a] == 0).unwrap();
                stack.truncate(k);
                u = if k == 0 { s } else { self.to[stack[k - 1]] };
                continue;
            }
            let mut advanced = false;
            while self.iter[u] < self.head[u].len() {
                let a = self.head[u][self.iter[u]];
                let v = self.to[a];
                if self.cap[a] > 0 && self.level[v] == self.level[u] + 1 {
                    stack.push(a);
                    u = v;
                    advanced = true;
                    break;
                }
                self.iter[u] += 1;
            }
            if advanced {
                continue;
            }
            // dead end
            self.level[u] = usize::MAX;
            match stack.pop() {
                None => return total,
                Some(a) => {
                    u = self.to[a ^ 1];
                    self.iter[u] += 1;
                }
            }
        }
    }

    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let mut flow = 0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            flow += self.dfs(s, t);
        }
        flow
    }
}

fn bipartite_flow(g: &CapGraph, left: &[bool]) -> (usize, Allocation) {
    let n = g.num_vertices();
    let (s, t) = (n, n + 1);
    let mut net = Dinic::new(n + 2);
    for v in 0..n {
        if left[v] {
            net.add(s, v, g.b(v));
        } else {
            net.add(v, t, g.b(v));
        }
    }
    let arcs: Vec<usize> = (0..g.num_edges())
        .map(|e| {
            let (u, v) = g.ends(e);
            if left[u] {
                net.add(u, v, g.c(e))
            } else {
                net.add(v, u, g.c(e))
            }
        })
        .collect();
    let size = net.max_flow(s, t);
    // flow on an arc equals the residual capacity of its twin
    let x = arcs.iter().map(|&a| net.cap[a ^ 1]).collect();
    (size, Allocation { x })
}

// Exact reduction for general graphs. Each edge u-v with capacity c becomes
// the path u-p-q-v with b(p) = b(q) = c; the new graph has no edge
// capacities and its optimum exceeds the original one by Σ c, with
// x_e = min(load(u,p), load(q,v)). Vertex capacities are then expanded into
// copies so that a plain maximum matching solves the uncapacitated problem.
fn general_matching(g: &CapGraph) -> (usize, Allocation) {
    let mut mg: UnGraph<(), usize> = UnGraph::default();
    let copies = |mg: &mut UnGraph<(), usize>, k: usize| -> Vec<NodeIndex> {
        (0..k).map(|_| mg.add_node(())).collect()
    };
    let vcopies: Vec<Vec<NodeIndex>> = (0..g.num_vertices()).map(|v| copies(&mut mg, g.b(v))).collect();
    // tag: 2e for u-p links, 2e+1 for q-v links, usize::MAX for p-q
    let link = |mg: &mut UnGraph<(), usize>, xs: &[NodeIndex], ys: &[NodeIndex], tag: usize| {
        for &x in xs {
            for &y in ys {
                mg.add_edge(x, y, tag);
            }
        }
    };
    for e in 0..g.num_edges() {
        let (u, v) = g.ends(e);
        let c = g.c(e);
        let p = copies(&mut mg, c);
        let q = copies(&mut mg, c);
        link(&mut mg, &vcopies[u], &p, 2 * e);
        link(&mut mg, &p, &q, usize::MAX);
        link(&mut mg, &q, &vcopies[v], 2 * e + 1);
    }
    let matching = maximum_matching(&mg);
    let mut load = vec![0usize; 2 * g.num_edges()];
    for (a, b) in matching.edges() {
        let e = mg.find_edge(a, b).expect("matched pair is an edge");
        let tag = mg[e];
        if tag != usize::MAX {
            load[tag] += 1;
        }
    }
    let x: Vec<usize> = (0..g.num_edges()).map(|e| load[2 * e].min(load[2 * e + 1])).collect();
    let total: usize = g.edge_caps().iter().sum();
    let size = matching.len() - total;
    debug_assert_eq!(size, x.iter().sum::<usize>());
    (size, Allocation { x })
}

/// Maximum allocation size with a witness. Bipartite graphs use an integer
/// max-flow; other graphs go through an exact matching reduction.
pub fn max_allocation_flow(g: &CapGraph) -> (usize, Allocation) {
    match g.bipartition() {
        Some(left) => bipartite_flow(g, &left),
        None => general_matching(g),
    }
}

#[cfg(test)]
mod tests {
    use super::super::validate;
    use super::*;

    #[test]
    fn small_examples() {
        let g = CapGraph::new(vec![2, 3], &[(0, 1, 2)]).unwrap();
        assert_eq!(max_allocation_flow(&g).0, 2);
        let c4 = CapGraph::new(vec![1; 4], &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]).unwrap();
        assert_eq!(max_allocation_flow(&c4).0, 2);
    }

    #[test]
    fn triangle_needs_exact_general_solver() {
        // a fractional relaxation would give 1.5
        let g = CapGraph::new(vec![1; 3], &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]).unwrap();
        let (m, a) = max_allocation_flow(&g);
        assert_eq!(m, 1);
        assert!(validate(&g, &a).unwrap());
        let g = CapGraph::new(vec![2; 3], &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]).unwrap();
        assert_eq!(max_allocation_flow(&g).0, 3);
        let g = CapGraph::new(vec![3; 3], &[(0, 1, 2), (1, 2, 2), (2, 0, 2)]).unwrap();
        let (m, a) = max_allocation_flow(&g);
        assert_eq!(m, 4);
        assert!(validate(&g, &a).unwrap());
    }

    #[test]
    fn zero_capacities() {
        let g = CapGraph::new(vec![0, 2, 1], &[(0, 1, 1), (1, 2, 0), (2, 0, 1)]).unwrap();
        assert_eq!(max_allocation_flow(&g).0, 0);
    }
}
