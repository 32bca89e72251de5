//! Capacitated graphs, allocations and exact oracles for the maximum
//! allocation size.

mod enumerate;
mod flow;

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

pub use enumerate::{gibbs_brute, gibbs_polynomial, max_allocation_enum, GibbsPolynomial, GibbsSummary};
pub use flow::max_allocation_flow;

/// Largest box `Π (c_e + 1)` the enumeration oracles accept.
pub const ENUM_LIMIT: f64 = 1e7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge {edge} is a self-loop on vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("edge {edge} references vertex {vertex}, but the graph has {n} vertices")]
    VertexOutOfRange { edge: usize, vertex: usize, n: usize },
    #[error("edge {edge} does not cross the declared bipartition")]
    SideViolation { edge: usize },
    #[error("duplicate vertex id {0:?}")]
    DuplicateId(String),
    #[error("unknown vertex id {0:?}")]
    UnknownId(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    IndexMismatch { expected: usize, got: usize },
    #[error("enumeration box of size {size:.3e} exceeds the limit")]
    TooLarge { size: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Side {
    A,
    B,
}

/// Edge capacity as given by the user; `Inf` is replaced at build time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeCap {
    Finite(usize),
    Inf,
}

impl From<usize> for EdgeCap {
    fn from(c: usize) -> Self {
        EdgeCap::Finite(c)
    }
}

/// Finite multigraph with vertex capacities `b` and edge capacities `c`.
///
/// Edge `e` joins `ends(e).0` to `ends(e).1`. Directed edge `2e` points
/// from the first endpoint to the second and `2e + 1` points back, so the
/// reverse of directed edge `d` is `d ^ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapGraph {
    ids: Vec<String>,
    b: Vec<usize>,
    sides: Vec<Option<Side>>,
    ends: Vec<(usize, usize)>,
    caps: Vec<usize>,
    // outgoing directed edges per vertex
    out: Vec<Vec<usize>>,
}

impl CapGraph {
    /// Graph with vertices named `0..n` and finite edge capacities.
    pub fn new(b: Vec<usize>, edges: &[(usize, usize, usize)]) -> Result<Self, GraphError> {
        let edges: Vec<_> = edges.iter().map(|&(u, v, c)| (u, v, EdgeCap::Finite(c))).collect();
        let n = b.len();
        Self::from_parts((0..n).map(|i| i.to_string()).collect(), b, vec![None; n], edges)
    }

    /// Bipartite graph; vertices `0..b_a.len()` are side A, the rest side B.
    /// Edges are given as `(a, b, c)` with `b` indexed within side B.
    pub fn bipartite(
        b_a: Vec<usize>,
        b_b: Vec<usize>,
        edges: &[(usize, usize, usize)],
    ) -> Result<Self, GraphError> {
        let na = b_a.len();
        let nb = b_b.len();
        let mut ids: Vec<String> = (0..na).map(|i| format!("a{i}")).collect();
        ids.extend((0..nb).map(|j| format!("b{j}")));
        let mut sides = vec![Some(Side::A); na];
        sides.extend(vec![Some(Side::B); nb]);
        let mut b = b_a;
        b.extend(b_b);
        let edges = edges
            .iter()
            .map(|&(u, v, c)| (u, na + v, EdgeCap::Finite(c)))
            .collect();
        Self::from_parts(ids, b, sides, edges)
    }

    pub fn from_parts(
        ids: Vec<String>,
        b: Vec<usize>,
        sides: Vec<Option<Side>>,
        edges: Vec<(usize, usize, EdgeCap)>,
    ) -> Result<Self, GraphError> {
        let n = b.len();
        if ids.len() != n {
            return Err(GraphError::IndexMismatch { expected: n, got: ids.len() });
        }
        if sides.len() != n {
            return Err(GraphError::IndexMismatch { expected: n, got: sides.len() });
        }
        let mut seen = HashMap::with_capacity(n);
        for id in &ids {
            if seen.insert(id.as_str(), ()).is_some() {
                return Err(GraphError::DuplicateId(id.clone()));
            }
        }
        let mut ends = Vec::with_capacity(edges.len());
        let mut caps = Vec::with_capacity(edges.len());
        let mut out = vec![Vec::new(); n];
        for (e, &(u, v, c)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { edge: e, vertex: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { edge: e, vertex: u });
            }
            if let (Some(su), Some(sv)) = (sides[u], sides[v]) {
                if su == sv {
                    return Err(GraphError::SideViolation { edge: e });
                }
            }
            let c = match c {
                EdgeCap::Finite(c) => c,
                EdgeCap::Inf => b[u].min(b[v]),
            };
            ends.push((u, v));
            caps.push(c);
            out[u].push(2 * e);
            out[v].push(2 * e + 1);
        }
        Ok(CapGraph { ids, b, sides, ends, caps, out })
    }

    pub fn num_vertices(&self) -> usize {
        self.b.len()
    }

    pub fn num_edges(&self) -> usize {
        self.ends.len()
    }

    pub fn num_directed(&self) -> usize {
        2 * self.ends.len()
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn b(&self, v: usize) -> usize {
        self.b[v]
    }

    pub fn capacities(&self) -> &[usize] {
        &self.b
    }

    pub fn side(&self, v: usize) -> Option<Side> {
        self.sides[v]
    }

    pub fn ends(&self, e: usize) -> (usize, usize) {
        self.ends[e]
    }

    /// Capacity of undirected edge `e`.
    pub fn c(&self, e: usize) -> usize {
        self.caps[e]
    }

    pub fn edge_caps(&self) -> &[usize] {
        &self.caps
    }

    /// Tail of directed edge `d`.
    pub fn tail(&self, d: usize) -> usize {
        let (u, v) = self.ends[d / 2];
        if d.is_multiple_of(2) { u } else { v }
    }

    /// Head of directed edge `d`.
    pub fn head(&self, d: usize) -> usize {
        self.tail(d ^ 1)
    }

    /// Capacity of the undirected edge under directed edge `d`.
    pub fn dcap(&self, d: usize) -> usize {
        self.caps[d / 2]
    }

    /// Directed edges leaving `v`.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// Directed edges entering `v`.
    pub fn in_edges(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out[v].iter().map(|&d| d ^ 1)
    }

    /// Directed edges feeding the message on `d`: every edge into the tail
    /// of `d` except the reverse of `d` itself.
    pub fn feeders(&self, d: usize) -> impl Iterator<Item = usize> + '_ {
        self.in_edges(self.tail(d)).filter(move |&f| f != d ^ 1)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.out[v].len()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out[v].iter().map(|&d| self.head(d))
    }

    /// Two-colouring if the graph is bipartite. Declared sides are used
    /// when every vertex has one.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        if self.sides.iter().all(|s| s.is_some()) {
            return Some(self.sides.iter().map(|s| *s == Some(Side::A)).collect());
        }
        let n = self.num_vertices();
        let mut colour: Vec<Option<bool>> = vec![None; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            if colour[s].is_some() {
                continue;
            }
            colour[s] = Some(true);
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                let cu = colour[u].unwrap();
                for w in self.neighbors(u) {
                    match colour[w] {
                        None => {
                            colour[w] = Some(!cu);
                            queue.push_back(w);
                        }
                        Some(cw) if cw == cu => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(colour.into_iter().map(|c| c.unwrap()).collect())
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    /// True when the graph has no cycle (parallel edges count as one).
    pub fn is_forest(&self) -> bool {
        let n = self.num_vertices();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(u, v) in &self.ends {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                return false;
            }
            parent[ru] = rv;
        }
        true
    }

    /// Largest finite hop distance between two vertices.
    pub fn diameter(&self) -> usize {
        let n = self.num_vertices();
        let mut best = 0;
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                best = best.max(dist[u]);
                for w in self.neighbors(u) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        best
    }

    /// `Π (c_e + 1)`, the size of the enumeration box.
    pub fn box_size(&self) -> f64 {
        self.caps.iter().map(|&c| (c + 1) as f64).product()
    }
}

/// Integer load per undirected edge.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Allocation {
    pub x: Vec<usize>,
}

impl Allocation {
    pub fn zeros(m: usize) -> Self {
        Allocation { x: vec![0; m] }
    }

    pub fn size(&self) -> usize {
        self.x.iter().sum()
    }
}

/// Checks the edge and vertex constraints of `a` on `g`.
pub fn validate(g: &CapGraph, a: &Allocation) -> Result<bool, GraphError> {
    if a.x.len() != g.num_edges() {
        return Err(GraphError::IndexMismatch {
            expected: g.num_edges(),
            got: a.x.len(),
        });
    }
    let mut load = vec![0usize; g.num_vertices()];
    for (e, &x) in a.x.iter().enumerate() {
        if x > g.c(e) {
            return Ok(false);
        }
        let (u, v) = g.ends(e);
        load[u] += x;
        load[v] += x;
    }
    Ok(load.iter().zip(&g.b).all(|(l, b)| l <= b))
}
