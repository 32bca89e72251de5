//! Seeded random instances: uniform hypergraphs and bipartite
//! configuration-model graphs with prescribed vertex laws.

use std::collections::{BTreeMap, HashSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CapGraph, GraphError};
use crate::limits::{check_consistency, Atom, VertexLaw};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("hyperedge size {h} exceeds the number of vertices {n}")]
    EdgeTooLarge { h: usize, n: usize },
    #[error("probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("vertex laws are inconsistent")]
    InconsistentLaws,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Seed plus stream id; equal seeds give bit-identical instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    pub seed: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Seed { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// `h`-uniform hypergraph on `{0, …, n−1}`; hyperedges may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    pub n: usize,
    pub h: usize,
    pub edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg
    }

    /// Bipartite incidence graph: hyperedges (capacity `l`) on side A,
    /// vertices (capacity `k`) on side B, every incidence with capacity `r`.
    pub fn incidence_graph(&self, k: usize, l: usize, r: usize) -> Result<CapGraph, GraphError> {
        let edges: Vec<(usize, usize, usize)> = self
            .edges
            .iter()
            .enumerate()
            .flat_map(|(i, e)| e.iter().map(move |&v| (i, v, r)))
            .collect();
        CapGraph::bipartite(vec![l; self.edges.len()], vec![k; self.n], &edges)
    }
}

/// `m` independent uniform `h`-subsets of `n` vertices.
pub fn sample_hypergraph(n: usize, m: usize, h: usize, seed: Seed) -> Result<Hypergraph, GenError> {
    if h > n {
        return Err(GenError::EdgeTooLarge { h, n });
    }
    let mut rng = seed.rng();
    let edges = (0..m)
        .map(|_| {
            let mut e = index::sample(&mut rng, n, h).into_vec();
            e.sort_unstable();
            e
        })
        .collect();
    Ok(Hypergraph { n, h, edges })
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Every `h`-subset present independently with probability `p`.
pub fn sample_hypergraph_binomial(n: usize, p: f64, h: usize, seed: Seed) -> Result<Hypergraph, GenError> {
    if h > n {
        return Err(GenError::EdgeTooLarge { h, n });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::BadProbability(p));
    }
    let mut rng = seed.rng();
    let total = binom(n, h).round() as u64;
    let m = Binomial::new(total, p).map_err(|_| GenError::BadProbability(p))?.sample(&mut rng) as usize;
    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let mut e = index::sample(&mut rng, n, h).into_vec();
        e.sort_unstable();
        if seen.insert(e.clone()) {
            edges.push(e);
        }
    }
    Ok(Hypergraph { n, h, edges })
}

/// Edge probability giving mean vertex degree `τh` in the binomial model.
pub fn binomial_edge_probability(n: usize, h: usize, tau: f64) -> f64 {
    tau * h as f64 / binom(n - 1, h - 1)
}

fn class_counts(atoms: &[&Atom]) -> BTreeMap<usize, i64> {
    let mut out = BTreeMap::new();
    for a in atoms {
        for &c in &a.caps {
            *out.entry(c).or_insert(0) += 1;
        }
    }
    out
}

fn imbalance(ha: &BTreeMap<usize, i64>, hb: &BTreeMap<usize, i64>) -> i64 {
    let keys: std::collections::BTreeSet<_> = ha.keys().chain(hb.keys()).collect();
    keys.into_iter()
        .map(|c| (ha.get(c).unwrap_or(&0) - hb.get(c).unwrap_or(&0)).abs())
        .sum()
}

/// Configuration-model bipartite graph with `n_a` vertices drawn from
/// `phi_a` and `round(n_a E[D^A] / E[D^B])` drawn from `phi_b`.
///
/// Half-edge counts per capacity class are balanced by resampling at most
/// 1% of the B atoms (keeping only changes that reduce the imbalance);
/// any leftover surplus half-edges are dropped at random. Half-edges are
/// then paired uniformly within each class. Parallel edges are kept.
pub fn sample_bipartite_config(
    phi_a: &VertexLaw,
    phi_b: &VertexLaw,
    n_a: usize,
    seed: Seed,
) -> Result<CapGraph, GenError> {
    if !check_consistency(phi_a, phi_b) {
        return Err(GenError::InconsistentLaws);
    }
    let mut rng = seed.rng();
    let (da, db) = (phi_a.mean_degree(), phi_b.mean_degree());
    let n_b = if db > 0.0 {
        (n_a as f64 * da / db).round() as usize
    } else {
        n_a
    };
    let pick_a = WeightedIndex::new(phi_a.atoms().iter().map(|a| a.p)).expect("normalized law");
    let pick_b = WeightedIndex::new(phi_b.atoms().iter().map(|a| a.p)).expect("normalized law");
    let atoms_a: Vec<&Atom> = (0..n_a).map(|_| &phi_a.atoms()[pick_a.sample(&mut rng)]).collect();
    let mut atoms_b: Vec<&Atom> = (0..n_b).map(|_| &phi_b.atoms()[pick_b.sample(&mut rng)]).collect();

    let ha = class_counts(&atoms_a);
    let mut hb = class_counts(&atoms_b);
    let mut gap = imbalance(&ha, &hb);
    let budget = n_b.div_ceil(100);
    let mut changed = 0;
    let mut attempts = 0;
    while gap > 0 && changed < budget && attempts < 50 * n_b.max(1) {
        attempts += 1;
        let i = rng.random_range(0..n_b);
        let cand = &phi_b.atoms()[pick_b.sample(&mut rng)];
        let mut trial = hb.clone();
        for &c in &atoms_b[i].caps {
            *trial.get_mut(&c).unwrap() -= 1;
        }
        for &c in &cand.caps {
            *trial.entry(c).or_insert(0) += 1;
        }
        let g = imbalance(&ha, &trial);
        if g < gap {
            atoms_b[i] = cand;
            hb = trial;
            gap = g;
            changed += 1;
        }
    }

    let mut half_a: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, a) in atoms_a.iter().enumerate() {
        for &c in &a.caps {
            half_a.entry(c).or_default().push(i);
        }
    }
    let mut half_b: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (j, b) in atoms_b.iter().enumerate() {
        for &c in &b.caps {
            half_b.entry(c).or_default().push(j);
        }
    }
    let mut edges = Vec::new();
    for (c, mut hs_a) in half_a {
        let mut hs_b = half_b.remove(&c).unwrap_or_default();
        hs_a.shuffle(&mut rng);
        hs_b.shuffle(&mut rng);
        // zip drops the surplus of the longer side
        edges.extend(hs_a.into_iter().zip(hs_b).map(|(i, j)| (i, j, c)));
    }
    let b_a = atoms_a.iter().map(|a| a.w).collect();
    let b_b = atoms_b.iter().map(|a| a.w).collect();
    Ok(CapGraph::bipartite(b_a, b_b, &edges)?)
}
