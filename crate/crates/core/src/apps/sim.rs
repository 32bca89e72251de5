use rayon::prelude::*;

use super::{orient_decide, AppError, CuckooParams};
use crate::gen::{sample_bipartite_config, sample_hypergraph, Seed};
use crate::graph::max_allocation_flow;
use crate::limits::VertexLaw;

/// One `H_{n,⌊τn⌋,h}` sample: is it `(k, l, r)`-orientable?
pub fn orientable_trial(p: &CuckooParams, n: usize, tau: f64, seed: Seed) -> Result<bool, AppError> {
    let m = (tau * n as f64).floor() as usize;
    let hg = sample_hypergraph(n, m, p.h, seed)?;
    Ok(orient_decide(&hg, p))
}

/// Fraction of orientable samples over streams `0..trials` of `seed`.
pub fn orientable_fraction(p: &CuckooParams, n: usize, tau: f64, trials: usize, seed: u64) -> Result<f64, AppError> {
    let hits: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|s| orientable_trial(p, n, tau, Seed::new(seed, s)))
        .collect::<Result<_, _>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / trials.max(1) as f64)
}

/// Maximum allocation per hyperedge on `m` hyperedges over `round(m/τ)`
/// vertices.
pub fn cuckoo_lln_trial(p: &CuckooParams, tau: f64, m: usize, seed: Seed) -> Result<f64, AppError> {
    let n = ((m as f64 / tau).round() as usize).max(p.h);
    let hg = sample_hypergraph(n, m, p.h, seed)?;
    let g = hg.incidence_graph(p.k, p.l, p.r).expect("vertices in range");
    Ok(max_allocation_flow(&g).0 as f64 / m.max(1) as f64)
}

/// `M(G)/|A|` on one configuration-model graph with `n_a` A-vertices.
pub fn law_lln_trial(phi_a: &VertexLaw, phi_b: &VertexLaw, n_a: usize, seed: Seed) -> Result<f64, AppError> {
    let g = sample_bipartite_config(phi_a, phi_b, n_a, seed)?;
    Ok(max_allocation_flow(&g).0 as f64 / n_a.max(1) as f64)
}
