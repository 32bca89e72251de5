use super::{CapGraph, GraphError, ENUM_LIMIT};

fn guard(g: &CapGraph) -> Result<(), GraphError> {
    let size = g.box_size();
    if size > ENUM_LIMIT {
        return Err(GraphError::TooLarge { size });
    }
    Ok(())
}

/// Exhaustive maximum allocation size.
pub fn max_allocation_enum(g: &CapGraph) -> Result<usize, GraphError> {
    guard(g)?;
    let m = g.num_edges();
    // suffix sums of capacities bound what the remaining edges can add
    let mut rest = vec![0usize; m + 1];
    for e in (0..m).rev() {
        rest[e] = rest[e + 1] + g.c(e);
    }
    let mut residual = g.capacities().to_vec();
    let mut best = 0;
    search(g, 0, 0, &rest, &mut residual, &mut best);
    Ok(best)
}

fn search(g: &CapGraph, e: usize, size: usize, rest: &[usize], residual: &mut [usize], best: &mut usize) {
    if size + rest[e] <= *best {
        return;
    }
    if e == g.num_edges() {
        *best = size;
        return;
    }
    let (u, v) = g.ends(e);
    let top = g.c(e).min(residual[u]).min(residual[v]);
    for x in (0..=top).rev() {
        residual[u] -= x;
        residual[v] -= x;
        search(g, e + 1, size + x, rest, residual, best);
        residual[u] += x;
        residual[v] += x;
    }
}

/// Allocation counts by size, and per-vertex occupancy totals by size.
#[derive(Debug, Clone)]
pub struct GibbsPolynomial {
    /// `counts[s]`: number of allocations of size `s`.
    pub counts: Vec<f64>,
    /// `occupancy[v][s]`: summed load at `v` over allocations of size `s`.
    pub occupancy: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct GibbsSummary {
    pub occupancy: Vec<f64>,
    pub partition: f64,
    pub log_partition: f64,
}

impl GibbsSummary {
    /// Half the summed occupancy, i.e. the expected allocation size.
    pub fn mean_size(&self) -> f64 {
        0.5 * self.occupancy.iter().sum::<f64>()
    }
}

impl GibbsPolynomial {
    pub fn max_size(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn at(&self, lambda: f64) -> GibbsSummary {
        assert!(lambda > 0.0, "λ must be positive");
        let ln = lambda.ln();
        let logs: Vec<f64> = self
            .counts
            .iter()
            .enumerate()
            .map(|(s, &n)| if n > 0.0 { n.ln() + s as f64 * ln } else { f64::NEG_INFINITY })
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale: Vec<f64> = (0..self.counts.len())
            .map(|s| (s as f64 * ln - top).exp())
            .collect();
        let z: f64 = self.counts.iter().zip(&scale).map(|(n, w)| n * w).sum();
        let occupancy = self
            .occupancy
            .iter()
            .map(|row| row.iter().zip(&scale).map(|(o, w)| o * w).sum::<f64>() / z)
            .collect();
        let log_partition = top + z.ln();
        GibbsSummary {
            occupancy,
            partition: log_partition.exp(),
            log_partition,
        }
    }
}

/// Enumerates every allocation once and records its size and loads.
pub fn gibbs_polynomial(g: &CapGraph) -> Result<GibbsPolynomial, GraphError> {
    guard(g)?;
    let max_total: usize = g.edge_caps().iter().sum();
    let mut poly = GibbsPolynomial {
        counts: vec![0.0; max_total + 1],
        occupancy: vec![vec![0.0; max_total + 1]; g.num_vertices()],
    };
    let mut residual = g.capacities().to_vec();
    walk(g, 0, 0, &mut residual, &mut poly);
    let last = poly.counts.iter().rposition(|&n| n > 0.0).unwrap_or(0);
    poly.counts.truncate(last + 1);
    poly.occupancy.iter_mut().for_each(|r| r.truncate(last + 1));
    Ok(poly)
}

fn walk(g: &CapGraph, e: usize, size: usize, residual: &mut [usize], poly: &mut GibbsPolynomial) {
    if e == g.num_edges() {
        poly.counts[size] += 1.0;
        for (v, row) in poly.occupancy.iter_mut().enumerate() {
            row[size] += (g.b(v) - residual[v]) as f64;
        }
        return;
    }
    let (u, v) = g.ends(e);
    let top = g.c(e).min(residual[u]).min(residual[v]);
    for x in 0..=top {
        residual[u] -= x;
        residual[v] -= x;
        walk(g, e + 1, size + x, residual, poly);
        residual[u] += x;
        residual[v] += x;
    }
}

/// Exact expected occupancy per vertex and partition function of the
/// measure weighting each allocation `x` by `λ^|x|`.
pub fn gibbs_brute(g: &CapGraph, lambda: f64) -> Result<GibbsSummary, GraphError> {
    Ok(gibbs_polynomial(g)?.at(lambda))
}
