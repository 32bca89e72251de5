#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use capalloc::distkit::{lr_le, tilt, FiniteDist};
use capalloc::graph::CapGraph;
use capalloc::limits::{Atom, VertexLaw};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random bipartite multigraph on at most `n_max` vertices.
pub fn random_bipartite(r: &mut ChaCha8Rng, n_max: usize, b_max: usize, c_max: usize) -> CapGraph {
    let na = r.random_range(1..=n_max / 2);
    let nb = r.random_range(1..=n_max - na);
    let mean_deg = r.random_range(1.0..4.0);
    let p = (mean_deg / nb as f64).min(1.0);
    let mut edges = Vec::new();
    for a in 0..na {
        for b in 0..nb {
            if r.random_bool(p) {
                edges.push((a, b, r.random_range(0..=c_max)));
                if r.random_bool(0.05) {
                    edges.push((a, b, r.random_range(0..=c_max)));
                }
            }
        }
    }
    let ba = (0..na).map(|_| r.random_range(0..=b_max)).collect();
    let bb = (0..nb).map(|_| r.random_range(0..=b_max)).collect();
    CapGraph::bipartite(ba, bb, &edges).unwrap()
}

/// Uniform random recursive tree with `n` vertices.
pub fn random_tree(r: &mut ChaCha8Rng, n: usize, b_max: usize, c_max: usize) -> CapGraph {
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(r);
    let edges: Vec<_> = (1..n)
        .map(|i| (label[i], label[r.random_range(0..i)], r.random_range(0..=c_max)))
        .collect();
    let b = (0..n).map(|_| r.random_range(0..=b_max)).collect();
    CapGraph::new(b, &edges).unwrap()
}

/// Connected graph with at least one cycle; odd cycles are common.
pub fn random_loopy(r: &mut ChaCha8Rng, n: usize, extra: usize, b_max: usize, c_max: usize) -> CapGraph {
    let mut edges: Vec<_> = (1..n).map(|i| (i, r.random_range(0..i), r.random_range(1..=c_max))).collect();
    let mut added = 0;
    while added < extra.max(1) {
        let (u, v) = (r.random_range(0..n), r.random_range(0..n));
        if u != v {
            edges.push((u, v, r.random_range(1..=c_max)));
            added += 1;
        }
    }
    let b = (0..n).map(|_| r.random_range(1..=b_max)).collect();
    CapGraph::new(b, &edges).unwrap()
}

/// Arbitrary small multigraph with `m` edges on at most `n` vertices.
pub fn random_small(r: &mut ChaCha8Rng, n: usize, m: usize, b_max: usize, c_max: usize) -> CapGraph {
    let mut edges = Vec::new();
    while edges.len() < m {
        let (u, v) = (r.random_range(0..n), r.random_range(0..n));
        if u != v {
            edges.push((u, v, r.random_range(0..=c_max)));
        }
    }
    let b = (0..n).map(|_| r.random_range(0..=b_max)).collect();
    CapGraph::new(b, &edges).unwrap()
}

/// Log-concave law on `{s, …, s + len − 1}` from decreasing log-increments.
pub fn log_concave(r: &mut ChaCha8Rng, s: usize, len: usize) -> FiniteDist {
    let mut inc: Vec<f64> = (1..len).map(|_| r.random_range(-3.0..3.0)).collect();
    inc.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut w = vec![1.0];
    for d in inc {
        let last = *w.last().unwrap();
        w.push(last * f64::exp(d));
    }
    FiniteDist::new(s, w).unwrap()
}

/// Log-concave law with 0 in its support.
pub fn lc0(r: &mut ChaCha8Rng, max_len: usize) -> FiniteDist {
    let len = r.random_range(1..=max_len);
    log_concave(r, 0, len)
}

/// Interval support containing 0, arbitrary positive weights.
pub fn p0(r: &mut ChaCha8Rng, max_len: usize) -> FiniteDist {
    let len = r.random_range(1..=max_len);
    FiniteDist::from_dense(&(0..len).map(|_| r.random_range(0.01..1.0)).collect::<Vec<_>>()).unwrap()
}

/// Any distribution with interval support inside `{0, …, max_len + 1}`.
pub fn arbitrary(r: &mut ChaCha8Rng, max_len: usize) -> FiniteDist {
    let s = r.random_range(0..=2);
    let len = r.random_range(1..=max_len);
    FiniteDist::new(s, (0..len).map(|_| r.random_range(0.01..1.0)).collect()).unwrap()
}

fn candidate_pair(r: &mut ChaCha8Rng, max_len: usize, lc: bool) -> (FiniteDist, FiniteDist) {
    match r.random_range(0..5) {
        // tilt upward, then cut from below
        0 | 1 => {
            let m = if lc { lc0(r, max_len) } else { p0(r, max_len) };
            let mut up = tilt(&m, r.random_range(1.0..4.0));
            let cut = r.random_range(0..=up.support_max().min(1));
            if cut > 0 {
                let w: Vec<f64> = (0..=up.support_max()).map(|x| if x >= cut { up.pmf(x) } else { 0.0 }).collect();
                up = FiniteDist::from_raw(0, w).unwrap();
            }
            (m, up)
        }
        // point masses sit at the ends of the order
        2 => {
            let m = if lc { lc0(r, max_len) } else { p0(r, max_len) };
            if r.random_bool(0.5) {
                (FiniteDist::point(0), m)
            } else {
                let top = m.support_max() + r.random_range(0..2);
                (m, FiniteDist::point(top))
            }
        }
        _ => {
            if lc {
                (lc0(r, max_len), lc0(r, max_len))
            } else {
                (p0(r, max_len), p0(r, max_len))
            }
        }
    }
}

/// `(m, m')` with `m ≤lr↑ m'`, both with 0 in their support unless one is a
/// point mass at the top; log-concave when `lc`.
pub fn ordered_pair(r: &mut ChaCha8Rng, max_len: usize, lc: bool) -> (FiniteDist, FiniteDist) {
    loop {
        let (a, b) = candidate_pair(r, max_len, lc);
        if lr_le(&a, &b) {
            return (a, b);
        }
    }
}

/// Random law where every edge has capacity 1 and the mean degree is
/// positive.
pub fn unit_law(r: &mut ChaCha8Rng) -> VertexLaw {
    let k = r.random_range(1..=3);
    let mut atoms: Vec<Atom> = (0..k)
        .map(|_| {
            let d = r.random_range(0..=4);
            Atom { p: r.random_range(0.1..1.0), d, w: r.random_range(0..=3), caps: vec![1; d] }
        })
        .collect();
    if atoms.iter().all(|a| a.d == 0) {
        atoms[0].d = 2;
        atoms[0].caps = vec![1; 2];
    }
    VertexLaw::new(atoms).unwrap()
}

fn binom_pmf(n: usize, q: f64) -> Vec<f64> {
    let mut p = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; p.len() + 1];
        for (i, &x) in p.iter().enumerate() {
            next[i] += x * (1.0 - q);
            next[i + 1] += x * q;
        }
        p = next;
    }
    p
}

/// `Σ p̃ P(Bin(d − 1, q) < w)` over the degree-biased law.
fn pass_prob(law: &VertexLaw, q: f64) -> f64 {
    let norm: f64 = law.atoms().iter().map(|a| a.p * a.d as f64).sum();
    law.atoms()
        .iter()
        .filter(|a| a.d > 0)
        .map(|a| {
            let pmf = binom_pmf(a.d - 1, q);
            a.p * a.d as f64 / norm * pmf.iter().take(a.w).sum::<f64>()
        })
        .sum()
}

/// Limit value for unit edge capacities, where every message is a
/// Bernoulli variable. Solves the scalar recursion directly: finds every
/// fixed point of `x ↦ g_B(g_A(x))` on `[0, 1]` by a fine scan plus
/// bisection, and minimizes the closed-form functional over them.
pub fn unit_capacity_oracle(a: &VertexLaw, b: &VertexLaw) -> f64 {
    let ga = |x: f64| pass_prob(a, x);
    let gb = |y: f64| pass_prob(b, y);
    let h = |x: f64| gb(ga(x)) - x;
    let mut roots = Vec::new();
    let grid = 4000;
    let mut prev = (0.0, h(0.0));
    if prev.1.abs() < 1e-15 {
        roots.push(0.0);
    }
    for i in 1..=grid {
        let x = i as f64 / grid as f64;
        let hx = h(x);
        if hx.abs() < 1e-15 {
            roots.push(x);
        } else if prev.1 * hx < 0.0 {
            let (mut lo, mut hi) = (prev.0, x);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (h(mid) < 0.0) == (h(lo) < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = (x, hx);
    }
    assert!(!roots.is_empty(), "a continuous self-map of [0, 1] has a fixed point");
    let ratio = a.mean_degree() / b.mean_degree();
    roots
        .into_iter()
        .map(|x| {
            let y = ga(x);
            let first: f64 = a
                .atoms()
                .iter()
                .map(|t| {
                    let pmf = binom_pmf(t.d, x);
                    t.p * pmf.iter().enumerate().map(|(s, p)| p * s.min(t.w) as f64).sum::<f64>()
                })
                .sum();
            // only a full Y-sum above w leaves capacity idle
            let second: f64 = b
                .atoms()
                .iter()
                .filter(|t| t.w < t.d)
                .map(|t| {
                    let pmf = binom_pmf(t.d, y);
                    t.p * t.w as f64 * pmf.iter().skip(t.w + 1).sum::<f64>()
                })
                .sum();
            first + ratio * second
        })
        .fold(f64::INFINITY, f64::min)
}
