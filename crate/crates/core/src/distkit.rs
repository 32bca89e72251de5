//! Finite-support integer distributions and the upshifted likelihood-ratio
//! (lr↑) toolkit used by every message-passing operator.
//!
//! A [`FiniteDist`] is a probability mass function on `{min, …, max}` with
//! strictly positive weights at both ends. Sequences that are not
//! normalized (vertex-side indicator vectors, tilting vectors, reversed
//! cumulative sums) are plain `&[f64]` indexed from zero.

use std::fmt;

use thiserror::Error;

/// Relative slack applied to every lr↑ / log-concavity product comparison.
pub const LR_SLACK: f64 = 1e-9;

/// Normalization tolerance for constructed distributions.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("distribution has no positive mass")]
    Empty,
    #[error("weight at index {index} is negative or not finite ({value})")]
    InvalidWeight { index: usize, value: f64 },
    #[error("support has a zero-weight interior point at {at}")]
    GappedSupport { at: usize },
    #[error("reweighting vector and distribution have disjoint supports")]
    DisjointSupports,
}

/// Probability mass function on a bounded integer range.
#[derive(Clone, PartialEq)]
pub struct FiniteDist {
    min: usize,
    weights: Vec<f64>,
}

impl fmt::Debug for FiniteDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteDist{{{}: {:?}}}", self.min, self.weights)
    }
}

impl FiniteDist {
    /// Builds a distribution with interval support starting at `min`.
    ///
    /// Weights are normalized and zero entries at either end are trimmed;
    /// an interior zero is rejected.
    pub fn new(min: usize, weights: Vec<f64>) -> Result<Self, DistError> {
        let d = Self::from_raw(min, weights)?;
        if let Some(at) = d.first_gap() {
            return Err(DistError::GappedSupport { at });
        }
        Ok(d)
    }

    /// Like [`FiniteDist::new`] but allows zero weights inside the support.
    pub fn from_raw(min: usize, weights: Vec<f64>) -> Result<Self, DistError> {
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(DistError::InvalidWeight { index, value });
            }
        }
        Self::trimmed(min, weights).ok_or(DistError::Empty)
    }

    /// Dense weights indexed from zero.
    pub fn from_dense(weights: &[f64]) -> Result<Self, DistError> {
        Self::new(0, weights.to_vec())
    }

    /// Point mass at `k`.
    pub fn point(k: usize) -> Self {
        FiniteDist {
            min: k,
            weights: vec![1.0],
        }
    }

    /// Uniform distribution on `{lo, …, hi}`.
    pub fn uniform(lo: usize, hi: usize) -> Self {
        assert!(lo <= hi, "empty uniform range");
        let n = hi - lo + 1;
        FiniteDist {
            min: lo,
            weights: vec![1.0 / n as f64; n],
        }
    }

    // Trims zero ends and normalizes. Assumes weights already validated.
    pub(crate) fn trimmed(min: usize, mut weights: Vec<f64>) -> Option<Self> {
        let first = weights.iter().position(|&w| w > 0.0)?;
        let last = weights.iter().rposition(|&w| w > 0.0)?;
        weights.truncate(last + 1);
        weights.drain(..first);
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return None;
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Some(FiniteDist {
            min: min + first,
            weights,
        })
    }

    fn first_gap(&self) -> Option<usize> {
        self.weights
            .iter()
            .position(|&w| w <= 0.0)
            .map(|i| self.min + i)
    }

    /// Infimum of the support (α in the message-passing notation).
    pub fn support_min(&self) -> usize {
        self.min
    }

    /// Supremum of the support (β in the message-passing notation).
    pub fn support_max(&self) -> usize {
        self.min + self.weights.len() - 1
    }

    /// Weights on `{support_min, …, support_max}`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pmf(&self, x: usize) -> f64 {
        if x < self.min {
            return 0.0;
        }
        self.weights.get(x - self.min).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| (self.min + i, w))
    }

    /// Weights indexed from zero up to `support_max`.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.min];
        out.extend_from_slice(&self.weights);
        out
    }

    pub fn is_point(&self) -> bool {
        self.weights.len() == 1
    }

    /// True when no interior weight is zero.
    pub fn has_interval_support(&self) -> bool {
        self.first_gap().is_none()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(x, p)| x as f64 * p).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn l1_distance(&self, other: &FiniteDist) -> f64 {
        let lo = self.min.min(other.min);
        let hi = self.support_max().max(other.support_max());
        (lo..=hi)
            .map(|x| (self.pmf(x) - other.pmf(x)).abs())
            .sum()
    }

    pub fn tv_distance(&self, other: &FiniteDist) -> f64 {
        0.5 * self.l1_distance(other)
    }
}

#[inline]
fn le_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + LR_SLACK * lhs.max(rhs)
}

#[inline]
fn lt_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs < rhs - LR_SLACK * lhs.max(rhs)
}

#[inline]
fn at(seq: &[f64], i: usize) -> f64 {
    seq.get(i).copied().unwrap_or(0.0)
}

/// `a ≤lr↑ b` for non-negative sequences indexed from zero:
/// `a(i+k+l)·b(i) ≤ a(i+l)·b(i+k)` for all `i, l ≥ 0`, `k ≥ 1`.
pub fn lr_le_seq(a: &[f64], b: &[f64]) -> bool {
    for (i, &bi) in b.iter().enumerate() {
        if bi <= 0.0 {
            continue;
        }
        for j in (i + 1)..a.len() {
            let aj = a[j];
            if aj <= 0.0 {
                continue;
            }
            let lhs = aj * bi;
            // j = i + k + l with k ≥ 1
            for k in 1..=(j - i) {
                let l = j - i - k;
                if !le_with_slack(lhs, at(a, i + l) * at(b, i + k)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Strict variant: ordered, and at least one comparison strict beyond slack.
pub fn lr_lt_seq(a: &[f64], b: &[f64]) -> bool {
    if !lr_le_seq(a, b) {
        return false;
    }
    let n = a.len().max(b.len());
    for i in 0..n {
        for k in 1..n {
            for l in 0..n {
                if i + k + l >= n {
                    break;
                }
                if lt_with_slack(at(a, i + k + l) * at(b, i), at(a, i + l) * at(b, i + k)) {
                    return true;
                }
            }
        }
    }
    false
}

/// `m ≤lr↑ m2`.
pub fn lr_le(m: &FiniteDist, m2: &FiniteDist) -> bool {
    lr_le_seq(&m.to_dense(), &m2.to_dense())
}

/// `m <lr↑ m2`: ordered with at least one strict comparison.
pub fn lr_lt(m: &FiniteDist, m2: &FiniteDist) -> bool {
    lr_lt_seq(&m.to_dense(), &m2.to_dense())
}

/// Interval support and `p(i)·p(i+2) ≤ p(i+1)²`.
pub fn is_log_concave(m: &FiniteDist) -> bool {
    if !m.has_interval_support() {
        return false;
    }
    m.weights()
        .windows(3)
        .all(|w| le_with_slack(w[0] * w[2], w[1] * w[1]))
}

/// Convolution of two non-negative sequences indexed from zero.
pub fn convolve_seq(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn convolve_pair(a: &FiniteDist, b: &FiniteDist) -> FiniteDist {
    let w = convolve_seq(&a.weights, &b.weights);
    FiniteDist::trimmed(a.min + b.min, w).expect("convolution of distributions has mass")
}

/// Law of the sum of independent draws. The empty sum is `δ_0`.
pub fn convolve<'a, I>(ms: I) -> FiniteDist
where
    I: IntoIterator<Item = &'a FiniteDist>,
{
    ms.into_iter()
        .fold(FiniteDist::point(0), |acc, m| convolve_pair(&acc, m))
}

/// `m·p(x) = m(x)p(x) / Σ m(y)p(y)` with `p` indexed from zero.
pub fn reweight(m: &FiniteDist, p: &[f64]) -> Result<FiniteDist, DistError> {
    reweight_with(m, |x| at(p, x))
}

/// Reweighting by a function of the integer point.
pub fn reweight_with<F>(m: &FiniteDist, p: F) -> Result<FiniteDist, DistError>
where
    F: Fn(usize) -> f64,
{
    let w: Vec<f64> = m.iter().map(|(x, mx)| mx * p(x)).collect();
    for (i, &v) in w.iter().enumerate() {
        if !(v.is_finite() && v >= 0.0) {
            return Err(DistError::InvalidWeight {
                index: m.min + i,
                value: v,
            });
        }
    }
    FiniteDist::trimmed(m.min, w).ok_or(DistError::DisjointSupports)
}

/// Reweighting of an unnormalized sequence by another.
pub fn reweight_seq(m: &[f64], p: &[f64]) -> Result<FiniteDist, DistError> {
    let w: Vec<f64> = m.iter().enumerate().map(|(x, &mx)| mx * at(p, x)).collect();
    for (index, &value) in w.iter().enumerate() {
        if !(value.is_finite() && value >= 0.0) {
            return Err(DistError::InvalidWeight { index, value });
        }
    }
    FiniteDist::trimmed(0, w).ok_or(DistError::DisjointSupports)
}

/// Geometric tilt `λ^ℕ · m`, evaluated in the log domain so that large
/// `λ^x` factors cannot overflow.
pub fn tilt(m: &FiniteDist, lambda: f64) -> FiniteDist {
    assert!(lambda > 0.0 && lambda.is_finite(), "tilt needs a finite λ > 0");
    let ln = lambda.ln();
    let logs: Vec<f64> = m
        .iter()
        .map(|(x, p)| {
            if p > 0.0 {
                p.ln() + x as f64 * ln
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = logs.iter().map(|&l| (l - top).exp()).collect();
    FiniteDist::trimmed(m.min, w).expect("tilt keeps the maximal atom")
}

/// `p^R(x) = p(b − x)·1(x ≤ b)`, returned on `{0, …, b}`.
pub fn shifted_reversal(p: &[f64], b: usize) -> Vec<f64> {
    (0..=b).map(|x| at(p, b - x)).collect()
}
