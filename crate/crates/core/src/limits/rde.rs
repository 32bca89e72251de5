use crate::distkit::FiniteDist;

use super::law::{check_consistency, size_biased, Atom, VertexLaw};
use super::LawError;

/// Default fixed-point tolerance (total variation per capacity class).
pub const RDE_TOL: f64 = 1e-12;
/// Default sweep cap for the fixed-point iteration.
pub const RDE_MAX_SWEEPS: usize = 100_000;

/// Laws of `X(c)` and `Y(c)` for every capacity class `c`, as dense
/// vectors on `{0, …, c}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLawPair {
    classes: Vec<usize>,
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
}

fn point(k: usize) -> Vec<f64> {
    let mut v = vec![0.0; k + 1];
    v[k] = 1.0;
    v
}

impl EdgeLawPair {
    /// `X(c) = δ_0` and `Y(c) = δ_0` for every class.
    pub fn low(classes: &[usize]) -> Self {
        EdgeLawPair {
            classes: classes.to_vec(),
            x: classes.iter().map(|_| point(0)).collect(),
            y: classes.iter().map(|_| point(0)).collect(),
        }
    }

    /// `X(c) = δ_c` and `Y(c) = δ_c` for every class.
    pub fn high(classes: &[usize]) -> Self {
        EdgeLawPair {
            classes: classes.to_vec(),
            x: classes.iter().map(|&c| point(c)).collect(),
            y: classes.iter().map(|&c| point(c)).collect(),
        }
    }

    /// Builds a pair from explicit laws; each vector must have length `c + 1`.
    pub fn from_laws(classes: Vec<usize>, x: Vec<Vec<f64>>, y: Vec<Vec<f64>>) -> Result<Self, LawError> {
        for (k, &c) in classes.iter().enumerate() {
            for v in [&x[k], &y[k]] {
                if v.len() != c + 1 {
                    return Err(LawError::BadEdgeLaw { c });
                }
            }
        }
        Ok(EdgeLawPair { classes, x, y })
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    fn index(&self, c: usize) -> Option<usize> {
        self.classes.iter().position(|&k| k == c)
    }

    pub fn x(&self, c: usize) -> Option<&[f64]> {
        self.index(c).map(|k| self.x[k].as_slice())
    }

    pub fn y(&self, c: usize) -> Option<&[f64]> {
        self.index(c).map(|k| self.y[k].as_slice())
    }

    pub fn x_dist(&self, c: usize) -> Option<FiniteDist> {
        self.x(c).map(|v| FiniteDist::from_raw(0, v.to_vec()).expect("law has mass"))
    }

    pub fn y_dist(&self, c: usize) -> Option<FiniteDist> {
        self.y(c).map(|v| FiniteDist::from_raw(0, v.to_vec()).expect("law has mass"))
    }

    /// Largest total-variation distance over all `X(c)` and `Y(c)`.
    pub fn tv_distance(&self, other: &EdgeLawPair) -> f64 {
        let tv = |a: &[f64], b: &[f64]| 0.5 * a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum::<f64>();
        self.x
            .iter()
            .zip(&other.x)
            .chain(self.y.iter().zip(&other.y))
            .map(|(a, b)| tv(a, b))
            .fold(0.0, f64::max)
    }
}

// Convolution of non-negative vectors where the last bin of the result
// holds all mass at `cap` and above.
fn capped_conv(a: &[f64], b: &[f64], cap: usize) -> Vec<f64> {
    let len = (a.len() + b.len() - 1).min(cap + 1);
    let mut out = vec![0.0; len];
    for (i, &p) in a.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (j, &q) in b.iter().enumerate() {
            out[(i + j).min(cap)] += p * q;
        }
    }
    out
}

fn lump(mut v: Vec<f64>, cap: usize) -> Vec<f64> {
    if v.len() > cap + 1 {
        let tail: f64 = v[cap + 1..].iter().sum();
        v.truncate(cap + 1);
        v[cap] += tail;
    }
    v
}

#[derive(Debug, Clone)]
struct Compiled {
    p: f64,
    w: usize,
    // (class index, multiplicity)
    counts: Vec<(usize, usize)>,
    // class index per edge
    items: Vec<usize>,
}

fn compile(atoms: &[Atom], classes: &[usize]) -> Vec<Compiled> {
    atoms
        .iter()
        .map(|a| {
            let items: Vec<usize> = a
                .caps
                .iter()
                .map(|c| classes.iter().position(|k| k == c).expect("known class"))
                .collect();
            let mut counts: Vec<(usize, usize)> = Vec::new();
            for &k in &items {
                match counts.iter_mut().find(|(j, _)| *j == k) {
                    Some((_, n)) => *n += 1,
                    None => counts.push((k, 1)),
                }
            }
            Compiled { p: a.p, w: a.w, counts, items }
        })
        .collect()
}

// Capped convolution powers of the per-class laws, built on demand.
struct Powers<'a> {
    laws: &'a [Vec<f64>],
    cap: usize,
    table: Vec<Vec<Vec<f64>>>,
}

impl<'a> Powers<'a> {
    fn new(laws: &'a [Vec<f64>], cap: usize) -> Self {
        Powers {
            laws,
            cap,
            table: laws.iter().map(|_| vec![vec![1.0]]).collect(),
        }
    }

    fn get(&mut self, k: usize, n: usize) -> &[f64] {
        while self.table[k].len() <= n {
            let last = self.table[k].last().unwrap();
            let next = capped_conv(last, &self.laws[k], self.cap);
            self.table[k].push(next);
        }
        &self.table[k][n]
    }

    // law of the sum over the atom's edges, capped at `w`
    fn sum_law(&mut self, atom: &Compiled, w: usize) -> Vec<f64> {
        let mut acc = vec![1.0];
        for &(k, n) in &atom.counts {
            let pw = lump(self.get(k, n).to_vec(), w);
            acc = capped_conv(&acc, &pw, w);
        }
        acc
    }
}

/// Precompiled size-biased laws for repeated RDE sweeps.
#[derive(Debug, Clone)]
pub struct RdeSystem {
    classes: Vec<usize>,
    sb_a: Vec<Vec<Compiled>>,
    sb_b: Vec<Vec<Compiled>>,
    atoms_a: Vec<Compiled>,
    atoms_b: Vec<Compiled>,
    ratio: f64,
}

impl RdeSystem {
    pub fn new(phi_a: &VertexLaw, phi_b: &VertexLaw) -> Result<Self, LawError> {
        if !check_consistency(phi_a, phi_b) {
            return Err(LawError::Inconsistent);
        }
        let classes: Vec<usize> = phi_a.cap_classes().union(&phi_b.cap_classes()).copied().collect();
        let mut sb_a = Vec::new();
        let mut sb_b = Vec::new();
        for &c in &classes {
            sb_a.push(compile(&size_biased(phi_a, c)?.atoms, &classes));
            sb_b.push(compile(&size_biased(phi_b, c)?.atoms, &classes));
        }
        let (da, db) = (phi_a.mean_degree(), phi_b.mean_degree());
        Ok(RdeSystem {
            sb_a,
            sb_b,
            atoms_a: compile(phi_a.atoms(), &classes),
            atoms_b: compile(phi_b.atoms(), &classes),
            ratio: if db > 0.0 { da / db } else { 0.0 },
            classes,
        })
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    // law of [w − Σ incoming]_0^c mixed over the size-biased atoms
    fn half(&self, sb: &[Compiled], incoming: &[Vec<f64>], c: usize) -> Vec<f64> {
        let cap = sb.iter().map(|a| a.w).max().unwrap_or(0);
        let mut powers = Powers::new(incoming, cap);
        let mut out = vec![0.0; c + 1];
        for atom in sb {
            let s = powers.sum_law(atom, atom.w);
            for (v, &p) in s.iter().enumerate() {
                // v == w lumps every sum ≥ w, all mapped to 0
                out[(atom.w - v).min(c)] += atom.p * p;
            }
        }
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|v| *v /= total);
        out
    }

    /// One application: `Y` from the current `X` through the A side, then
    /// `X` from the new `Y` through the B side.
    pub fn step(&self, pair: &EdgeLawPair) -> EdgeLawPair {
        let y: Vec<Vec<f64>> = self
            .classes
            .iter()
            .enumerate()
            .map(|(k, &c)| self.half(&self.sb_a[k], &pair.x, c))
            .collect();
        let x: Vec<Vec<f64>> = self
            .classes
            .iter()
            .enumerate()
            .map(|(k, &c)| self.half(&self.sb_b[k], &y, c))
            .collect();
        EdgeLawPair {
            classes: self.classes.clone(),
            x,
            y,
        }
    }

    /// Limit functional evaluated at `pair`.
    pub fn functional(&self, pair: &EdgeLawPair) -> f64 {
        let cap_a = self.atoms_a.iter().map(|a| a.w).max().unwrap_or(0);
        let mut powers = Powers::new(&pair.x, cap_a);
        // E[min(W, Σ X_i)]
        let term1: f64 = self
            .atoms_a
            .iter()
            .map(|a| {
                let s = powers.sum_law(a, a.w);
                a.p * s.iter().enumerate().map(|(v, &p)| v as f64 * p).sum::<f64>()
            })
            .sum();
        if self.ratio == 0.0 {
            return term1;
        }
        let term2: f64 = self
            .atoms_b
            .iter()
            .map(|a| a.p * self.leave_one_out(a, &pair.y))
            .sum();
        term1 + self.ratio * term2
    }

    // E[(w − Σ_i [w − Σ_{j≠i} Y_j]_0^{c_i})^+] for one B atom, zero unless
    // w < Σ c_i. With T = Σ Y_j the bracket equals (Y_i − (T − w))^+ when
    // T > w, and the whole expression vanishes when T ≤ w. Once T − w
    // reaches the largest capacity every bracket is 0 and the value is w.
    fn leave_one_out(&self, atom: &Compiled, y: &[Vec<f64>]) -> f64 {
        let w = atom.w;
        let cap_sum: usize = atom.items.iter().map(|&k| self.classes[k]).sum();
        if w >= cap_sum {
            return 0.0;
        }
        let cmax = atom.items.iter().map(|&k| self.classes[k]).max().unwrap_or(0);
        let top = w + cmax;
        let mut t_law = vec![1.0];
        for &k in &atom.items {
            t_law = capped_conv(&t_law, &y[k], top);
        }
        let mut value = w as f64 * t_law.get(top).copied().unwrap_or(0.0);
        for e in 1..cmax {
            let t = w + e;
            // dp[s][f]: partial sum s ≤ t, partial Σ (Y_i − e)^+ capped at w
            let mut dp = vec![vec![0.0; w + 1]; t + 1];
            dp[0][0] = 1.0;
            for &k in &atom.items {
                let mut next = vec![vec![0.0; w + 1]; t + 1];
                for (s, row) in dp.iter().enumerate() {
                    for (f, &p) in row.iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        for (yv, &q) in y[k].iter().enumerate() {
                            if s + yv > t {
                                break;
                            }
                            let nf = (f + yv.saturating_sub(e)).min(w);
                            next[s + yv][nf] += p * q;
                        }
                    }
                }
                dp = next;
            }
            value += dp[t].iter().enumerate().map(|(f, &p)| (w - f) as f64 * p).sum::<f64>();
        }
        value
    }

    /// Iterates [`RdeSystem::step`] until successive pairs are within `tol`.
    pub fn iterate(&self, start: EdgeLawPair, tol: f64, max_sweeps: usize) -> FixedPoint {
        let mut cur = start;
        let mut residual = f64::INFINITY;
        for sweep in 1..=max_sweeps {
            let next = self.step(&cur);
            residual = next.tv_distance(&cur);
            cur = next;
            if residual <= tol {
                return FixedPoint { pair: cur, sweeps: sweep, residual, converged: true };
            }
        }
        FixedPoint { pair: cur, sweeps: max_sweeps, residual, converged: false }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub pair: EdgeLawPair,
    pub sweeps: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Both extremal fixed points and the functional at each.
#[derive(Debug, Clone)]
pub struct LimitReport {
    /// Minimum of the functional over every fixed point found.
    pub value: f64,
    /// Functional at the fixed point reached from `X ≡ δ_0`.
    pub low: f64,
    /// Functional at the fixed point reached from `X ≡ δ_c`.
    pub high: f64,
    /// Total-variation gap between the two fixed points.
    pub gap: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub low_point: EdgeLawPair,
    pub high_point: EdgeLawPair,
    /// Fixed points strictly between the extremal ones.
    pub interior: Vec<InteriorPoint>,
}

/// A fixed point between the extremal ones, attracting or not.
#[derive(Debug, Clone)]
pub struct InteriorPoint {
    pub value: f64,
    /// `TV(step(x), x)` at the reported point.
    pub residual: f64,
    pub point: EdgeLawPair,
}

/// Starts placed on the segment between the extremal fixed points.
const INTERIOR_GRID: usize = 8;
/// Bisection steps between starts that end at different fixed points.
const INTERIOR_BISECTIONS: usize = 56;
/// Fixed points closer than this in total variation are the same.
const SAME_POINT: f64 = 1e-7;
/// Largest residual accepted for an unstable fixed point.
const INTERIOR_RESIDUAL: f64 = 1e-9;

fn mix(a: &EdgeLawPair, b: &EdgeLawPair, theta: f64) -> EdgeLawPair {
    let blend = |u: &[Vec<f64>], v: &[Vec<f64>]| -> Vec<Vec<f64>> {
        u.iter()
            .zip(v)
            .map(|(p, q)| p.iter().zip(q).map(|(x, y)| (1.0 - theta) * x + theta * y).collect())
            .collect()
    };
    EdgeLawPair { classes: a.classes.clone(), x: blend(&a.x, &b.x), y: blend(&a.y, &b.y) }
}

impl RdeSystem {
    // Follows the orbit of `start` until it settles near one of `known`
    // (returning its index) or converges elsewhere (appended to `known`).
    // Tracks the orbit point with the smallest residual away from `known`
    // in `best`.
    fn classify(
        &self,
        start: EdgeLawPair,
        known: &mut Vec<EdgeLawPair>,
        best: &mut Option<(f64, EdgeLawPair)>,
        tol: f64,
        max_sweeps: usize,
    ) -> Option<usize> {
        let mut cur = start;
        for _ in 0..max_sweeps {
            let next = self.step(&cur);
            let residual = next.tv_distance(&cur);
            cur = next;
            let near = known.iter().position(|k| k.tv_distance(&cur) <= SAME_POINT);
            if near.is_none() && best.as_ref().is_none_or(|(r, _)| residual < *r) {
                *best = Some((residual, cur.clone()));
            }
            if let Some(i) = near {
                // settle fully before trusting the label
                if residual <= tol || known[i].tv_distance(&cur) <= SAME_POINT * 1e-3 {
                    return Some(i);
                }
            } else if residual <= tol {
                known.push(cur);
                return Some(known.len() - 1);
            }
        }
        None
    }

    /// Fixed points between `lo` and `hi`: attracting ones reached from
    /// starts on the segment between them, and unstable ones on the
    /// boundaries between their basins, located by bisection along it.
    fn interior_points(&self, lo: &EdgeLawPair, hi: &EdgeLawPair, tol: f64, max_sweeps: usize) -> Vec<InteriorPoint> {
        let mut known = vec![lo.clone(), hi.clone()];
        let mut labels = Vec::with_capacity(INTERIOR_GRID + 1);
        for i in 0..=INTERIOR_GRID {
            let theta = i as f64 / INTERIOR_GRID as f64;
            labels.push(self.classify(mix(lo, hi, theta), &mut known, &mut None, tol, max_sweeps));
        }
        let mut found: Vec<(f64, EdgeLawPair)> = Vec::new();
        for i in 0..INTERIOR_GRID {
            let (Some(mut left), Some(right)) = (labels[i], labels[i + 1]) else {
                continue;
            };
            if left == right {
                continue;
            }
            let (mut a, mut b) = (i as f64 / INTERIOR_GRID as f64, (i + 1) as f64 / INTERIOR_GRID as f64);
            let mut best = None;
            for _ in 0..INTERIOR_BISECTIONS {
                let mid = 0.5 * (a + b);
                match self.classify(mix(lo, hi, mid), &mut known, &mut best, tol, max_sweeps) {
                    Some(l) if l == left => a = mid,
                    Some(l) if l == right => b = mid,
                    Some(l) => {
                        left = l;
                        a = mid;
                    }
                    None => break,
                }
            }
            if let Some((r, p)) = best {
                if r <= INTERIOR_RESIDUAL {
                    found.push((r, p));
                }
            }
        }
        found.extend(known.drain(2..).map(|p| (self.step(&p).tv_distance(&p), p)));
        let mut out: Vec<InteriorPoint> = Vec::new();
        for (residual, point) in found {
            let seen = out.iter().map(|q| &q.point).chain([lo, hi]).any(|q| q.tv_distance(&point) <= SAME_POINT);
            if seen {
                continue;
            }
            out.push(InteriorPoint { value: self.functional(&point), residual, point });
        }
        out
    }
}

/// One RDE sweep for the given laws.
pub fn rde_step(pair: &EdgeLawPair, phi_a: &VertexLaw, phi_b: &VertexLaw) -> Result<EdgeLawPair, LawError> {
    Ok(RdeSystem::new(phi_a, phi_b)?.step(pair))
}

pub fn limit_functional(pair: &EdgeLawPair, phi_a: &VertexLaw, phi_b: &VertexLaw) -> Result<f64, LawError> {
    Ok(RdeSystem::new(phi_a, phi_b)?.functional(pair))
}

/// Runs both extremal iterations, then searches between their limits for
/// further fixed points, and reports without failing on the sweep cap;
/// `converged` tells whether both extremal runs reached `tol`.
pub fn limit_report(
    phi_a: &VertexLaw,
    phi_b: &VertexLaw,
    tol: f64,
    max_sweeps: usize,
) -> Result<LimitReport, LawError> {
    let sys = RdeSystem::new(phi_a, phi_b)?;
    let lo = sys.iterate(EdgeLawPair::low(sys.classes()), tol, max_sweeps);
    let hi = sys.iterate(EdgeLawPair::high(sys.classes()), tol, max_sweeps);
    let low = sys.functional(&lo.pair);
    let high = sys.functional(&hi.pair);
    let gap = lo.pair.tv_distance(&hi.pair);
    let interior = if lo.converged && hi.converged && gap > SAME_POINT {
        sys.interior_points(&lo.pair, &hi.pair, tol, max_sweeps)
    } else {
        Vec::new()
    };
    Ok(LimitReport {
        value: interior.iter().map(|p| p.value).fold(low.min(high), f64::min),
        low,
        high,
        gap,
        sweeps: lo.sweeps.max(hi.sweeps),
        converged: lo.converged && hi.converged,
        low_point: lo.pair,
        high_point: hi.pair,
        interior,
    })
}

/// Limit of `M(G_n) / |A_n|` for graphs converging to the bipartite
/// Galton-Watson tree with laws `phi_a`, `phi_b`.
pub fn limit_m(phi_a: &VertexLaw, phi_b: &VertexLaw, tol: f64) -> Result<f64, LawError> {
    let r = limit_report(phi_a, phi_b, tol, RDE_MAX_SWEEPS)?;
    if !r.converged {
        return Err(LawError::NoConvergence { sweeps: r.sweeps });
    }
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capped_conv_lumps_tail() {
        let a = [0.5, 0.5];
        assert_eq!(capped_conv(&a, &a, 1), vec![0.25, 0.75]);
        assert_eq!(capped_conv(&a, &a, 5), vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn no_edges() {
        let a = VertexLaw::point(3, vec![]);
        assert_eq!(limit_m(&a, &a, RDE_TOL).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_propagation() {
        // (h, l, r) = (3, 1, 1): Y(1) = [1 − Σ_{2 items} X]_0^1 = 0 when X = δ_1
        let a = VertexLaw::point(1, vec![1, 1, 1]);
        let b = VertexLaw::poisson(1.5, 2, 1, 1e-12).unwrap();
        let sys = RdeSystem::new(&a, &b).unwrap();
        let next = sys.step(&EdgeLawPair::high(&[1]));
        assert_eq!(next.y(1).unwrap(), &[1.0, 0.0]);
        // with w = 3 the same inputs give Y = δ_1
        let a = VertexLaw::point(3, vec![1, 1, 1]);
        let b = VertexLaw::poisson(1.5, 2, 1, 1e-12).unwrap();
        let next = RdeSystem::new(&a, &b).unwrap().step(&EdgeLawPair::high(&[1]));
        assert_eq!(next.y(1).unwrap(), &[0.0, 1.0]);
    }

    #[test]
    fn rejects_inconsistent() {
        let a = VertexLaw::point(1, vec![1]);
        let b = VertexLaw::point(1, vec![2]);
        assert!(matches!(limit_m(&a, &b, RDE_TOL), Err(LawError::Inconsistent)));
    }

    #[test]
    fn perfect_matching_law() {
        let a = VertexLaw::point(1, vec![1]);
        assert!((limit_m(&a, &a, RDE_TOL).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_slack_term_when_b_never_binds() {
        // W^B ≥ Σ C^B: only the first term remains
        let a = VertexLaw::point(1, vec![1, 1]);
        let b = VertexLaw::point(5, vec![1, 1]);
        let sys = RdeSystem::new(&a, &b).unwrap();
        let pair = EdgeLawPair::from_laws(vec![1], vec![vec![0.3, 0.7]], vec![vec![0.6, 0.4]]).unwrap();
        let f = sys.functional(&pair);
        // E[min(1, Bin(2, 0.7))] = 1 − 0.09
        assert!((f - 0.91).abs() < 1e-14);
    }

    #[test]
    fn leave_one_out_matches_brute_force() {
        // B atom with w = 2, caps {1, 2, 3}, random Y laws
        let a = VertexLaw::new(vec![Atom { p: 1.0, d: 3, w: 2, caps: vec![1, 2, 3] }]).unwrap();
        let sys = RdeSystem::new(&a, &a).unwrap();
        let y = vec![vec![0.4, 0.6], vec![0.2, 0.5, 0.3], vec![0.1, 0.2, 0.3, 0.4]];
        let atom = &sys.atoms_b[0];
        let got = sys.leave_one_out(atom, &y);
        let caps = [1usize, 2, 3];
        let mut want = 0.0;
        for y0 in 0..=1usize {
            for y1 in 0..=2usize {
                for y2 in 0..=3usize {
                    let p = y[0][y0] * y[1][y1] * y[2][y2];
                    let ys = [y0, y1, y2];
                    let t: i64 = ys.iter().sum::<usize>() as i64;
                    let mut s = 0i64;
                    for i in 0..3 {
                        let inner = 2 - (t - ys[i] as i64);
                        s += inner.clamp(0, caps[i] as i64);
                    }
                    want += p * (2 - s).max(0) as f64;
                }
            }
        }
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }
}
