mod common;

use capalloc::bp::{d_local, op_s, q_local, r_local, Lambda};
use capalloc::distkit::{lr_le, reweight, shifted_reversal, FiniteDist};
use common::*;
use proptest::prelude::*;

fn dist(max_min: usize, max_len: usize) -> impl Strategy<Value = FiniteDist> {
    (0..=max_min, prop::collection::vec(0.1f64..1.0, 1..=max_len))
        .prop_map(|(s, w)| FiniteDist::new(s, w).unwrap())
}

fn incoming() -> impl Strategy<Value = Vec<FiniteDist>> {
    prop::collection::vec(dist(1, 4), 0..=3)
}

/// Every tuple of incoming values with its probability.
fn tuples(ms: &[FiniteDist]) -> Vec<(usize, f64)> {
    let mut out = vec![(0usize, 1.0f64)];
    for m in ms {
        out = out.iter().flat_map(|&(s, p)| m.iter().map(move |(x, q)| (s + x, p * q))).collect();
    }
    out
}

fn normalized(w: Vec<f64>) -> Vec<f64> {
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn l1(m: &FiniteDist, w: &[f64]) -> f64 {
    let top = m.support_max().max(w.len().saturating_sub(1));
    (0..=top).map(|x| (m.pmf(x) - w.get(x).copied().unwrap_or(0.0)).abs()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn r_matches_tuple_enumeration(ms in incoming(), b in 0usize..7, c in 0usize..5, lambda in 0.2f64..5.0) {
        let refs: Vec<&FiniteDist> = ms.iter().collect();
        let out = r_local(b, c, &refs, lambda);
        let t = tuples(&ms);
        let w: Vec<f64> = (0..=c.min(b))
            .map(|x| lambda.powi(x as i32) * t.iter().filter(|&&(s, _)| s + x <= b).map(|&(_, p)| p).sum::<f64>())
            .collect();
        if w.iter().all(|&x| x == 0.0) {
            prop_assert_eq!(out, FiniteDist::point(0));
        } else {
            prop_assert!(l1(&out, &normalized(w)) < 1e-12);
        }
    }

    #[test]
    fn r_support_is_zero_to_s(ms in incoming(), b in 0usize..7, c in 0usize..5) {
        let refs: Vec<&FiniteDist> = ms.iter().collect();
        let out = r_local(b, c, &refs, 1.0);
        let alpha: usize = ms.iter().map(|m| m.support_min()).sum();
        prop_assert_eq!(out.support_min(), 0);
        prop_assert_eq!(out.support_max(), op_s(b, c, alpha));
    }

    #[test]
    fn d_matches_tuple_enumeration(ms in incoming(), b in 0usize..7) {
        let refs: Vec<&FiniteDist> = ms.iter().collect();
        let t = tuples(&ms);
        let feasible: Vec<_> = t.iter().filter(|&&(s, _)| s <= b).collect();
        let expected = if feasible.is_empty() {
            b as f64
        } else {
            let z: f64 = feasible.iter().map(|&&(_, p)| p).sum();
            feasible.iter().map(|&&(s, p)| s as f64 * p).sum::<f64>() / z
        };
        prop_assert!((d_local(b, &refs) - expected).abs() < 1e-12);
    }

    #[test]
    fn q_at_infinity_is_the_large_lambda_limit(ms in incoming(), b in 0usize..7, c in 0usize..5) {
        let refs: Vec<&FiniteDist> = ms.iter().collect();
        let limit = q_local(b, c, &refs, Lambda::Infinite);
        let far = q_local(b, c, &refs, Lambda::Finite(1e9));
        let dense: Vec<f64> = (0..=far.support_max()).map(|x| far.pmf(x)).collect();
        prop_assert!(l1(&limit, &dense) < 1e-4, "{:?} vs {:?}", limit, far);
    }

    #[test]
    fn q_finite_is_r_of_tilted_inputs(ms in incoming(), b in 0usize..7, c in 0usize..5, lambda in 0.2f64..5.0) {
        // Q^(λ)[n](x) ∝ λ^x 1(x ≤ c) Σ_{|y| ≤ b − x} λ^{|y|} n(y)
        let refs: Vec<&FiniteDist> = ms.iter().collect();
        let out = q_local(b, c, &refs, Lambda::Finite(lambda));
        let t = tuples(&ms);
        let w: Vec<f64> = (0..=c.min(b))
            .map(|x| {
                t.iter()
                    .filter(|&&(s, _)| s + x <= b)
                    .map(|&(s, p)| lambda.powi((x + s) as i32) * p)
                    .sum::<f64>()
            })
            .collect();
        if w.iter().all(|&x| x == 0.0) {
            prop_assert_eq!(out, FiniteDist::point(0));
        } else {
            prop_assert!(l1(&out, &normalized(w)) < 1e-12);
        }
    }

    #[test]
    fn ordered_pairs_have_ordered_ends(seed in any::<u64>(), lc in any::<bool>()) {
        let mut r = rng(seed);
        let (a, b) = ordered_pair(&mut r, 5, lc);
        prop_assert!(a.support_min() <= b.support_min());
        prop_assert!(a.support_max() <= b.support_max());
    }

    #[test]
    fn reweighting_keeps_order_and_reversal_flips_it(seed in any::<u64>(), p in prop::collection::vec(0.05f64..1.0, 8)) {
        let mut r = rng(seed);
        let (a, b) = ordered_pair(&mut r, 4, true);
        // reweighting by a log-concave vector
        let mut lc = p.clone();
        lc.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let lc: Vec<f64> = lc.iter().scan(1.0, |acc, &x| { *acc *= x; Some(*acc) }).collect();
        prop_assert!(lr_le(&reweight(&a, &lc).unwrap(), &reweight(&b, &lc).unwrap()));
        let top = a.support_max().max(b.support_max());
        let ra = FiniteDist::from_raw(0, shifted_reversal(&a.to_dense(), top)).unwrap();
        let rb = FiniteDist::from_raw(0, shifted_reversal(&b.to_dense(), top)).unwrap();
        prop_assert!(lr_le(&rb, &ra));
    }
}

#[test]
fn degenerate_branch_returns_point_mass() {
    let two = FiniteDist::point(2);
    let three = FiniteDist::new(3, vec![0.5, 0.5]).unwrap();
    assert_eq!(r_local(4, 3, &[&two, &three], 2.0), FiniteDist::point(0));
    assert_eq!(q_local(4, 3, &[&two, &three], Lambda::Infinite), FiniteDist::point(0));
    assert_eq!(d_local(4, &[&two, &three]), 4.0);
}

#[test]
fn small_messages() {
    let leaf = r_local(2, 1, &[], 1.0);
    assert_eq!(leaf, FiniteDist::from_dense(&[0.5, 0.5]).unwrap());
    let one = r_local(1, 1, &[&FiniteDist::point(0)], 1.0);
    assert_eq!(one, FiniteDist::from_dense(&[0.5, 0.5]).unwrap());
}
