//! Invariants of the measure constructions on random inputs.

mod common;

use common::*;
use mot_bounds::marginals::{
    call_fn_of, convex_order_leq, dyadic_grid, dyadic_restriction, implied_measure, project_to_strikes,
    project_to_strikes_in_order, shift_to_grid, wasserstein_to_restriction, DiscreteMeasure, PiecewiseLinearCdf,
    ProjectionOrder,
};
use proptest::prelude::*;

const K: f64 = 10.0;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn same_measure(a: &DiscreteMeasure, b: &DiscreteMeasure, rel: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b.iter()).all(|((x, w), (y, v))| close(x, y, rel) && close(w, v, rel))
}

/// Ascending strikes covering `[0, K]`.
fn strikes() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1..9.9f64, 0..12).prop_map(|mut inner| {
        inner.sort_by(f64::total_cmp);
        inner.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let mut s = vec![0.0];
        s.extend(inner);
        s.push(K);
        s
    })
}

/// Measure supported on `strikes` with random weights.
fn on_strikes(strikes: &[f64], raw: &[f64]) -> DiscreteMeasure {
    let total: f64 = raw.iter().take(strikes.len()).sum();
    DiscreteMeasure::from_pairs(strikes.iter().zip(raw).map(|(&s, &w)| (s, w / total))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn constructions_preserve_the_mean(m in measure(12), s in strikes(), n in 1u32..8) {
        let mean = m.mean();
        let restricted = dyadic_restriction(&call_fn_of(&m), n, K).unwrap();
        prop_assert!((restricted.mean() - mean).abs() < 1e-9);
        let projected = project_to_strikes(&m, &s).unwrap();
        prop_assert!((projected.mean() - mean).abs() < 1e-9);
        if let Some((x, _)) = m.iter().find(|&(x, _)| x > 0.0 && x < K) {
            let shifted = shift_to_grid(&m, x, 0.0, K).unwrap();
            prop_assert!((shifted.mean() - mean).abs() < 1e-9);
            prop_assert!(convex_order_leq(&m, &shifted));
        }
    }

    /// Merging mass from the two ends of a strike cell into its barycenter
    /// keeps every strike price, and the result sits below the extremal
    /// measure.
    #[test]
    fn extremal_measure_is_maximal(
        s in strikes(),
        raw in prop::collection::vec(0.05..1.0f64, 13),
        take in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 13),
    ) {
        let star = on_strikes(&s, &raw);
        let mut pairs: Vec<(f64, f64)> = star.iter().collect();
        let mut merged = Vec::new();
        for (j, w) in s.windows(2).enumerate() {
            let (lo, hi) = (w[0], w[1]);
            let (Some(il), Some(ih)) = (star.index_of(lo), star.index_of(hi)) else { continue };
            let a = take[j].0 * 0.5 * star.weights()[il];
            let b = take[j].1 * 0.5 * star.weights()[ih];
            if a + b <= 0.0 {
                continue;
            }
            pairs[il].1 -= a;
            pairs[ih].1 -= b;
            merged.push(((a * lo + b * hi) / (a + b), a + b));
        }
        pairs.extend(merged);
        let m = DiscreteMeasure::from_pairs(pairs.into_iter().filter(|p| p.1 > 0.0)).unwrap();
        for &k in &s {
            prop_assert!((m.call_price(k) - star.call_price(k)).abs() < 1e-12);
        }
        prop_assert!(convex_order_leq(&m, &star));
    }

    #[test]
    fn implied_measure_inverts_call_fn_of(m in measure(20)) {
        let back = implied_measure(&call_fn_of(&m)).unwrap();
        prop_assert!(same_measure(&back, &m, 1e-12), "{:?} vs {:?}", back, m);
    }

    #[test]
    fn projection_does_not_depend_on_order(m in measure(12), s in strikes()) {
        let left = project_to_strikes_in_order(&m, &s, ProjectionOrder::LeftmostFirst).unwrap();
        let right = project_to_strikes_in_order(&m, &s, ProjectionOrder::RightmostFirst).unwrap();
        prop_assert!(same_measure(&left, &right, 1e-10), "{:?} vs {:?}", left, right);
        prop_assert!(left.atoms().iter().all(|a| s.contains(a)));
    }

    #[test]
    fn projection_onto_the_dyadic_grid_is_the_dyadic_restriction(m in measure(12), n in 1u32..9) {
        let projected = project_to_strikes(&m, &dyadic_grid(n, K).unwrap()).unwrap();
        let restricted = dyadic_restriction(&call_fn_of(&m), n, K).unwrap();
        prop_assert!(same_measure(&projected, &restricted, 1e-10), "{:?} vs {:?}", projected, restricted);
    }

    /// The distance to the dyadic restriction is twice the summed cell gaps
    /// and obeys the first-order bound.
    #[test]
    fn wasserstein_gap_identity_on_dyadic_grids(m in measure(12), n in 1u32..10) {
        let r = wasserstein_to_restriction(&PiecewiseLinearCdf::from_measure(&m), n, K).unwrap();
        prop_assert!((r.value - r.gap_identity_value()).abs() <= 1e-9 * r.value.max(1.0),
            "{} vs {}", r.value, r.gap_identity_value());
        prop_assert!(r.value <= K / f64::from(1u32 << n) + 1e-12);
    }

    #[test]
    fn wasserstein_gap_identity_for_uniform_laws(a in 0.0..5.0f64, len in 0.1..5.0f64, n in 1u32..12) {
        let u = PiecewiseLinearCdf::uniform(a, a + len).unwrap();
        let r = wasserstein_to_restriction(&u, n, K).unwrap();
        let h = K / f64::from(1u32 << n);
        prop_assert!((r.value - r.gap_identity_value()).abs() <= 1e-9 * r.value.max(1.0));
        prop_assert!(r.value <= h + 1e-12);
        // curvature bound T = 1/len
        prop_assert!(r.value <= K * K / len / f64::from(1u32 << (n + 1)) + 1e-12);
    }
}
