//! Grid certification of the built-in payoffs.

use mot_bounds::payoffs::{check_properties, check_properties_with_tolerance, Payoff, PayoffProperties};
use proptest::prelude::*;

fn dyadic(n: u32, k: f64) -> Vec<f64> {
    let cells = 1u32 << n;
    (0..=cells).map(|j| f64::from(j) * k / f64::from(cells)).collect()
}

/// Sorted, distinct, non-negative grid with `3..=max` points.
fn grid(max: usize, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(0u32..100_000, 3..=max)
        .prop_map(move |s| s.into_iter().map(|v| f64::from(v) * hi / 100_000.0).collect())
}

fn flags(p: &PayoffProperties) -> [bool; 5] {
    [p.convex_in_x, p.convex_in_y, p.supermodular, p.directionally_convex, p.msm]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// On dyadic grids every payoff value and slope is exact, so the
    /// inequalities hold without slack.
    #[test]
    fn asian_is_directionally_convex_without_slack(
        n in 1u32..7, m in 1u32..7, k_pow in 1u32..8, strike_eighths in 0u32..256,
    ) {
        let k = f64::from(1u32 << k_pow);
        let p = Payoff::asian(f64::from(strike_eighths) / 8.0);
        let props = check_properties_with_tolerance(&p, &dyadic(n, k), &dyadic(m, k), 0.0);
        match props {
            Ok(props) => {
                prop_assert!(props.convex_in_x && props.convex_in_y && props.supermodular);
                prop_assert!(props.directionally_convex);
            }
            // a single cell per axis has only two points
            Err(_) => prop_assert!(n == 1 || m == 1),
        }
    }

    #[test]
    fn smooth_payoffs_satisfy_spence_mirrlees(xs in grid(65, 20.0), ys in grid(65, 20.0)) {
        for p in [Payoff::xy_squared(), Payoff::exp_x_y_squared()] {
            let props = check_properties(&p, &xs, &ys).unwrap();
            prop_assert!(props.msm, "{} on {:?} x {:?}", p.label(), xs, ys);
        }
    }

    /// Flags certified on a grid stay certified on any refinement. The
    /// asian payoff's Spence–Mirrlees flag is excluded: it fails analytically
    /// at the kink, so a coarse grid that misses the kink may certify it and
    /// a refinement may correctly revoke it.
    #[test]
    fn flags_survive_refinement(
        xs in grid(20, 10.0), ys in grid(20, 10.0),
        extra_x in grid(20, 10.0), extra_y in grid(20, 10.0),
        strike in 0.0..10.0f64,
    ) {
        let refine = |a: &[f64], b: &[f64]| {
            let mut v: Vec<f64> = a.iter().chain(b).copied().collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let (fx, fy) = (refine(&xs, &extra_x), refine(&ys, &extra_y));
        for p in [Payoff::asian(strike), Payoff::xy_squared(), Payoff::exp_x_y_squared()] {
            let coarse = flags(&check_properties(&p, &xs, &ys).unwrap());
            let fine = flags(&check_properties(&p, &fx, &fy).unwrap());
            let checked = if p.label().starts_with("asian") { 4 } else { 5 };
            for (c, f) in coarse.iter().zip(fine).take(checked) {
                prop_assert!(!c || f, "{}: {:?} -> {:?}", p.label(), coarse, fine);
            }
        }
    }
}

#[test]
fn spence_mirrlees_on_the_full_65_point_grid() {
    let g = dyadic(6, 20.0);
    for p in [Payoff::xy_squared(), Payoff::exp_x_y_squared()] {
        assert!(check_properties(&p, &g, &g).unwrap().msm, "{}", p.label());
    }
}
