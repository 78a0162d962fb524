//! Solvers against exhaustive vertex enumeration on small margins.

mod common;

use common::*;
use mot_bounds::marginals::DiscreteMeasure;
use mot_bounds::payoffs::Payoff;
use mot_bounds::transport::{comonotone_bound, solve_lp, LpOptions};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn lp_matches_vertex_enumeration(
        (mu, nu) in ordered_pair(3),
        a in -1.0..1.0f64, b in -5.0..5.0f64, c in -1.0..1.0f64, k in 0.0..10.0f64,
    ) {
        let p = mixed_payoff(a, b, c, k);
        let lp = solve_lp(&mu, &nu, &p, &LpOptions::default()).unwrap();
        let brute = brute_force_bound(&mu, &nu, &p, true).unwrap();
        let scale = brute.abs().max(1.0);
        prop_assert!((lp.value - brute).abs() <= 1e-8 * scale, "lp {} brute {}", lp.value, brute);
    }

    #[test]
    fn comonotone_matches_transport_polytope(
        mu in measure(3), nu in measure(3), k in 0.0..10.0f64, a in 0.0..1.0f64,
    ) {
        // supermodular: asian plus a multiple of x y^2
        let p = Payoff::custom("sm", move |x, y| (0.5 * (x + y) - k).max(0.0) + a * x * y * y);
        let r = comonotone_bound(&mu, &nu, &p).unwrap();
        let brute = brute_force_bound(&mu, &nu, &p, false).unwrap();
        prop_assert!((r.value - brute).abs() <= 1e-9 * brute.abs().max(1.0), "{} vs {}", r.value, brute);
    }
}

#[test]
fn full_three_by_three_case() {
    let nu = DiscreteMeasure::new(vec![0.0, 5.0, 9.0], vec![0.3, 0.3, 0.4]).unwrap();
    let mu = contract(&nu, 0.5);
    let p = Payoff::xy_squared();
    let lp = solve_lp(&mu, &nu, &p, &LpOptions::default()).unwrap();
    let brute = brute_force_bound(&mu, &nu, &p, true).unwrap();
    assert!((lp.value - brute).abs() < 1e-8 * brute);
}
