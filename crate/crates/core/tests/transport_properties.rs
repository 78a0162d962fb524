//! Structural properties of the transport solvers on random margins.

mod common;

use common::*;
use mot_bounds::marginals::{convex_order_leq, project_to_strikes, DiscreteMeasure};
use mot_bounds::payoffs::Payoff;
use mot_bounds::transport::{
    aggregate, comonotone_bound, decompose, evaluate_coupling, left_curtain, solve_lp,
    verify_feasible, CouplingEntry, LpOptions, MartingaleCoupling,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn lp(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: &Payoff) -> f64 {
    solve_lp(mu, nu, p, &LpOptions::default()).unwrap().value
}

/// Mirror image `x -> top - x` of a measure.
fn reflect(m: &DiscreteMeasure, top: f64) -> DiscreteMeasure {
    DiscreteMeasure::from_pairs(m.iter().map(|(x, w)| (top - x, w))).unwrap()
}

/// Right-curtain coupling: the left-curtain coupling of the mirrored
/// margins, mirrored back.
fn right_curtain(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> MartingaleCoupling {
    let top = nu.max_atom();
    let (rm, rn) = (reflect(mu, top), reflect(nu, top));
    let q = left_curtain(&rm, &rn).unwrap();
    let entries = q
        .entries()
        .iter()
        .map(|e| CouplingEntry {
            x_index: mu.len() - 1 - e.x_index,
            y_index: nu.len() - 1 - e.y_index,
            mass: e.mass,
        })
        .collect();
    MartingaleCoupling::new(mu.clone(), nu.clone(), entries)
}

fn mix(parts: &[(&MartingaleCoupling, f64)]) -> MartingaleCoupling {
    let first = parts[0].0;
    let entries = parts
        .iter()
        .flat_map(|(q, t)| q.entries().iter().map(move |e| CouplingEntry { mass: e.mass * t, ..*e }))
        .collect();
    MartingaleCoupling::new(first.mu().clone(), first.nu().clone(), entries)
}

#[test]
fn lp_dominates_random_feasible_couplings() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let nu = DiscreteMeasure::new(vec![0.0, 1.5, 3.0, 4.0, 6.0, 8.0], vec![0.1, 0.2, 0.15, 0.25, 0.2, 0.1]).unwrap();
    let mu = contract(&nu, 0.6);
    let payoffs = [
        Payoff::xy_squared(),
        Payoff::asian(4.0),
        Payoff::custom("wave", |x, y| (x - y).abs() * (1.0 + x) - 0.1 * y * y),
    ];
    for p in &payoffs {
        let best = solve_lp(&mu, &nu, p, &LpOptions::default()).unwrap();
        // extreme-ish feasible couplings: both curtains and LP optima of
        // other objectives; components from their decompositions
        let neg = Payoff::custom("neg", {
            let p = p.clone();
            move |x, y| -p.evaluate(x, y).unwrap()
        });
        let pool = [
            left_curtain(&mu, &nu).unwrap(),
            right_curtain(&mu, &nu),
            solve_lp(&mu, &nu, &neg, &LpOptions::default()).unwrap().coupling,
            solve_lp(&mu, &nu, &Payoff::asian(2.0), &LpOptions::default()).unwrap().coupling,
        ];
        for q in &pool {
            assert!(verify_feasible(q, &mu, &nu).passed);
            assert_eq!(aggregate(&decompose(q).unwrap()).len(), q.entries().len());
        }
        for _ in 0..100 {
            let raw: Vec<f64> = (0..pool.len()).map(|_| rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let parts: Vec<(&MartingaleCoupling, f64)> = pool.iter().zip(raw.iter().map(|r| r / total)).collect();
            let q = mix(&parts);
            assert!(verify_feasible(&q, &mu, &nu).passed);
            let v = evaluate_coupling(&q, p).unwrap();
            assert!(best.value >= v - 1e-9 * v.abs().max(1.0), "{}: {} < {}", p.label(), best.value, v);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn comonotone_bound_dominates_martingale_bound(
        (mu, nu) in ordered_pair(6), k in 0.0..10.0f64, a in 0.0..1.0f64,
    ) {
        let p = Payoff::custom("sm", move |x, y| (0.5 * (x + y) - k).max(0.0) + a * x * y);
        let free = comonotone_bound(&mu, &nu, &p).unwrap().value;
        let mot = lp(&mu, &nu, &p);
        prop_assert!(free >= mot - 1e-9 * mot.abs().max(1.0));
    }

    #[test]
    fn lp_and_left_curtain_agree_for_msm_payoffs(
        (mu, nu) in ordered_pair(40), exp in any::<bool>(),
    ) {
        let p = if exp { Payoff::exp_x_y_squared() } else { Payoff::xy_squared() };
        let q = left_curtain(&mu, &nu).unwrap();
        prop_assert!(verify_feasible(&q, &mu, &nu).passed);
        let curtain = evaluate_coupling(&q, &p).unwrap();
        let best = lp(&mu, &nu, &p);
        prop_assert!((curtain - best).abs() <= 1e-7 * best.abs().max(1.0), "curtain {} lp {}", curtain, best);
    }

    #[test]
    fn decompose_round_trip((mu, nu) in ordered_pair(8), use_lp in any::<bool>()) {
        let q = if use_lp {
            solve_lp(&mu, &nu, &Payoff::asian(5.0), &LpOptions::default()).unwrap().coupling
        } else {
            left_curtain(&mu, &nu).unwrap()
        };
        let parts = decompose(&q).unwrap();
        let back = aggregate(&parts);
        let orig: Vec<_> = q.triples().collect();
        prop_assert_eq!(back.len(), orig.len());
        for (a, b) in back.iter().zip(&orig) {
            prop_assert_eq!((a.0, a.1), (b.0, b.1));
            prop_assert!((a.2 - b.2).abs() <= 1e-12);
        }
        for c in parts {
            if let mot_bounds::transport::TransportComponent::TwoWay { x, y1, y2, mass1, mass2 } = c {
                prop_assert!(y2 < x && x < y1);
                prop_assert!(((mass1 + mass2) * x - mass1 * y1 - mass2 * y2).abs() <= 1e-9 * y1);
            }
        }
    }

    /// Directionally convex payoffs: the extremal margins of the strike grid
    /// give the largest bound among all margins consistent with the same
    /// call prices.
    #[test]
    fn worst_margins_for_directionally_convex_payoffs(
        (m, n) in ordered_pair(5), a in 0.0..1.0f64, b in 0.0..3.0f64, k in 0.0..10.0f64,
    ) {
        let grid: Vec<f64> = (0..=10).map(f64::from).collect();
        let mu_star = project_to_strikes(&m, &grid).unwrap();
        let nu_star = project_to_strikes(&n, &grid).unwrap();
        prop_assert!(convex_order_leq(&m, &mu_star) && convex_order_leq(&n, &nu_star));
        let p = Payoff::custom("dc", move |x, y| a * x * y * y + b * (0.5 * (x + y) - k).max(0.0) + (x + y) * (x + y));
        let extremal = lp(&mu_star, &nu_star, &p);
        let other = lp(&m, &n, &p);
        prop_assert!(extremal >= other - 1e-9 * other.abs().max(1.0), "{} < {}", extremal, other);
    }

    /// Payoffs convex in the second argument only: the extremal second margin
    /// is worst for any fixed first margin.
    #[test]
    fn worst_second_margin_for_payoffs_convex_in_y(
        (m, n) in ordered_pair(5), a in 0.0..1.0f64, c in 0.0..2.0f64, k in 0.0..10.0f64,
    ) {
        let grid: Vec<f64> = (0..=10).map(f64::from).collect();
        let nu_star = project_to_strikes(&n, &grid).unwrap();
        // -c x y is submodular, so this payoff is not directionally convex
        let p = Payoff::custom("cy", move |x, y| a * x * y * y + (y - k).max(0.0) * (1.0 + x) - c * x * y);
        let extremal = lp(&m, &nu_star, &p);
        let other = lp(&m, &n, &p);
        prop_assert!(extremal >= other - 1e-9 * other.abs().max(1.0), "{} < {}", extremal, other);
    }
}
