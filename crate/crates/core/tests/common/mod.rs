#![allow(dead_code)]

use mot_bounds::marginals::DiscreteMeasure;
use mot_bounds::payoffs::Payoff;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Largest `c.x` over the vertices of `{A x = b, x >= 0}`, found by trying
/// every column subset of size `rank(A)` as a basis.
pub fn vertex_max(a: &DMatrix<f64>, b: &DVector<f64>, c: &[f64]) -> Option<f64> {
    let n = a.ncols();
    let rank = a.clone().svd(false, false).rank(1e-10);
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..rank).collect();
    loop {
        let ab = a.select_columns(&subset);
        let svd = ab.clone().svd(true, true);
        if svd.rank(1e-10) == rank {
            if let Ok(xb) = svd.solve(b, 1e-12) {
                let resid = (&ab * &xb - b).amax();
                if resid < 1e-10 && xb.iter().all(|&v| v >= -1e-12) {
                    let val: f64 = subset.iter().zip(xb.iter()).map(|(&j, v)| c[j] * v).sum();
                    best = Some(best.map_or(val, |b: f64| b.max(val)));
                }
            }
        }
        // next subset in lexicographic order
        let mut i = rank;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] < n - rank + i {
                subset[i] += 1;
                for k in i + 1..rank {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Constraint system of the coupling polytope; with `martingale` the rows
/// `sum_j q_ij (y_j - x_i) = 0` are included.
pub fn coupling_system(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    martingale: bool,
) -> (DMatrix<f64>, DVector<f64>) {
    let (m, n) = (mu.len(), nu.len());
    let rows = m + n + if martingale { m } else { 0 };
    let mut a = DMatrix::zeros(rows, m * n);
    let mut b = DVector::zeros(rows);
    for i in 0..m {
        for j in 0..n {
            let v = i * n + j;
            a[(i, v)] = 1.0;
            a[(m + j, v)] = 1.0;
            if martingale {
                a[(m + n + i, v)] = nu.atoms()[j] - mu.atoms()[i];
            }
        }
        b[i] = mu.weights()[i];
    }
    for j in 0..n {
        b[m + j] = nu.weights()[j];
    }
    (a, b)
}

pub fn brute_force_bound(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: &Payoff, martingale: bool) -> Option<f64> {
    let (a, b) = coupling_system(mu, nu, martingale);
    let c: Vec<f64> = p.matrix(mu.atoms(), nu.atoms()).unwrap().into_iter().flatten().collect();
    vertex_max(&a, &b, &c)
}

/// Random measure with up to `max_atoms` atoms in `[0, 10]`.
pub fn measure(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((0.0..10.0f64, 0.05..1.0f64), 1..=max_atoms).prop_map(|pairs| {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        DiscreteMeasure::from_pairs(pairs.into_iter().map(|(x, w)| (x, w / total))).unwrap()
    })
}

/// Pulls `nu` towards its mean: `x -> lambda x + (1 - lambda) mean`. The
/// result is below `nu` in convex order.
pub fn contract(nu: &DiscreteMeasure, lambda: f64) -> DiscreteMeasure {
    let m = nu.mean();
    DiscreteMeasure::from_pairs(nu.iter().map(|(y, w)| (lambda * y + (1.0 - lambda) * m, w))).unwrap()
}

/// Barycenters of a random grouping of consecutive atoms of `nu`; also
/// below `nu` in convex order.
pub fn coarsen(nu: &DiscreteMeasure, cuts: &[bool]) -> DiscreteMeasure {
    let mut pairs = Vec::new();
    let (mut mass, mut moment) = (0.0, 0.0);
    for (k, (y, w)) in nu.iter().enumerate() {
        mass += w;
        moment += w * y;
        if k + 1 == nu.len() || cuts.get(k).copied().unwrap_or(false) {
            pairs.push((moment / mass, mass));
            mass = 0.0;
            moment = 0.0;
        }
    }
    DiscreteMeasure::from_pairs(pairs).unwrap()
}

/// Pair `mu <=_c nu` with at most `max_atoms` atoms each.
pub fn ordered_pair(max_atoms: usize) -> impl Strategy<Value = (DiscreteMeasure, DiscreteMeasure)> {
    (measure(max_atoms), 0.0..1.0f64, prop::collection::vec(any::<bool>(), max_atoms), any::<bool>())
        .prop_map(|(nu, lambda, cuts, by_contraction)| {
            let mu = if by_contraction { contract(&nu, lambda) } else { coarsen(&nu, &cuts) };
            (mu, nu)
        })
}

/// A payoff mixing smooth and kinked terms with random coefficients.
pub fn mixed_payoff(a: f64, b: f64, c: f64, k: f64) -> Payoff {
    Payoff::custom("mixed", move |x, y| a * x * y * y + b * (0.5 * (x + y) - k).max(0.0) - c * x * y + y * y)
}
