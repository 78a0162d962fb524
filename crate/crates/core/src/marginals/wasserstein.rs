use serde::Serialize;

use super::{dyadic_grid, dyadic_restriction, DiscreteMeasure, MeasureError};
use crate::quotes::CallPrice;

/// Sup of `C_{mu_n} - C_mu` over one grid cell `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntervalGap {
    pub lo: f64,
    pub hi: f64,
    /// Where the sup is attained.
    pub argmax: f64,
    pub gap: f64,
    /// Upper bound on `true sup - gap`.
    pub error_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WassersteinResult {
    pub value: f64,
    /// One entry per dyadic cell; empty when no grid was involved.
    pub per_interval_gaps: Vec<IntervalGap>,
}

impl WassersteinResult {
    /// Twice the summed gaps, which equals `value` on dyadic grids.
    pub fn gap_identity_value(&self) -> f64 {
        2.0 * self.per_interval_gaps.iter().map(|g| g.gap).sum::<f64>()
    }
}

/// `W_1(mu, nu)` as the L1 distance of the distribution functions, summed
/// exactly over the merged atoms.
pub fn wasserstein(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> WassersteinResult {
    let mut pts: Vec<f64> = mu.atoms().iter().chain(nu.atoms()).copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let (mut fa, mut fb) = (0.0, 0.0);
    let (mut i, mut j) = (0, 0);
    let mut value = 0.0;
    for w in pts.windows(2) {
        while i < mu.len() && mu.atoms()[i] <= w[0] {
            fa += mu.weights()[i];
            i += 1;
        }
        while j < nu.len() && nu.atoms()[j] <= w[0] {
            fb += nu.weights()[j];
            j += 1;
        }
        value += (fa - fb).abs() * (w[1] - w[0]);
    }
    WassersteinResult {
        value,
        per_interval_gaps: Vec::new(),
    }
}

/// Distribution function that is linear between breakpoints and may jump at
/// them. Covers discrete measures, uniform laws and mixtures of both; its
/// call function is piecewise quadratic and is evaluated exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearCdf {
    points: Vec<f64>,
    /// `F(t_i-)`.
    left: Vec<f64>,
    /// `F(t_i)`.
    right: Vec<f64>,
    /// `int_{t_i}^inf (1 - F)`.
    tail: Vec<f64>,
}

impl PiecewiseLinearCdf {
    /// Breakpoints `(t_i, F(t_i-), F(t_i))`, with `F(t_0-) = 0` and
    /// `F(t_last) = 1`; `F` must be non-decreasing.
    pub fn new(points: Vec<(f64, f64, f64)>) -> Result<Self, MeasureError> {
        if points.is_empty() {
            return Err(MeasureError::Shape { atoms: 0, weights: 0 });
        }
        if points.iter().any(|&(t, a, b)| !(t.is_finite() && a.is_finite() && b.is_finite())) {
            return Err(MeasureError::NonFinite);
        }
        if points[0].0 < 0.0 {
            return Err(MeasureError::NegativeAtom(points[0].0));
        }
        if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(MeasureError::UnsortedStrikes);
        }
        let tol = super::MASS_TOLERANCE;
        if points[0].1.abs() > tol {
            return Err(MeasureError::NegativeWeight { atom: points[0].0, weight: -points[0].1 });
        }
        let last = points[points.len() - 1].2;
        if (last - 1.0).abs() > tol {
            return Err(MeasureError::MassNotOne(last));
        }
        let mut prev = 0.0;
        for &(t, a, b) in &points {
            if a < prev - tol || b < a - tol {
                return Err(MeasureError::NegativeWeight { atom: t, weight: b.min(a) - prev });
            }
            prev = b;
        }
        let m = points.len();
        let mut tail = vec![0.0; m];
        for i in (0..m - 1).rev() {
            let (t0, _, f0) = points[i];
            let (t1, f1, _) = points[i + 1];
            tail[i] = tail[i + 1] + (t1 - t0) * (2.0 - f0 - f1) / 2.0;
        }
        Ok(Self {
            points: points.iter().map(|p| p.0).collect(),
            left: points.iter().map(|p| p.1).collect(),
            right: points.iter().map(|p| p.2).collect(),
            tail,
        })
    }

    /// Law of `U[a, b]`.
    pub fn uniform(a: f64, b: f64) -> Result<Self, MeasureError> {
        Self::new(vec![(a, 0.0, 0.0), (b, 1.0, 1.0)])
    }

    pub fn from_measure(m: &DiscreteMeasure) -> Self {
        let mut acc = 0.0;
        let points = m
            .iter()
            .map(|(x, w)| {
                let before = acc;
                acc += w;
                (x, before, acc)
            })
            .collect();
        Self::new(points).expect("discrete measures give valid distribution functions")
    }

    pub fn min_point(&self) -> f64 {
        self.points[0]
    }

    pub fn max_point(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// `F(t)`, right-continuous.
    pub fn cdf(&self, t: f64) -> f64 {
        let i = self.points.partition_point(|&p| p <= t);
        if i == 0 {
            return 0.0;
        }
        if i == self.points.len() {
            return 1.0;
        }
        self.inner(i - 1, t)
    }

    /// `F(t-)`.
    fn cdf_left(&self, t: f64) -> f64 {
        let i = self.points.partition_point(|&p| p < t);
        if i == 0 {
            return 0.0;
        }
        if i == self.points.len() {
            return 1.0;
        }
        if self.points[i] == t {
            return self.left[i];
        }
        self.inner(i - 1, t)
    }

    /// `F` on the open segment after breakpoint `i`.
    fn inner(&self, i: usize, t: f64) -> f64 {
        let (t0, t1) = (self.points[i], self.points[i + 1]);
        let (f0, f1) = (self.right[i], self.left[i + 1]);
        f0 + (f1 - f0) * (t - t0) / (t1 - t0)
    }

    pub fn mean(&self) -> f64 {
        self.call_price(0.0)
    }

    /// `C(k) = int_k^inf (1 - F)`.
    pub fn call_price(&self, k: f64) -> f64 {
        let i = self.points.partition_point(|&p| p <= k);
        if i == 0 {
            return self.points[0] - k + self.tail[0];
        }
        if i == self.points.len() {
            return 0.0;
        }
        let t1 = self.points[i];
        let fk = self.inner(i - 1, k);
        self.tail[i] + (t1 - k) * (2.0 - fk - self.left[i]) / 2.0
    }

    /// `int |F - G|`, exact: both are linear between merged breakpoints.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        let mut pts: Vec<f64> = self.points.iter().chain(&other.points).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.windows(2)
            .map(|w| {
                let a = self.cdf(w[0]) - other.cdf(w[0]);
                let b = self.cdf_left(w[1]) - other.cdf_left(w[1]);
                let len = w[1] - w[0];
                if a * b >= 0.0 {
                    len * (a.abs() + b.abs()) / 2.0
                } else {
                    len * (a * a + b * b) / (2.0 * (a.abs() + b.abs()))
                }
            })
            .sum()
    }
}

impl CallPrice for PiecewiseLinearCdf {
    fn call(&self, k: f64) -> f64 {
        self.call_price(k)
    }

    fn right_slope(&self, k: f64) -> f64 {
        self.cdf(k) - 1.0
    }
}

fn cell_bounds(n: u32, k_max: f64) -> Result<Vec<f64>, MeasureError> {
    dyadic_grid(n, k_max)
}

/// Sup of `chord - C` on every dyadic cell. The maximiser is where the right
/// slope of `C` first reaches the chord slope; it is located by bisection,
/// which for piecewise-linear or piecewise-quadratic `C` lands on the exact
/// point up to rounding.
pub fn dyadic_gaps<C: CallPrice + ?Sized>(
    c: &C,
    n: u32,
    k_max: f64,
) -> Result<Vec<IntervalGap>, MeasureError> {
    let grid = cell_bounds(n, k_max)?;
    Ok(grid
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let (clo, chi) = (c.call(lo), c.call(hi));
            let s = (chi - clo) / (hi - lo);
            let gap_at = |t: f64| clo + s * (t - lo) - c.call(t);
            let (mut a, mut b) = (lo, hi);
            if c.right_slope(lo) >= s {
                b = lo;
            } else {
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if c.right_slope(mid) >= s {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
            }
            let (ga, gb) = (gap_at(a), gap_at(b));
            let (argmax, gap) = if gb >= ga { (b, gb) } else { (a, ga) };
            IntervalGap {
                lo,
                hi,
                argmax,
                gap,
                error_bound: (b - a) * (s - c.right_slope(lo)).abs(),
            }
        })
        .collect())
}

/// Like [`dyadic_gaps`] but takes the best of `samples` equispaced points per
/// cell; `error_bound` is the Lipschitz bound of the gap times half the
/// sample spacing.
pub fn sampled_dyadic_gaps<C: CallPrice + ?Sized>(
    c: &C,
    n: u32,
    k_max: f64,
    samples: usize,
) -> Result<Vec<IntervalGap>, MeasureError> {
    let samples = samples.max(2);
    let grid = cell_bounds(n, k_max)?;
    Ok(grid
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let (clo, chi) = (c.call(lo), c.call(hi));
            let s = (chi - clo) / (hi - lo);
            let step = (hi - lo) / (samples - 1) as f64;
            let (argmax, gap) = (0..samples)
                .map(|i| {
                    let t = lo + step * i as f64;
                    (t, clo + s * (t - lo) - c.call(t))
                })
                .fold((lo, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best });
            let lip = (s - c.right_slope(lo)).abs().max((c.right_slope(hi) - s).abs());
            IntervalGap {
                lo,
                hi,
                argmax,
                gap,
                error_bound: lip * step / 2.0,
            }
        })
        .collect())
}

/// Distance from `mu` to its dyadic restriction of level `n`, together with
/// the per-cell gaps whose doubled sum reproduces it.
pub fn wasserstein_to_restriction(
    mu: &PiecewiseLinearCdf,
    n: u32,
    k_max: f64,
) -> Result<WassersteinResult, MeasureError> {
    let restricted = dyadic_restriction(mu, n, k_max)?;
    Ok(WassersteinResult {
        value: mu.l1_distance(&PiecewiseLinearCdf::from_measure(&restricted)),
        per_interval_gaps: dyadic_gaps(mu, n, k_max)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: &[f64], w: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::new(a.to_vec(), w.to_vec()).unwrap()
    }

    #[test]
    fn basic_distances() {
        let a = m(&[1.0, 7.0 / 3.0, 3.0], &[0.25, 0.5, 0.25]);
        assert_eq!(wasserstein(&a, &a).value, 0.0);
        assert_eq!(wasserstein(&DiscreteMeasure::dirac(0.0), &DiscreteMeasure::dirac(1.0)).value, 1.0);
        assert_eq!(wasserstein(&m(&[0.0, 2.0], &[0.5, 0.5]), &DiscreteMeasure::dirac(1.0)).value, 1.0);
    }

    #[test]
    fn uniform_call_function() {
        let u = PiecewiseLinearCdf::uniform(0.0, 4.0).unwrap();
        for k in [0.0, 0.5, 1.0, 2.0, 3.7, 4.0] {
            let direct: f64 = (4.0 - k) * (4.0 - k) / 8.0;
            assert!((u.call_price(k) - direct).abs() < 1e-15);
        }
        assert_eq!(u.call_price(-1.0), 3.0);
        assert_eq!(u.mean(), 2.0);
        assert_eq!(u.cdf(1.0), 0.25);
    }

    #[test]
    fn discrete_cdf_matches_measure() {
        let a = m(&[0.0, 7.0 / 3.0, 4.0], &[0.25, 0.5, 0.25]);
        let f = PiecewiseLinearCdf::from_measure(&a);
        for k in [0.0, 0.3, 1.0, 7.0 / 3.0, 3.0, 4.0, 5.0] {
            assert!((f.call_price(k) - a.call_price(k)).abs() < 1e-14, "k = {k}");
            assert_eq!(f.cdf(k), a.cdf(k));
        }
        let b = m(&[1.0, 3.0], &[0.5, 0.5]);
        let fb = PiecewiseLinearCdf::from_measure(&b);
        assert!((f.l1_distance(&fb) - wasserstein(&a, &b).value).abs() < 1e-15);
    }

    #[test]
    fn uniform_to_point_distance() {
        // |t/4 - 1{t >= 2}| integrates to 1 on [0, 4]
        let u = PiecewiseLinearCdf::uniform(0.0, 4.0).unwrap();
        let d = PiecewiseLinearCdf::from_measure(&DiscreteMeasure::dirac(2.0));
        assert!((u.l1_distance(&d) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gap_identity_for_uniform() {
        let u = PiecewiseLinearCdf::uniform(0.0, 4.0).unwrap();
        for n in 1..=8 {
            let r = wasserstein_to_restriction(&u, n, 4.0).unwrap();
            // each cell of width h contributes h^2 / 8
            let h = 4.0 / (1u32 << n) as f64;
            assert!((r.value - h / 4.0).abs() < 1e-12, "n = {n}: {}", r.value);
            assert!((r.value - r.gap_identity_value()).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_gaps_bracket_exact_ones() {
        let u = PiecewiseLinearCdf::uniform(0.0, 4.0).unwrap();
        let exact = dyadic_gaps(&u, 3, 4.0).unwrap();
        let sampled = sampled_dyadic_gaps(&u, 3, 4.0, 1000).unwrap();
        for (e, s) in exact.iter().zip(&sampled) {
            assert!(s.gap <= e.gap + 1e-15);
            assert!(e.gap - s.gap <= s.error_bound + 1e-15);
        }
    }

    #[test]
    fn invalid_cdf_rejected() {
        assert!(PiecewiseLinearCdf::new(vec![(0.0, 0.0, 0.5)]).is_err());
        assert!(PiecewiseLinearCdf::new(vec![(1.0, 0.0, 0.6), (0.5, 0.6, 1.0)]).is_err());
        assert!(PiecewiseLinearCdf::new(vec![(0.0, 0.0, 0.6), (1.0, 0.4, 1.0)]).is_err());
    }
}
