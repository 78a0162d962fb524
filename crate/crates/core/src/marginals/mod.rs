//! Discrete pricing measures and the operations on them.
//!
//! The extremal measure consistent with a set of call quotes is read off
//! the linear interpolant of the quotes: its weight at strike `k_j` is the
//! jump of the slope there,
//!
//! ```text
//! w_j = (C(k_{j+1}) - C(k_j)) / (k_{j+1} - k_j) - (C(k_j) - C(k_{j-1})) / (k_j - k_{j-1}),
//! ```
//!
//! with slope -1 before the first knot and 0 after the last. Every other
//! measure consistent with the same quotes is smaller in convex order.

mod dyadic;
mod implied;
mod order;
mod shift;
mod wasserstein;

pub use dyadic::{dyadic_grid, dyadic_restriction};
pub use implied::{call_fn_of, implied_measure};
pub use order::{convex_order_gap, convex_order_leq, ConvexOrderGap};
pub use shift::{project_to_strikes, project_to_strikes_in_order, shift_to_grid, ProjectionOrder};
pub use wasserstein::{
    dyadic_gaps, sampled_dyadic_gaps, wasserstein, wasserstein_to_restriction, IntervalGap,
    PiecewiseLinearCdf, WassersteinResult,
};

use serde::{Deserialize, Serialize};

use crate::quotes::CallPrice;

/// Atoms with weight below this are dropped after every construction.
pub const PRUNE_THRESHOLD: f64 = 1e-12;
/// Allowed deviation of the total mass from one.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("measure needs matching non-empty atoms and weights ({atoms} atoms, {weights} weights)")]
    Shape { atoms: usize, weights: usize },
    #[error("non-finite atom or weight")]
    NonFinite,
    #[error("negative atom {0}")]
    NegativeAtom(f64),
    #[error("negative weight {weight} at atom {atom}")]
    NegativeWeight { atom: f64, weight: f64 },
    #[error("total mass {0} differs from one")]
    MassNotOne(f64),
    #[error("call function is not convex at {at}: slope jump {jump}")]
    NotConvex { at: f64, jump: f64 },
    #[error("call function is {value} at K, support exceeds K")]
    SupportExceedsK { value: f64 },
    #[error("grid level must be between 1 and 30, got {0}")]
    InvalidGridLevel(u32),
    #[error("terminal strike must be positive and finite, got {0}")]
    InvalidTerminalStrike(f64),
    #[error("no mass at {0}")]
    NoMassAtPoint(f64),
    #[error("bracket ({left}, {right}) does not contain {x}")]
    InvalidBracket { x: f64, left: f64, right: f64 },
    #[error("support [{lo}, {hi}] is not covered by the strikes")]
    SupportOutsideStrikeRange { lo: f64, hi: f64 },
    #[error("strikes must be strictly increasing")]
    UnsortedStrikes,
}

/// Finite atomic probability measure with strictly increasing atoms and
/// positive weights.
///
/// Construction sorts, merges equal atoms and prunes dust, so two equal
/// measures always have identical representations (and serializations).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<MeasureRepr> for DiscreteMeasure {
    type Error = MeasureError;

    fn try_from(r: MeasureRepr) -> Result<Self, Self::Error> {
        DiscreteMeasure::new(r.atoms, r.weights)
    }
}

impl From<DiscreteMeasure> for MeasureRepr {
    fn from(m: DiscreteMeasure) -> Self {
        MeasureRepr {
            atoms: m.atoms,
            weights: m.weights,
        }
    }
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(MeasureError::Shape {
                atoms: atoms.len(),
                weights: weights.len(),
            });
        }
        Self::from_pairs(atoms.into_iter().zip(weights))
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, MeasureError> {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(MeasureError::Shape { atoms: 0, weights: 0 });
        }
        for &(x, w) in &pairs {
            if !x.is_finite() || !w.is_finite() {
                return Err(MeasureError::NonFinite);
            }
            if x < 0.0 {
                return Err(MeasureError::NegativeAtom(x));
            }
            if w < -PRUNE_THRESHOLD {
                return Err(MeasureError::NegativeWeight { atom: x, weight: w });
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match atoms.last() {
                Some(&last) if last == x => *weights.last_mut().unwrap() += w,
                _ => {
                    atoms.push(x);
                    weights.push(w);
                }
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(MeasureError::MassNotOne(total));
        }
        let (atoms, weights): (Vec<f64>, Vec<f64>) = atoms
            .into_iter()
            .zip(weights)
            .filter(|&(_, w)| w >= PRUNE_THRESHOLD)
            .unzip();
        if atoms.is_empty() {
            return Err(MeasureError::MassNotOne(0.0));
        }
        Ok(Self { atoms, weights })
    }

    pub fn dirac(x: f64) -> Self {
        assert!(x.is_finite() && x >= 0.0, "dirac atom must be finite and non-negative");
        Self {
            atoms: vec![x],
            weights: vec![1.0],
        }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(x, w)| x * w).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn min_atom(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max_atom(&self) -> f64 {
        self.atoms[self.atoms.len() - 1]
    }

    /// Index of the atom at `x`, matching up to `1e-12` relative.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let tol = 1e-12 * x.abs().max(1.0);
        let i = self.atoms.partition_point(|&a| a < x - tol);
        (i < self.atoms.len() && (self.atoms[i] - x).abs() <= tol).then_some(i)
    }

    /// Distribution function `F(t) = m((-inf, t])`.
    pub fn cdf(&self, t: f64) -> f64 {
        let i = self.atoms.partition_point(|&a| a <= t);
        self.weights[..i].iter().sum()
    }

    /// `C(k) = sum (x - k)^+ w`, summed over atoms above `k`.
    pub fn call_price(&self, k: f64) -> f64 {
        let i = self.atoms.partition_point(|&a| a <= k);
        if i == 0 {
            // all atoms above k: exact linear form
            return self.mean() - k;
        }
        self.iter().skip(i).map(|(x, w)| (x - k) * w).sum()
    }
}

impl CallPrice for DiscreteMeasure {
    fn call(&self, k: f64) -> f64 {
        self.call_price(k)
    }

    fn right_slope(&self, k: f64) -> f64 {
        let i = self.atoms.partition_point(|&a| a <= k);
        -self.weights[i..].iter().sum::<f64>()
    }
}
