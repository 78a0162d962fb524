use crate::marginals::{DiscreteMeasure, MeasureError, PiecewiseLinearCdf};
use crate::quotes::CallPrice;

#[derive(Clone, Debug, PartialEq)]
pub enum MarginalKind {
    Uniform { a: f64, b: f64 },
    Discrete(DiscreteMeasure),
    /// `1/4 d_1 + 1/2 d_{7/3} + 1/4 d_3`.
    AppendixMu,
    /// `1/4 d_0 + 1/2 d_{7/3} + 1/4 d_4`.
    AppendixNu,
}

/// A marginal given in closed form, used as the "continuous" side of the
/// convergence studies.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticMarginal {
    kind: MarginalKind,
    cdf: PiecewiseLinearCdf,
}

impl AnalyticMarginal {
    pub fn uniform(a: f64, b: f64) -> Result<Self, MeasureError> {
        Ok(Self {
            kind: MarginalKind::Uniform { a, b },
            cdf: PiecewiseLinearCdf::uniform(a, b)?,
        })
    }

    pub fn discrete(m: DiscreteMeasure) -> Self {
        Self {
            cdf: PiecewiseLinearCdf::from_measure(&m),
            kind: MarginalKind::Discrete(m),
        }
    }

    pub fn appendix_mu() -> Self {
        let mut s = Self::discrete(appendix_mu_measure());
        s.kind = MarginalKind::AppendixMu;
        s
    }

    pub fn appendix_nu() -> Self {
        let mut s = Self::discrete(appendix_nu_measure());
        s.kind = MarginalKind::AppendixNu;
        s
    }

    pub fn kind(&self) -> &MarginalKind {
        &self.kind
    }

    /// Distribution function as a piecewise-linear object, for exact
    /// Wasserstein integrals.
    pub fn distribution(&self) -> &PiecewiseLinearCdf {
        &self.cdf
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.cdf.cdf(t)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.cdf.min_point(), self.cdf.max_point())
    }

    pub fn mean(&self) -> f64 {
        self.call(0.0)
    }

    /// `sup |C''|` when the call function is twice differentiable on the
    /// support: the density bound `1 / (b - a)` for uniform laws.
    pub fn curvature_bound(&self) -> Option<f64> {
        match self.kind {
            MarginalKind::Uniform { a, b } => Some(1.0 / (b - a)),
            _ => None,
        }
    }
}

impl CallPrice for AnalyticMarginal {
    fn call(&self, k: f64) -> f64 {
        match &self.kind {
            MarginalKind::Uniform { a, b } => {
                if k <= *a {
                    0.5 * (a + b) - k
                } else if k >= *b {
                    0.0
                } else {
                    (b - k) * (b - k) / (2.0 * (b - a))
                }
            }
            _ => self.cdf.call_price(k),
        }
    }

    fn right_slope(&self, k: f64) -> f64 {
        self.cdf.cdf(k) - 1.0
    }
}

pub(crate) fn appendix_mu_measure() -> DiscreteMeasure {
    DiscreteMeasure::new(vec![1.0, 7.0 / 3.0, 3.0], vec![0.25, 0.5, 0.25]).expect("valid")
}

pub(crate) fn appendix_nu_measure() -> DiscreteMeasure {
    DiscreteMeasure::new(vec![0.0, 7.0 / 3.0, 4.0], vec![0.25, 0.5, 0.25]).expect("valid")
}
