//! Discretisation studies: how fast the bound computed from dyadic call
//! prices approaches the bound for the full marginals.
//!
//! For marginals on `[0, K]` observed at strikes `j K / 2^n`, the error
//! `P_n - P` is `O(2^-n)`, and the normalised difference
//! `d_n = 2^(2n) (P_n - P)` shows the second-order behaviour.

mod analytic;
mod quadrature;
mod study;

pub use analytic::{AnalyticMarginal, MarginalKind};
pub use quadrature::integrate;
pub use study::{
    run_study, study_constants, true_bound, ConvergenceRow, SolverChoice, StudyCase, StudyConfig,
    StudyConstants,
};

use serde::Serialize;

use crate::marginals::{wasserstein_to_restriction, MeasureError};
use crate::payoffs::{Payoff, PayoffError, PayoffKind};
use crate::transport::TransportError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum StudyError {
    #[error("need 0 < h < H and m - H >= 0, got m = {m}, h = {h}, H = {big_h}")]
    InvalidDilation { m: f64, h: f64, big_h: f64 },
    #[error("closed-form bounds exist for xy2 and expxy2 only, not {0}")]
    UnsupportedPayoff(String),
    #[error("conditional law breaks the martingale identity at x = {x}")]
    MartingaleIdentity { x: f64 },
    #[error("level range is empty")]
    EmptyRange,
    #[error("no closed-form true bound for this case; supply one")]
    MissingTrueBound,
    #[error("K = {k_max} does not cover the supports")]
    KTooSmall { k_max: f64 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Payoff(#[from] PayoffError),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Relative accuracy of the closed-form bounds.
pub const QUADRATURE_TOLERANCE: f64 = 1e-12;

/// Optimal bound for `mu = U[m-h, m+h]`, `nu = U[m-H, m+H]`.
///
/// The optimiser sends `x` up to `T_up(x)` with probability
/// `q = (H + h) / 2H` and down to `T_down(x)` otherwise, with
///
/// ```text
/// T_up(x)   = (m - h) + (H + h) / 2h * (x - (m - h)),
/// T_down(x) = (m - h) - (H - h) / 2h * (x - (m - h)).
/// ```
///
/// Both images are uniform with density `1/2H`, so the second margin is
/// exactly `nu`.
pub fn closed_form_uniform_bound(m: f64, h: f64, big_h: f64, p: &Payoff) -> Result<f64, StudyError> {
    if !(h > 0.0 && h < big_h && m - big_h >= 0.0 && m.is_finite() && big_h.is_finite()) {
        return Err(StudyError::InvalidDilation { m, h, big_h });
    }
    if !matches!(p.kind(), PayoffKind::XySquared | PayoffKind::ExpXYSquared) {
        return Err(StudyError::UnsupportedPayoff(p.label()));
    }
    let q = (big_h + h) / (2.0 * big_h);
    let base = m - h;
    let up = |x: f64| base + (big_h + h) / (2.0 * h) * (x - base);
    let down = |x: f64| base - (big_h - h) / (2.0 * h) * (x - base);
    let mut failure = None;
    let value = integrate(
        |x| {
            let (yu, yd) = (up(x), down(x));
            if (q * yu + (1.0 - q) * yd - x).abs() > 1e-12 * m.max(1.0) {
                failure.get_or_insert(x);
            }
            let v = q * p.evaluate(x, yu).unwrap_or(f64::NAN)
                + (1.0 - q) * p.evaluate(x, yd).unwrap_or(f64::NAN);
            v / (2.0 * h)
        },
        m - h,
        m + h,
        QUADRATURE_TOLERANCE,
    );
    if let Some(x) = failure {
        return Err(StudyError::MartingaleIdentity { x });
    }
    if !value.is_finite() {
        return Err(PayoffError::NonFinite { x: m + h, y: m + big_h }.into());
    }
    Ok(value)
}

/// Bound for the appendix margins `1/4 d_1 + 1/2 d_{7/3} + 1/4 d_3` and
/// `1/4 d_0 + 1/2 d_{7/3} + 1/4 d_4` under `c = x y^2`: `913/54`.
pub fn appendix_true_bound() -> f64 {
    913.0 / 54.0
}

/// Bound for the level-`n` dyadic restrictions of the appendix margins
/// (`K = 4`), in closed form.
///
/// The restriction splits the atom `7/3` of `mu` between the grid points
/// `k_j < 7/3 < k_{j+1}`; the weights `(a, b)` of the two pieces are
/// `(1/3, 1/6)` for even `n` and `(1/6, 1/3)` for odd `n`, and
///
/// ```text
/// P_n = k_j/4 + a k_j^3 - k_j^2/4 + k_j k_{j+1}/4 + b k_{j+1}^3 - k_{j+1}^2/4 + k_{j+1} + 9.
/// ```
pub fn appendix_approx_bound(n: u32) -> f64 {
    let e = 0.5f64.powi(n as i32);
    let s = 7.0 / 3.0;
    let (kj, k1, a, b) = if n % 2 == 0 {
        (s - 4.0 / 3.0 * e, s + 8.0 / 3.0 * e, 1.0 / 3.0, 1.0 / 6.0)
    } else {
        (s - 8.0 / 3.0 * e, s + 4.0 / 3.0 * e, 1.0 / 6.0, 1.0 / 3.0)
    };
    kj / 4.0 + a * kj.powi(3) - kj * kj / 4.0 + kj * k1 / 4.0 + b * k1.powi(3) - k1 * k1 / 4.0 + k1 + 9.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WassersteinRateRow {
    pub n: u32,
    pub distance: f64,
    /// Twice the summed per-cell gaps.
    pub gap_identity: f64,
    /// `K / 2^n`.
    pub lipschitz_bound: f64,
    /// `T K^2 / 2^(n+1)`, when a curvature bound is known.
    pub curvature_bound: Option<f64>,
    pub within_bounds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WassersteinRateReport {
    pub passed: bool,
    pub rows: Vec<WassersteinRateRow>,
}

/// Distance from `marginal` to its dyadic restrictions, checked against
/// `K / 2^n` and, for twice differentiable call functions, `T K^2 / 2^(n+1)`.
pub fn verify_wasserstein_rate(
    marginal: &AnalyticMarginal,
    k_max: f64,
    levels: impl IntoIterator<Item = u32>,
) -> Result<WassersteinRateReport, MeasureError> {
    let mut rows = Vec::new();
    for n in levels {
        let r = wasserstein_to_restriction(marginal.distribution(), n, k_max)?;
        let scale = 0.5f64.powi(n as i32);
        let lipschitz_bound = k_max * scale;
        let curvature_bound = marginal.curvature_bound().map(|t| t * k_max * k_max * scale / 2.0);
        let slack = 1e-12 * k_max;
        let within_bounds = r.value <= lipschitz_bound + slack
            && curvature_bound.is_none_or(|b| r.value <= b + slack);
        rows.push(WassersteinRateRow {
            n,
            distance: r.value,
            gap_identity: r.gap_identity_value(),
            lipschitz_bound,
            curvature_bound,
            within_bounds,
        });
    }
    Ok(WassersteinRateReport {
        passed: rows.iter().all(|r| r.within_bounds),
        rows,
    })
}
