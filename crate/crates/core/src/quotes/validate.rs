use super::{CallPriceFn, QuoteCurve, QuoteError};
use crate::report::{ValidationReport, ViolationKind, WarningKind};

const RELATIVE_TOL: f64 = 1e-9;

/// Absolute price tolerance: `1e-9` times the largest quoted price (or
/// spot, when larger).
pub fn price_tolerance(curve: &QuoteCurve, spot: Option<f64>) -> f64 {
    let scale = curve
        .prices()
        .iter()
        .copied()
        .chain(spot)
        .fold(0.0_f64, f64::max);
    RELATIVE_TOL * if scale > 0.0 { scale } else { 1.0 }
}

/// Knots of the interpolant: quotes plus the virtual `(0, spot)` and
/// `(terminal_strike, 0)` knots where they apply. Problems with the extra
/// knots are recorded in `report`.
fn knots(
    curve: &QuoteCurve,
    spot: Option<f64>,
    terminal_strike: Option<f64>,
    tol: f64,
    report: &mut ValidationReport,
) -> (Vec<f64>, Vec<f64>) {
    let mut ks = curve.strikes().to_vec();
    let mut cs = curve.prices().to_vec();

    if let Some(s) = spot {
        if ks[0] > 0.0 {
            ks.insert(0, 0.0);
            cs.insert(0, s);
        } else if (cs[0] - s).abs() > tol {
            report.violation(ViolationKind::SpotMismatch, 0.0, cs[0] - s);
        }
    }

    let last_k = *ks.last().unwrap();
    let last_c = *cs.last().unwrap();
    match terminal_strike {
        Some(k) if k < last_k => {
            report.violation(ViolationKind::InvalidTerminalStrike, k, last_k);
        }
        Some(k) if k == last_k => {
            if last_c > tol {
                report.violation(ViolationKind::NonZeroTail, k, last_c);
            }
        }
        Some(k) => {
            ks.push(k);
            cs.push(0.0);
        }
        None => {
            if last_c > tol {
                report.warn(WarningKind::NonZeroTail, last_k, last_c);
            }
        }
    }
    (ks, cs)
}

fn check_shape(ks: &[f64], cs: &[f64], tol: f64, report: &mut ValidationReport) {
    for j in 1..ks.len() {
        let rise = cs[j] - cs[j - 1];
        if rise > tol {
            report.violation(ViolationKind::NotDecreasing, ks[j], rise);
        }
    }
    let slopes: Vec<f64> = (1..ks.len())
        .map(|j| (cs[j] - cs[j - 1]) / (ks[j] - ks[j - 1]))
        .collect();
    for j in 1..slopes.len() {
        let (h1, h2) = (ks[j] - ks[j - 1], ks[j + 1] - ks[j]);
        let jump = slopes[j] - slopes[j - 1];
        // chord at k_j minus C(k_j)
        if jump * h1 * h2 / (h1 + h2) < -tol {
            report.violation(ViolationKind::ConvexityViolation, ks[j], jump);
        }
    }
    if let Some(&s0) = slopes.first() {
        if (s0 + 1.0) * (ks[1] - ks[0]) < -tol {
            report.violation(ViolationKind::SlopeBelowMinusOne, ks[0], s0);
        }
    }
}

/// Mean of the measure implied by a flat-right, slope -1-left interpolant.
fn implied_mean(ks: &[f64], cs: &[f64]) -> f64 {
    ks[0] + cs[0] - cs[cs.len() - 1]
}

/// Checks that the quotes can be interpolated into a candidate call-price
/// function: prices weakly decreasing, slopes weakly increasing, first
/// slope at least -1 and a strike-0 quote equal to spot.
///
/// `spot` overrides the spot stored on the curve. Failures are reported,
/// never returned as errors.
pub fn validate_candidate(
    curve: &QuoteCurve,
    spot: Option<f64>,
    terminal_strike: Option<f64>,
) -> ValidationReport {
    let spot = spot.or(curve.spot());
    let tol = price_tolerance(curve, spot);
    let mut report = ValidationReport::new();
    let (ks, cs) = knots(curve, spot, terminal_strike, tol, &mut report);
    check_shape(&ks, &cs, tol, &mut report);
    if let Some(s) = spot {
        let mean = implied_mean(&ks, &cs);
        if (mean - s).abs() > tol {
            report.warn(WarningKind::MeanDiffersFromSpot, 0.0, mean);
        }
    }
    report.finish()
}

/// Linear interpolation of a valid curve.
pub fn interpolate(
    curve: &QuoteCurve,
    spot: Option<f64>,
    terminal_strike: Option<f64>,
) -> Result<CallPriceFn, QuoteError> {
    let report = validate_candidate(curve, spot, terminal_strike);
    if !report.passed {
        return Err(QuoteError::InvalidCurve(report));
    }
    let spot = spot.or(curve.spot());
    let tol = price_tolerance(curve, spot);
    let (ks, cs) = knots(curve, spot, terminal_strike, tol, &mut ValidationReport::new());
    CallPriceFn::from_knots(ks, cs)
}

/// Cross-maturity consistency: long-maturity strikes must be quoted at the
/// short maturity, the short interpolant must lie below the long one at
/// every strike, and the implied means must agree.
pub fn check_calendar(short: &QuoteCurve, long: &QuoteCurve) -> ValidationReport {
    let mut report = ValidationReport::new();
    let tol = price_tolerance(short, short.spot()).max(price_tolerance(long, long.spot()));

    for &k in long.strikes() {
        if !short.strikes().contains(&k) {
            report.violation(ViolationKind::StrikeSetMismatch, k, k);
        }
    }

    let mut scratch = ValidationReport::new();
    let (ks_s, cs_s) = knots(short, short.spot(), None, tol, &mut scratch);
    let (ks_l, cs_l) = knots(long, long.spot(), None, tol, &mut scratch);
    let (Ok(c_short), Ok(c_long)) = (
        CallPriceFn::from_knots(ks_s.clone(), cs_s.clone()),
        CallPriceFn::from_knots(ks_l.clone(), cs_l.clone()),
    ) else {
        unreachable!("quote curves have strictly increasing strikes")
    };

    let mut union: Vec<f64> = short.strikes().iter().chain(long.strikes()).copied().collect();
    union.sort_by(f64::total_cmp);
    union.dedup();
    for k in union {
        let gap = c_short.eval(k) - c_long.eval(k);
        if gap > tol {
            report.violation(ViolationKind::CalendarArbitrage, k, gap);
        }
    }

    let (m_s, m_l) = (implied_mean(&ks_s, &cs_s), implied_mean(&ks_l, &cs_l));
    if (m_s - m_l).abs() > tol {
        report.violation(ViolationKind::MeanMismatch, 0.0, m_s - m_l);
    }
    for (curve, mean) in [(short, m_s), (long, m_l)] {
        if let Some(s) = curve.spot() {
            if (mean - s).abs() > tol {
                report.warn(WarningKind::MeanDiffersFromSpot, 0.0, mean);
            }
        }
    }
    report.finish()
}
