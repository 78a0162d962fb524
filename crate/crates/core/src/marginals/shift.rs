use super::{DiscreteMeasure, MeasureError};

/// Order in which [`project_to_strikes_in_order`] visits off-grid atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectionOrder {
    LeftmostFirst,
    RightmostFirst,
}

/// Moves all mass at `x_tilde` to `left` and `right`, splitting it so that
/// the mean is unchanged:
///
/// ```text
/// kappa (right - x) / (right - left)  to left,
/// kappa (x - left)  / (right - left)  to right.
/// ```
///
/// The result dominates `m` in convex order; it is obtained from `m` by a
/// single two-way transport.
pub fn shift_to_grid(
    m: &DiscreteMeasure,
    x_tilde: f64,
    left: f64,
    right: f64,
) -> Result<DiscreteMeasure, MeasureError> {
    let i = m.index_of(x_tilde).ok_or(MeasureError::NoMassAtPoint(x_tilde))?;
    let x = m.atoms()[i];
    if !(left.is_finite() && right.is_finite() && left < x && x < right) {
        return Err(MeasureError::InvalidBracket { x, left, right });
    }
    let kappa = m.weights()[i];
    let span = right - left;
    let pairs = m
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, p)| p)
        .chain([
            (left, kappa * (right - x) / span),
            (right, kappa * (x - left) / span),
        ]);
    DiscreteMeasure::from_pairs(pairs)
}

/// Shifts every atom off `strikes` onto its bracketing strikes, leftmost
/// atom first, until the support lies on the strikes.
///
/// The endpoint does not depend on the order: it is the extremal measure of
/// the call prices of `m` observed at `strikes`.
pub fn project_to_strikes(
    m: &DiscreteMeasure,
    strikes: &[f64],
) -> Result<DiscreteMeasure, MeasureError> {
    project_to_strikes_in_order(m, strikes, ProjectionOrder::LeftmostFirst)
}

pub fn project_to_strikes_in_order(
    m: &DiscreteMeasure,
    strikes: &[f64],
    order: ProjectionOrder,
) -> Result<DiscreteMeasure, MeasureError> {
    if strikes.is_empty() || strikes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(MeasureError::UnsortedStrikes);
    }
    let (lo, hi) = (strikes[0], strikes[strikes.len() - 1]);
    let tol = |s: f64| 1e-12 * s.abs().max(1.0);
    if m.min_atom() < lo - tol(lo) || m.max_atom() > hi + tol(hi) {
        return Err(MeasureError::SupportOutsideStrikeRange {
            lo: m.min_atom(),
            hi: m.max_atom(),
        });
    }

    // snap atoms that sit on a strike up to rounding
    let on_strike = |x: f64| -> Option<f64> {
        let j = strikes.partition_point(|&s| s < x);
        [j.checked_sub(1), Some(j)]
            .into_iter()
            .flatten()
            .filter_map(|j| strikes.get(j).copied())
            .find(|&s| (s - x).abs() <= tol(s))
    };
    let mut cur = DiscreteMeasure::from_pairs(m.iter().map(|(x, w)| (on_strike(x).unwrap_or(x), w)))?;

    loop {
        let mut off = cur.atoms().iter().copied().filter(|&x| on_strike(x).is_none());
        let next = match order {
            ProjectionOrder::LeftmostFirst => off.next(),
            ProjectionOrder::RightmostFirst => off.last(),
        };
        let Some(x) = next else { return Ok(cur) };
        let j = strikes.partition_point(|&s| s < x);
        cur = shift_to_grid(&cur, x, strikes[j - 1], strikes[j])?;
    }
}
