use super::{DiscreteMeasure, MeasureError};
use crate::quotes::CallPriceFn;

/// Slope jumps below this (in probability units) count as convexity
/// failures rather than rounding noise.
const CONVEXITY_TOL: f64 = 1e-9;

/// Extremal measure of a piecewise-linear call function: the weight at each
/// knot is the jump of the slope, with slope -1 before the first knot and
/// 0 after the last.
pub fn implied_measure(f: &CallPriceFn) -> Result<DiscreteMeasure, MeasureError> {
    let knots = f.knots();
    let slopes = f.slopes();
    let n = knots.len();
    let mut weights = Vec::with_capacity(n);
    for j in 0..n {
        let before = if j == 0 { -1.0 } else { slopes[j - 1] };
        let after = if j + 1 == n { 0.0 } else { slopes[j] };
        let jump = after - before;
        if jump < -CONVEXITY_TOL {
            return Err(MeasureError::NotConvex { at: knots[j], jump });
        }
        weights.push(jump.max(0.0));
    }
    DiscreteMeasure::new(knots.to_vec(), weights)
}

/// Call-price function `C(k) = sum (x - k)^+ w` of a measure, as a
/// piecewise-linear function with knots at 0 and at the atoms.
pub fn call_fn_of(m: &DiscreteMeasure) -> CallPriceFn {
    let mut knots = Vec::with_capacity(m.len() + 1);
    if m.min_atom() > 0.0 {
        knots.push(0.0);
    }
    knots.extend_from_slice(m.atoms());
    let values = knots.iter().map(|&k| m.call_price(k)).collect();
    CallPriceFn::from_knots(knots, values).expect("atoms are strictly increasing")
}
