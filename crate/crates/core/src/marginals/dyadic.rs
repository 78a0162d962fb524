use super::{implied_measure, DiscreteMeasure, MeasureError};
use crate::quotes::{CallPrice, CallPriceFn};

/// Strikes `j K / 2^n`, `j = 0..=2^n`.
pub fn dyadic_grid(n: u32, k_max: f64) -> Result<Vec<f64>, MeasureError> {
    if !(1..=30).contains(&n) {
        return Err(MeasureError::InvalidGridLevel(n));
    }
    if !(k_max.is_finite() && k_max > 0.0) {
        return Err(MeasureError::InvalidTerminalStrike(k_max));
    }
    let cells = 1u64 << n;
    Ok((0..=cells)
        .map(|j| k_max * (j as f64) / (cells as f64))
        .collect())
}

/// Extremal measure of the call prices observed at the dyadic strikes
/// `j K / 2^n`: samples `c` on the grid, interpolates linearly and reads
/// off the slope jumps.
pub fn dyadic_restriction<C: CallPrice + ?Sized>(
    c: &C,
    n: u32,
    k_max: f64,
) -> Result<DiscreteMeasure, MeasureError> {
    let grid = dyadic_grid(n, k_max)?;
    let tail = c.call(k_max);
    if tail > 1e-9 * c.call(0.0).abs().max(1.0) {
        return Err(MeasureError::SupportExceedsK { value: tail });
    }
    let mut values: Vec<f64> = grid.iter().map(|&k| c.call(k)).collect();
    *values.last_mut().unwrap() = 0.0;
    let f = CallPriceFn::from_knots(grid, values).expect("grid is strictly increasing");
    implied_measure(&f)
}
