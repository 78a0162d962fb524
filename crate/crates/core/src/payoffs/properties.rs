use serde::Serialize;

use super::{Payoff, PayoffError};

/// Default slack on the discrete inequalities, relative to the largest
/// payoff value on the grid (at least 1).
pub const PROPERTY_TOLERANCE: f64 = 1e-9;

/// Structure of a payoff as certified on a finite grid.
///
/// `lipschitz_bound` and `cyy_bound` are grid estimates from finite
/// differences, not true suprema.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PayoffProperties {
    pub convex_in_x: bool,
    pub convex_in_y: bool,
    pub supermodular: bool,
    pub directionally_convex: bool,
    /// Martingale Spence–Mirrlees: `c_xyy >= 0`.
    pub msm: bool,
    pub lipschitz_bound: f64,
    pub cyy_bound: f64,
}

pub fn check_properties(
    p: &Payoff,
    x_grid: &[f64],
    y_grid: &[f64],
) -> Result<PayoffProperties, PayoffError> {
    check_properties_with_tolerance(p, x_grid, y_grid, PROPERTY_TOLERANCE)
}

/// Grid-based certification with slack `tol * max(1, max |c|)`.
///
/// Convexity compares adjacent slopes, supermodularity checks the cross
/// difference of every grid cell, and the Spence–Mirrlees condition compares
/// second y-differences at adjacent x.
pub fn check_properties_with_tolerance(
    p: &Payoff,
    x_grid: &[f64],
    y_grid: &[f64],
    tol: f64,
) -> Result<PayoffProperties, PayoffError> {
    if x_grid.len() < 3 || y_grid.len() < 3 {
        return Err(PayoffError::GridTooSmall {
            x: x_grid.len(),
            y: y_grid.len(),
        });
    }
    let c = p.matrix(x_grid, y_grid)?;
    let (nx, ny) = (x_grid.len(), y_grid.len());
    let scale = c.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let slack = tol * scale;

    let slope_x = |i: usize, j: usize| (c[i + 1][j] - c[i][j]) / (x_grid[i + 1] - x_grid[i]);
    let slope_y = |i: usize, j: usize| (c[i][j + 1] - c[i][j]) / (y_grid[j + 1] - y_grid[j]);
    // slope jump along y at interior point j
    let jump_y = |i: usize, j: usize| slope_y(i, j) - slope_y(i, j - 1);

    let convex_in_x = (1..nx - 1).all(|i| (0..ny).all(|j| slope_x(i, j) - slope_x(i - 1, j) >= -slack));
    let convex_in_y = (0..nx).all(|i| (1..ny - 1).all(|j| jump_y(i, j) >= -slack));
    let supermodular = (0..nx - 1).all(|i| {
        (0..ny - 1).all(|j| c[i + 1][j + 1] - c[i + 1][j] - c[i][j + 1] + c[i][j] >= -slack)
    });
    let msm = (0..nx - 1).all(|i| (1..ny - 1).all(|j| jump_y(i + 1, j) - jump_y(i, j) >= -slack));

    let mut lipschitz_bound = 0.0f64;
    for i in 0..nx {
        for j in 0..ny {
            if i + 1 < nx {
                lipschitz_bound = lipschitz_bound.max(slope_x(i, j).abs());
            }
            if j + 1 < ny {
                lipschitz_bound = lipschitz_bound.max(slope_y(i, j).abs());
            }
        }
    }
    let mut cyy_bound = 0.0f64;
    for i in 0..nx {
        for j in 1..ny - 1 {
            let half_span = 0.5 * (y_grid[j + 1] - y_grid[j - 1]);
            cyy_bound = cyy_bound.max((jump_y(i, j) / half_span).abs());
        }
    }

    Ok(PayoffProperties {
        convex_in_x,
        convex_in_y,
        supermodular,
        directionally_convex: convex_in_x && convex_in_y && supermodular,
        msm,
        lipschitz_bound,
        cyy_bound,
    })
}

/// Constants of the discretization error bound
/// `P_n - P <= M_c / 2^n + M_d / 2^(2n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateConstants {
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub m_c: f64,
    pub m_d: f64,
}

/// `Lambda = max(Lipschitz, sup |c_yy|)`, `Lambda~ = Lambda max(K, 1)`,
/// `M_c = 12 K Lambda~` and `M_d = (7 T_mu + 5 T_nu) K^2 Lambda~`.
pub fn rate_constants(props: &PayoffProperties, k_max: f64, t_mu: f64, t_nu: f64) -> RateConstants {
    let lambda = props.lipschitz_bound.max(props.cyy_bound);
    let lambda_tilde = lambda * k_max.max(1.0);
    RateConstants {
        lambda,
        lambda_tilde,
        m_c: 12.0 * k_max * lambda_tilde,
        m_d: (7.0 * t_mu + 5.0 * t_nu) * k_max * k_max * lambda_tilde,
    }
}
