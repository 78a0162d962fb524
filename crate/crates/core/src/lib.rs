//! Model-free upper price bounds for options written on one stock at two
//! maturities.
//!
//! Given finitely many call quotes per maturity, the crate builds the
//! piecewise-linear call-price interpolants, extracts the extremal
//! (convex-order maximal) discrete pricing measures consistent with them and
//! solves the martingale optimal transport problem between those two
//! margins. The resulting value is an arbitrage-consistent upper bound for
//! the exotic payoff `c(X, Y)`, where `X` and `Y` are the stock prices at the
//! two maturities.
//!
//! The pipeline, module by module:
//!
//! * [`quotes`]: parse and validate observed call prices, interpolate them.
//! * [`marginals`]: discrete measures, implied measures, convex order,
//!   Wasserstein distances, dyadic restrictions and mass shifting.
//! * [`payoffs`]: two-argument payoffs and their grid-certified structure
//!   (convexity, supermodularity, the martingale Spence–Mirrlees condition).
//! * [`transport`]: the simplex LP, the left-curtain coupling, the comonotone
//!   benchmark and coupling verification.
//! * [`convergence`]: discretization studies against closed-form bounds.
//!
//! ```
//! use mot_bounds::marginals::DiscreteMeasure;
//! use mot_bounds::payoffs::Payoff;
//! use mot_bounds::transport::{solve_lp, LpOptions};
//!
//! let mu = DiscreteMeasure::new(vec![1.0, 7.0 / 3.0, 3.0], vec![0.25, 0.5, 0.25])?;
//! let nu = DiscreteMeasure::new(vec![0.0, 7.0 / 3.0, 4.0], vec![0.25, 0.5, 0.25])?;
//! let bound = solve_lp(&mu, &nu, &Payoff::xy_squared(), &LpOptions::default())?;
//! assert!((bound.value - 913.0 / 54.0).abs() < 1e-10);
//! # Ok::<(), mot_bounds::Error>(())
//! ```

pub mod convergence;
pub mod marginals;
pub mod payoffs;
pub mod quotes;
pub mod report;
pub mod transport;

pub use report::{ValidationReport, Violation, ViolationKind, Warning, WarningKind};

/// Any error produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Quote(#[from] quotes::QuoteError),
    #[error(transparent)]
    Measure(#[from] marginals::MeasureError),
    #[error(transparent)]
    Payoff(#[from] payoffs::PayoffError),
    #[error(transparent)]
    Transport(#[from] transport::TransportError),
    #[error(transparent)]
    Study(#[from] convergence::StudyError),
}
