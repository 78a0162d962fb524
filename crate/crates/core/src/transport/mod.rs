//! Martingale optimal transport between two fixed discrete margins.
//!
//! A coupling `Q` of `mu` and `nu` is a martingale coupling when
//!
//! ```text
//! sum_y Q(x, y) = mu(x),   sum_x Q(x, y) = nu(y),   sum_y Q(x, y) y = x mu(x).
//! ```
//!
//! The upper price bound is the largest `sum Q(x, y) c(x, y)` over all such
//! couplings. [`solve_lp`] computes it for any payoff; [`left_curtain`]
//! builds the optimiser directly for payoffs satisfying the martingale
//! Spence–Mirrlees condition; [`comonotone_bound`] drops the martingale
//! constraint altogether.

mod comonotone;
mod curtain;
mod decompose;
mod simplex;

pub use comonotone::{comonotone_bound, comonotone_coupling};
pub use curtain::{authorize_left_curtain, left_curtain, solve_left_curtain};
pub use decompose::{aggregate, decompose, TransportComponent};
pub use simplex::{solve_lp, LpOptions, DEFAULT_SIZE_CAP};

use std::io::Write;

use serde::Serialize;

use crate::marginals::DiscreteMeasure;
use crate::payoffs::{Payoff, PayoffError};
use crate::report::{ValidationReport, ViolationKind};

/// Slack on margin constraints; the martingale constraint uses this times the
/// largest atom.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("no martingale coupling exists: the margins are not in convex order (phase-one residual {residual})")]
    Infeasible { residual: f64 },
    #[error("LP has {variables} variables, above the cap of {cap}")]
    SizeCapExceeded { variables: usize, cap: usize },
    #[error("internal solver failure: {0}")]
    Internal(String),
    #[error("payoff is not supermodular on the atom grid")]
    NotSupermodular,
    #[error("coupling is not a martingale at x = {x}: residual {residual}")]
    NotDecomposable { x: f64, residual: f64 },
    #[error("solver {solver} is not valid for payoff {payoff}")]
    SolverUnauthorized { solver: SolverKind, payoff: String },
    #[error(transparent)]
    Payoff(#[from] PayoffError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Lp,
    LeftCurtain,
    Comonotone,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Lp => "lp",
            Self::LeftCurtain => "curtain",
            Self::Comonotone => "comonotone",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CouplingEntry {
    pub x_index: usize,
    pub y_index: usize,
    pub mass: f64,
}

/// A coupling of two discrete measures, stored sparsely. Entries are sorted
/// by `(x_index, y_index)` and carry positive mass.
#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleCoupling {
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    entries: Vec<CouplingEntry>,
}

impl MartingaleCoupling {
    /// Merges duplicate index pairs and drops non-positive masses. Panics on
    /// out-of-range indices. Feasibility is not checked; see
    /// [`verify_feasible`].
    pub fn new(mu: DiscreteMeasure, nu: DiscreteMeasure, entries: Vec<CouplingEntry>) -> Self {
        let mut entries: Vec<CouplingEntry> = entries
            .into_iter()
            .inspect(|e| {
                assert!(e.x_index < mu.len() && e.y_index < nu.len(), "coupling index out of range")
            })
            .collect();
        entries.sort_by_key(|e| (e.x_index, e.y_index));
        let mut merged: Vec<CouplingEntry> = Vec::with_capacity(entries.len());
        for e in entries {
            match merged.last_mut() {
                Some(l) if (l.x_index, l.y_index) == (e.x_index, e.y_index) => l.mass += e.mass,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.mass > 0.0);
        Self {
            mu,
            nu,
            entries: merged,
        }
    }

    /// `Y = X`.
    pub fn identity(mu: &DiscreteMeasure) -> Self {
        let entries = (0..mu.len())
            .map(|i| CouplingEntry {
                x_index: i,
                y_index: i,
                mass: mu.weights()[i],
            })
            .collect();
        Self::new(mu.clone(), mu.clone(), entries)
    }

    /// Independent coupling `mu x nu`, a martingale only when `nu` is a dirac.
    pub fn product(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Self {
        let mut entries = Vec::with_capacity(mu.len() * nu.len());
        for (i, a) in mu.weights().iter().enumerate() {
            for (j, b) in nu.weights().iter().enumerate() {
                entries.push(CouplingEntry {
                    x_index: i,
                    y_index: j,
                    mass: a * b,
                });
            }
        }
        Self::new(mu.clone(), nu.clone(), entries)
    }

    pub fn mu(&self) -> &DiscreteMeasure {
        &self.mu
    }

    pub fn nu(&self) -> &DiscreteMeasure {
        &self.nu
    }

    pub fn entries(&self) -> &[CouplingEntry] {
        &self.entries
    }

    /// `(x, y, mass)` triples in `(x, y)` order.
    pub fn triples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.entries
            .iter()
            .map(|e| (self.mu.atoms()[e.x_index], self.nu.atoms()[e.y_index], e.mass))
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.mass).sum()
    }

    /// Largest violation of each constraint family.
    pub fn residuals(&self) -> Residuals {
        let mut rows = vec![0.0; self.mu.len()];
        let mut cols = vec![0.0; self.nu.len()];
        let mut drift = vec![0.0; self.mu.len()];
        for (e, (x, y, m)) in self.entries.iter().zip(self.triples()) {
            rows[e.x_index] += m;
            cols[e.y_index] += m;
            drift[e.x_index] += m * (y - x);
        }
        let max_dev = |got: &[f64], want: &[f64]| {
            got.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        Residuals {
            first_margin: max_dev(&rows, self.mu.weights()),
            second_margin: max_dev(&cols, self.nu.weights()),
            martingale: drift.iter().map(|d| d.abs()).fold(0.0, f64::max),
        }
    }

    /// Writes `x,y,mass` rows sorted by `(x, y)`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "mass"])?;
        for (x, y, m) in self.triples() {
            w.write_record([x.to_string(), y.to_string(), m.to_string()])?;
        }
        w.flush()
    }
}

/// Largest absolute violation per constraint family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Residuals {
    pub first_margin: f64,
    pub second_margin: f64,
    pub martingale: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.first_margin.max(self.second_margin).max(self.martingale)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Simplex pivots, or atoms swept for the constructive solvers.
    pub iterations: usize,
    pub residuals: Residuals,
}

#[derive(Clone, Debug)]
pub struct BoundResult {
    pub value: f64,
    pub coupling: MartingaleCoupling,
    pub solver: SolverKind,
    pub diagnostics: Diagnostics,
}

impl BoundResult {
    pub(crate) fn from_coupling(
        coupling: MartingaleCoupling,
        payoff: &Payoff,
        solver: SolverKind,
        iterations: usize,
    ) -> Result<Self, TransportError> {
        Ok(Self {
            value: evaluate_coupling(&coupling, payoff)?,
            diagnostics: Diagnostics {
                iterations,
                residuals: coupling.residuals(),
            },
            coupling,
            solver,
        })
    }
}

/// `sum mass c(x, y)` over the coupling.
pub fn evaluate_coupling(q: &MartingaleCoupling, p: &Payoff) -> Result<f64, PayoffError> {
    q.triples().map(|(x, y, m)| Ok(m * p.evaluate(x, y)?)).sum()
}

/// Checks `q` against the margins `mu`, `nu` and the martingale property.
/// Atoms are matched by position, so `q` must be built on the same atoms.
pub fn verify_feasible(
    q: &MartingaleCoupling,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> ValidationReport {
    let mut report = ValidationReport::new();
    let mut rows = vec![0.0; mu.len()];
    let mut cols = vec![0.0; nu.len()];
    let mut drift = vec![0.0; q.mu.len()];
    let mut stray = 0.0f64;
    for (e, (x, y, m)) in q.entries.iter().zip(q.triples()) {
        match (mu.index_of(x), nu.index_of(y)) {
            (Some(i), Some(j)) => {
                rows[i] += m;
                cols[j] += m;
            }
            _ => stray = stray.max(m),
        }
        drift[e.x_index] += m * (y - x);
    }
    let worst = |got: &[f64], want: &DiscreteMeasure| {
        got.iter()
            .zip(want.iter())
            .map(|(g, (a, w))| (a, (g - w).abs()))
            .fold((0.0, stray), |b, p| if p.1 > b.1 { p } else { b })
    };
    let (x, r) = worst(&rows, mu);
    if r > FEASIBILITY_TOLERANCE {
        report.violation(ViolationKind::FirstMarginMismatch, x, r);
    }
    let (y, r) = worst(&cols, nu);
    if r > FEASIBILITY_TOLERANCE {
        report.violation(ViolationKind::SecondMarginMismatch, y, r);
    }
    let scale = mu.max_atom().max(nu.max_atom()).max(1.0);
    let (x, r) = drift
        .iter()
        .enumerate()
        .map(|(i, d)| (q.mu.atoms()[i], d.abs()))
        .fold((0.0, 0.0), |b, p| if p.1 > b.1 { p } else { b });
    if r > FEASIBILITY_TOLERANCE * scale {
        report.violation(ViolationKind::MartingaleViolation, x, r);
    }
    report.finish()
}
