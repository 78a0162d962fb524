use super::{BoundResult, CouplingEntry, MartingaleCoupling, SolverKind, TransportError};
use crate::marginals::DiscreteMeasure;
use crate::payoffs::{Payoff, PROPERTY_TOLERANCE};

/// Quantile coupling: the `t`-quantile of `mu` is paired with the
/// `t`-quantile of `nu` for every level `t`.
pub fn comonotone_coupling(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> MartingaleCoupling {
    let (a, b) = (mu.weights(), nu.weights());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0], b[0]);
    let mut entries = Vec::with_capacity(a.len() + b.len());
    loop {
        let m = ra.min(rb);
        entries.push(CouplingEntry {
            x_index: i,
            y_index: j,
            mass: m,
        });
        ra -= m;
        rb -= m;
        // the smaller remainder is exhausted; the other carries the dust
        let a_done = ra <= rb;
        if a_done {
            i += 1;
            if i == a.len() {
                break;
            }
            ra = a[i];
        } else {
            j += 1;
            if j == b.len() {
                break;
            }
            rb = b[j];
        }
    }
    MartingaleCoupling::new(mu.clone(), nu.clone(), entries)
}

/// Upper bound over all couplings of the margins, martingale or not. For
/// supermodular payoffs the comonotone coupling attains it.
pub fn comonotone_bound(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: &Payoff,
) -> Result<BoundResult, TransportError> {
    let c = p.matrix(mu.atoms(), nu.atoms())?;
    let slack = PROPERTY_TOLERANCE * c.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let supermodular = c.windows(2).all(|r| {
        (0..r[0].len().saturating_sub(1))
            .all(|j| r[1][j + 1] - r[1][j] - r[0][j + 1] + r[0][j] >= -slack)
    });
    if !supermodular {
        return Err(TransportError::NotSupermodular);
    }
    let q = comonotone_coupling(mu, nu);
    let steps = q.entries().len();
    BoundResult::from_coupling(q, p, SolverKind::Comonotone, steps)
}
