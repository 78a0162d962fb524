use super::{BoundResult, CouplingEntry, MartingaleCoupling, SolverKind, TransportError};
use crate::marginals::DiscreteMeasure;
use crate::payoffs::{check_properties, Payoff, PayoffKind};

const DUST: f64 = 1e-15;

/// Left-curtain coupling: the atoms of `mu` are processed from left to
/// right, and each one is sent to the part of the not yet used mass of `nu`
/// that is smallest in convex order among those with the right mass and
/// barycenter. That part is the mass between two quantile levels `u` and
/// `u + w` of the remaining measure, with `u` chosen so the barycenter is
/// the atom itself.
///
/// For payoffs with `c_xyy >= 0` this coupling is optimal.
pub fn left_curtain(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<MartingaleCoupling, TransportError> {
    let ys = nu.atoms();
    let mut rest: Vec<f64> = nu.weights().to_vec();
    let scale = mu.max_atom().max(nu.max_atom()).max(1.0);
    let mut entries = Vec::new();

    for (i, (x, w)) in mu.iter().enumerate() {
        // cumulative mass and first moment of the remaining measure
        let mut cum = Vec::with_capacity(ys.len() + 1);
        let mut mom = Vec::with_capacity(ys.len() + 1);
        let (mut c, mut s) = (0.0, 0.0);
        cum.push(0.0);
        mom.push(0.0);
        for (y, r) in ys.iter().zip(&rest) {
            c += r;
            s += r * y;
            cum.push(c);
            mom.push(s);
        }
        let total = c;
        let w = w.min(total);
        // int_0^t G, G the quantile function of the remaining measure
        let first_moment = |t: f64| -> f64 {
            let k = cum.partition_point(|&v| v <= t).clamp(1, ys.len());
            mom[k - 1] + (t - cum[k - 1]) * ys[k - 1]
        };
        let window_mean = |u: f64| (first_moment(u + w) - first_moment(u)) / w;

        let hi_u = (total - w).max(0.0);
        let (m_lo, m_hi) = (window_mean(0.0), window_mean(hi_u));
        let tol = 1e-9 * scale;
        if x < m_lo - tol || x > m_hi + tol {
            return Err(TransportError::Infeasible {
                residual: (m_lo - x).max(x - m_hi),
            });
        }

        // the window mean is piecewise linear with kinks where either end
        // of the window crosses an atom boundary
        let mut knots: Vec<f64> = cum
            .iter()
            .flat_map(|&c| [c, c - w])
            .filter(|&u| u > 0.0 && u < hi_u)
            .chain([0.0, hi_u])
            .collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let means: Vec<f64> = knots.iter().map(|&u| window_mean(u)).collect();
        let k = means.partition_point(|&m| m < x);
        let u = if k == 0 {
            0.0
        } else if k == knots.len() {
            hi_u
        } else {
            let (u0, u1, m0, m1) = (knots[k - 1], knots[k], means[k - 1], means[k]);
            if m1 - m0 <= 0.0 {
                u0
            } else {
                u0 + (u1 - u0) * (x - m0) / (m1 - m0)
            }
        };

        for j in 0..ys.len() {
            let take = (cum[j + 1].min(u + w) - cum[j].max(u)).max(0.0);
            if take > DUST {
                entries.push(CouplingEntry {
                    x_index: i,
                    y_index: j,
                    mass: take,
                });
                rest[j] -= take;
                if rest[j] < DUST {
                    rest[j] = 0.0;
                }
            }
        }
    }
    Ok(MartingaleCoupling::new(mu.clone(), nu.clone(), entries))
}

/// Fails unless `p` satisfies the martingale Spence–Mirrlees condition on
/// the grid `xs x ys`. The Asian payoff is never accepted: its kink makes
/// the grid check meaningless for optimality.
pub fn authorize_left_curtain(p: &Payoff, xs: &[f64], ys: &[f64]) -> Result<(), TransportError> {
    let unauthorized = || TransportError::SolverUnauthorized {
        solver: SolverKind::LeftCurtain,
        payoff: p.label(),
    };
    if matches!(p.kind(), PayoffKind::Asian { .. }) {
        return Err(unauthorized());
    }
    if xs.len() < 3 || ys.len() < 3 {
        // too few points to see a third difference; nothing to certify
        return Ok(());
    }
    if check_properties(p, xs, ys)?.msm {
        Ok(())
    } else {
        Err(unauthorized())
    }
}

/// Bound from the left-curtain coupling, after checking that the payoff
/// makes it optimal on the atoms of the margins.
pub fn solve_left_curtain(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: &Payoff,
) -> Result<BoundResult, TransportError> {
    authorize_left_curtain(p, mu.atoms(), nu.atoms())?;
    let q = left_curtain(mu, nu)?;
    BoundResult::from_coupling(q, p, SolverKind::LeftCurtain, mu.len())
}
