use super::DiscreteMeasure;

const ORDER_TOL: f64 = 1e-9;

/// How far a pair of measures is from `mu <=_c nu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexOrderGap {
    /// `mean(mu) - mean(nu)`.
    pub mean_gap: f64,
    /// `max_k (C_mu(k) - C_nu(k))` over all atoms of both measures.
    pub max_call_excess: f64,
    /// Strike where the excess is largest.
    pub at: f64,
}

pub fn convex_order_gap(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> ConvexOrderGap {
    let mut gap = ConvexOrderGap {
        mean_gap: mu.mean() - nu.mean(),
        max_call_excess: f64::NEG_INFINITY,
        at: mu.min_atom(),
    };
    // both call functions are linear between atoms, so atoms suffice
    for &k in mu.atoms().iter().chain(nu.atoms()) {
        let excess = mu.call_price(k) - nu.call_price(k);
        if excess > gap.max_call_excess {
            gap.max_call_excess = excess;
            gap.at = k;
        }
    }
    gap
}

/// `mu <=_c nu`: equal means and `C_mu <= C_nu` everywhere, up to `1e-9`
/// times the largest atom.
pub fn convex_order_leq(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> bool {
    let scale = mu.max_atom().max(nu.max_atom()).max(1.0);
    let g = convex_order_gap(mu, nu);
    g.mean_gap.abs() <= ORDER_TOL * scale && g.max_call_excess <= ORDER_TOL * scale
}
