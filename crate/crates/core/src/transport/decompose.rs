use serde::Serialize;

use super::{MartingaleCoupling, TransportError, FEASIBILITY_TOLERANCE};

/// Elementary martingale transport out of one atom `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransportComponent {
    /// Mass that stays at `x`. `y` equals `x` except for one-sided moves
    /// at rounding level, which have no opposite leg to balance them.
    Direct { x: f64, y: f64, mass: f64 },
    /// `mass1` to `y1 > x` and `mass2` to `y2 < x`, balanced so that
    /// `(mass1 + mass2) x = mass1 y1 + mass2 y2`.
    TwoWay {
        x: f64,
        y1: f64,
        y2: f64,
        mass1: f64,
        mass2: f64,
    },
}

/// Splits a martingale coupling into direct and two-way transports.
///
/// For each source atom the mass going up and the mass going down are
/// paired greedily in destination order. Masses are snapped at `1e-12`
/// relative so that re-aggregating the components gives the entries back.
pub fn decompose(q: &MartingaleCoupling) -> Result<Vec<TransportComponent>, TransportError> {
    let scale = q.mu().max_atom().max(q.nu().max_atom()).max(1.0);
    let mut out = Vec::new();
    let mut i = 0;
    let entries: Vec<(f64, f64, f64)> = q.triples().collect();
    while i < entries.len() {
        let x = entries[i].0;
        let mut up: Vec<(f64, f64)> = Vec::new();
        let mut down: Vec<(f64, f64)> = Vec::new();
        while i < entries.len() && entries[i].0 == x {
            let (_, y, m) = entries[i];
            if y > x {
                up.push((y, m));
            } else if y < x {
                down.push((y, m));
            } else {
                out.push(TransportComponent::Direct { x, y: x, mass: m });
            }
            i += 1;
        }
        let drift: f64 = up.iter().chain(&down).map(|(y, m)| m * (y - x)).sum();
        if drift.abs() > FEASIBILITY_TOLERANCE * scale {
            return Err(TransportError::NotDecomposable { x, residual: drift });
        }

        let (mut a, mut b) = (0, 0);
        let (mut ra, mut rb) = (up.first().map_or(0.0, |p| p.1), down.first().map_or(0.0, |p| p.1));
        while a < up.len() && b < down.len() {
            let (y1, y2) = (up[a].0, down[b].0);
            // mass at y1 balanced by all of rb, and vice versa
            let need1 = rb * (x - y2) / (y1 - x);
            let (mut m1, mut m2) = if need1 <= ra { (need1, rb) } else { (ra, ra * (y1 - x) / (x - y2)) };
            let snap = 1e-12 * (ra + rb);
            if ra - m1 <= snap {
                m1 = ra;
            }
            if rb - m2 <= snap {
                m2 = rb;
            }
            out.push(TransportComponent::TwoWay { x, y1, y2, mass1: m1, mass2: m2 });
            ra -= m1;
            rb -= m2;
            if ra <= 0.0 {
                a += 1;
                ra = up.get(a).map_or(0.0, |p| p.1);
            }
            if rb <= 0.0 {
                b += 1;
                rb = down.get(b).map_or(0.0, |p| p.1);
            }
        }
        // unmatched remainder is rounding dust; fold it into the last pair
        let leftover_up = up.get(a..).map_or(0.0, |s| ra + s.iter().skip(1).map(|p| p.1).sum::<f64>());
        let leftover_down = down.get(b..).map_or(0.0, |s| rb + s.iter().skip(1).map(|p| p.1).sum::<f64>());
        for (k, (list, idx, first)) in [(&up, a, ra), (&down, b, rb)].into_iter().enumerate() {
            for (n, &(y, m)) in list.iter().enumerate().skip(idx) {
                let m = if n == idx { first } else { m };
                if m <= 0.0 {
                    continue;
                }
                let last = out.iter_mut().rev().find_map(|c| match c {
                    TransportComponent::TwoWay { x: cx, y1, y2, mass1, mass2 } if *cx == x => {
                        Some((y1, y2, mass1, mass2))
                    }
                    _ => None,
                });
                match last {
                    Some((y1, _, mass1, _)) if k == 0 && *y1 == y => *mass1 += m,
                    Some((_, y2, _, mass2)) if k == 1 && *y2 == y => *mass2 += m,
                    _ => {
                        let opposite = if k == 0 { down.last() } else { up.last() };
                        let Some(&(yo, _)) = opposite else {
                            // one-sided: only acceptable if the move itself is rounding
                            if m * (y - x).abs() > FEASIBILITY_TOLERANCE * scale {
                                return Err(TransportError::NotDecomposable {
                                    x,
                                    residual: leftover_up.max(leftover_down),
                                });
                            }
                            out.push(TransportComponent::Direct { x, y, mass: m });
                            continue;
                        };
                        let (y1, y2, mass1, mass2) = if k == 0 { (y, yo, m, 0.0) } else { (yo, y, 0.0, m) };
                        out.push(TransportComponent::TwoWay { x, y1, y2, mass1, mass2 });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Sums components back into `(x, y, mass)` triples sorted by `(x, y)`.
pub fn aggregate(components: &[TransportComponent]) -> Vec<(f64, f64, f64)> {
    let mut flat: Vec<(f64, f64, f64)> = components
        .iter()
        .flat_map(|c| match *c {
            TransportComponent::Direct { x, y, mass } => vec![(x, y, mass)],
            TransportComponent::TwoWay { x, y1, y2, mass1, mass2 } => vec![(x, y1, mass1), (x, y2, mass2)],
        })
        .filter(|t| t.2 > 0.0)
        .collect();
    flat.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64, f64)> = Vec::with_capacity(flat.len());
    for (x, y, m) in flat {
        match out.last_mut() {
            Some(l) if l.0 == x && l.1 == y => l.2 += m,
            _ => out.push((x, y, m)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::marginals::DiscreteMeasure;
    use crate::transport::{left_curtain, CouplingEntry};

    fn assert_balanced(c: &TransportComponent) {
        if let TransportComponent::TwoWay { x, y1, y2, mass1, mass2 } = *c {
            assert!(y2 < x && x < y1);
            assert!(((mass1 + mass2) * x - mass1 * y1 - mass2 * y2).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_is_all_direct() {
        let q = crate::transport::MartingaleCoupling::identity(&appendix_mu());
        let parts = decompose(&q).unwrap();
        assert_eq!(parts.len(), 3);
        assert!(parts.iter().all(|c| matches!(c, TransportComponent::Direct { .. })));
    }

    #[test]
    fn appendix_coupling_round_trip() {
        let q = left_curtain(&appendix_mu(), &appendix_nu()).unwrap();
        let parts = decompose(&q).unwrap();
        parts.iter().for_each(assert_balanced);
        assert!(parts.iter().any(|c| matches!(c, TransportComponent::TwoWay { .. })));
        let back = aggregate(&parts);
        let orig: Vec<_> = q.triples().collect();
        assert_eq!(back.len(), orig.len());
        for (a, b) in back.iter().zip(&orig) {
            assert_eq!((a.0, a.1), (b.0, b.1));
            assert!((a.2 - b.2).abs() < 1e-15);
        }
    }

    #[test]
    fn single_shift_is_one_component() {
        let mu = DiscreteMeasure::dirac(2.0);
        let nu = DiscreteMeasure::new(vec![1.0, 3.0], vec![0.5, 0.5]).unwrap();
        let q = left_curtain(&mu, &nu).unwrap();
        assert_eq!(
            decompose(&q).unwrap(),
            vec![TransportComponent::TwoWay { x: 2.0, y1: 3.0, y2: 1.0, mass1: 0.5, mass2: 0.5 }]
        );
    }

    #[test]
    fn drifting_coupling_is_rejected() {
        let mu = DiscreteMeasure::dirac(2.0);
        let nu = DiscreteMeasure::dirac(3.0);
        let q = crate::transport::MartingaleCoupling::new(
            mu,
            nu,
            vec![CouplingEntry { x_index: 0, y_index: 0, mass: 1.0 }],
        );
        assert!(matches!(decompose(&q), Err(TransportError::NotDecomposable { .. })));
    }
}
