use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::analytic::AnalyticMarginal;
use super::{appendix_true_bound, closed_form_uniform_bound, StudyError};
use crate::marginals::dyadic_restriction;
use crate::payoffs::{check_properties, rate_constants, Payoff, PayoffKind, PayoffProperties, RateConstants};
use crate::transport::{
    authorize_left_curtain, left_curtain, solve_lp, BoundResult, LpOptions, SolverKind,
};

#[derive(Clone, Debug, PartialEq)]
pub enum StudyCase {
    /// `mu = U[m-h, m+h]`, `nu = U[m-H, m+H]`.
    Uniform { m: f64, h: f64, big_h: f64 },
    /// The three-atom margins of the rate-optimality example.
    Appendix,
    Marginals { mu: AnalyticMarginal, nu: AnalyticMarginal },
}

impl StudyCase {
    pub fn marginals(&self) -> Result<(AnalyticMarginal, AnalyticMarginal), StudyError> {
        Ok(match self {
            Self::Uniform { m, h, big_h } => {
                if !(*h > 0.0 && h < big_h && m - big_h >= 0.0) {
                    return Err(StudyError::InvalidDilation { m: *m, h: *h, big_h: *big_h });
                }
                (
                    AnalyticMarginal::uniform(m - h, m + h)?,
                    AnalyticMarginal::uniform(m - big_h, m + big_h)?,
                )
            }
            Self::Appendix => (AnalyticMarginal::appendix_mu(), AnalyticMarginal::appendix_nu()),
            Self::Marginals { mu, nu } => (mu.clone(), nu.clone()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverChoice {
    /// Left-curtain when the payoff allows it, otherwise the LP.
    #[default]
    Auto,
    Lp,
    LeftCurtain,
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub case: StudyCase,
    pub payoff: Payoff,
    pub levels: Vec<u32>,
    pub k_max: f64,
    pub solver: SolverChoice,
    /// Overrides the closed-form true bound.
    pub p_true: Option<f64>,
    pub lp: LpOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub p_n: f64,
    /// `2^(2n) (P_n - P)`.
    pub d_n: f64,
    pub solver: SolverKind,
    /// Wall-clock time of the solve.
    pub seconds: f64,
}

/// The bound for the full marginals: user-supplied, or in closed form for the
/// uniform and appendix cases.
pub fn true_bound(cfg: &StudyConfig) -> Result<f64, StudyError> {
    if let Some(p) = cfg.p_true {
        return Ok(p);
    }
    match (&cfg.case, cfg.payoff.kind()) {
        (StudyCase::Uniform { m, h, big_h }, _) => closed_form_uniform_bound(*m, *h, *big_h, &cfg.payoff),
        (StudyCase::Appendix, PayoffKind::XySquared) => Ok(appendix_true_bound()),
        _ => Err(StudyError::MissingTrueBound),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyConstants {
    pub p_true: f64,
    /// Payoff structure estimated on a 65 x 65 grid over `[0, K]^2`.
    pub properties: PayoffProperties,
    pub rate: RateConstants,
    pub t_mu: f64,
    pub t_nu: f64,
}

fn property_grid(k_max: f64) -> Vec<f64> {
    (0..=64).map(|i| k_max * i as f64 / 64.0).collect()
}

/// True bound and error-rate constants for the sidecar of a study.
pub fn study_constants(cfg: &StudyConfig) -> Result<StudyConstants, StudyError> {
    let (mu, nu) = cfg.case.marginals()?;
    let grid = property_grid(cfg.k_max);
    let properties = check_properties(&cfg.payoff, &grid, &grid)?;
    let (t_mu, t_nu) = (mu.curvature_bound().unwrap_or(0.0), nu.curvature_bound().unwrap_or(0.0));
    Ok(StudyConstants {
        p_true: true_bound(cfg)?,
        rate: rate_constants(&properties, cfg.k_max, t_mu, t_nu),
        properties,
        t_mu,
        t_nu,
    })
}

/// Solves the bound on the dyadic restrictions of both marginals for every
/// level, in parallel. Rows come back sorted by level.
pub fn run_study(cfg: &StudyConfig) -> Result<Vec<ConvergenceRow>, StudyError> {
    if cfg.levels.is_empty() {
        return Err(StudyError::EmptyRange);
    }
    let (mu, nu) = cfg.case.marginals()?;
    if mu.support().1 > cfg.k_max || nu.support().1 > cfg.k_max {
        return Err(StudyError::KTooSmall { k_max: cfg.k_max });
    }
    let p_true = true_bound(cfg)?;
    let grid = property_grid(cfg.k_max);
    let curtain_ok = authorize_left_curtain(&cfg.payoff, &grid, &grid);
    let solver = match cfg.solver {
        SolverChoice::Lp => SolverKind::Lp,
        SolverChoice::LeftCurtain => {
            curtain_ok?;
            SolverKind::LeftCurtain
        }
        SolverChoice::Auto if curtain_ok.is_ok() => SolverKind::LeftCurtain,
        SolverChoice::Auto => SolverKind::Lp,
    };

    let mut levels = cfg.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    let mut rows = levels
        .par_iter()
        .map(|&n| -> Result<ConvergenceRow, StudyError> {
            let start = Instant::now();
            let mu_n = dyadic_restriction(&mu, n, cfg.k_max)?;
            let nu_n = dyadic_restriction(&nu, n, cfg.k_max)?;
            let r = match solver {
                SolverKind::LeftCurtain => {
                    let q = left_curtain(&mu_n, &nu_n)?;
                    BoundResult::from_coupling(q, &cfg.payoff, SolverKind::LeftCurtain, mu_n.len())?
                }
                _ => solve_lp(&mu_n, &nu_n, &cfg.payoff, &cfg.lp)?,
            };
            Ok(ConvergenceRow {
                n,
                p_n: r.value,
                d_n: 4f64.powi(n as i32) * (r.value - p_true),
                solver: r.solver,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::appendix_approx_bound;

    fn config(case: StudyCase, payoff: Payoff, levels: Vec<u32>) -> StudyConfig {
        StudyConfig {
            case,
            payoff,
            levels,
            k_max: 4.0,
            solver: SolverChoice::Auto,
            p_true: None,
            lp: LpOptions::default(),
        }
    }

    #[test]
    fn appendix_rows_match_closed_form() {
        let cfg = config(StudyCase::Appendix, Payoff::xy_squared(), (3..=10).rev().collect());
        let rows = run_study(&cfg).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), (3..=10).collect::<Vec<_>>());
        for r in &rows {
            assert!((r.p_n - appendix_approx_bound(r.n)).abs() < 1e-9, "n = {}", r.n);
            assert_eq!(r.solver, SolverKind::LeftCurtain);
            let d = 4f64.powi(r.n as i32) * (r.p_n - appendix_true_bound());
            assert!((r.d_n - d).abs() <= 1e-9 * d.abs());
        }
    }

    #[test]
    fn lp_and_curtain_rows_agree() {
        let case = StudyCase::Uniform { m: 2.0, h: 1.0, big_h: 2.0 };
        let mut cfg = config(case, Payoff::xy_squared(), vec![3, 4]);
        let a = run_study(&cfg).unwrap();
        cfg.solver = SolverChoice::Lp;
        let b = run_study(&cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(y.solver, SolverKind::Lp);
            assert!((x.p_n - y.p_n).abs() < 1e-9 * x.p_n);
        }
        // exact optimum on the restrictions is 12.5 + 16 / 4^n
        assert!((a[0].p_n - 12.75).abs() < 1e-10);
        assert!((a[0].d_n - 16.0).abs() < 1e-7);
    }

    #[test]
    fn asian_needs_lp() {
        let case = StudyCase::Uniform { m: 2.0, h: 1.0, big_h: 2.0 };
        let mut cfg = config(case, Payoff::asian(2.0), vec![2]);
        cfg.p_true = Some(0.0);
        cfg.solver = SolverChoice::LeftCurtain;
        assert!(matches!(
            run_study(&cfg),
            Err(StudyError::Transport(crate::transport::TransportError::SolverUnauthorized { .. }))
        ));
        cfg.solver = SolverChoice::Auto;
        assert_eq!(run_study(&cfg).unwrap()[0].solver, SolverKind::Lp);
    }

    #[test]
    fn config_errors() {
        let mut cfg = config(StudyCase::Appendix, Payoff::xy_squared(), vec![]);
        assert_eq!(run_study(&cfg).unwrap_err(), StudyError::EmptyRange);
        cfg.levels = vec![3];
        cfg.k_max = 3.5;
        assert!(matches!(run_study(&cfg), Err(StudyError::KTooSmall { .. })));
        cfg.k_max = 4.0;
        cfg.payoff = Payoff::exp_x_y_squared();
        assert_eq!(run_study(&cfg).unwrap_err(), StudyError::MissingTrueBound);
        cfg.p_true = Some(1.0);
        assert!(run_study(&cfg).is_ok());
    }

    #[test]
    fn constants_for_case_one() {
        let case = StudyCase::Uniform { m: 2.0, h: 1.0, big_h: 2.0 };
        let c = study_constants(&config(case, Payoff::xy_squared(), vec![3])).unwrap();
        assert!((c.p_true - 12.5).abs() < 1e-10);
        assert_eq!((c.t_mu, c.t_nu), (0.5, 0.25));
        assert!(c.properties.msm);
        assert!(c.rate.m_c > 0.0 && c.rate.m_d > 0.0);
    }
}
