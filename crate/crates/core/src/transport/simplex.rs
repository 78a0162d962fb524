use nalgebra::DMatrix;

use super::{BoundResult, CouplingEntry, MartingaleCoupling, SolverKind, TransportError};
use crate::marginals::DiscreteMeasure;
use crate::payoffs::Payoff;

/// Largest number of coupling variables `|mu| |nu|` the LP accepts.
pub const DEFAULT_SIZE_CAP: usize = 20_000;

const PIVOT_EPS: f64 = 1e-11;
/// Smallest column entry accepted as a pivot in the ratio test.
const RATIO_EPS: f64 = 1e-7;
/// Primal slack the ratio test may trade for a larger pivot entry.
const HARRIS_SLACK: f64 = 1e-11;
const PHASE_ONE_TOL: f64 = 1e-9;
const MASS_DUST: f64 = 1e-13;
/// Degenerate pivots in a row before switching to the lowest-index rule.
const STALL_LIMIT: usize = 50;
/// Pivots between rebuilds of the tableau from the original columns.
const REFACTOR_EVERY: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpOptions {
    pub size_cap: usize,
    /// Upper limit on pivots across both phases.
    pub max_iterations: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            size_cap: DEFAULT_SIZE_CAP,
            max_iterations: 2_000_000,
        }
    }
}

/// Maximises `sum q_ij c(x_i, y_j)` over martingale couplings of `mu` and
/// `nu` with a dense two-phase simplex.
///
/// Martingale rows are divided by the largest atom and the objective by its
/// largest coefficient before pivoting; the reported value is recomputed
/// from the optimal coupling with the unscaled payoff.
pub fn solve_lp(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: &Payoff,
    opts: &LpOptions,
) -> Result<BoundResult, TransportError> {
    let (m, n) = (mu.len(), nu.len());
    let vars = m * n;
    if vars > opts.size_cap {
        return Err(TransportError::SizeCapExceeded {
            variables: vars,
            cap: opts.size_cap,
        });
    }
    let cost = p.matrix(mu.atoms(), nu.atoms())?;
    let c_scale = cost.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let scale = mu.max_atom().max(nu.max_atom()).max(1.0);

    // variable v = i n + j; rows are mu margins, nu margins, martingale
    let rows = m + n + m;
    let mut columns = Vec::with_capacity(vars);
    for i in 0..m {
        for j in 0..n {
            columns.push(vec![
                (i, 1.0),
                (m + j, 1.0),
                (m + n + i, (nu.atoms()[j] - mu.atoms()[i]) / scale),
            ]);
        }
    }
    let mut b = vec![0.0; rows];
    b[..m].copy_from_slice(mu.weights());
    b[m..m + n].copy_from_slice(nu.weights());
    let c: Vec<f64> = cost.iter().flatten().map(|v| v / c_scale).collect();

    let (x, iterations) = Tableau::solve(rows, columns, b, &c, opts.max_iterations)?;
    let entries = x
        .iter()
        .enumerate()
        // pivoting leaves values of order 1e-17 on degenerate basics
        .filter(|&(_, &q)| q > MASS_DUST)
        .map(|(v, &q)| CouplingEntry {
            x_index: v / n,
            y_index: v % n,
            mass: q,
        })
        .collect();
    let coupling = MartingaleCoupling::new(mu.clone(), nu.clone(), entries);
    BoundResult::from_coupling(coupling, p, SolverKind::Lp, iterations)
}

/// Dense tableau for `max c.x, A x = b, x >= 0` with one artificial column
/// per row. `A` is also kept column-sparse so that the tableau can be
/// rebuilt from scratch for the current basis every few pivots; without
/// that, rounding accumulates over long degenerate runs until basic values
/// go negative.
struct Tableau {
    rows: usize,
    /// structural plus artificial columns, then the right-hand side
    width: usize,
    structural: usize,
    columns: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    t: Vec<f64>,
    /// cost of every column in the current phase
    cost: Vec<f64>,
    /// reduced costs, one per column
    obj: Vec<f64>,
    basis: Vec<usize>,
    phase_two: bool,
    iterations: usize,
    max_iterations: usize,
    since_refactor: usize,
    /// consecutive pivots that did not move the objective
    stalled: usize,
}

enum Step {
    Optimal,
    Pivoted,
}

impl Tableau {
    fn solve(
        rows: usize,
        columns: Vec<Vec<(usize, f64)>>,
        b: Vec<f64>,
        c: &[f64],
        max_iterations: usize,
    ) -> Result<(Vec<f64>, usize), TransportError> {
        let structural = columns.len();
        let cols = structural + rows;
        // rows with a negative right-hand side are negated
        let sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let columns: Vec<Vec<(usize, f64)>> = columns
            .into_iter()
            .map(|col| col.into_iter().map(|(r, v)| (r, sign[r] * v)).collect())
            .collect();
        let b: Vec<f64> = b.iter().zip(&sign).map(|(v, s)| v * s).collect();

        let mut cost = vec![0.0; cols];
        cost[structural..].iter_mut().for_each(|v| *v = -1.0);
        let mut tab = Tableau {
            rows,
            width: cols + 1,
            structural,
            columns,
            b,
            t: Vec::new(),
            cost,
            obj: vec![0.0; cols],
            basis: (structural..cols).collect(),
            phase_two: false,
            iterations: 0,
            max_iterations,
            since_refactor: 0,
            stalled: 0,
        };

        // phase one: maximise minus the sum of artificials
        tab.refactor();
        tab.run()?;
        let infeasibility: f64 = (0..rows)
            .filter(|&r| tab.basis[r] >= structural)
            .map(|r| tab.rhs(r))
            .sum();
        if infeasibility > PHASE_ONE_TOL {
            return Err(TransportError::Infeasible {
                residual: infeasibility,
            });
        }
        tab.drive_out_artificials();

        // phase two; artificials still basic sit on redundant rows at zero
        tab.phase_two = true;
        tab.stalled = 0;
        tab.cost[..structural].copy_from_slice(c);
        tab.cost[structural..].iter_mut().for_each(|v| *v = 0.0);
        tab.refactor();
        tab.run()?;

        let mut x = vec![0.0; structural];
        for r in 0..rows {
            if tab.basis[r] < structural {
                x[tab.basis[r]] = tab.rhs(r).max(0.0);
            }
        }
        Ok((x, tab.iterations))
    }

    fn rhs(&self, r: usize) -> f64 {
        self.t[r * self.width + self.width - 1]
    }

    /// Pivots to optimality; optimality is only accepted on a freshly
    /// rebuilt tableau.
    fn run(&mut self) -> Result<(), TransportError> {
        loop {
            match self.step()? {
                Step::Pivoted => {}
                Step::Optimal if self.since_refactor == 0 => return Ok(()),
                Step::Optimal => self.refactor(),
            }
        }
    }

    /// Recomputes `B^-1 [A | I | b]` and the reduced costs from the original
    /// columns.
    fn refactor(&mut self) {
        let (n, w, s) = (self.rows, self.width, self.structural);
        self.since_refactor = 0;
        let mut basis_matrix = DMatrix::zeros(n, n);
        for (k, &col) in self.basis.iter().enumerate() {
            if col < s {
                for &(r, v) in &self.columns[col] {
                    basis_matrix[(r, k)] = v;
                }
            } else {
                basis_matrix[(col - s, k)] = 1.0;
            }
        }
        let Some(inv) = basis_matrix.try_inverse() else {
            // keep the updated tableau; pivots were on entries above RATIO_EPS
            return;
        };
        let mut t = vec![0.0; n * w];
        for r in 0..n {
            let row = &mut t[r * w..(r + 1) * w];
            for (j, col) in self.columns.iter().enumerate() {
                row[j] = col.iter().map(|&(k, v)| inv[(r, k)] * v).sum();
            }
            for k in 0..n {
                row[s + k] = inv[(r, k)];
            }
            row[w - 1] = (0..n).map(|k| inv[(r, k)] * self.b[k]).sum();
            for v in row.iter_mut() {
                if v.abs() < 1e-14 {
                    *v = 0.0;
                }
            }
        }
        for (r, &col) in self.basis.iter().enumerate() {
            for q in 0..n {
                t[q * w + col] = if q == r { 1.0 } else { 0.0 };
            }
        }
        self.t = t;
        self.price();
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for the current basis.
    fn price(&mut self) {
        let cols = self.width - 1;
        self.obj.copy_from_slice(&self.cost);
        for r in 0..self.rows {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * self.width..r * self.width + cols];
                for (o, a) in self.obj.iter_mut().zip(row) {
                    *o -= cb * a;
                }
            }
        }
    }

    /// One pivot on a structural column: largest reduced cost first, and
    /// the lowest-index rule while the objective is stuck, which rules out
    /// cycling.
    fn step(&mut self) -> Result<Step, TransportError> {
        let allowed = self.structural;
        let enter = if self.stalled >= STALL_LIMIT {
            (0..allowed).find(|&j| self.obj[j] > PIVOT_EPS)
        } else {
            (0..allowed)
                .filter(|&j| self.obj[j] > PIVOT_EPS)
                .max_by(|&a, &b| self.obj[a].total_cmp(&self.obj[b]).then(b.cmp(&a)))
        };
        let Some(enter) = enter else {
            return Ok(Step::Optimal);
        };
        let leave = if self.stalled >= STALL_LIMIT { self.ratio_bland(enter) } else { self.ratio_harris(enter) };
        let Some((r, step)) = leave else {
            return Err(TransportError::Internal("LP unbounded".into()));
        };
        if step > PIVOT_EPS {
            self.stalled = 0;
        } else {
            self.stalled += 1;
        }
        self.iterations += 1;
        if self.iterations > self.max_iterations {
            return Err(TransportError::Internal(format!(
                "simplex did not converge in {} pivots",
                self.max_iterations
            )));
        }
        self.pivot(r, enter);
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
        Ok(Step::Pivoted)
    }

    /// Rows eligible for the ratio test on column `enter`, with their
    /// pivot entries.
    fn candidates(&self, enter: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.rows)
            // an artificial still basic in phase two sits on a redundant
            // row whose entries are rounding noise
            .filter(move |&r| !(self.phase_two && self.basis[r] >= self.structural))
            .map(move |r| (r, self.t[r * self.width + enter]))
            .filter(|&(_, a)| a > RATIO_EPS)
    }

    /// Minimum ratio, ties to the lowest basic index.
    fn ratio_bland(&self, enter: usize) -> Option<(usize, f64)> {
        let mut leave: Option<(usize, f64)> = None;
        for (r, a) in self.candidates(enter) {
            // rounding can push a basic value just below zero
            let ratio = self.rhs(r).max(0.0) / a;
            leave = match leave {
                Some((lr, best))
                    if ratio > best + 1e-14 || (ratio >= best - 1e-14 && self.basis[r] > self.basis[lr]) =>
                {
                    Some((lr, best))
                }
                _ => Some((r, ratio)),
            };
        }
        leave
    }

    /// Two-pass ratio test: among rows whose ratio is within `HARRIS_SLACK`
    /// of the minimum, take the largest pivot entry.
    fn ratio_harris(&self, enter: usize) -> Option<(usize, f64)> {
        let bound = self
            .candidates(enter)
            .map(|(r, a)| (self.rhs(r).max(0.0) + HARRIS_SLACK) / a)
            .fold(f64::INFINITY, f64::min);
        self.candidates(enter)
            .filter(|&(r, a)| self.rhs(r).max(0.0) / a <= bound)
            .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)))
            .map(|(r, a)| (r, self.rhs(r).max(0.0) / a))
    }

    fn pivot(&mut self, r: usize, enter: usize) {
        let w = self.width;
        let p = self.t[r * w + enter];
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v /= p;
        }
        self.t[r * w + enter] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        // coupling columns are sparse, so most of the pivot row is zero
        let nz: Vec<(usize, f64)> = prow
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .collect();
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[enter];
            if f != 0.0 {
                for &(j, pv) in &nz {
                    row[j] -= f * pv;
                }
                row[enter] = 0.0;
            }
        }
        let f = self.obj[enter];
        if f != 0.0 {
            for &(j, pv) in &nz {
                if j < self.obj.len() {
                    self.obj[j] -= f * pv;
                }
            }
            self.obj[enter] = 0.0;
        }
        self.basis[r] = enter;
    }

    /// Replaces artificials left in the basis at level zero where some
    /// structural column can take over.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.rows {
            if self.basis[r] < self.structural {
                continue;
            }
            let row = &self.t[r * self.width..r * self.width + self.structural];
            let best = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .filter(|(_, v)| v.abs() > 1e-9)
                .map(|(j, _)| j);
            if let Some(j) = best {
                self.pivot(r, j);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::transport::verify_feasible;

    #[test]
    fn appendix_bound() {
        let (mu, nu) = (appendix_mu(), appendix_nu());
        let r = solve_lp(&mu, &nu, &Payoff::xy_squared(), &LpOptions::default()).unwrap();
        assert!((r.value - 913.0 / 54.0).abs() < 1e-10, "{}", r.value);
        assert!(verify_feasible(&r.coupling, &mu, &nu).passed);
        assert!(r.diagnostics.residuals.max() < 1e-12);
        assert_eq!(r.solver, SolverKind::Lp);
    }

    #[test]
    fn dirac_margins_have_one_coupling() {
        let d = DiscreteMeasure::dirac(1.0);
        let p = Payoff::custom("c", |x, y| 3.0 * x + y * y + 0.5);
        let r = solve_lp(&d, &d, &p, &LpOptions::default()).unwrap();
        assert!((r.value - 4.5).abs() < 1e-14);
        assert_eq!(r.coupling.entries().len(), 1);
    }

    #[test]
    fn unordered_margins_are_infeasible() {
        let (mu, nu) = (appendix_mu(), appendix_nu());
        assert!(matches!(
            solve_lp(&nu, &mu, &Payoff::xy_squared(), &LpOptions::default()),
            Err(TransportError::Infeasible { .. })
        ));
        let shifted = DiscreteMeasure::dirac(2.0);
        assert!(matches!(
            solve_lp(&shifted, &nu, &Payoff::xy_squared(), &LpOptions::default()),
            Err(TransportError::Infeasible { .. })
        ));
    }

    #[test]
    fn size_cap() {
        let opts = LpOptions {
            size_cap: 8,
            ..LpOptions::default()
        };
        assert_eq!(
            solve_lp(&appendix_mu(), &appendix_nu(), &Payoff::xy_squared(), &opts).unwrap_err(),
            TransportError::SizeCapExceeded { variables: 9, cap: 8 }
        );
    }

    #[test]
    fn two_point_spread() {
        // the only martingale coupling sends 2 to 1 and 3 with mass 1/2 each
        let mu = DiscreteMeasure::dirac(2.0);
        let nu = DiscreteMeasure::new(vec![1.0, 3.0], vec![0.5, 0.5]).unwrap();
        let r = solve_lp(&mu, &nu, &Payoff::xy_squared(), &LpOptions::default()).unwrap();
        assert!((r.value - 10.0).abs() < 1e-13);
    }
}
