use nalgebra::{DMatrix, DVector};

use crate::error::SolverError;
use crate::reduction::Status;
use crate::standard::{LpData, RawSolution};

use super::SolverSettings;

const PIVOT_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-9;

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

/// Dense tableau; the last row holds reduced costs and the last column the
/// right-hand side.
struct Tableau {
    t: DMatrix<f64>,
    basis: Vec<usize>,
    rows: usize,
    rhs: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[(r, c)];
        let width = self.t.ncols();
        for j in 0..width {
            self.t[(r, j)] /= p;
        }
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.t[(i, c)];
            if f != 0.0 {
                for j in 0..width {
                    let v = self.t[(r, j)];
                    self.t[(i, j)] -= f * v;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule: lowest-index improving column, lowest-index leaving
    /// variable among ratio ties.
    fn run(&mut self, allowed: usize, budget: &mut usize) -> Outcome {
        loop {
            let entering = (0..allowed).find(|&j| self.t[(self.rows, j)] < -PIVOT_TOL);
            let Some(c) = entering else { return Outcome::Optimal };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.t[(i, c)];
                if a > PIVOT_TOL {
                    let ratio = self.t[(i, self.rhs)] / a;
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best - 1e-12 || ((ratio - best).abs() <= 1e-12 && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return Outcome::Unbounded };
            if *budget == 0 {
                return Outcome::IterationLimit;
            }
            *budget -= 1;
            self.pivot(r, c);
        }
    }

    fn set_costs(&mut self, cost: &[f64]) {
        for j in 0..self.t.ncols() {
            let cj = if j < cost.len() { cost[j] } else { 0.0 };
            let mut d = if j == self.rhs { 0.0 } else { cj };
            for i in 0..self.rows {
                let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
                d -= cb * self.t[(i, j)];
            }
            self.t[(self.rows, j)] = d;
        }
    }
}

fn check_dims(lp: &LpData) -> Result<(), SolverError> {
    let n = lp.num_vars();
    if lp.g.ncols() != n || lp.a.ncols() != n || lp.g.nrows() != lp.h.len() || lp.a.nrows() != lp.b.len() {
        return Err(SolverError::Dimension(format!(
            "c has {n} entries, G is {}x{}, h {}, A is {}x{}, b {}",
            lp.g.nrows(),
            lp.g.ncols(),
            lp.h.len(),
            lp.a.nrows(),
            lp.a.ncols(),
            lp.b.len()
        )));
    }
    Ok(())
}

/// Rows with no coefficients whose right-hand side cannot hold.
pub(crate) fn violated_empty_rows(g: &DMatrix<f64>, h: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> bool {
    let empty = |m: &DMatrix<f64>, i: usize| m.row(i).iter().all(|v| *v == 0.0);
    (0..g.nrows()).any(|i| empty(g, i) && h[i] < -PHASE1_TOL)
        || (0..a.nrows()).any(|i| empty(a, i) && b[i].abs() > PHASE1_TOL)
}

/// Solves `min cᵀx s.t. Gx <= h, Ax = b` with `x` free.
///
/// Columns are `x⁺, x⁻` and one slack per inequality; every row gets an
/// artificial for phase one. The final basis is re-solved against the
/// original data so vertex solutions are exact to rounding.
pub fn solve_lp_simplex(lp: &LpData, settings: &SolverSettings) -> Result<RawSolution, SolverError> {
    settings.validate()?;
    check_dims(lp)?;
    let n = lp.num_vars();
    let (mg, me) = (lp.g.nrows(), lp.a.nrows());
    if violated_empty_rows(&lp.g, &lp.h, &lp.a, &lp.b) {
        return Ok(RawSolution {
            status: Status::Infeasible,
            x: vec![0.0; n],
            objective: f64::INFINITY,
            iterations: 0,
        });
    }
    let m = mg + me;
    let cols = 2 * n + mg;
    // standard form M y = r, y >= 0
    let mut std_m = DMatrix::zeros(m, cols);
    let mut std_r = DVector::zeros(m);
    for i in 0..mg {
        for j in 0..n {
            std_m[(i, j)] = lp.g[(i, j)];
            std_m[(i, n + j)] = -lp.g[(i, j)];
        }
        std_m[(i, 2 * n + i)] = 1.0;
        std_r[i] = lp.h[i];
    }
    for i in 0..me {
        for j in 0..n {
            std_m[(mg + i, j)] = lp.a[(i, j)];
            std_m[(mg + i, n + j)] = -lp.a[(i, j)];
        }
        std_r[mg + i] = lp.b[i];
    }
    for i in 0..m {
        if std_r[i] < 0.0 {
            std_r[i] = -std_r[i];
            for j in 0..cols {
                std_m[(i, j)] = -std_m[(i, j)];
            }
        }
    }

    let rhs = cols + m;
    let mut t = DMatrix::zeros(m + 1, rhs + 1);
    for i in 0..m {
        for j in 0..cols {
            t[(i, j)] = std_m[(i, j)];
        }
        t[(i, cols + i)] = 1.0;
        t[(i, rhs)] = std_r[i];
    }
    let mut tab = Tableau { t, basis: (cols..cols + m).collect(), rows: m, rhs };
    let mut budget = settings.max_iter;

    let phase1: Vec<f64> = (0..cols + m).map(|j| if j >= cols { 1.0 } else { 0.0 }).collect();
    tab.set_costs(&phase1);
    if let Outcome::IterationLimit = tab.run(cols, &mut budget) {
        return Ok(finish(lp, &tab, Status::IterationLimit, settings.max_iter - budget));
    }
    let infeasibility = -tab.t[(m, rhs)];
    if infeasibility > PHASE1_TOL * (1.0 + std_r.amax()) {
        return Ok(RawSolution {
            status: Status::Infeasible,
            x: vec![0.0; n],
            objective: f64::INFINITY,
            iterations: settings.max_iter - budget,
        });
    }
    // drive remaining artificials out of the basis where possible
    for r in 0..m {
        if tab.basis[r] >= cols {
            if let Some(c) = (0..cols).find(|&j| tab.t[(r, j)].abs() > PIVOT_TOL) {
                tab.pivot(r, c);
            }
        }
    }

    let mut cost = vec![0.0; cols];
    for j in 0..n {
        cost[j] = lp.c[j];
        cost[n + j] = -lp.c[j];
    }
    tab.set_costs(&cost);
    let status = match tab.run(cols, &mut budget) {
        Outcome::Optimal => Status::Optimal,
        Outcome::Unbounded => {
            return Ok(RawSolution {
                status: Status::Unbounded,
                x: vec![0.0; n],
                objective: f64::NEG_INFINITY,
                iterations: settings.max_iter - budget,
            })
        }
        Outcome::IterationLimit => Status::IterationLimit,
    };
    let mut raw = finish(lp, &tab, status, settings.max_iter - budget);
    if status == Status::Optimal {
        if let Some(x) = resolve_basis(&std_m, &std_r, &tab.basis, n, cols) {
            raw.objective = lp.c.dot(&DVector::from_column_slice(&x));
            raw.x = x;
        }
    }
    Ok(raw)
}

fn finish(lp: &LpData, tab: &Tableau, status: Status, iterations: usize) -> RawSolution {
    let n = lp.num_vars();
    let mut y = vec![0.0; tab.t.ncols()];
    for (i, &b) in tab.basis.iter().enumerate() {
        y[b] = tab.t[(i, tab.rhs)];
    }
    let x: Vec<f64> = (0..n).map(|j| y[j] - y[n + j]).collect();
    let objective = lp.c.dot(&DVector::from_column_slice(&x));
    RawSolution { status, x, objective, iterations }
}

/// Solves `B y_B = r` for the final basis; artificial columns are unit
/// vectors.
fn resolve_basis(m: &DMatrix<f64>, r: &DVector<f64>, basis: &[usize], n: usize, cols: usize) -> Option<Vec<f64>> {
    let rows = m.nrows();
    let mut b = DMatrix::zeros(rows, rows);
    for (k, &j) in basis.iter().enumerate() {
        if j < cols {
            b.set_column(k, &m.column(j));
        } else {
            b[(j - cols, k)] = 1.0;
        }
    }
    let yb = b.lu().solve(r)?;
    let mut y = vec![0.0; cols];
    for (k, &j) in basis.iter().enumerate() {
        if j < cols {
            y[j] = yb[k];
        }
    }
    Some((0..n).map(|j| y[j] - y[n + j]).collect())
}
