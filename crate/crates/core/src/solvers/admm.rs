//! Operator splitting for `min ½xᵀPx + qᵀx` s.t. `Cx = z`, `z ∈ S`.
//!
//! Each iteration solves `(P + σI + Cᵀ diag(ρ) C) x = σx - q + Cᵀ(ρz - y)`
//! with a Cholesky factor computed up front (and again only when ρ is
//! rebalanced), then projects onto `S` and updates the dual.
//!
//! When every row is of the form `z_i <= u_i` or `z_i = u_i`, the iterate
//! is polished at convergence and every 50 iterations before it: the rows
//! with a positive dual are taken as active and the equality-constrained
//! KKT system is solved directly. A polished point is used only if it
//! passes the same tolerances.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::SolverError;
use crate::reduction::Status;
use crate::standard::{ConeData, LpData, QpData, RawSolution};

use super::project::project_cone;
use super::simplex::violated_empty_rows;
use super::SolverSettings;

const SIGMA: f64 = 1e-6;
const EQ_RHO_SCALE: f64 = 1e3;
const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
const ADAPT_EVERY: usize = 25;
const DIVERGENCE: f64 = 1e8;
const POLISH_EVERY: usize = 50;
const POLISH_DELTA: f64 = 1e-9;
const POLISH_REFINE: usize = 3;

struct Splitting<'a> {
    p: &'a DMatrix<f64>,
    q: &'a DVector<f64>,
    c: DMatrix<f64>,
    eq: Vec<bool>,
    project: &'a dyn Fn(&mut DVector<f64>),
    diverge_check: bool,
    /// `u` when every row is `z_i <= u_i` (or `= u_i` where `eq`).
    polish: Option<DVector<f64>>,
}

struct Iterate {
    status: Status,
    x: DVector<f64>,
    iterations: usize,
}

fn factor(s: &Splitting, rho: &DVector<f64>) -> Result<Cholesky<f64, Dyn>, SolverError> {
    let n = s.p.nrows();
    let mut k = s.p.clone();
    for i in 0..n {
        k[(i, i)] += SIGMA;
    }
    let scaled = DMatrix::from_fn(s.c.nrows(), n, |i, j| rho[i] * s.c[(i, j)]);
    k += s.c.transpose() * scaled;
    k.cholesky().ok_or(SolverError::Factorization)
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Tolerances {
    eps_abs: f64,
    eps_rel: f64,
}

struct Residuals {
    prim: f64,
    dual: f64,
    prim_scale: f64,
    dual_scale: f64,
    eps_prim: f64,
    eps_dual: f64,
}

impl Residuals {
    fn converged(&self) -> bool {
        self.prim <= self.eps_prim && self.dual <= self.eps_dual
    }
}

impl Tolerances {
    fn residuals(&self, s: &Splitting, x: &DVector<f64>, z: &DVector<f64>, y: &DVector<f64>) -> Residuals {
        let cx = &s.c * x;
        let px = s.p * x;
        let cty = s.c.tr_mul(y);
        let prim_scale = inf_norm(&cx).max(inf_norm(z));
        let dual_scale = inf_norm(&px).max(inf_norm(&cty)).max(inf_norm(s.q));
        Residuals {
            prim: inf_norm(&(&cx - z)),
            dual: inf_norm(&(&px + s.q + &cty)),
            prim_scale,
            dual_scale,
            eps_prim: self.eps_abs + self.eps_rel * prim_scale,
            eps_dual: self.eps_abs + self.eps_rel * dual_scale,
        }
    }
}

/// Active-set refinement of `(x, z, y)`; `None` unless the result is a
/// KKT point within tolerance.
fn polish(
    s: &Splitting,
    tol: &Tolerances,
    u: &DVector<f64>,
    x: &DVector<f64>,
    z: &DVector<f64>,
    y: &DVector<f64>,
) -> Option<DVector<f64>> {
    let n = x.len();
    let active: Vec<usize> = (0..u.len()).filter(|&i| s.eq[i] || u[i] - z[i] < y[i]).collect();
    let na = active.len();
    let kkt = |delta: f64| {
        let mut k = DMatrix::zeros(n + na, n + na);
        k.view_mut((0, 0), (n, n)).copy_from(s.p);
        for i in 0..n {
            k[(i, i)] += delta;
        }
        for (r, &i) in active.iter().enumerate() {
            for j in 0..n {
                k[(n + r, j)] = s.c[(i, j)];
                k[(j, n + r)] = s.c[(i, j)];
            }
            k[(n + r, n + r)] = -delta;
        }
        k
    };
    let exact = kkt(0.0);
    let lu = kkt(POLISH_DELTA).lu();
    let mut rhs = DVector::zeros(n + na);
    rhs.rows_mut(0, n).copy_from(&-s.q);
    for (r, &i) in active.iter().enumerate() {
        rhs[n + r] = u[i];
    }
    let mut sol = lu.solve(&rhs)?;
    for _ in 0..POLISH_REFINE {
        let residual = &rhs - &exact * &sol;
        sol += lu.solve(&residual)?;
    }
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let xp = sol.rows(0, n).into_owned();
    let mut yp = DVector::zeros(u.len());
    for (r, &i) in active.iter().enumerate() {
        yp[i] = sol[n + r];
    }
    let mut zp = &s.c * &xp;
    (s.project)(&mut zp);
    let r = tol.residuals(s, &xp, &zp, &yp);
    let signs_ok = (0..u.len()).all(|i| s.eq[i] || yp[i] >= -r.eps_dual);
    (r.converged() && signs_ok).then_some(xp)
}

fn run(s: &Splitting, settings: &SolverSettings) -> Result<Iterate, SolverError> {
    let n = s.p.nrows();
    let m = s.c.nrows();
    let alpha = settings.alpha;
    let mut base = settings.rho;
    let rho_of = |base: f64| DVector::from_fn(m, |i, _| if s.eq[i] { base * EQ_RHO_SCALE } else { base });
    let mut rho = rho_of(base);
    let mut chol = factor(s, &rho)?;
    let mut adapt_every = ADAPT_EVERY;
    let mut next_adapt = adapt_every;
    let ct = s.c.transpose();
    let tol = Tolerances { eps_abs: settings.eps_abs, eps_rel: settings.eps_rel };

    let mut x = DVector::zeros(n);
    let mut z = DVector::zeros(m);
    (s.project)(&mut z);
    let mut y = DVector::zeros(m);

    for k in 1..=settings.max_iter {
        let rhs = &x * SIGMA - s.q + &ct * (rho.component_mul(&z) - &y);
        let xt = chol.solve(&rhs);
        let zt = &s.c * &xt;
        let x_next = &xt * alpha + &x * (1.0 - alpha);
        let z_relax = &zt * alpha + &z * (1.0 - alpha);
        let mut z_next = &z_relax + y.component_div(&rho);
        (s.project)(&mut z_next);
        y += rho.component_mul(&(&z_relax - &z_next));
        x = x_next;
        z = z_next;

        if s.diverge_check && (inf_norm(&x) > DIVERGENCE || inf_norm(&y) > DIVERGENCE) {
            return Ok(Iterate { status: Status::Error, x, iterations: k });
        }

        let r = tol.residuals(s, &x, &z, &y);
        if r.converged() {
            let x = s.polish.as_ref().and_then(|u| polish(s, &tol, u, &x, &z, &y)).unwrap_or(x);
            return Ok(Iterate { status: Status::Optimal, x, iterations: k });
        }
        if let Some(u) = &s.polish {
            if k % POLISH_EVERY == 0 || k == settings.max_iter {
                if let Some(xp) = polish(s, &tol, u, &x, &z, &y) {
                    return Ok(Iterate { status: Status::Optimal, x: xp, iterations: k });
                }
            }
        }

        if m > 0 && k == next_adapt {
            next_adapt += adapt_every;
            // with one residual already converged the ratio says nothing
            // about balance (e.g. r_prim is exactly zero while no row is active)
            if r.prim <= r.eps_prim || r.dual <= r.eps_dual {
                continue;
            }
            let num = r.prim / r.prim_scale.max(1e-10);
            let den = r.dual / r.dual_scale.max(1e-10);
            let ratio = (num / den.max(1e-30)).sqrt();
            if !(0.2..=5.0).contains(&ratio) {
                let new_base = (base * ratio).clamp(RHO_MIN, RHO_MAX);
                if new_base != base {
                    // keep z and y; only the penalty changes. Each change
                    // doubles the wait before the next one.
                    base = new_base;
                    adapt_every *= 2;
                    rho = rho_of(base);
                    chol = factor(s, &rho)?;
                }
            }
        }
    }
    Ok(Iterate { status: Status::IterationLimit, x, iterations: settings.max_iter })
}

fn check_qp_dims(qp: &QpData) -> Result<(), SolverError> {
    let n = qp.num_vars();
    let ok = qp.p.nrows() == n
        && qp.p.ncols() == n
        && qp.g.ncols() == n
        && qp.a.ncols() == n
        && qp.g.nrows() == qp.h.len()
        && qp.a.nrows() == qp.b.len();
    if ok {
        Ok(())
    } else {
        Err(SolverError::Dimension(format!("inconsistent QP data for {n} variables")))
    }
}

/// `min ½xᵀPx + qᵀx s.t. Gx <= h, Ax = b`; `P` must be positive
/// semidefinite. The returned objective excludes `r`.
pub fn solve_qp_admm(qp: &QpData, settings: &SolverSettings) -> Result<RawSolution, SolverError> {
    settings.validate()?;
    check_qp_dims(qp)?;
    let n = qp.num_vars();
    if violated_empty_rows(&qp.g, &qp.h, &qp.a, &qp.b) {
        return Ok(RawSolution {
            status: Status::Infeasible,
            x: vec![0.0; n],
            objective: f64::INFINITY,
            iterations: 0,
        });
    }
    let (mg, me) = (qp.g.nrows(), qp.a.nrows());
    let mut c = DMatrix::zeros(mg + me, n);
    c.view_mut((0, 0), (mg, n)).copy_from(&qp.g);
    c.view_mut((mg, 0), (me, n)).copy_from(&qp.a);
    let upper: Vec<f64> = qp.h.iter().chain(qp.b.iter()).copied().collect();
    let polish = Some(DVector::from_column_slice(&upper));
    let project = move |z: &mut DVector<f64>| {
        for i in 0..z.len() {
            if i < mg {
                z[i] = z[i].min(upper[i]);
            } else {
                z[i] = upper[i];
            }
        }
    };
    let eq = (0..mg + me).map(|i| i >= mg).collect();
    let s = Splitting { p: &qp.p, q: &qp.q, c, eq, project: &project, diverge_check: false, polish };
    let it = run(&s, settings)?;
    let objective = qp.objective_at(&it.x);
    Ok(RawSolution { status: it.status, x: it.x.iter().copied().collect(), objective, iterations: it.iterations })
}

/// An LP through the QP splitting solver.
pub fn solve_lp_admm(lp: &LpData, settings: &SolverSettings) -> Result<RawSolution, SolverError> {
    solve_qp_admm(&lp.to_qp(), settings)
}

/// `min cᵀx s.t. b - Ax ∈ K`. Iterates whose norms blow past `1e8` are
/// reported as [`Status::Error`] (likely infeasible or unbounded).
pub fn solve_cone_admm(cone: &ConeData, settings: &SolverSettings) -> Result<RawSolution, SolverError> {
    settings.validate()?;
    let n = cone.num_vars();
    let m = cone.cones.total();
    if cone.a.nrows() != m || cone.a.ncols() != n || cone.b.len() != m {
        return Err(SolverError::Dimension(format!(
            "A is {}x{}, b has {} entries, cones need {m} rows and c has {n} entries",
            cone.a.nrows(),
            cone.a.ncols(),
            cone.b.len()
        )));
    }
    let zero = cone.cones.zero;
    let lin = zero + cone.cones.nonneg;
    let empty = |i: usize| cone.a.row(i).iter().all(|v| *v == 0.0);
    let trivially_infeasible =
        (0..zero).any(|i| empty(i) && cone.b[i].abs() > 1e-9) || (zero..lin).any(|i| empty(i) && cone.b[i] < -1e-9);
    if trivially_infeasible {
        return Ok(RawSolution {
            status: Status::Infeasible,
            x: vec![0.0; n],
            objective: f64::INFINITY,
            iterations: 0,
        });
    }
    // z = Ax with b - z ∈ K:  Π(v) = b - Π_K(b - v)
    let b = cone.b.clone();
    let dims = cone.cones.clone();
    let project = move |z: &mut DVector<f64>| {
        let w: Vec<f64> = b.iter().zip(z.iter()).map(|(bi, zi)| bi - zi).collect();
        let pw = project_cone(&w, &dims);
        for i in 0..z.len() {
            z[i] = b[i] - pw[i];
        }
    };
    let p = DMatrix::zeros(n, n);
    let eq = (0..m).map(|i| i < zero).collect();
    // zero and nonnegative rows read `z_i = b_i` and `z_i <= b_i`
    let polish = cone.cones.soc.is_empty().then(|| cone.b.clone());
    let s = Splitting { p: &p, q: &cone.c, c: cone.a.clone(), eq, project: &project, diverge_check: true, polish };
    let it = run(&s, settings)?;
    let objective = cone.c.dot(&it.x);
    Ok(RawSolution { status: it.status, x: it.x.iter().copied().collect(), objective, iterations: it.iterations })
}
