use nalgebra::{DMatrix, DVector};

use crate::affine::affine_coefficients;
use crate::cone::stuff_layout;
use crate::error::ReductionError;
use crate::expr::{Problem, Relation, Sense};
use crate::reduction::{expect_problem, wrap, InversePayload, InverseRecord, Reduction, Stage};
use crate::standard::{LpData, QpData};

use super::quadratic::quadratic_form;

struct Rows {
    g: DMatrix<f64>,
    h: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
}

/// `Gx <= h`, `Ax = b` from affine constraints, in declaration order, with
/// `-x <= 0` rows appended for nonnegative variables.
fn constraint_rows(name: &str, p: &Problem) -> Result<Rows, ReductionError> {
    let (_, offsets, n) = stuff_layout(p.variables());
    let mut ineq = Vec::new();
    let mut eq = Vec::new();
    for c in p.constraints() {
        if !c.is_affine() {
            return Err(ReductionError::rejected(name, format!("constraint {} is not affine", c.id())));
        }
        let f = wrap(name, affine_coefficients(&wrap(name, c.difference())?))?;
        match c.relation() {
            Relation::Le => ineq.push(f),
            Relation::Ge => ineq.push(f.negate()),
            Relation::Eq => eq.push(f),
        }
    }
    let nonneg: usize = p.variables().iter().filter(|v| v.nonneg).map(|v| v.dim).sum();
    let mi: usize = ineq.iter().map(|f| f.dim).sum::<usize>() + nonneg;
    let me: usize = eq.iter().map(|f| f.dim).sum();
    let mut rows =
        Rows { g: DMatrix::zeros(mi, n), h: DVector::zeros(mi), a: DMatrix::zeros(me, n), b: DVector::zeros(me) };
    let mut r = 0;
    for f in &ineq {
        f.write_rows(&mut rows.g, r, &offsets, 1.0);
        for i in 0..f.dim {
            rows.h[r + i] = -f.constant[i];
        }
        r += f.dim;
    }
    for v in p.variables().iter().filter(|v| v.nonneg) {
        for j in 0..v.dim {
            rows.g[(r + j, offsets[&v.id] + j)] = -1.0;
        }
        r += v.dim;
    }
    let mut r = 0;
    for f in &eq {
        f.write_rows(&mut rows.a, r, &offsets, 1.0);
        for i in 0..f.dim {
            rows.b[r + i] = -f.constant[i];
        }
        r += f.dim;
    }
    Ok(rows)
}

fn minimization<'a>(name: &str, stage: &'a Stage) -> Result<&'a Problem, ReductionError> {
    let p = expect_problem(name, stage)?;
    if p.sense() != Sense::Minimize {
        return Err(ReductionError::rejected(name, "expected a minimization"));
    }
    Ok(p)
}

fn lp_data(p: &Problem) -> Result<LpData, ReductionError> {
    const NAME: &str = "stuff_lp";
    if !p.objective().is_affine() {
        return Err(ReductionError::rejected(NAME, "objective is not affine"));
    }
    let (vars, offsets, n) = stuff_layout(p.variables());
    let rows = constraint_rows(NAME, p)?;
    let f = wrap(NAME, affine_coefficients(p.objective()))?;
    let mut c = DMatrix::zeros(1, n);
    f.write_rows(&mut c, 0, &offsets, 1.0);
    Ok(LpData { c: c.row(0).transpose(), offset: f.constant[0], g: rows.g, h: rows.h, a: rows.a, b: rows.b, vars }
        .without_negative_zeros())
}

fn qp_data(p: &Problem) -> Result<QpData, ReductionError> {
    const NAME: &str = "stuff_qp";
    let (vars, offsets, n) = stuff_layout(p.variables());
    let rows = constraint_rows(NAME, p)?;
    let f = wrap(NAME, quadratic_form(p.objective(), &offsets, n))?;
    Ok(QpData { p: f.p, q: f.q, r: f.r, g: rows.g, h: rows.h, a: rows.a, b: rows.b, vars }.without_negative_zeros())
}

/// Affine problem to `min cᵀx + offset` s.t. `Gx <= h`, `Ax = b`.
pub struct StuffLp;

pub fn stuff_lp(problem: &Problem) -> Result<(LpData, InverseRecord), ReductionError> {
    let d = lp_data(problem)?;
    let offset = d.offset;
    Ok((d, InverseRecord::new("stuff_lp", InversePayload::AddOffset(offset))))
}

impl Reduction for StuffLp {
    fn name(&self) -> &str {
        "stuff_lp"
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        lp_data(minimization(self.name(), stage)?).map(|_| ())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        let (d, r) = stuff_lp(minimization(self.name(), stage)?)?;
        Ok((Stage::Lp(d), r))
    }
}

/// Quadratic objective over affine constraints to
/// `min ½xᵀPx + qᵀx + r` s.t. `Gx <= h`, `Ax = b`.
pub struct StuffQp;

pub fn stuff_qp(problem: &Problem) -> Result<(QpData, InverseRecord), ReductionError> {
    let d = qp_data(problem)?;
    let offset = d.r;
    Ok((d, InverseRecord::new("stuff_qp", InversePayload::AddOffset(offset))))
}

impl Reduction for StuffQp {
    fn name(&self) -> &str {
        "stuff_qp"
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        qp_data(minimization(self.name(), stage)?).map(|_| ())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        let (d, r) = stuff_qp(minimization(self.name(), stage)?)?;
        Ok((Stage::Qp(d), r))
    }
}
