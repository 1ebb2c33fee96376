use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::affine::{affine_coefficients, AffineForm};
use crate::error::ReductionError;
use crate::expr::{Expr, VarId, Variable};
use crate::reduction::{wrap, InversePayload, InverseRecord, Reduction, Stage};
use crate::standard::{ConeData, ConeDims, VarSlot};

use super::{CanonConstraint, ConicProblem};

/// Lays a conic problem out as `min cᵀx + offset` s.t. `b - Ax ∈ K`.
pub struct StuffCone;

pub fn stuff_cone(problem: &ConicProblem) -> Result<(ConeData, InverseRecord), ReductionError> {
    match StuffCone.apply(&Stage::Conic(problem.clone()))? {
        (Stage::Cone(d), r) => Ok((d, r)),
        _ => unreachable!("stuff_cone yields cone data"),
    }
}

const NAME: &str = "stuff_cone";

pub(crate) fn layout(vars: &[Variable]) -> (Vec<VarSlot>, BTreeMap<VarId, usize>, usize) {
    let mut slots = Vec::with_capacity(vars.len());
    let mut offsets = BTreeMap::new();
    let mut n = 0;
    for v in vars {
        slots.push(VarSlot { id: v.id, name: v.name.clone(), start: n, len: v.dim });
        offsets.insert(v.id, n);
        n += v.dim;
    }
    (slots, offsets, n)
}

struct Rows {
    forms: Vec<AffineForm>,
}

impl Rows {
    fn push(&mut self, e: &Expr) -> Result<(), ReductionError> {
        self.forms.push(wrap(NAME, affine_coefficients(e))?);
        Ok(())
    }
}

fn run(p: &ConicProblem) -> Result<ConeData, ReductionError> {
    let (vars, offsets, n) = layout(&p.variables);
    let objective = wrap(NAME, affine_coefficients(&p.objective))?;
    let mut c = DMatrix::zeros(1, n);
    objective.write_rows(&mut c, 0, &offsets, 1.0);

    let mut rows = Rows { forms: Vec::new() };
    let mut dims = ConeDims::default();
    for k in &p.constraints {
        if let CanonConstraint::Zero(e) = k {
            rows.push(e)?;
            dims.zero += e.dim();
        }
    }
    for k in &p.constraints {
        if let CanonConstraint::NonNeg(e) = k {
            rows.push(e)?;
            dims.nonneg += e.dim();
        }
    }
    for v in p.variables.iter().filter(|v| v.nonneg) {
        rows.push(&v.expr())?;
        dims.nonneg += v.dim;
    }
    for k in &p.constraints {
        if let CanonConstraint::Soc { t, x } = k {
            if t.dim() != 1 {
                return Err(ReductionError::rejected(NAME, "cone height must be scalar"));
            }
            rows.push(t)?;
            for part in x {
                rows.push(part)?;
            }
            dims.soc.push(k.dim());
        }
    }

    let m = dims.total();
    let mut a = DMatrix::zeros(m, n);
    let mut b = DVector::zeros(m);
    let mut row = 0;
    for f in &rows.forms {
        // b - Ax = const + coeff·x  =>  A = -coeff, b = const
        f.write_rows(&mut a, row, &offsets, -1.0);
        for i in 0..f.dim {
            b[row + i] = f.constant[i];
        }
        row += f.dim;
    }
    Ok(ConeData { c: c.row(0).transpose(), offset: objective.constant[0], a, b, cones: dims, vars }
        .without_negative_zeros())
}

impl Reduction for StuffCone {
    fn name(&self) -> &str {
        NAME
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        match stage {
            Stage::Conic(p) => run(p).map(|_| ()),
            other => Err(ReductionError::rejected(NAME, format!("expected a conic problem, found {}", other.kind()))),
        }
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        let p = match stage {
            Stage::Conic(p) => p,
            other => {
                return Err(ReductionError::rejected(NAME, format!("expected a conic problem, found {}", other.kind())))
            }
        };
        let data = run(p)?;
        let offset = data.offset;
        Ok((Stage::Cone(data), InverseRecord::new(NAME, InversePayload::AddOffset(offset))))
    }
}
