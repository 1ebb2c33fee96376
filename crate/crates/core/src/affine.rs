//! Coefficient extraction for affine expressions.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::ExprError;
use crate::expr::{Assignment, Atom, Expr, ExprKind, VarId};

/// `sum_i M_i v_i + constant`, one row per output coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineForm {
    pub dim: usize,
    pub coeffs: BTreeMap<VarId, DMatrix<f64>>,
    pub constant: DVector<f64>,
}

impl AffineForm {
    pub fn constant(values: &[f64]) -> Self {
        AffineForm { dim: values.len(), coeffs: BTreeMap::new(), constant: DVector::from_column_slice(values) }
    }

    fn variable(id: VarId, dim: usize) -> Self {
        AffineForm { dim, coeffs: BTreeMap::from([(id, DMatrix::identity(dim, dim))]), constant: DVector::zeros(dim) }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.values().all(|m| m.iter().all(|c| *c == 0.0))
    }

    /// Repeats a scalar form to `dim` rows.
    fn broadcast(self, dim: usize) -> Self {
        if self.dim == dim {
            return self;
        }
        debug_assert_eq!(self.dim, 1);
        AffineForm {
            dim,
            coeffs: self
                .coeffs
                .into_iter()
                .map(|(id, m)| {
                    let row = m.row(0).clone_owned();
                    (id, DMatrix::from_fn(dim, row.len(), |_, j| row[j]))
                })
                .collect(),
            constant: DVector::from_element(dim, self.constant[0]),
        }
    }

    fn combine(self, other: AffineForm, sign: f64) -> Self {
        let dim = self.dim.max(other.dim);
        let mut out = self.broadcast(dim);
        let other = other.broadcast(dim);
        for (id, m) in other.coeffs {
            match out.coeffs.get_mut(&id) {
                Some(existing) => *existing += m * sign,
                None => {
                    out.coeffs.insert(id, m * sign);
                }
            }
        }
        out.constant += other.constant * sign;
        out
    }

    /// Scales row `i` by `factors[i]` (or all rows by a single factor).
    pub fn scale_rows(self, factors: &[f64]) -> Self {
        let dim = self.dim.max(factors.len());
        let mut out = self.broadcast(dim);
        let f = |i: usize| if factors.len() == 1 { factors[0] } else { factors[i] };
        for m in out.coeffs.values_mut() {
            for i in 0..dim {
                let s = f(i);
                m.row_mut(i).scale_mut(s);
            }
        }
        for i in 0..dim {
            out.constant[i] *= f(i);
        }
        out
    }

    fn row(self, k: usize) -> Self {
        AffineForm {
            dim: 1,
            coeffs: self.coeffs.into_iter().map(|(id, m)| (id, m.rows(k, 1).clone_owned())).collect(),
            constant: DVector::from_element(1, self.constant[k]),
        }
    }

    fn sum_rows(self) -> Self {
        AffineForm {
            dim: 1,
            coeffs: self
                .coeffs
                .into_iter()
                .map(|(id, m)| {
                    let cols = m.ncols();
                    let s = DMatrix::from_fn(1, cols, |_, j| m.column(j).sum());
                    (id, s)
                })
                .collect(),
            constant: DVector::from_element(1, self.constant.sum()),
        }
    }

    pub fn negate(self) -> Self {
        self.scale_rows(&[-1.0])
    }

    /// Largest coefficient magnitude in row `i`, ignoring the constant.
    pub fn row_max_abs(&self, i: usize) -> f64 {
        self.coeffs
            .values()
            .flat_map(|m| m.row(i).iter().copied().collect::<Vec<_>>())
            .fold(0.0, |acc, c: f64| acc.max(c.abs()))
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<Vec<f64>, ExprError> {
        let mut out = self.constant.clone();
        for (id, m) in &self.coeffs {
            let v = assignment.get(id).ok_or(ExprError::MissingVariable { id: *id })?;
            out += m * DVector::from_column_slice(v);
        }
        Ok(out.iter().copied().collect())
    }

    /// Writes the coefficients into rows `row0..row0+dim` of a stacked
    /// matrix, `offsets` giving each variable's first column.
    pub(crate) fn write_rows(
        &self,
        target: &mut DMatrix<f64>,
        row0: usize,
        offsets: &BTreeMap<VarId, usize>,
        sign: f64,
    ) {
        for (id, m) in &self.coeffs {
            let col0 = offsets[id];
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    target[(row0 + i, col0 + j)] += sign * m[(i, j)];
                }
            }
        }
    }
}

/// Extracts the linear map and constant of an affine expression.
///
/// Constant subtrees are evaluated, so `abs(-3) * x` is accepted.
pub fn affine_coefficients(expr: &Expr) -> Result<AffineForm, ExprError> {
    if expr.curvature().is_constant() {
        let v = expr.evaluate(&Assignment::new())?;
        return Ok(AffineForm::constant(&v));
    }
    match expr.kind() {
        ExprKind::Constant(v) => Ok(AffineForm::constant(v)),
        ExprKind::Variable { id, .. } => Ok(AffineForm::variable(*id, expr.dim())),
        ExprKind::Atom { atom, args } => match atom {
            Atom::Add => Ok(affine_coefficients(&args[0])?.combine(affine_coefficients(&args[1])?, 1.0)),
            Atom::Sub => Ok(affine_coefficients(&args[0])?.combine(affine_coefficients(&args[1])?, -1.0)),
            Atom::Neg => Ok(affine_coefficients(&args[0])?.negate()),
            Atom::MulConst => {
                let c = args[0].evaluate(&Assignment::new())?;
                Ok(affine_coefficients(&args[1])?.scale_rows(&c))
            }
            Atom::Index(k) => Ok(affine_coefficients(&args[0])?.row(*k)),
            Atom::Sum => Ok(affine_coefficients(&args[0])?.sum_rows()),
            other => Err(ExprError::NotAffine { atom: other.name() }),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::build::*;
    use crate::expr::Variable;

    #[test]
    fn toy_row() {
        let a = Variable::new(VarId(0), "alice", 1);
        let b = Variable::new(VarId(1), "bob", 1);
        let e = add(add(a.expr(), b.expr()).unwrap(), Expr::scalar(2.0)).unwrap();
        let f = affine_coefficients(&e).unwrap();
        assert_eq!(f.coeffs[&a.id], DMatrix::from_element(1, 1, 1.0));
        assert_eq!(f.coeffs[&b.id], DMatrix::from_element(1, 1, 1.0));
        assert_eq!(f.constant[0], 2.0);
    }

    #[test]
    fn cancellation_and_sum() {
        let x = Variable::new(VarId(0), "x", 1);
        let e = sub(scale(3.0, x.expr()).unwrap(), x.expr()).unwrap();
        let f = affine_coefficients(&e).unwrap();
        assert_eq!(f.coeffs[&x.id][(0, 0)], 2.0);
        assert_eq!(f.constant[0], 0.0);

        let y = Variable::new(VarId(1), "y", 3);
        let f = affine_coefficients(&sum(y.expr()).unwrap()).unwrap();
        assert_eq!(f.coeffs[&y.id], DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]));
        assert_eq!(f.constant[0], 0.0);
    }

    #[test]
    fn broadcast_and_index() {
        let x = Variable::new(VarId(0), "x", 1);
        let y = Variable::new(VarId(1), "y", 2);
        let v = Expr::constant(vec![2.0, -1.0]).unwrap();
        let e = add(mul(v, x.expr()).unwrap(), index(y.expr(), 1).unwrap()).unwrap();
        let f = affine_coefficients(&e).unwrap();
        assert_eq!(f.dim, 2);
        assert_eq!(f.coeffs[&x.id], DMatrix::from_row_slice(2, 1, &[2.0, -1.0]));
        assert_eq!(f.coeffs[&y.id], DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]));
    }

    #[test]
    fn nonaffine_is_named() {
        let x = Variable::new(VarId(0), "x", 1);
        let e = add(square(x.expr()).unwrap(), x.expr()).unwrap();
        assert_eq!(affine_coefficients(&e), Err(ExprError::NotAffine { atom: "square" }));
        // constant atoms are folded
        let c = scale(1.0, abs(Expr::scalar(-3.0)).unwrap()).unwrap();
        assert_eq!(affine_coefficients(&c).unwrap().constant[0], 3.0);
    }
}
