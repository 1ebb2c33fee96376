//! Concrete problem-to-problem reductions.

mod presolve;
mod pwl;
mod simple;
mod soc;

pub use presolve::{
    drop_redundant_constraints, eliminate_fixed_variables, presolve_fixed_point, scale_constraints,
    split_free_variables, DropRedundantConstraints, EliminateFixedVariables, PresolveFixedPoint, ScaleConstraints,
    SplitFreeVariables, DEFAULT_PRESOLVE_ROUNDS,
};
pub use pwl::{eliminate_pwl_atoms, EliminatePwlAtoms};
pub use simple::{
    eliminate_linear_inequalities, flip_objective, move_to_lhs, EliminateLinearInequalities, FlipObjective, MoveToLhs,
};
pub use soc::{decompose_soc, DecomposeSoc};

use crate::error::ExprError;
use crate::expr::{build, Expr};

/// `a - b`, written without a subtraction when one side is a literal.
pub(crate) fn difference(a: &Expr, b: &Expr) -> Result<Expr, ExprError> {
    if b.is_zero_constant() && b.dim() <= a.dim() {
        return Ok(a.clone());
    }
    if a.is_zero_constant() && a.dim() <= b.dim() {
        return build::neg(b.clone());
    }
    if let Some(c) = b.as_constant() {
        let negated: Vec<f64> = c.iter().map(|v| -v).collect();
        return build::add(a.clone(), Expr::constant(negated)?);
    }
    build::sub(a.clone(), b.clone())
}
