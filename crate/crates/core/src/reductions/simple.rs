use crate::error::{ExprError, ReductionError};
use crate::expr::{build, Constraint, Expr, Problem, Relation, Sense, Variable};
use crate::reduction::{apply_to_problem, expect_problem, wrap, InversePayload, InverseRecord, Reduction, Stage};

use super::difference;

/// Maximize f  ->  minimize -f. The optimal value is negated on the way back.
pub struct FlipObjective;

pub fn flip_objective(problem: &Problem) -> Result<(Problem, InverseRecord), ReductionError> {
    apply_to_problem(&FlipObjective, problem)
}

impl Reduction for FlipObjective {
    fn name(&self) -> &str {
        "flip_objective"
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        let p = expect_problem(self.name(), stage)?;
        if p.sense() != Sense::Maximize {
            return Err(ReductionError::rejected(self.name(), "objective is already minimized"));
        }
        Ok(())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        self.check(stage)?;
        let p = expect_problem(self.name(), stage)?;
        let objective = wrap(self.name(), build::neg(p.objective().clone()))?;
        let out = wrap(self.name(), p.with_parts(Sense::Minimize, objective, p.constraints().to_vec()))?;
        Ok((Stage::Problem(out), InverseRecord::new(self.name(), InversePayload::NegateValue)))
    }
}

pub(crate) fn constraint_to_lhs(c: &Constraint) -> Result<Constraint, ExprError> {
    let zero = Expr::scalar(0.0);
    match c.relation() {
        Relation::Le | Relation::Eq => {
            if c.rhs().is_zero_constant() {
                return Ok(c.clone());
            }
            Constraint::new(c.relation(), difference(c.lhs(), c.rhs())?, zero)
        }
        Relation::Ge => Constraint::le(difference(c.rhs(), c.lhs())?, zero),
    }
}

/// Rewrites every constraint as `f - g <= 0` or `f - g == 0`.
pub struct MoveToLhs;

pub fn move_to_lhs(problem: &Problem) -> Result<(Problem, InverseRecord), ReductionError> {
    apply_to_problem(&MoveToLhs, problem)
}

impl Reduction for MoveToLhs {
    fn name(&self) -> &str {
        "move_to_lhs"
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        expect_problem(self.name(), stage).map(|_| ())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        let p = expect_problem(self.name(), stage)?;
        let constraints =
            wrap(self.name(), p.constraints().iter().map(constraint_to_lhs).collect::<Result<Vec<_>, _>>())?;
        let out = wrap(self.name(), p.with_parts(p.sense(), p.objective().clone(), constraints))?;
        Ok((Stage::Problem(out), InverseRecord::new(self.name(), InversePayload::Identity)))
    }
}

/// Replaces each affine inequality `f <= g` with `f + s == g`, `s >= 0`.
pub struct EliminateLinearInequalities;

pub fn eliminate_linear_inequalities(problem: &Problem) -> Result<(Problem, InverseRecord), ReductionError> {
    apply_to_problem(&EliminateLinearInequalities, problem)
}

impl Reduction for EliminateLinearInequalities {
    fn name(&self) -> &str {
        "eliminate_linear_inequalities"
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        let p = expect_problem(self.name(), stage)?;
        for c in p.constraints() {
            if c.relation() != Relation::Eq && !c.is_affine() {
                return Err(ReductionError::rejected(
                    self.name(),
                    format!("constraint {} is a nonaffine inequality", c.id()),
                ));
            }
        }
        Ok(())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        self.check(stage)?;
        let p = expect_problem(self.name(), stage)?;
        let mut alloc = p.allocator();
        let mut slacks: Vec<Variable> = Vec::new();
        let mut constraints = Vec::with_capacity(p.constraints().len());
        for c in p.constraints() {
            let rewritten = match c.relation() {
                Relation::Eq => c.clone(),
                Relation::Le => {
                    let s = alloc.fresh("s", c.dim()).nonneg();
                    let lhs = wrap(self.name(), build::add(c.lhs().clone(), s.expr()))?;
                    slacks.push(s);
                    wrap(self.name(), Constraint::eq(lhs, c.rhs().clone()))?
                }
                Relation::Ge => {
                    let s = alloc.fresh("s", c.dim()).nonneg();
                    let gap = wrap(self.name(), difference(c.rhs(), c.lhs()))?;
                    let lhs = wrap(self.name(), build::add(gap, s.expr()))?;
                    slacks.push(s);
                    wrap(self.name(), Constraint::eq(lhs, Expr::scalar(0.0)))?
                }
            };
            constraints.push(rewritten);
        }
        let ids = slacks.iter().map(|s| s.id).collect();
        let mut vars = p.variables().to_vec();
        vars.extend(slacks);
        let out = wrap(self.name(), Problem::new(p.sense(), p.objective().clone(), constraints, vars))?;
        Ok((Stage::Problem(out), InverseRecord::new(self.name(), InversePayload::DropVariables(ids))))
    }
}
