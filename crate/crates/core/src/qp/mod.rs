//! The QP backend: the path automaton, quadratic coefficient extraction
//! and LP/QP stuffing.

mod nfa;
mod quadratic;
mod stuff;

pub use nfa::{qp_applicable, PathNfa, StateSet, ACCEPTING};
pub use quadratic::{quadratic_form, QuadForm};
pub use stuff::{stuff_lp, stuff_qp, StuffLp, StuffQp};

use crate::error::ReductionError;
use crate::expr::{Label, Sense};
use crate::reduction::{expect_problem, InversePayload, InverseRecord, Reduction, Stage};
use crate::reductions::{EliminatePwlAtoms, MoveToLhs};

fn has_quadratic(p: &crate::expr::Problem) -> bool {
    let q = |e: &crate::expr::Expr| e.any_node(&|n| n.atom().is_some_and(|a| a.labels().contains(&Label::Q)));
    q(p.objective()) || p.constraints().iter().any(|c| q(c.lhs()) || q(c.rhs()))
}

fn run_members(
    name: &str,
    members: &[Box<dyn Reduction>],
    stage: &Stage,
) -> Result<(Stage, InverseRecord), ReductionError> {
    let mut current = stage.clone();
    let mut records = Vec::new();
    for m in members {
        let (next, rec) = m.apply(&current)?;
        records.push(rec);
        current = next;
    }
    Ok((current, InverseRecord::new(name, InversePayload::Sequence(records))))
}

fn check_qp(name: &str, stage: &Stage, linear: bool) -> Result<(), ReductionError> {
    let p = expect_problem(name, stage)?;
    if p.sense() != Sense::Minimize {
        return Err(ReductionError::rejected(name, "expected a minimization"));
    }
    if !qp_applicable(p) {
        return Err(ReductionError::rejected(name, "problem is not QP-representable"));
    }
    if linear && has_quadratic(p) {
        return Err(ReductionError::rejected(name, "problem has quadratic terms"));
    }
    Ok(())
}

/// Problem to LP data: `stuff_lp ∘ move_to_lhs ∘ eliminate_pwl_atoms`.
pub struct LpCanonicalization;

impl LpCanonicalization {
    fn members() -> Vec<Box<dyn Reduction>> {
        vec![Box::new(EliminatePwlAtoms), Box::new(MoveToLhs), Box::new(StuffLp)]
    }
}

impl Reduction for LpCanonicalization {
    fn name(&self) -> &str {
        "lp_canonicalization"
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        check_qp(self.name(), stage, true)
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        self.check(stage)?;
        run_members(self.name(), &Self::members(), stage)
    }

    fn steps(&self) -> Vec<String> {
        Self::members().iter().map(|m| m.name().to_string()).collect()
    }
}

/// Problem to QP data: `stuff_qp ∘ move_to_lhs ∘ eliminate_pwl_atoms`.
pub struct QpCanonicalization;

impl QpCanonicalization {
    fn members() -> Vec<Box<dyn Reduction>> {
        vec![Box::new(EliminatePwlAtoms), Box::new(MoveToLhs), Box::new(StuffQp)]
    }
}

impl Reduction for QpCanonicalization {
    fn name(&self) -> &str {
        "qp_canonicalization"
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        check_qp(self.name(), stage, false)
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        self.check(stage)?;
        run_members(self.name(), &Self::members(), stage)
    }

    fn steps(&self) -> Vec<String> {
        Self::members().iter().map(|m| m.name().to_string()).collect()
    }
}
