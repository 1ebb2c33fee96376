//! The conic backend: Smith form, relaxation, graph expansion and stuffing
//! into `b - Ax ∈ K`.

mod graph;
mod smith;
mod stuff;

pub use graph::{graph_expand, GraphExpand};
pub use smith::{relax_smith, smith_transform, RelaxSmith, SmithTransform};
pub(crate) use stuff::layout as stuff_layout;
pub use stuff::{stuff_cone, StuffCone};

use std::fmt;

use crate::dcp::{is_dcp, Position};
use crate::error::{ExprError, ReductionError};
use crate::expr::{Assignment, Expr, Problem, Sense, VarId, Variable};
use crate::reduction::{expect_problem, InversePayload, InverseRecord, Reduction, Stage};
use crate::reductions::DecomposeSoc;
use crate::text::print_expr_with;

/// A constraint over affine expressions in one of the supported cones.
#[derive(Clone, Debug, PartialEq)]
pub enum CanonConstraint {
    /// `e == 0`
    Zero(Expr),
    /// `e >= 0`
    NonNeg(Expr),
    /// `‖(x_1, …, x_k)‖₂ <= t`, the parts stacked in order.
    Soc { t: Expr, x: Vec<Expr> },
}

impl CanonConstraint {
    pub fn kind(&self) -> &'static str {
        match self {
            CanonConstraint::Zero(_) => "zero",
            CanonConstraint::NonNeg(_) => "nonneg",
            CanonConstraint::Soc { .. } => "soc",
        }
    }

    /// Number of stacked rows.
    pub fn dim(&self) -> usize {
        match self {
            CanonConstraint::Zero(e) | CanonConstraint::NonNeg(e) => e.dim(),
            CanonConstraint::Soc { t, x } => t.dim() + x.iter().map(Expr::dim).sum::<usize>(),
        }
    }

    pub fn exprs(&self) -> Vec<&Expr> {
        match self {
            CanonConstraint::Zero(e) | CanonConstraint::NonNeg(e) => vec![e],
            CanonConstraint::Soc { t, x } => std::iter::once(t).chain(x.iter()).collect(),
        }
    }

    pub fn violation(&self, a: &Assignment) -> Result<f64, ExprError> {
        Ok(match self {
            CanonConstraint::Zero(e) => e.evaluate(a)?.iter().fold(0.0, |m, v| m.max(v.abs())),
            CanonConstraint::NonNeg(e) => e.evaluate(a)?.iter().fold(0.0, |m, v| m.max(-v)),
            CanonConstraint::Soc { t, x } => {
                let mut sq = 0.0;
                for part in x {
                    sq += part.evaluate(a)?.iter().map(|v| v * v).sum::<f64>();
                }
                (sq.sqrt() - t.evaluate(a)?[0]).max(0.0)
            }
        })
    }
}

impl CanonConstraint {
    /// Text form with variables named from `vars`.
    pub fn render(&self, vars: &[Variable]) -> String {
        let show = |e: &Expr| print_expr_with(vars, e);
        match self {
            CanonConstraint::Zero(e) => format!("{} == 0", show(e)),
            CanonConstraint::NonNeg(e) => format!("{} >= 0", show(e)),
            CanonConstraint::Soc { t, x } => {
                let parts: Vec<String> = x.iter().map(show).collect();
                format!("norm2({}) <= {}", parts.join(", "), show(t))
            }
        }
    }
}

impl fmt::Display for CanonConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&[]))
    }
}

/// Minimize an affine objective subject to cone constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicProblem {
    pub variables: Vec<Variable>,
    pub objective: Expr,
    pub constraints: Vec<CanonConstraint>,
}

impl ConicProblem {
    pub fn objective_value(&self, a: &Assignment) -> Result<f64, ExprError> {
        Ok(self.objective.evaluate(a)?[0])
    }

    /// Largest violation, including nonnegative variable domains.
    pub fn max_violation(&self, a: &Assignment) -> Result<f64, ExprError> {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            worst = worst.max(c.violation(a)?);
        }
        for v in self.variables.iter().filter(|v| v.nonneg) {
            let x = a.get(&v.id).ok_or(ExprError::MissingVariable { id: v.id })?;
            worst = x.iter().fold(worst, |m, xi| m.max(-xi));
        }
        Ok(worst)
    }

    pub fn soc_count(&self) -> usize {
        self.constraints.iter().filter(|c| matches!(c, CanonConstraint::Soc { .. })).count()
    }
}

impl fmt::Display for ConicProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.variables {
            write!(f, "var {}", v.name)?;
            if v.dim > 1 {
                write!(f, "[{}]", v.dim)?;
            }
            if v.nonneg {
                write!(f, " nonneg")?;
            }
            writeln!(f, ";")?;
        }
        writeln!(f, "minimize {};", print_expr_with(&self.variables, &self.objective))?;
        if !self.constraints.is_empty() {
            writeln!(f, "subject to")?;
            for c in &self.constraints {
                writeln!(f, "  {};", c.render(&self.variables))?;
            }
        }
        Ok(())
    }
}

/// Where a Smith definition came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Objective,
    Constraint(usize),
}

/// `aux == value`, with `value` one nonaffine atom over affine arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct SmithDefinition {
    pub aux: VarId,
    pub value: Expr,
    pub position: Position,
    pub origin: Origin,
}

/// A problem whose objective and constraints are affine, plus one
/// definition per nonaffine atom of the original.
#[derive(Clone, Debug, PartialEq)]
pub struct SmithProblem {
    pub problem: Problem,
    pub definitions: Vec<SmithDefinition>,
}

impl SmithProblem {
    pub fn aux_variables(&self) -> Vec<VarId> {
        self.definitions.iter().map(|d| d.aux).collect()
    }
}

/// Problem to cone data: `[decompose_soc] ∘ stuff_cone ∘ graph_expand ∘
/// relax_smith ∘ smith_transform`, accepted for DCP minimizations.
pub struct ConeCanonicalization {
    pub decompose_soc: bool,
}

impl ConeCanonicalization {
    pub fn new(decompose_soc: bool) -> Self {
        ConeCanonicalization { decompose_soc }
    }

    fn members(&self) -> Vec<Box<dyn Reduction>> {
        let mut m: Vec<Box<dyn Reduction>> =
            vec![Box::new(SmithTransform), Box::new(RelaxSmith), Box::new(GraphExpand)];
        if self.decompose_soc {
            m.push(Box::new(DecomposeSoc));
        }
        m.push(Box::new(StuffCone));
        m
    }
}

impl Reduction for ConeCanonicalization {
    fn name(&self) -> &str {
        "cone_canonicalization"
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        let p = expect_problem(self.name(), stage)?;
        if p.sense() != Sense::Minimize {
            return Err(ReductionError::rejected(self.name(), "expected a minimization"));
        }
        if !is_dcp(p) {
            return Err(ReductionError::rejected(self.name(), "problem is not DCP"));
        }
        Ok(())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        self.check(stage)?;
        let mut current = stage.clone();
        let mut records = Vec::new();
        for m in self.members() {
            let (next, rec) = m.apply(&current)?;
            records.push(rec);
            current = next;
        }
        Ok((current, InverseRecord::new(self.name(), InversePayload::Sequence(records))))
    }

    fn steps(&self) -> Vec<String> {
        self.members().iter().map(|m| m.name().to_string()).collect()
    }
}
