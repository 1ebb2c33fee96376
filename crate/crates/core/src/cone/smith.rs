use crate::dcp::Position;
use crate::error::ReductionError;
use crate::expr::{AtomCurvature, Constraint, Expr, Problem, VarAllocator, Variable};
use crate::reduction::{expect_problem, wrap, InversePayload, InverseRecord, Reduction, Stage};

use super::{Origin, SmithDefinition, SmithProblem};

/// Names every nonaffine atom node with a fresh variable, outermost first.
pub struct SmithTransform;

pub fn smith_transform(problem: &Problem) -> Result<(SmithProblem, InverseRecord), ReductionError> {
    match SmithTransform.apply(&Stage::Problem(problem.clone()))? {
        (Stage::Smith(s), r) => Ok((s, r)),
        _ => unreachable!("smith_transform yields a Smith problem"),
    }
}

const SMITH: &str = "smith_transform";

struct Namer {
    alloc: VarAllocator,
    vars: Vec<Variable>,
    defs: Vec<SmithDefinition>,
}

impl Namer {
    fn name(&mut self, e: &Expr, pos: Position, origin: Origin) -> Result<Expr, ReductionError> {
        if e.is_affine() {
            return Ok(e.clone());
        }
        let atom = e.atom().expect("nonaffine expressions are atoms");
        if atom.is_affine() {
            let mut args = Vec::with_capacity(e.args().len());
            for (i, a) in e.args().iter().enumerate() {
                args.push(self.name(a, pos.through(e.arg_direction(i)), origin)?);
            }
            return wrap(SMITH, Expr::apply(atom, args));
        }
        let t = self.alloc.fresh("t", e.dim());
        let te = t.expr();
        self.vars.push(t.clone());
        let mut args = Vec::with_capacity(e.args().len());
        for (i, a) in e.args().iter().enumerate() {
            args.push(self.name(a, Position::Up.through(e.arg_direction(i)), origin)?);
        }
        let value = wrap(SMITH, Expr::apply(atom, args))?;
        self.defs.push(SmithDefinition { aux: t.id, value, position: pos, origin });
        Ok(te)
    }
}

impl Reduction for SmithTransform {
    fn name(&self) -> &str {
        SMITH
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        expect_problem(SMITH, stage).map(|_| ())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        let p = expect_problem(SMITH, stage)?;
        let mut n = Namer { alloc: p.allocator(), vars: Vec::new(), defs: Vec::new() };
        let objective = n.name(p.objective(), Position::objective(p.sense()), Origin::Objective)?;
        let mut constraints = Vec::with_capacity(p.constraints().len());
        for (i, c) in p.constraints().iter().enumerate() {
            let (lp, rp) = Position::constraint_sides(c.relation());
            let lhs = n.name(c.lhs(), lp, Origin::Constraint(i))?;
            let rhs = n.name(c.rhs(), rp, Origin::Constraint(i))?;
            constraints.push(wrap(SMITH, Constraint::new(c.relation(), lhs, rhs))?);
        }
        let mut vars = p.variables().to_vec();
        vars.extend(n.vars);
        let problem = wrap(SMITH, Problem::new(p.sense(), objective, constraints, vars))?;
        let aux = n.defs.iter().map(|d| d.aux).collect();
        let out = SmithProblem { problem, definitions: n.defs };
        Ok((Stage::Smith(out), InverseRecord::new(SMITH, InversePayload::DropVariables(aux))))
    }
}

/// Turns each definition `t == f(args)` into `f(args) <= t`; sound when
/// every convex definition sits in an upper position.
pub struct RelaxSmith;

pub fn relax_smith(smith: &SmithProblem) -> Result<(Problem, InverseRecord), ReductionError> {
    match RelaxSmith.apply(&Stage::Smith(smith.clone()))? {
        (Stage::Problem(p), r) => Ok((p, r)),
        _ => unreachable!("relax_smith yields a problem"),
    }
}

const RELAX: &str = "relax_smith";

fn expect_smith(stage: &Stage) -> Result<&SmithProblem, ReductionError> {
    match stage {
        Stage::Smith(s) => Ok(s),
        other => Err(ReductionError::rejected(RELAX, format!("expected a Smith problem, found {}", other.kind()))),
    }
}

impl Reduction for RelaxSmith {
    fn name(&self) -> &str {
        RELAX
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        let s = expect_smith(stage)?;
        for d in &s.definitions {
            let atom = d.value.atom().expect("definitions are atoms");
            let ok = match atom.curvature_class() {
                AtomCurvature::Convex => d.position == Position::Up,
                AtomCurvature::Concave => d.position == Position::Down,
                AtomCurvature::Affine => true,
            };
            if !ok {
                return Err(ReductionError::rejected(
                    RELAX,
                    format!("`{}` is used with the wrong curvature", atom.name()),
                ));
            }
        }
        Ok(())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        self.check(stage)?;
        let s = expect_smith(stage)?;
        let p = &s.problem;
        let var_of = |id| p.variable(id).expect("aux declared").expr();
        let relaxed = |d: &SmithDefinition| -> Result<Constraint, ReductionError> {
            let rel = match d.value.atom().map(|a| a.curvature_class()) {
                Some(AtomCurvature::Concave) => Constraint::ge(d.value.clone(), var_of(d.aux)),
                _ => Constraint::le(d.value.clone(), var_of(d.aux)),
            };
            wrap(RELAX, rel)
        };
        let mut constraints = Vec::new();
        for d in s.definitions.iter().filter(|d| d.origin == Origin::Objective) {
            constraints.push(relaxed(d)?);
        }
        for (i, c) in p.constraints().iter().enumerate() {
            for d in s.definitions.iter().filter(|d| d.origin == Origin::Constraint(i)) {
                constraints.push(relaxed(d)?);
            }
            constraints.push(c.clone());
        }
        let out = wrap(RELAX, p.with_parts(p.sense(), p.objective().clone(), constraints))?;
        let aux = s.aux_variables();
        Ok((Stage::Problem(out), InverseRecord::new(RELAX, InversePayload::DropVariables(aux))))
    }
}
