use crate::error::ReductionError;
use crate::expr::{build, Atom, Constraint, Expr, Problem, Relation, Sense};
use crate::reduction::{expect_problem, wrap, InversePayload, InverseRecord, Reduction, Stage};

use super::{CanonConstraint, ConicProblem};

/// Replaces each relaxed definition `f(y) <= t` by the cone constraints
/// describing the epigraph of `f`, and each affine constraint by a zero or
/// nonnegative cone.
pub struct GraphExpand;

pub fn graph_expand(problem: &Problem) -> Result<(ConicProblem, InverseRecord), ReductionError> {
    match GraphExpand.apply(&Stage::Problem(problem.clone()))? {
        (Stage::Conic(c), r) => Ok((c, r)),
        _ => unreachable!("graph_expand yields a conic problem"),
    }
}

const NAME: &str = "graph_expand";

fn scalar_part(e: &Expr, i: usize) -> Result<Expr, ReductionError> {
    if e.dim() == 1 {
        Ok(e.clone())
    } else {
        wrap(NAME, build::index(e.clone(), i))
    }
}

fn expand(c: &Constraint, out: &mut Vec<CanonConstraint>) -> Result<(), ReductionError> {
    let (f, g) = (c.lhs(), c.rhs());
    if c.is_affine() {
        let k = match c.relation() {
            Relation::Eq => CanonConstraint::Zero(wrap(NAME, build::sub(f.clone(), g.clone()))?),
            Relation::Le => CanonConstraint::NonNeg(wrap(NAME, build::sub(g.clone(), f.clone()))?),
            Relation::Ge => CanonConstraint::NonNeg(wrap(NAME, build::sub(f.clone(), g.clone()))?),
        };
        out.push(k);
        return Ok(());
    }
    let atom = match (c.relation(), f.atom()) {
        (Relation::Le, Some(a)) if !a.is_affine() && g.is_affine() && f.args().iter().all(Expr::is_affine) => a,
        _ => {
            return Err(ReductionError::rejected(
                NAME,
                format!("constraint {} is not of the form f(affine) <= affine", c.id()),
            ))
        }
    };
    let t = g.clone();
    let args = f.args();
    let one = Expr::scalar(1.0);
    match atom {
        Atom::Abs => {
            out.push(CanonConstraint::NonNeg(wrap(NAME, build::sub(t.clone(), args[0].clone()))?));
            out.push(CanonConstraint::NonNeg(wrap(NAME, build::add(t, args[0].clone()))?));
        }
        Atom::Max => {
            for a in args {
                out.push(CanonConstraint::NonNeg(wrap(NAME, build::sub(t.clone(), a.clone()))?));
            }
        }
        Atom::Norm2 => out.push(CanonConstraint::Soc { t, x: vec![args[0].clone()] }),
        Atom::Square => {
            // y^2 <= t  <=>  ‖(2y, 1 - t)‖ <= 1 + t
            for i in 0..f.dim() {
                let ti = scalar_part(&t, i)?;
                let yi = scalar_part(&args[0], i)?;
                out.push(CanonConstraint::Soc {
                    t: wrap(NAME, build::add(one.clone(), ti.clone()))?,
                    x: vec![wrap(NAME, build::scale(2.0, yi))?, wrap(NAME, build::sub(one.clone(), ti))?],
                });
            }
        }
        Atom::SumSquares => out.push(CanonConstraint::Soc {
            t: wrap(NAME, build::add(one.clone(), t.clone()))?,
            x: vec![wrap(NAME, build::scale(2.0, args[0].clone()))?, wrap(NAME, build::sub(one, t))?],
        }),
        other => {
            return Err(ReductionError::rejected(NAME, format!("no graph form for `{}`", other.name())));
        }
    }
    Ok(())
}

fn run(p: &Problem) -> Result<ConicProblem, ReductionError> {
    if p.sense() != Sense::Minimize {
        return Err(ReductionError::rejected(NAME, "expected a minimization"));
    }
    if !p.objective().is_affine() {
        return Err(ReductionError::rejected(NAME, "objective is not affine"));
    }
    let mut constraints = Vec::new();
    for c in p.constraints() {
        expand(c, &mut constraints)?;
    }
    Ok(ConicProblem { variables: p.variables().to_vec(), objective: p.objective().clone(), constraints })
}

impl Reduction for GraphExpand {
    fn name(&self) -> &str {
        NAME
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        run(expect_problem(NAME, stage)?).map(|_| ())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        let out = run(expect_problem(NAME, stage)?)?;
        Ok((Stage::Conic(out), InverseRecord::new(NAME, InversePayload::Identity)))
    }
}
