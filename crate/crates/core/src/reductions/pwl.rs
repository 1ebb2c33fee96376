use crate::dcp::{is_dcp, Position};
use crate::error::ReductionError;
use crate::expr::{build, Atom, Constraint, Expr, Problem, VarAllocator, Variable};
use crate::reduction::{apply_to_problem, expect_problem, wrap, InversePayload, InverseRecord, Reduction, Stage};

/// Replaces each `abs` / `max` node in a convex position by an epigraph
/// variable `t` and the linear rows bounding it from below.
pub struct EliminatePwlAtoms;

pub fn eliminate_pwl_atoms(problem: &Problem) -> Result<(Problem, InverseRecord), ReductionError> {
    apply_to_problem(&EliminatePwlAtoms, problem)
}

struct Rewriter {
    alloc: VarAllocator,
    vars: Vec<Variable>,
    rows: Vec<Constraint>,
}

const NAME: &str = "eliminate_pwl_atoms";

impl Rewriter {
    fn rewrite(&mut self, e: &Expr, pos: Position) -> Result<Expr, ReductionError> {
        if e.is_affine() {
            return Ok(e.clone());
        }
        let atom = e.atom().expect("nonaffine expressions are atoms");
        let mut args = Vec::with_capacity(e.args().len());
        for (i, a) in e.args().iter().enumerate() {
            args.push(self.rewrite(a, pos.through(e.arg_direction(i)))?);
        }
        if !matches!(atom, Atom::Abs | Atom::Max) {
            return wrap(NAME, Expr::apply(atom, args));
        }
        if pos != Position::Up {
            return Err(ReductionError::rejected(
                NAME,
                format!("`{}` appears where it is not bounded from above", atom.name()),
            ));
        }
        let t = self.alloc.fresh("t", e.dim());
        let te = t.expr();
        for a in &args {
            self.rows.push(wrap(NAME, Constraint::le(a.clone(), te.clone()))?);
            if atom == Atom::Abs {
                let neg = wrap(NAME, build::neg(a.clone()))?;
                self.rows.push(wrap(NAME, Constraint::le(neg, te.clone()))?);
            }
        }
        self.vars.push(t);
        Ok(te)
    }
}

fn run(p: &Problem) -> Result<(Problem, Vec<Variable>), ReductionError> {
    if !is_dcp(p) {
        return Err(ReductionError::rejected(NAME, "problem is not DCP"));
    }
    let mut rw = Rewriter { alloc: p.allocator(), vars: Vec::new(), rows: Vec::new() };
    let objective = rw.rewrite(p.objective(), Position::objective(p.sense()))?;
    let mut constraints = std::mem::take(&mut rw.rows);
    for c in p.constraints() {
        let (lp, rp) = Position::constraint_sides(c.relation());
        let lhs = rw.rewrite(c.lhs(), lp)?;
        let rhs = rw.rewrite(c.rhs(), rp)?;
        constraints.append(&mut rw.rows);
        constraints.push(wrap(NAME, Constraint::new(c.relation(), lhs, rhs))?);
    }
    let mut vars = p.variables().to_vec();
    vars.extend(rw.vars.iter().cloned());
    let out = wrap(NAME, Problem::new(p.sense(), objective, constraints, vars))?;
    Ok((out, rw.vars))
}

impl Reduction for EliminatePwlAtoms {
    fn name(&self) -> &str {
        NAME
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        run(expect_problem(NAME, stage)?).map(|_| ())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        let (out, aux) = run(expect_problem(NAME, stage)?)?;
        let ids = aux.iter().map(|v| v.id).collect();
        Ok((Stage::Problem(out), InverseRecord::new(NAME, InversePayload::DropVariables(ids))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_problem, print_problem};

    #[test]
    fn toy_rows() {
        let p = parse_problem(
            "var alice; var bob; minimize max(alice + bob + 2, -alice - bob);
             subject to alice <= 0; bob == -0.5;",
        )
        .unwrap();
        let (q, inv) = eliminate_pwl_atoms(&p).unwrap();
        assert_eq!(
            print_problem(&q),
            "var alice;\nvar bob;\nvar _t0;\nminimize _t0;\nsubject to\n  alice + bob + 2 <= _t0;\n  \
             -alice - bob <= _t0;\n  alice <= 0;\n  bob == -0.5;\n"
        );
        assert_eq!(inv.payload, InversePayload::DropVariables(vec![q.variables()[2].id]));
    }

    #[test]
    fn nested_under_square() {
        let p = parse_problem("var x; minimize square(max(x, 0) + max(x - 1, 0));").unwrap();
        let (q, _) = eliminate_pwl_atoms(&p).unwrap();
        let names: Vec<_> = q.variables().iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["x", "_t0", "_t1"]);
        assert!(print_problem(&q).contains("minimize square(_t0 + _t1);"));
        assert_eq!(q.constraints().len(), 4);
    }

    #[test]
    fn abs_rows_and_rejections() {
        let p = parse_problem("var x; minimize abs(x - 1);").unwrap();
        let (q, _) = eliminate_pwl_atoms(&p).unwrap();
        assert_eq!(q.constraints().len(), 2);

        let p = parse_problem("var x; minimize x; subject to abs(x) >= 1;").unwrap();
        assert!(!EliminatePwlAtoms.accepts(&Stage::Problem(p)));
        let p = parse_problem("var x; maximize -abs(x);").unwrap();
        // negation under maximize puts abs back in an upper position
        assert!(EliminatePwlAtoms.accepts(&Stage::Problem(p)));
    }
}
