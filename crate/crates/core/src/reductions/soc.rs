use crate::cone::{CanonConstraint, ConicProblem};
use crate::error::ReductionError;
use crate::expr::{build, Expr, VarAllocator, Variable};
use crate::reduction::{wrap, InversePayload, InverseRecord, Reduction, Stage};

/// Splits every second-order cone of dimension above three into a chain of
/// three-dimensional cones linked by fresh nonnegative variables.
pub struct DecomposeSoc;

const NAME: &str = "decompose_soc";

/// Returns the decomposed problem, its record and the number of auxiliary
/// variables introduced.
pub fn decompose_soc(problem: &ConicProblem) -> Result<(ConicProblem, InverseRecord, usize), ReductionError> {
    let (out, aux) = run(problem)?;
    let n = aux.len();
    Ok((out, InverseRecord::new(NAME, InversePayload::DropVariables(aux.iter().map(|v| v.id).collect())), n))
}

fn scalars(x: &[Expr]) -> Result<Vec<Expr>, ReductionError> {
    let mut out = Vec::new();
    for part in x {
        if part.dim() == 1 {
            out.push(part.clone());
        } else {
            for i in 0..part.dim() {
                out.push(wrap(NAME, build::index(part.clone(), i))?);
            }
        }
    }
    Ok(out)
}

fn split(t: Expr, xs: &[Expr], alloc: &mut VarAllocator, aux: &mut Vec<Variable>, out: &mut Vec<CanonConstraint>) {
    if xs.len() <= 2 {
        out.push(CanonConstraint::Soc { t, x: xs.to_vec() });
        return;
    }
    // ‖(x1, …, xn)‖ <= t  <=>  ‖(x2, …, xn)‖ <= u, ‖(x1, u)‖ <= t
    let u = alloc.fresh("u", 1).nonneg();
    let ue = u.expr();
    aux.push(u);
    split(ue.clone(), &xs[1..], alloc, aux, out);
    out.push(CanonConstraint::Soc { t, x: vec![xs[0].clone(), ue] });
}

fn run(p: &ConicProblem) -> Result<(ConicProblem, Vec<Variable>), ReductionError> {
    let mut alloc = VarAllocator::new(&p.variables);
    let mut aux = Vec::new();
    let mut constraints = Vec::with_capacity(p.constraints.len());
    for c in &p.constraints {
        match c {
            CanonConstraint::Soc { t, x } if c.dim() > 3 => {
                let xs = scalars(x)?;
                split(t.clone(), &xs, &mut alloc, &mut aux, &mut constraints);
            }
            other => constraints.push(other.clone()),
        }
    }
    let mut variables = p.variables.clone();
    variables.extend(aux.iter().cloned());
    Ok((ConicProblem { variables, objective: p.objective.clone(), constraints }, aux))
}

impl Reduction for DecomposeSoc {
    fn name(&self) -> &str {
        NAME
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        match stage {
            Stage::Conic(_) => Ok(()),
            other => Err(ReductionError::rejected(NAME, format!("expected a conic problem, found {}", other.kind()))),
        }
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        self.check(stage)?;
        let Stage::Conic(p) = stage else { unreachable!() };
        let (out, record, _) = decompose_soc(p)?;
        Ok((Stage::Conic(out), record))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Assignment, VarId};

    fn soc(n: usize) -> ConicProblem {
        let t = Variable::new(VarId(0), "t", 1);
        let x = Variable::new(VarId(1), "x", n);
        ConicProblem {
            objective: t.expr(),
            constraints: vec![CanonConstraint::Soc { t: t.expr(), x: vec![x.expr()] }],
            variables: vec![t, x],
        }
    }

    #[test]
    fn counts_and_dims() {
        for n in 1..8 {
            let (q, _, count) = decompose_soc(&soc(n)).unwrap();
            assert_eq!(count, n.saturating_sub(2), "n={n}");
            assert_eq!(q.soc_count(), (n - 1).max(1), "n={n}");
            assert!(q.constraints.iter().all(|c| c.dim() <= 3));
        }
        let (q, _, _) = decompose_soc(&soc(2)).unwrap();
        assert_eq!(q, soc(2));
    }

    #[test]
    fn order_for_three() {
        let (q, _, _) = decompose_soc(&soc(3)).unwrap();
        let shown: Vec<String> = q.constraints.iter().map(|c| c.render(&q.variables)).collect();
        assert_eq!(shown, ["norm2(x[1], x[2]) <= _u0", "norm2(x[0], _u0) <= t"]);
    }

    #[test]
    fn witness_preserves_membership() {
        let p = soc(5);
        let (q, _, _) = decompose_soc(&p).unwrap();
        let x = [0.3, -1.2, 0.7, 2.0, -0.4];
        for t in [2.0, 2.5, 3.0] {
            let mut a = Assignment::from([(VarId(0), vec![t]), (VarId(1), x.to_vec())]);
            let before = p.max_violation(&a).unwrap() <= 1e-9;
            // u_k = ‖x_{k+1..}‖
            for (k, v) in q.variables[2..].iter().enumerate() {
                let tail: f64 = x[k + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                a.insert(v.id, vec![tail]);
            }
            let after = q.max_violation(&a).unwrap() <= 1e-9;
            assert_eq!(before, after, "t={t}");
        }
    }
}
