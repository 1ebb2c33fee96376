use std::collections::BTreeMap;

use crate::affine::affine_coefficients;
use crate::error::ReductionError;
use crate::expr::{build, Constraint, Expr, Problem, Relation, VarId};
use crate::reduction::{
    apply_to_problem, expect_problem, wrap, InversePayload, InverseRecord, Reduction, SplitRecord, Stage,
};

pub const DEFAULT_PRESOLVE_ROUNDS: usize = 20;

/// Finds `x == c` with `c` constant, substitutes `c` for `x` everywhere and
/// drops `x`. One pass; the first defining equality of each variable wins.
pub struct EliminateFixedVariables;

pub fn eliminate_fixed_variables(problem: &Problem) -> Result<(Problem, InverseRecord), ReductionError> {
    apply_to_problem(&EliminateFixedVariables, problem)
}

fn fixing(c: &Constraint, problem: &Problem) -> Option<(VarId, Vec<f64>)> {
    if c.relation() != Relation::Eq {
        return None;
    }
    let (var, value) = match (c.lhs().as_variable(), c.rhs().as_variable()) {
        (Some(v), _) if c.rhs().curvature().is_constant() => (v, c.rhs()),
        (_, Some(v)) if c.lhs().curvature().is_constant() => (v, c.lhs()),
        _ => return None,
    };
    let dim = problem.variable(var)?.dim;
    let value = value.constant_value()?;
    match value.len() {
        n if n == dim => Some((var, value)),
        1 => Some((var, vec![value[0]; dim])),
        _ => None,
    }
}

impl Reduction for EliminateFixedVariables {
    fn name(&self) -> &str {
        "eliminate_fixed_variables"
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        expect_problem(self.name(), stage).map(|_| ())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        let p = expect_problem(self.name(), stage)?;
        let mut fixed: Vec<(VarId, Vec<f64>)> = Vec::new();
        let mut defining = Vec::new();
        for (i, c) in p.constraints().iter().enumerate() {
            if let Some((v, value)) = fixing(c, p) {
                if !fixed.iter().any(|(id, _)| *id == v) {
                    fixed.push((v, value));
                    defining.push(i);
                }
            }
        }
        if fixed.is_empty() {
            return Ok((stage.clone(), InverseRecord::new(self.name(), InversePayload::RestoreFixed(vec![]))));
        }
        let values: BTreeMap<VarId, Expr> = fixed
            .iter()
            .map(|(id, v)| Expr::constant(v.clone()).map(|e| (*id, e)))
            .collect::<Result<_, _>>()
            .map_err(|e| ReductionError::expr(self.name(), e))?;
        let subst = |id: VarId| values.get(&id).cloned();
        let objective = wrap(self.name(), p.objective().substitute(&subst))?;
        let mut constraints = Vec::new();
        for (i, c) in p.constraints().iter().enumerate() {
            if !defining.contains(&i) {
                constraints.push(wrap(self.name(), c.substitute(&subst))?);
            }
        }
        // A nonnegative variable fixed to a negative value leaves nothing
        // behind to violate, so record the contradiction explicitly.
        let domain_violated =
            fixed.iter().any(|(id, v)| p.variable(*id).is_some_and(|var| var.nonneg) && v.iter().any(|x| *x < 0.0));
        if domain_violated {
            constraints.push(wrap(self.name(), Constraint::le(Expr::scalar(0.0), Expr::scalar(-1.0)))?);
        }
        let vars = p.variables().iter().filter(|v| !values.contains_key(&v.id)).cloned().collect();
        let out = wrap(self.name(), Problem::new(p.sense(), objective, constraints, vars))?;
        Ok((Stage::Problem(out), InverseRecord::new(self.name(), InversePayload::RestoreFixed(fixed))))
    }
}

/// Replaces every variable without a sign attribute by `xp - xm` with both
/// parts nonnegative.
pub struct SplitFreeVariables;

pub fn split_free_variables(problem: &Problem) -> Result<(Problem, InverseRecord), ReductionError> {
    apply_to_problem(&SplitFreeVariables, problem)
}

impl Reduction for SplitFreeVariables {
    fn name(&self) -> &str {
        "split_free_variables"
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        expect_problem(self.name(), stage).map(|_| ())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        let p = expect_problem(self.name(), stage)?;
        let mut alloc = p.allocator();
        let mut vars = Vec::new();
        let mut parts = BTreeMap::new();
        let mut splits = Vec::new();
        for v in p.variables() {
            if v.nonneg {
                vars.push(v.clone());
                continue;
            }
            let pos = alloc.fresh(&format!("{}_p", v.name.trim_start_matches('_')), v.dim).nonneg();
            let neg = alloc.fresh(&format!("{}_m", v.name.trim_start_matches('_')), v.dim).nonneg();
            let diff = wrap(self.name(), build::sub(pos.expr(), neg.expr()))?;
            parts.insert(v.id, diff);
            splits.push(SplitRecord { original: v.id, positive: pos.id, negative: neg.id });
            vars.push(pos);
            vars.push(neg);
        }
        let subst = |id: VarId| parts.get(&id).cloned();
        let objective = wrap(self.name(), p.objective().substitute(&subst))?;
        let constraints =
            wrap(self.name(), p.constraints().iter().map(|c| c.substitute(&subst)).collect::<Result<Vec<_>, _>>())?;
        let out = wrap(self.name(), Problem::new(p.sense(), objective, constraints, vars))?;
        Ok((Stage::Problem(out), InverseRecord::new(self.name(), InversePayload::RecombineSplit(splits))))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct BoundKey {
    var: VarId,
    component: usize,
    upper: bool,
}

/// `x[k] <= v` or `x[k] >= v` as a single-coefficient scalar inequality.
fn simple_bound(c: &Constraint) -> Option<(BoundKey, f64)> {
    if c.relation() == Relation::Eq || c.dim() != 1 || !c.is_affine() {
        return None;
    }
    let form = affine_coefficients(&c.difference().ok()?).ok()?;
    let mut hit = None;
    for (id, m) in &form.coeffs {
        for (j, a) in m.row(0).iter().enumerate() {
            if *a != 0.0 {
                if hit.is_some() {
                    return None;
                }
                hit = Some((*id, j, *a));
            }
        }
    }
    let (var, component, a) = hit?;
    // a*x + k <= 0 (or >= 0)
    let value = -form.constant[0] / a;
    let upper = (a > 0.0) == (c.relation() == Relation::Le);
    Some((BoundKey { var, component, upper }, value))
}

/// Drops duplicate constraints, satisfied constant constraints and simple
/// bounds dominated by a tighter bound on the same coordinate.
pub struct DropRedundantConstraints;

pub fn drop_redundant_constraints(problem: &Problem) -> Result<(Problem, InverseRecord), ReductionError> {
    apply_to_problem(&DropRedundantConstraints, problem)
}

impl Reduction for DropRedundantConstraints {
    fn name(&self) -> &str {
        "drop_redundant_constraints"
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        expect_problem(self.name(), stage).map(|_| ())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        let p = expect_problem(self.name(), stage)?;
        let cs = p.constraints();
        let bounds: Vec<Option<(BoundKey, f64)>> = cs.iter().map(simple_bound).collect();
        let mut tightest: BTreeMap<BoundKey, (usize, f64)> = BTreeMap::new();
        for (i, b) in bounds.iter().enumerate() {
            if let Some((key, v)) = b {
                let better = match tightest.get(key) {
                    None => true,
                    Some((_, best)) => (key.upper && v < best) || (!key.upper && v > best),
                };
                if better {
                    tightest.insert(*key, (i, *v));
                }
            }
        }
        let mut kept: Vec<Constraint> = Vec::new();
        for (i, c) in cs.iter().enumerate() {
            if c.is_constant() && c.violation(&Default::default()).is_ok_and(|v| v <= 0.0) {
                continue;
            }
            if let Some((key, _)) = bounds[i] {
                if tightest[&key].0 != i {
                    continue;
                }
            }
            if kept.iter().any(|k| k.relation() == c.relation() && k.lhs() == c.lhs() && k.rhs() == c.rhs()) {
                continue;
            }
            kept.push(c.clone());
        }
        if kept.len() == cs.len() {
            return Ok((stage.clone(), InverseRecord::new(self.name(), InversePayload::Identity)));
        }
        let out = wrap(self.name(), p.with_parts(p.sense(), p.objective().clone(), kept))?;
        Ok((Stage::Problem(out), InverseRecord::new(self.name(), InversePayload::Identity)))
    }
}

/// Divides each row of every affine constraint by its largest coefficient
/// magnitude, giving `diag(s) (f - g) REL 0`.
pub struct ScaleConstraints;

pub fn scale_constraints(problem: &Problem) -> Result<(Problem, InverseRecord), ReductionError> {
    apply_to_problem(&ScaleConstraints, problem)
}

impl Reduction for ScaleConstraints {
    fn name(&self) -> &str {
        "scale_constraints"
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        let p = expect_problem(self.name(), stage)?;
        match p.constraints().iter().find(|c| !c.is_affine()) {
            Some(c) => Err(ReductionError::rejected(self.name(), format!("constraint {} is not affine", c.id()))),
            None => Ok(()),
        }
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        self.check(stage)?;
        let p = expect_problem(self.name(), stage)?;
        let mut constraints = Vec::with_capacity(p.constraints().len());
        for c in p.constraints() {
            let diff = wrap(self.name(), c.difference())?;
            let form = wrap(self.name(), affine_coefficients(&diff))?;
            let scales: Vec<f64> = (0..form.dim)
                .map(|i| match form.row_max_abs(i) {
                    m if m > 0.0 => 1.0 / m,
                    _ => 1.0,
                })
                .collect();
            if scales.iter().all(|s| *s == 1.0) {
                constraints.push(c.clone());
                continue;
            }
            let scaled = wrap(self.name(), build::mul(wrap(self.name(), Expr::constant(scales))?, diff))?;
            constraints.push(wrap(self.name(), Constraint::new(c.relation(), scaled, Expr::scalar(0.0)))?);
        }
        let out = wrap(self.name(), p.with_parts(p.sense(), p.objective().clone(), constraints))?;
        Ok((Stage::Problem(out), InverseRecord::new(self.name(), InversePayload::Identity)))
    }
}

/// Alternates fixed-variable elimination and redundancy removal until the
/// problem stops changing or `max_rounds` rounds have run.
pub struct PresolveFixedPoint {
    pub max_rounds: usize,
}

impl Default for PresolveFixedPoint {
    fn default() -> Self {
        PresolveFixedPoint { max_rounds: DEFAULT_PRESOLVE_ROUNDS }
    }
}

/// Returns the presolved problem, its inverse record and the number of
/// rounds executed (the last one being the round that changed nothing,
/// unless the cap was hit).
pub fn presolve_fixed_point(
    problem: &Problem,
    max_rounds: usize,
) -> Result<(Problem, InverseRecord, usize), ReductionError> {
    let name = "presolve_fixed_point";
    let mut current = problem.clone();
    let mut records = Vec::new();
    let mut rounds = 0;
    while rounds < max_rounds {
        rounds += 1;
        let (a, r1) = eliminate_fixed_variables(&current)?;
        let (b, r2) = drop_redundant_constraints(&a)?;
        records.push(r1);
        records.push(r2);
        let unchanged = b == current;
        current = b;
        if unchanged {
            break;
        }
    }
    Ok((current, InverseRecord::new(name, InversePayload::Sequence(records)), rounds))
}

impl Reduction for PresolveFixedPoint {
    fn name(&self) -> &str {
        "presolve_fixed_point"
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        expect_problem(self.name(), stage).map(|_| ())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        let p = expect_problem(self.name(), stage)?;
        let (out, record, _) = presolve_fixed_point(p, self.max_rounds)?;
        Ok((Stage::Problem(out), record))
    }
}
