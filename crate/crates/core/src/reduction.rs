//! The reduction contract and chains of reductions.
//!
//! A reduction maps a problem to an equivalent one and returns an
//! [`InverseRecord`] holding everything needed to map a solution of the
//! output back to a solution of the input. Inverse records live outside the
//! problems so intermediate problems stay plain values.

use std::collections::BTreeMap;
use std::fmt;

use crate::cone::{ConicProblem, SmithProblem};
use crate::error::ReductionError;
use crate::expr::{Problem, VarId};
use crate::standard::{ConeData, LpData, QpData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::IterationLimit => "iteration_limit",
            Status::Error => "error",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A solution of some problem in a chain: status, objective value and
/// primal values keyed by variable.
///
/// For a minimization, an infeasible problem has value `+inf` and an
/// unbounded one `-inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub value: f64,
    pub primal: BTreeMap<VarId, Vec<f64>>,
}

impl Solution {
    pub fn optimal(value: f64, primal: BTreeMap<VarId, Vec<f64>>) -> Self {
        Solution { status: Status::Optimal, value, primal }
    }

    pub fn infeasible() -> Self {
        Solution { status: Status::Infeasible, value: f64::INFINITY, primal: BTreeMap::new() }
    }

    pub fn unbounded() -> Self {
        Solution { status: Status::Unbounded, value: f64::NEG_INFINITY, primal: BTreeMap::new() }
    }

    pub fn failed(status: Status) -> Self {
        Solution { status, value: f64::NAN, primal: BTreeMap::new() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitRecord {
    pub original: VarId,
    pub positive: VarId,
    pub negative: VarId,
}

/// Reduction-specific retrieval data.
#[derive(Clone, Debug, PartialEq)]
pub enum InversePayload {
    Identity,
    NegateValue,
    DropVariables(Vec<VarId>),
    RestoreFixed(Vec<(VarId, Vec<f64>)>),
    RecombineSplit(Vec<SplitRecord>),
    AddOffset(f64),
    /// Records of nested reductions, in application order.
    Sequence(Vec<InverseRecord>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InverseRecord {
    pub reduction: String,
    pub payload: InversePayload,
}

impl InverseRecord {
    pub fn new(reduction: &str, payload: InversePayload) -> Self {
        InverseRecord { reduction: reduction.to_string(), payload }
    }

    /// Maps a solution of the reduced problem back through this record.
    pub fn retrieve(&self, solution: &Solution) -> Result<Solution, ReductionError> {
        let mut out = solution.clone();
        match &self.payload {
            InversePayload::Identity => {}
            InversePayload::NegateValue => out.value = -out.value,
            InversePayload::DropVariables(ids) => {
                for id in ids {
                    out.primal.remove(id);
                }
            }
            InversePayload::RestoreFixed(values) => {
                if !out.primal.is_empty() || out.status == Status::Optimal {
                    for (id, v) in values {
                        out.primal.insert(*id, v.clone());
                    }
                }
            }
            InversePayload::RecombineSplit(splits) => {
                if !out.primal.is_empty() {
                    for s in splits {
                        let (p, n) = match (out.primal.remove(&s.positive), out.primal.remove(&s.negative)) {
                            (Some(p), Some(n)) if p.len() == n.len() => (p, n),
                            _ => return Err(ReductionError::MalformedInverse { reduction: self.reduction.clone() }),
                        };
                        let x = p.iter().zip(&n).map(|(a, b)| a - b).collect();
                        out.primal.insert(s.original, x);
                    }
                }
            }
            InversePayload::AddOffset(offset) => out.value += offset,
            InversePayload::Sequence(records) => {
                for r in records.iter().rev() {
                    out = r.retrieve(&out)?;
                }
            }
        }
        Ok(out)
    }
}

/// A problem at some point of a rewriting chain.
#[derive(Clone, Debug, PartialEq)]
pub enum Stage {
    Problem(Problem),
    Smith(SmithProblem),
    Conic(ConicProblem),
    Lp(LpData),
    Qp(QpData),
    Cone(ConeData),
}

impl Stage {
    pub fn kind(&self) -> &'static str {
        match self {
            Stage::Problem(_) => "problem",
            Stage::Smith(_) => "smith problem",
            Stage::Conic(_) => "conic problem",
            Stage::Lp(_) => "LP data",
            Stage::Qp(_) => "QP data",
            Stage::Cone(_) => "cone data",
        }
    }

    pub fn as_problem(&self) -> Option<&Problem> {
        match self {
            Stage::Problem(p) => Some(p),
            _ => None,
        }
    }

    pub fn into_problem(self) -> Option<Problem> {
        match self {
            Stage::Problem(p) => Some(p),
            _ => None,
        }
    }
}

impl From<Problem> for Stage {
    fn from(p: Problem) -> Self {
        Stage::Problem(p)
    }
}

/// Every rewriting step implements this.
pub trait Reduction: Send + Sync {
    fn name(&self) -> &str;

    /// `Ok` iff [`Reduction::apply`] is guaranteed to succeed; the error
    /// carries the reason otherwise.
    fn check(&self, stage: &Stage) -> Result<(), ReductionError>;

    fn accepts(&self, stage: &Stage) -> bool {
        self.check(stage).is_ok()
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError>;

    fn retrieve(&self, solution: &Solution, inverse: &InverseRecord) -> Result<Solution, ReductionError> {
        if inverse.reduction != self.name() {
            return Err(ReductionError::MalformedInverse { reduction: self.name().to_string() });
        }
        inverse.retrieve(solution)
    }

    /// Names of the leaf reductions this one performs.
    fn steps(&self) -> Vec<String> {
        vec![self.name().to_string()]
    }
}

/// Helper for reductions that consume a plain [`Problem`].
pub(crate) fn expect_problem<'a>(name: &str, stage: &'a Stage) -> Result<&'a Problem, ReductionError> {
    stage
        .as_problem()
        .ok_or_else(|| ReductionError::rejected(name, format!("expected a problem, found {}", stage.kind())))
}

pub(crate) fn wrap<T>(name: &str, r: Result<T, crate::error::ExprError>) -> Result<T, ReductionError> {
    r.map_err(|e| ReductionError::expr(name, e))
}

/// Runs a problem-to-problem reduction on a bare [`Problem`].
pub(crate) fn apply_to_problem(
    reduction: &dyn Reduction,
    problem: &Problem,
) -> Result<(Problem, InverseRecord), ReductionError> {
    let (out, record) = reduction.apply(&Stage::Problem(problem.clone()))?;
    match out {
        Stage::Problem(p) => Ok((p, record)),
        other => {
            Err(ReductionError::rejected(reduction.name(), format!("produced {} instead of a problem", other.kind())))
        }
    }
}

/// An ordered sequence of reductions; itself a reduction.
pub struct Chain {
    name: String,
    members: Vec<Box<dyn Reduction>>,
}

impl Chain {
    pub fn new(name: impl Into<String>, members: Vec<Box<dyn Reduction>>) -> Self {
        Chain { name: name.into(), members }
    }

    pub fn empty() -> Self {
        Chain::new("chain", Vec::new())
    }

    pub fn members(&self) -> &[Box<dyn Reduction>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Applies members left to right, failing audibly at the first member
    /// that rejects its input.
    pub fn apply_all(&self, stage: &Stage) -> Result<(Stage, Vec<InverseRecord>), ReductionError> {
        let mut current = stage.clone();
        let mut records = Vec::with_capacity(self.members.len());
        for (i, r) in self.members.iter().enumerate() {
            if let Err(e) = r.check(&current) {
                let reason = match e {
                    ReductionError::NotAccepted { reason, .. } => reason,
                    other => Some(other.to_string()),
                };
                return Err(ReductionError::NotAccepted { reduction: r.name().to_string(), position: Some(i), reason });
            }
            let (next, rec) = r.apply(&current)?;
            records.push(rec);
            current = next;
        }
        Ok((current, records))
    }

    /// Composes member retrievals in reverse order.
    pub fn retrieve_all(&self, solution: &Solution, records: &[InverseRecord]) -> Result<Solution, ReductionError> {
        if records.len() != self.members.len() {
            return Err(ReductionError::MalformedInverse { reduction: self.name.clone() });
        }
        let mut out = solution.clone();
        for (r, rec) in self.members.iter().zip(records).rev() {
            out = r.retrieve(&out, rec)?;
        }
        Ok(out)
    }
}

impl Reduction for Chain {
    fn name(&self) -> &str {
        &self.name
    }

    fn check(&self, stage: &Stage) -> Result<(), ReductionError> {
        self.apply_all(stage).map(|_| ())
    }

    fn apply(&self, stage: &Stage) -> Result<(Stage, InverseRecord), ReductionError> {
        let (out, records) = self.apply_all(stage)?;
        Ok((out, InverseRecord::new(&self.name, InversePayload::Sequence(records))))
    }

    fn retrieve(&self, solution: &Solution, inverse: &InverseRecord) -> Result<Solution, ReductionError> {
        match &inverse.payload {
            InversePayload::Sequence(records) if inverse.reduction == self.name => self.retrieve_all(solution, records),
            _ => Err(ReductionError::MalformedInverse { reduction: self.name.clone() }),
        }
    }

    fn steps(&self) -> Vec<String> {
        self.members.iter().flat_map(|m| m.steps()).collect()
    }
}
