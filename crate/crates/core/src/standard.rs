//! Numeric standard forms consumed by the solvers.
//!
//! * LP: minimize `cᵀx + offset` s.t. `Gx <= h`, `Ax = b`
//! * QP: minimize `½xᵀPx + qᵀx + r` s.t. `Gx <= h`, `Ax = b`
//! * cone: minimize `cᵀx + offset` s.t. `b - Ax ∈ K`, with `K` the product
//!   of a zero cone, a nonnegative orthant and second-order cones, stacked
//!   in that order.
//!
//! `x` stacks the problem variables in declaration order; `vars` records
//! where each one lives.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::expr::VarId;
use crate::reduction::{Solution, Status};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSlot {
    pub id: VarId,
    pub name: String,
    pub start: usize,
    pub len: usize,
}

fn unstack(vars: &[VarSlot], raw: &RawSolution) -> Solution {
    match raw.status {
        Status::Infeasible => Solution::infeasible(),
        Status::Unbounded => Solution::unbounded(),
        Status::Error => Solution::failed(Status::Error),
        Status::Optimal | Status::IterationLimit => {
            let primal: BTreeMap<VarId, Vec<f64>> =
                vars.iter().map(|s| (s.id, raw.x[s.start..s.start + s.len].to_vec())).collect();
            Solution { status: raw.status, value: raw.objective, primal }
        }
    }
}

/// Replaces `-0.0` by `0.0` so that equal data are equal bit for bit.
fn clear_negative_zeros<'a>(values: impl IntoIterator<Item = &'a mut f64>) {
    for v in values {
        if *v == 0.0 {
            *v = 0.0;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpData {
    pub c: DVector<f64>,
    pub offset: f64,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub vars: Vec<VarSlot>,
}

impl LpData {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn to_solution(&self, raw: &RawSolution) -> Solution {
        unstack(&self.vars, raw)
    }

    pub(crate) fn without_negative_zeros(mut self) -> Self {
        clear_negative_zeros(self.c.iter_mut().chain(self.g.iter_mut()).chain(self.h.iter_mut()));
        clear_negative_zeros(self.a.iter_mut().chain(self.b.iter_mut()).chain([&mut self.offset]));
        self
    }

    /// The same program with a zero quadratic term.
    pub fn to_qp(&self) -> QpData {
        let n = self.num_vars();
        QpData {
            p: DMatrix::zeros(n, n),
            q: self.c.clone(),
            r: self.offset,
            g: self.g.clone(),
            h: self.h.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            vars: self.vars.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QpData {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    pub r: f64,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub vars: Vec<VarSlot>,
}

impl QpData {
    pub fn num_vars(&self) -> usize {
        self.q.len()
    }

    pub fn to_solution(&self, raw: &RawSolution) -> Solution {
        unstack(&self.vars, raw)
    }

    pub(crate) fn without_negative_zeros(mut self) -> Self {
        clear_negative_zeros(self.p.iter_mut().chain(self.q.iter_mut()).chain([&mut self.r]));
        clear_negative_zeros(
            self.g.iter_mut().chain(self.h.iter_mut()).chain(self.a.iter_mut()).chain(self.b.iter_mut()),
        );
        self
    }

    pub fn is_linear(&self) -> bool {
        self.p.iter().all(|v| *v == 0.0)
    }

    /// Drops the (zero) quadratic term.
    pub fn to_lp(&self) -> Option<LpData> {
        if !self.is_linear() {
            return None;
        }
        Some(LpData {
            c: self.q.clone(),
            offset: self.r,
            g: self.g.clone(),
            h: self.h.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            vars: self.vars.clone(),
        })
    }

    /// `½xᵀPx + qᵀx` (without `r`).
    pub fn objective_at(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.p * x)) + self.q.dot(x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ConeDims {
    pub zero: usize,
    pub nonneg: usize,
    pub soc: Vec<usize>,
}

impl ConeDims {
    pub fn total(&self) -> usize {
        self.zero + self.nonneg + self.soc.iter().sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeData {
    pub c: DVector<f64>,
    pub offset: f64,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub cones: ConeDims,
    pub vars: Vec<VarSlot>,
}

impl ConeData {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub(crate) fn without_negative_zeros(mut self) -> Self {
        clear_negative_zeros(self.c.iter_mut().chain(self.a.iter_mut()).chain(self.b.iter_mut()));
        clear_negative_zeros([&mut self.offset]);
        self
    }

    pub fn to_solution(&self, raw: &RawSolution) -> Solution {
        unstack(&self.vars, raw)
    }
}

/// What a solver hands back: status, stacked primal, and the objective in
/// standard-form coordinates (before any offset).
#[derive(Clone, Debug, PartialEq)]
pub struct RawSolution {
    pub status: Status,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}
