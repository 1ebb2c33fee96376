//! Rewriting convex optimization problems into solver standard forms.
//!
//! A problem is parsed from text ([`text`]), checked against the
//! disciplined convex programming rules ([`dcp`]), and pushed through a
//! chain of [`reduction::Reduction`]s into LP, QP or cone data
//! ([`standard`]). [`analyzer`] picks the most specific target that
//! accepts the problem and [`solvers`] holds reference solvers for each
//! standard form. Solutions travel back through the chain's inverse
//! records.

pub mod affine;
pub mod analyzer;
pub mod cone;
pub mod dcp;
pub mod emit;
pub mod error;
pub mod expr;
pub mod qp;
pub mod reduction;
pub mod reductions;
pub mod solvers;
pub mod standard;
pub mod text;

pub use error::{ExprError, ReductionError, SolverError};
pub use expr::{build, Constraint, Expr, Problem, Relation, Sense, VarId, Variable};
pub use reduction::{Chain, InverseRecord, Reduction, Solution, Stage, Status};
pub use text::{parse_problem, print_problem};
