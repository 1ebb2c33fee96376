use thiserror::Error;

use crate::expr::VarId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("constant literal has no entries")]
    EmptyConstant,
    #[error("constant literal is not finite")]
    NonFiniteConstant,
    #[error("{atom}: incompatible argument dimensions {dims:?}")]
    DimensionMismatch { atom: &'static str, dims: Vec<usize> },
    #[error("{atom}: wrong number of arguments ({found})")]
    Arity { atom: &'static str, found: usize },
    #[error("product of two non-constant expressions")]
    NonConstantProduct,
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("no value assigned to variable {id}")]
    MissingVariable { id: VarId },
    #[error("variable {id}: expected dimension {expected}, got {found}")]
    AssignmentDimension { id: VarId, expected: usize, found: usize },
    #[error("variable {id} is not declared in the problem")]
    UndeclaredVariable { id: VarId },
    #[error("variable `{name}` declared twice")]
    DuplicateVariable { name: String },
    #[error("variable `{name}` has dimension zero")]
    ZeroDimension { name: String },
    #[error("objective must be scalar, found dimension {dim}")]
    NonScalarObjective { dim: usize },
    #[error("expression is not affine: nonlinear atom `{atom}`")]
    NotAffine { atom: &'static str },
    #[error("expression is not quadratic: residual atom `{atom}`")]
    NotQuadratic { atom: &'static str },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error(
        "reduction `{reduction}` does not accept the problem{}{}",
        position.map(|p| format!(" (chain position {p})")).unwrap_or_default(),
        reason.as_ref().map(|r| format!(": {r}")).unwrap_or_default()
    )]
    NotAccepted { reduction: String, position: Option<usize>, reason: Option<String> },
    #[error("reduction `{reduction}`: malformed inverse record")]
    MalformedInverse { reduction: String },
    #[error("reduction `{reduction}`: {source}")]
    Expr {
        reduction: String,
        #[source]
        source: ExprError,
    },
}

impl ReductionError {
    pub fn not_accepted(reduction: &str) -> Self {
        ReductionError::NotAccepted { reduction: reduction.to_string(), position: None, reason: None }
    }

    pub fn rejected(reduction: &str, reason: impl Into<String>) -> Self {
        ReductionError::NotAccepted { reduction: reduction.to_string(), position: None, reason: Some(reason.into()) }
    }

    pub fn expr(reduction: &str, source: ExprError) -> Self {
        ReductionError::Expr { reduction: reduction.to_string(), source }
    }

    /// Name of the reduction that failed.
    pub fn reduction(&self) -> &str {
        match self {
            ReductionError::NotAccepted { reduction, .. }
            | ReductionError::MalformedInverse { reduction }
            | ReductionError::Expr { reduction, .. } => reduction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),
    #[error("linear system factorization failed")]
    Factorization,
    #[error("solver `{solver}` cannot handle {what}")]
    Unsupported { solver: &'static str, what: String },
}
