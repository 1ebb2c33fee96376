//! Expression trees, variables, constraints and problems.
//!
//! Nodes are immutable and reference counted. Every node caches its
//! dimension, DCP curvature and sign when it is built, so analysis of a
//! large tree never revisits a subtree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::ExprError;

/// Identifier of an optimization variable, unique within a problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A declared variable: a scalar (`dim == 1`) or a vector in R^dim.
///
/// `nonneg` marks a variable whose domain is restricted to the nonnegative
/// orthant. Slack and split variables introduced by reductions carry it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub dim: usize,
    pub nonneg: bool,
}

impl Variable {
    pub fn new(id: VarId, name: impl Into<String>, dim: usize) -> Self {
        Variable { id, name: name.into(), dim, nonneg: false }
    }

    pub fn nonneg(mut self) -> Self {
        self.nonneg = true;
        self
    }

    pub fn expr(&self) -> Expr {
        Expr::variable(self)
    }
}

/// Values assigned to variables.
pub type Assignment = BTreeMap<VarId, Vec<f64>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Curvature {
    Constant,
    Affine,
    Convex,
    Concave,
    Unknown,
}

impl Curvature {
    pub fn is_constant(self) -> bool {
        self == Curvature::Constant
    }

    pub fn is_affine(self) -> bool {
        matches!(self, Curvature::Constant | Curvature::Affine)
    }

    pub fn is_convex(self) -> bool {
        matches!(self, Curvature::Constant | Curvature::Affine | Curvature::Convex)
    }

    pub fn is_concave(self) -> bool {
        matches!(self, Curvature::Constant | Curvature::Affine | Curvature::Concave)
    }
}

impl fmt::Display for Curvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Curvature::Constant => "constant",
            Curvature::Affine => "affine",
            Curvature::Convex => "convex",
            Curvature::Concave => "concave",
            Curvature::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Zero,
    NonNegative,
    NonPositive,
    Unknown,
}

impl Sign {
    pub fn is_nonneg(self) -> bool {
        matches!(self, Sign::Zero | Sign::NonNegative)
    }

    pub fn is_nonpos(self) -> bool {
        matches!(self, Sign::Zero | Sign::NonPositive)
    }

    fn of_values(values: &[f64]) -> Sign {
        if values.iter().all(|v| *v == 0.0) {
            Sign::Zero
        } else if values.iter().all(|v| *v >= 0.0) {
            Sign::NonNegative
        } else if values.iter().all(|v| *v <= 0.0) {
            Sign::NonPositive
        } else {
            Sign::Unknown
        }
    }

    fn negate(self) -> Sign {
        match self {
            Sign::NonNegative => Sign::NonPositive,
            Sign::NonPositive => Sign::NonNegative,
            s => s,
        }
    }

    fn add(self, other: Sign) -> Sign {
        if self == Sign::Zero {
            other
        } else if other == Sign::Zero {
            self
        } else if self.is_nonneg() && other.is_nonneg() {
            Sign::NonNegative
        } else if self.is_nonpos() && other.is_nonpos() {
            Sign::NonPositive
        } else {
            Sign::Unknown
        }
    }

    fn mul(self, other: Sign) -> Sign {
        if self == Sign::Zero || other == Sign::Zero {
            Sign::Zero
        } else if (self.is_nonneg() && other.is_nonneg()) || (self.is_nonpos() && other.is_nonpos()) {
            Sign::NonNegative
        } else if (self.is_nonneg() && other.is_nonpos()) || (self.is_nonpos() && other.is_nonneg()) {
            Sign::NonPositive
        } else {
            Sign::Unknown
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Sign::Zero => "zero",
            Sign::NonNegative => "nonnegative",
            Sign::NonPositive => "nonpositive",
            Sign::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

/// Curvature class of an atom as a function of its arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomCurvature {
    Affine,
    Convex,
    Concave,
}

/// Declared monotonicity of an atom in one argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    /// Increasing on nonnegative arguments, decreasing on nonpositive ones.
    SignDependent,
    None,
}

/// Labels used by the QP-reducibility automaton.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    /// Affine atom.
    A,
    /// Piecewise-linear atom.
    P,
    /// Quadratic atom.
    Q,
    /// Anything else (norms).
    N,
}

impl Label {
    pub fn from_char(c: char) -> Option<Label> {
        match c {
            'A' => Some(Label::A),
            'P' => Some(Label::P),
            'Q' => Some(Label::Q),
            'N' => Some(Label::N),
            _ => None,
        }
    }
}

/// The fixed atom inventory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Add,
    Sub,
    Neg,
    /// Constant (first argument) times expression, elementwise with scalar broadcast.
    MulConst,
    /// Zero-based coordinate of a vector.
    Index(usize),
    Sum,
    /// Elementwise maximum of two or more arguments.
    Max,
    Abs,
    Square,
    SumSquares,
    Norm2,
}

impl Atom {
    pub const ALL: [Atom; 11] = [
        Atom::Add,
        Atom::Sub,
        Atom::Neg,
        Atom::MulConst,
        Atom::Index(0),
        Atom::Sum,
        Atom::Max,
        Atom::Abs,
        Atom::Square,
        Atom::SumSquares,
        Atom::Norm2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Atom::Add => "add",
            Atom::Sub => "sub",
            Atom::Neg => "neg",
            Atom::MulConst => "mul_const",
            Atom::Index(_) => "index",
            Atom::Sum => "sum",
            Atom::Max => "max",
            Atom::Abs => "abs",
            Atom::Square => "square",
            Atom::SumSquares => "sum_squares",
            Atom::Norm2 => "norm2",
        }
    }

    pub fn curvature_class(self) -> AtomCurvature {
        match self {
            Atom::Add | Atom::Sub | Atom::Neg | Atom::MulConst | Atom::Index(_) | Atom::Sum => AtomCurvature::Affine,
            Atom::Max | Atom::Abs | Atom::Square | Atom::SumSquares | Atom::Norm2 => AtomCurvature::Convex,
        }
    }

    pub fn is_affine(self) -> bool {
        self.curvature_class() == AtomCurvature::Affine
    }

    /// Label set read by the QP automaton. Affine atoms are also piecewise-linear.
    pub fn labels(self) -> &'static [Label] {
        match self {
            Atom::Add | Atom::Sub | Atom::Neg | Atom::MulConst | Atom::Index(_) | Atom::Sum => &[Label::A, Label::P],
            Atom::Max | Atom::Abs => &[Label::P],
            Atom::Square | Atom::SumSquares => &[Label::Q],
            Atom::Norm2 => &[Label::N],
        }
    }

    pub fn is_piecewise_linear(self) -> bool {
        self.labels().contains(&Label::P)
    }

    pub fn monotonicity(self, arg: usize) -> Monotonicity {
        match self {
            Atom::Add | Atom::Index(_) | Atom::Sum | Atom::Max => Monotonicity::Increasing,
            Atom::Sub if arg == 0 => Monotonicity::Increasing,
            Atom::Sub | Atom::Neg => Monotonicity::Decreasing,
            // the constant factor itself never varies; the other argument
            // follows the sign of the constant
            Atom::MulConst if arg == 0 => Monotonicity::Increasing,
            Atom::MulConst => Monotonicity::SignDependent,
            Atom::Abs | Atom::Square | Atom::SumSquares | Atom::Norm2 => Monotonicity::SignDependent,
        }
    }

    fn arity_ok(self, n: usize) -> bool {
        match self {
            Atom::Add | Atom::Sub | Atom::MulConst => n == 2,
            Atom::Max => n >= 2,
            _ => n == 1,
        }
    }
}

/// Resolved direction of an argument's influence on its parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
    None,
}

impl Direction {
    fn from_sign(sign: Sign) -> Direction {
        if sign.is_nonneg() {
            Direction::Increasing
        } else if sign.is_nonpos() {
            Direction::Decreasing
        } else {
            Direction::None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Constant(Vec<f64>),
    Variable { id: VarId, nonneg: bool },
    Atom { atom: Atom, args: Vec<Expr> },
}

#[derive(Debug)]
struct Node {
    kind: ExprKind,
    dim: usize,
    curvature: Curvature,
    sign: Sign,
}

/// An immutable expression tree node.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.dim == other.0.dim && self.0.kind == other.0.kind)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::text::print_expr(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::print_expr(self))
    }
}

fn broadcast_dim(atom: Atom, dims: &[usize]) -> Result<usize, ExprError> {
    let dim = dims.iter().copied().max().unwrap_or(1);
    if dims.iter().all(|d| *d == dim || *d == 1) {
        Ok(dim)
    } else {
        Err(ExprError::DimensionMismatch { atom: atom.name(), dims: dims.to_vec() })
    }
}

impl Expr {
    pub fn constant(values: Vec<f64>) -> Result<Expr, ExprError> {
        if values.is_empty() {
            return Err(ExprError::EmptyConstant);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ExprError::NonFiniteConstant);
        }
        let sign = Sign::of_values(&values);
        Ok(Expr(Arc::new(Node {
            dim: values.len(),
            kind: ExprKind::Constant(values),
            curvature: Curvature::Constant,
            sign,
        })))
    }

    pub fn scalar(value: f64) -> Expr {
        Expr::constant(vec![value]).expect("finite scalar constant")
    }

    pub fn zeros(dim: usize) -> Expr {
        Expr::constant(vec![0.0; dim.max(1)]).expect("zero constant")
    }

    pub fn variable(var: &Variable) -> Expr {
        Expr(Arc::new(Node {
            kind: ExprKind::Variable { id: var.id, nonneg: var.nonneg },
            dim: var.dim,
            curvature: Curvature::Affine,
            sign: if var.nonneg { Sign::NonNegative } else { Sign::Unknown },
        }))
    }

    /// Applies an atom, checking arity and the shape rule.
    pub fn apply(atom: Atom, args: Vec<Expr>) -> Result<Expr, ExprError> {
        if !atom.arity_ok(args.len()) {
            return Err(ExprError::Arity { atom: atom.name(), found: args.len() });
        }
        let dims: Vec<usize> = args.iter().map(Expr::dim).collect();
        let dim = match atom {
            Atom::Add | Atom::Sub | Atom::Max => broadcast_dim(atom, &dims)?,
            Atom::MulConst => {
                if !args[0].curvature().is_constant() {
                    return Err(ExprError::NonConstantProduct);
                }
                broadcast_dim(atom, &dims)?
            }
            Atom::Neg | Atom::Abs | Atom::Square => dims[0],
            Atom::Index(k) => {
                if k >= dims[0] {
                    return Err(ExprError::IndexOutOfRange { index: k, dim: dims[0] });
                }
                1
            }
            Atom::Sum | Atom::SumSquares | Atom::Norm2 => 1,
        };
        let curvature = compose_curvature(atom, &args);
        let sign = atom_sign(atom, &args);
        Ok(Expr(Arc::new(Node { kind: ExprKind::Atom { atom, args }, dim, curvature, sign })))
    }

    pub fn kind(&self) -> &ExprKind {
        &self.0.kind
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn curvature(&self) -> Curvature {
        self.0.curvature
    }

    pub fn sign(&self) -> Sign {
        self.0.sign
    }

    pub fn is_affine(&self) -> bool {
        self.curvature().is_affine()
    }

    pub fn args(&self) -> &[Expr] {
        match &self.0.kind {
            ExprKind::Atom { args, .. } => args,
            _ => &[],
        }
    }

    pub fn atom(&self) -> Option<Atom> {
        match &self.0.kind {
            ExprKind::Atom { atom, .. } => Some(*atom),
            _ => None,
        }
    }

    pub fn as_variable(&self) -> Option<VarId> {
        match &self.0.kind {
            ExprKind::Variable { id, .. } => Some(*id),
            _ => None,
        }
    }

    pub fn as_constant(&self) -> Option<&[f64]> {
        match &self.0.kind {
            ExprKind::Constant(v) => Some(v),
            _ => None,
        }
    }

    /// True for a literal constant whose entries are all zero.
    pub fn is_zero_constant(&self) -> bool {
        self.as_constant().is_some_and(|v| v.iter().all(|x| *x == 0.0))
    }

    /// Resolved monotonicity of this node in argument `i`.
    pub fn arg_direction(&self, i: usize) -> Direction {
        let (atom, args) = match &self.0.kind {
            ExprKind::Atom { atom, args } => (*atom, args),
            _ => return Direction::None,
        };
        match atom.monotonicity(i) {
            Monotonicity::Increasing => Direction::Increasing,
            Monotonicity::Decreasing => Direction::Decreasing,
            Monotonicity::None => Direction::None,
            Monotonicity::SignDependent => {
                if atom == Atom::MulConst {
                    Direction::from_sign(args[0].sign())
                } else {
                    Direction::from_sign(args[i].sign())
                }
            }
        }
    }

    /// Constant value of a constant-curvature expression.
    pub fn constant_value(&self) -> Option<Vec<f64>> {
        if self.curvature().is_constant() {
            self.evaluate(&Assignment::new()).ok()
        } else {
            None
        }
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<Vec<f64>, ExprError> {
        match &self.0.kind {
            ExprKind::Constant(v) => Ok(v.clone()),
            ExprKind::Variable { id, .. } => {
                let value = assignment.get(id).ok_or(ExprError::MissingVariable { id: *id })?;
                if value.len() != self.dim() {
                    return Err(ExprError::AssignmentDimension { id: *id, expected: self.dim(), found: value.len() });
                }
                Ok(value.clone())
            }
            ExprKind::Atom { atom, args } => {
                let vals = args.iter().map(|a| a.evaluate(assignment)).collect::<Result<Vec<_>, _>>()?;
                Ok(eval_atom(*atom, &vals, self.dim()))
            }
        }
    }

    pub fn variables(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<VarId>) {
        match &self.0.kind {
            ExprKind::Constant(_) => {}
            ExprKind::Variable { id, .. } => {
                out.insert(*id);
            }
            ExprKind::Atom { args, .. } => args.iter().for_each(|a| a.collect_variables(out)),
        }
    }

    /// True if any node in the tree satisfies `pred`.
    pub fn any_node(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        pred(self) || self.args().iter().any(|a| a.any_node(pred))
    }

    /// Rebuilds the tree with variable leaves replaced where `f` returns a
    /// substitute of the same dimension.
    pub fn substitute(&self, f: &dyn Fn(VarId) -> Option<Expr>) -> Result<Expr, ExprError> {
        match &self.0.kind {
            ExprKind::Constant(_) => Ok(self.clone()),
            ExprKind::Variable { id, .. } => match f(*id) {
                Some(e) => {
                    if e.dim() != self.dim() {
                        return Err(ExprError::AssignmentDimension { id: *id, expected: self.dim(), found: e.dim() });
                    }
                    Ok(e)
                }
                None => Ok(self.clone()),
            },
            ExprKind::Atom { atom, args } => {
                let new_args = args.iter().map(|a| a.substitute(f)).collect::<Result<Vec<_>, _>>()?;
                if new_args.iter().zip(args).all(|(n, o)| Arc::ptr_eq(&n.0, &o.0)) {
                    Ok(self.clone())
                } else {
                    Expr::apply(*atom, new_args)
                }
            }
        }
    }

    /// Node reached by following argument positions from this node.
    pub fn at_path(&self, path: &[usize]) -> Option<&Expr> {
        let mut node = self;
        for &i in path {
            node = node.args().get(i)?;
        }
        Some(node)
    }

    pub fn node_count(&self) -> usize {
        1 + self.args().iter().map(Expr::node_count).sum::<usize>()
    }
}

fn compose_curvature(atom: Atom, args: &[Expr]) -> Curvature {
    if args.iter().all(|a| a.curvature().is_constant()) {
        return Curvature::Constant;
    }
    let class = atom.curvature_class();
    if class == AtomCurvature::Affine && args.iter().all(Expr::is_affine) {
        return Curvature::Affine;
    }
    let directions: Vec<Direction> = (0..args.len())
        .map(|i| match atom.monotonicity(i) {
            Monotonicity::Increasing => Direction::Increasing,
            Monotonicity::Decreasing => Direction::Decreasing,
            Monotonicity::None => Direction::None,
            Monotonicity::SignDependent if atom == Atom::MulConst => Direction::from_sign(args[0].sign()),
            Monotonicity::SignDependent => Direction::from_sign(args[i].sign()),
        })
        .collect();
    let convex = class != AtomCurvature::Concave
        && args.iter().zip(&directions).all(|(a, d)| {
            a.is_affine()
                || match d {
                    Direction::Increasing => a.curvature().is_convex(),
                    Direction::Decreasing => a.curvature().is_concave(),
                    Direction::None => false,
                }
        });
    if convex {
        return Curvature::Convex;
    }
    let concave = class != AtomCurvature::Convex
        && args.iter().zip(&directions).all(|(a, d)| {
            a.is_affine()
                || match d {
                    Direction::Increasing => a.curvature().is_concave(),
                    Direction::Decreasing => a.curvature().is_convex(),
                    Direction::None => false,
                }
        });
    if concave {
        Curvature::Concave
    } else {
        Curvature::Unknown
    }
}

fn atom_sign(atom: Atom, args: &[Expr]) -> Sign {
    match atom {
        Atom::Add => args[0].sign().add(args[1].sign()),
        Atom::Sub => args[0].sign().add(args[1].sign().negate()),
        Atom::Neg => args[0].sign().negate(),
        Atom::MulConst => args[0].sign().mul(args[1].sign()),
        Atom::Index(k) => match args[0].as_constant() {
            Some(v) => Sign::of_values(&v[k..=k]),
            None => args[0].sign(),
        },
        Atom::Sum => args[0].sign(),
        Atom::Max => {
            if args.iter().all(|a| a.sign() == Sign::Zero) {
                Sign::Zero
            } else if args.iter().any(|a| a.sign().is_nonneg()) {
                Sign::NonNegative
            } else if args.iter().all(|a| a.sign().is_nonpos()) {
                Sign::NonPositive
            } else {
                Sign::Unknown
            }
        }
        Atom::Abs | Atom::Square | Atom::SumSquares | Atom::Norm2 => {
            if args[0].sign() == Sign::Zero {
                Sign::Zero
            } else {
                Sign::NonNegative
            }
        }
    }
}

fn at(v: &[f64], i: usize) -> f64 {
    if v.len() == 1 {
        v[0]
    } else {
        v[i]
    }
}

fn eval_atom(atom: Atom, vals: &[Vec<f64>], dim: usize) -> Vec<f64> {
    match atom {
        Atom::Add => (0..dim).map(|i| at(&vals[0], i) + at(&vals[1], i)).collect(),
        Atom::Sub => (0..dim).map(|i| at(&vals[0], i) - at(&vals[1], i)).collect(),
        Atom::MulConst => (0..dim).map(|i| at(&vals[0], i) * at(&vals[1], i)).collect(),
        Atom::Neg => vals[0].iter().map(|v| -v).collect(),
        Atom::Index(k) => vec![vals[0][k]],
        Atom::Sum => vec![vals[0].iter().sum()],
        Atom::Max => (0..dim).map(|i| vals.iter().map(|v| at(v, i)).fold(f64::NEG_INFINITY, f64::max)).collect(),
        Atom::Abs => vals[0].iter().map(|v| v.abs()).collect(),
        Atom::Square => vals[0].iter().map(|v| v * v).collect(),
        Atom::SumSquares => vec![vals[0].iter().map(|v| v * v).sum()],
        Atom::Norm2 => vec![vals[0].iter().map(|v| v * v).sum::<f64>().sqrt()],
    }
}

/// Builder shorthands. All of them validate shapes.
pub mod build {
    use super::{Atom, Expr};
    use crate::error::ExprError;

    pub fn add(a: Expr, b: Expr) -> Result<Expr, ExprError> {
        Expr::apply(Atom::Add, vec![a, b])
    }

    pub fn sub(a: Expr, b: Expr) -> Result<Expr, ExprError> {
        Expr::apply(Atom::Sub, vec![a, b])
    }

    pub fn neg(a: Expr) -> Result<Expr, ExprError> {
        Expr::apply(Atom::Neg, vec![a])
    }

    /// Product where either operand is constant; the constant is stored first.
    pub fn mul(a: Expr, b: Expr) -> Result<Expr, ExprError> {
        if a.curvature().is_constant() {
            Expr::apply(Atom::MulConst, vec![a, b])
        } else if b.curvature().is_constant() {
            Expr::apply(Atom::MulConst, vec![b, a])
        } else {
            Err(ExprError::NonConstantProduct)
        }
    }

    pub fn scale(c: f64, a: Expr) -> Result<Expr, ExprError> {
        Expr::apply(Atom::MulConst, vec![Expr::scalar(c), a])
    }

    pub fn index(a: Expr, k: usize) -> Result<Expr, ExprError> {
        Expr::apply(Atom::Index(k), vec![a])
    }

    pub fn sum(a: Expr) -> Result<Expr, ExprError> {
        Expr::apply(Atom::Sum, vec![a])
    }

    pub fn max(args: Vec<Expr>) -> Result<Expr, ExprError> {
        Expr::apply(Atom::Max, args)
    }

    pub fn abs(a: Expr) -> Result<Expr, ExprError> {
        Expr::apply(Atom::Abs, vec![a])
    }

    pub fn square(a: Expr) -> Result<Expr, ExprError> {
        Expr::apply(Atom::Square, vec![a])
    }

    pub fn sum_squares(a: Expr) -> Result<Expr, ExprError> {
        Expr::apply(Atom::SumSquares, vec![a])
    }

    pub fn norm2(a: Expr) -> Result<Expr, ExprError> {
        Expr::apply(Atom::Norm2, vec![a])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "==",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    id: usize,
    relation: Relation,
    lhs: Expr,
    rhs: Expr,
}

impl Constraint {
    pub fn new(relation: Relation, lhs: Expr, rhs: Expr) -> Result<Constraint, ExprError> {
        if lhs.dim() != rhs.dim() && lhs.dim() != 1 && rhs.dim() != 1 {
            return Err(ExprError::DimensionMismatch { atom: relation.symbol(), dims: vec![lhs.dim(), rhs.dim()] });
        }
        Ok(Constraint { id: 0, relation, lhs, rhs })
    }

    pub fn eq(lhs: Expr, rhs: Expr) -> Result<Constraint, ExprError> {
        Constraint::new(Relation::Eq, lhs, rhs)
    }

    pub fn le(lhs: Expr, rhs: Expr) -> Result<Constraint, ExprError> {
        Constraint::new(Relation::Le, lhs, rhs)
    }

    pub fn ge(lhs: Expr, rhs: Expr) -> Result<Constraint, ExprError> {
        Constraint::new(Relation::Ge, lhs, rhs)
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn lhs(&self) -> &Expr {
        &self.lhs
    }

    pub fn rhs(&self) -> &Expr {
        &self.rhs
    }

    pub fn dim(&self) -> usize {
        self.lhs.dim().max(self.rhs.dim())
    }

    /// `lhs - rhs`.
    pub fn difference(&self) -> Result<Expr, ExprError> {
        build::sub(self.lhs.clone(), self.rhs.clone())
    }

    pub fn is_affine(&self) -> bool {
        self.lhs.is_affine() && self.rhs.is_affine()
    }

    pub fn is_constant(&self) -> bool {
        self.lhs.curvature().is_constant() && self.rhs.curvature().is_constant()
    }

    /// Largest violation at `assignment` (0 when satisfied).
    pub fn violation(&self, assignment: &Assignment) -> Result<f64, ExprError> {
        let l = self.lhs.evaluate(assignment)?;
        let r = self.rhs.evaluate(assignment)?;
        let dim = self.dim();
        Ok((0..dim)
            .map(|i| {
                let d = at(&l, i) - at(&r, i);
                match self.relation {
                    Relation::Eq => d.abs(),
                    Relation::Le => d.max(0.0),
                    Relation::Ge => (-d).max(0.0),
                }
            })
            .fold(0.0, f64::max))
    }

    pub fn substitute(&self, f: &dyn Fn(VarId) -> Option<Expr>) -> Result<Constraint, ExprError> {
        Constraint::new(self.relation, self.lhs.substitute(f)?, self.rhs.substitute(f)?)
    }
}

/// An optimization problem: objective, ordered constraints and declared variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    sense: Sense,
    objective: Expr,
    constraints: Vec<Constraint>,
    variables: Vec<Variable>,
}

impl Problem {
    pub fn new(
        sense: Sense,
        objective: Expr,
        constraints: Vec<Constraint>,
        variables: Vec<Variable>,
    ) -> Result<Problem, ExprError> {
        if objective.dim() != 1 {
            return Err(ExprError::NonScalarObjective { dim: objective.dim() });
        }
        let mut ids = BTreeMap::new();
        let mut names = BTreeSet::new();
        for v in &variables {
            if v.dim == 0 {
                return Err(ExprError::ZeroDimension { name: v.name.clone() });
            }
            if ids.insert(v.id, v).is_some() || !names.insert(v.name.as_str()) {
                return Err(ExprError::DuplicateVariable { name: v.name.clone() });
            }
        }
        let check = |e: &Expr| -> Result<(), ExprError> { check_refs(e, &ids) };
        check(&objective)?;
        let mut constraints = constraints;
        for (i, c) in constraints.iter_mut().enumerate() {
            check(&c.lhs)?;
            check(&c.rhs)?;
            c.id = i;
        }
        Ok(Problem { sense, objective, constraints, variables })
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &Expr {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> Option<&Variable> {
        self.variables.iter().find(|v| v.id == id)
    }

    pub fn variable_by_name(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    /// Same problem with a different objective and constraint list; the
    /// variable list is kept.
    pub fn with_parts(
        &self,
        sense: Sense,
        objective: Expr,
        constraints: Vec<Constraint>,
    ) -> Result<Problem, ExprError> {
        Problem::new(sense, objective, constraints, self.variables.clone())
    }

    pub fn allocator(&self) -> VarAllocator {
        VarAllocator::new(&self.variables)
    }

    /// Objective value at `assignment`.
    pub fn objective_value(&self, assignment: &Assignment) -> Result<f64, ExprError> {
        Ok(self.objective.evaluate(assignment)?[0])
    }

    /// Largest constraint violation at `assignment`, including the domain
    /// of nonnegative variables.
    pub fn max_violation(&self, assignment: &Assignment) -> Result<f64, ExprError> {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            worst = worst.max(c.violation(assignment)?);
        }
        for v in self.variables.iter().filter(|v| v.nonneg) {
            let x = assignment.get(&v.id).ok_or(ExprError::MissingVariable { id: v.id })?;
            for xi in x {
                worst = worst.max(-xi);
            }
        }
        Ok(worst)
    }

    /// A constant constraint that cannot hold, e.g. `0 <= -1`.
    pub fn is_trivially_infeasible(&self) -> bool {
        self.constraints.iter().any(|c| c.is_constant() && c.violation(&Assignment::new()).is_ok_and(|v| v > 0.0))
    }
}

fn check_refs(e: &Expr, ids: &BTreeMap<VarId, &Variable>) -> Result<(), ExprError> {
    match e.kind() {
        ExprKind::Variable { id, nonneg } => match ids.get(id) {
            Some(v) if v.dim == e.dim() && v.nonneg == *nonneg => Ok(()),
            Some(v) => Err(ExprError::AssignmentDimension { id: *id, expected: v.dim, found: e.dim() }),
            None => Err(ExprError::UndeclaredVariable { id: *id }),
        },
        ExprKind::Constant(_) => Ok(()),
        ExprKind::Atom { args, .. } => args.iter().try_for_each(|a| check_refs(a, ids)),
    }
}

/// Hands out fresh variable ids and names that do not collide with a
/// problem's existing declarations.
#[derive(Clone, Debug)]
pub struct VarAllocator {
    next_id: u32,
    names: BTreeSet<String>,
    counter: usize,
}

impl VarAllocator {
    pub fn new(existing: &[Variable]) -> Self {
        VarAllocator {
            next_id: existing.iter().map(|v| v.id.0 + 1).max().unwrap_or(0),
            names: existing.iter().map(|v| v.name.clone()).collect(),
            counter: 0,
        }
    }

    pub fn fresh(&mut self, prefix: &str, dim: usize) -> Variable {
        let id = VarId(self.next_id);
        self.next_id += 1;
        let name = loop {
            let candidate = format!("_{}{}", prefix, self.counter);
            self.counter += 1;
            if !self.names.contains(&candidate) {
                break candidate;
            }
        };
        self.names.insert(name.clone());
        Variable::new(id, name, dim)
    }

    /// Registers a variable created elsewhere so later names avoid it.
    pub fn reserve(&mut self, var: &Variable) {
        self.next_id = self.next_id.max(var.id.0 + 1);
        self.names.insert(var.name.clone());
    }
}
