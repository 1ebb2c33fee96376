//! The automaton deciding whether an objective reduces to a QP.
//!
//! Every root-to-leaf path of the objective spells a word over the labels
//! of the atoms along it. Words accepted:
//!
//! ```text
//!        A    Q    P
//!   q0   q1   q2   q3
//!   q1   q1   q2   -
//!   q2   -    -    q3
//!   q3   -    -    q3
//! ```
//!
//! Start state q0; accepting states q1, q2, q3. The language is
//! `A+ | A*QP* | P+`. An atom carrying several labels may take any of them,
//! so the simulation follows state sets.

use crate::dcp::is_dcp;
use crate::expr::{Expr, ExprKind, Label, Problem, Relation};

/// A set of automaton states as a bitmask over q0..q3.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateSet(u8);

pub const ACCEPTING: StateSet = StateSet(0b1110);

impl StateSet {
    pub const START: StateSet = StateSet(0b0001);
    pub const EMPTY: StateSet = StateSet(0);

    pub fn contains(self, q: usize) -> bool {
        self.0 & (1 << q) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_accepting(self) -> bool {
        self.0 & ACCEPTING.0 != 0
    }
}

fn delta(q: usize, l: Label) -> Option<usize> {
    match (q, l) {
        (0, Label::A) => Some(1),
        (0, Label::Q) => Some(2),
        (0, Label::P) => Some(3),
        (1, Label::A) => Some(1),
        (1, Label::Q) => Some(2),
        (2, Label::P) => Some(3),
        (3, Label::P) => Some(3),
        _ => None,
    }
}

pub struct PathNfa;

impl PathNfa {
    /// States reachable from `set` reading one symbol from `labels`.
    pub fn step(set: StateSet, labels: &[Label]) -> StateSet {
        let mut out = 0u8;
        for q in 0..4 {
            if set.contains(q) {
                for l in labels {
                    if let Some(r) = delta(q, *l) {
                        out |= 1 << r;
                    }
                }
            }
        }
        StateSet(out)
    }

    /// Runs a word whose letters are label sets.
    pub fn run(word: &[&[Label]]) -> StateSet {
        word.iter().fold(StateSet::START, |s, l| Self::step(s, l))
    }

    pub fn accepts_word(word: &[Label]) -> bool {
        let sets: Vec<&[Label]> = word.iter().map(std::slice::from_ref).collect();
        Self::run(&sets).is_accepting()
    }

    /// True iff every path from the root to a variable leaf is accepted.
    /// Constant subtrees carry no path; a bare variable or constant is
    /// accepted.
    pub fn accepts_expr(e: &Expr) -> bool {
        fn walk(e: &Expr, set: StateSet, depth: usize) -> bool {
            if e.curvature().is_constant() {
                return true;
            }
            match e.kind() {
                ExprKind::Variable { .. } => depth == 0 || set.is_accepting(),
                ExprKind::Constant(_) => true,
                ExprKind::Atom { atom, args } => {
                    let next = PathNfa::step(set, atom.labels());
                    !next.is_empty() && args.iter().all(|a| walk(a, next, depth + 1))
                }
            }
        }
        walk(e, StateSet::START, 0)
    }
}

/// DCP, affine equalities, piecewise-linear inequality sides and an
/// objective accepted by [`PathNfa`].
pub fn qp_applicable(problem: &Problem) -> bool {
    if !is_dcp(problem) {
        return false;
    }
    let pwl_only = |e: &Expr| !e.any_node(&|n| n.atom().is_some_and(|a| !a.is_piecewise_linear()));
    for c in problem.constraints() {
        let ok = match c.relation() {
            Relation::Eq => c.is_affine(),
            Relation::Le | Relation::Ge => pwl_only(c.lhs()) && pwl_only(c.rhs()),
        };
        if !ok {
            return false;
        }
    }
    PathNfa::accepts_expr(problem.objective())
}
