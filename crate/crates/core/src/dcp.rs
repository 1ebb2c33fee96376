//! Disciplined convex programming verification.

use std::fmt;

use crate::expr::{Curvature, Direction, Expr, Problem, Relation, Sense};

/// Where in a problem a rule was broken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    Objective,
    Constraint(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Objective => f.write_str("objective"),
            Location::Constraint(i) => write!(f, "constraint {i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub location: Location,
    /// Argument positions from the root of the offending side down to the
    /// first node whose curvature could not be established.
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.location)?;
        for p in &self.path {
            write!(f, "/{p}")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct DcpReport {
    pub violations: Vec<Violation>,
}

impl DcpReport {
    pub fn is_dcp(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Returns the DCP verdict and every violation found.
pub fn check_dcp(problem: &Problem) -> DcpReport {
    let mut violations = Vec::new();
    let obj = problem.objective();
    match problem.sense() {
        Sense::Minimize if !obj.curvature().is_convex() => {
            violations.push(violation(Location::Objective, Vec::new(), obj, "minimized objective is not convex"))
        }
        Sense::Maximize if !obj.curvature().is_concave() => {
            violations.push(violation(Location::Objective, Vec::new(), obj, "maximized objective is not concave"))
        }
        _ => {}
    }
    for c in problem.constraints() {
        let loc = Location::Constraint(c.id());
        let (l, r) = (c.lhs(), c.rhs());
        match c.relation() {
            Relation::Eq => {
                if !l.is_affine() {
                    violations.push(violation(loc.clone(), vec![0], l, "equality side is not affine"));
                }
                if !r.is_affine() {
                    violations.push(violation(loc, vec![1], r, "equality side is not affine"));
                }
            }
            Relation::Le | Relation::Ge => {
                let (convex_side, concave_side, ci, vi) =
                    if c.relation() == Relation::Le { (l, r, 0, 1) } else { (r, l, 1, 0) };
                if !convex_side.curvature().is_convex() {
                    violations.push(violation(
                        loc.clone(),
                        vec![ci],
                        convex_side,
                        "smaller side of inequality is not convex",
                    ));
                }
                if !concave_side.curvature().is_concave() {
                    violations.push(violation(loc, vec![vi], concave_side, "larger side of inequality is not concave"));
                }
            }
        }
    }
    DcpReport { violations }
}

pub fn is_dcp(problem: &Problem) -> bool {
    check_dcp(problem).is_dcp()
}

fn violation(location: Location, mut prefix: Vec<usize>, root: &Expr, message: &str) -> Violation {
    prefix.extend(first_unknown(root));
    Violation { location, path: prefix, message: message.to_string() }
}

/// Descends to the deepest `Unknown` node whose arguments all have known
/// curvature: the place where composition failed.
fn first_unknown(e: &Expr) -> Vec<usize> {
    if e.curvature() != Curvature::Unknown {
        return Vec::new();
    }
    for (i, a) in e.args().iter().enumerate() {
        if a.curvature() == Curvature::Unknown {
            let mut p = vec![i];
            p.extend(first_unknown(a));
            return p;
        }
    }
    Vec::new()
}

/// Direction in which an expression is pushed by the surrounding problem.
///
/// `Up` means the problem prefers the expression small (it is minimized or
/// bounded above); convex atoms may be replaced by epigraph variables there.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Position {
    Up,
    Down,
    /// Appears under a non-monotone context or in an equality.
    Fixed,
}

impl Position {
    pub fn through(self, dir: Direction) -> Position {
        match (self, dir) {
            (Position::Fixed, _) | (_, Direction::None) => Position::Fixed,
            (p, Direction::Increasing) => p,
            (Position::Up, Direction::Decreasing) => Position::Down,
            (Position::Down, Direction::Decreasing) => Position::Up,
        }
    }

    pub fn objective(sense: Sense) -> Position {
        match sense {
            Sense::Minimize => Position::Up,
            Sense::Maximize => Position::Down,
        }
    }

    /// Positions of the two sides of a constraint.
    pub fn constraint_sides(relation: Relation) -> (Position, Position) {
        match relation {
            Relation::Le => (Position::Up, Position::Down),
            Relation::Ge => (Position::Down, Position::Up),
            Relation::Eq => (Position::Fixed, Position::Fixed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_problem;

    #[test]
    fn toy_is_dcp() {
        let p = parse_problem(
            "var alice; var bob; minimize max(alice + bob + 2, -alice - bob);
             subject to alice <= 0; bob == -0.5;",
        )
        .unwrap();
        assert!(check_dcp(&p).is_dcp());
    }

    #[test]
    fn concave_objective_is_flagged() {
        let p = parse_problem("var x; minimize -square(x);").unwrap();
        let r = check_dcp(&p);
        assert!(!r.is_dcp());
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].location, Location::Objective);
        assert_eq!(r.violations[0].to_string().split(':').next(), Some("objective"));
    }

    #[test]
    fn nonaffine_equality_is_flagged() {
        let p = parse_problem("var x; minimize x; subject to square(x) == 1;").unwrap();
        let r = check_dcp(&p);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].location, Location::Constraint(0));
    }

    #[test]
    fn unknown_path_points_at_failed_composition() {
        let p = parse_problem("var x; minimize abs(x) + square(1 - abs(x));").unwrap();
        let r = check_dcp(&p);
        assert_eq!(r.violations[0].path, vec![1]);
    }

    #[test]
    fn inequality_directions() {
        assert!(is_dcp(&parse_problem("var x; minimize x; subject to 1 >= abs(x);").unwrap()));
        assert!(!is_dcp(&parse_problem("var x; minimize x; subject to 1 <= abs(x);").unwrap()));
        assert!(is_dcp(&parse_problem("var x; maximize -square(x);").unwrap()));
    }
}
