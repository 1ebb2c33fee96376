//! Coefficient extraction for quadratic expressions.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::affine::{affine_coefficients, AffineForm};
use crate::error::ExprError;
use crate::expr::{Atom, Expr, VarId};

/// `½xᵀPx + qᵀx + r` over the stacked variable vector.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadForm {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    pub r: f64,
}

impl QuadForm {
    pub fn evaluate(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.p * x)) + self.q.dot(x) + self.r
    }
}

/// One output row, with `P = Σ w_k a_k a_kᵀ` kept in factored form.
#[derive(Clone, Debug)]
struct Row {
    terms: Vec<(f64, DVector<f64>)>,
    q: DVector<f64>,
    r: f64,
}

impl Row {
    fn scale(mut self, c: f64) -> Row {
        for t in &mut self.terms {
            t.0 *= c;
        }
        self.q *= c;
        self.r *= c;
        self
    }

    fn plus(mut self, other: Row) -> Row {
        self.terms.extend(other.terms);
        self.q += other.q;
        self.r += other.r;
        self
    }
}

struct Ctx<'a> {
    offsets: &'a BTreeMap<VarId, usize>,
    n: usize,
}

impl Ctx<'_> {
    fn linear_rows(&self, f: &AffineForm) -> Vec<Row> {
        let mut m = DMatrix::zeros(f.dim, self.n);
        f.write_rows(&mut m, 0, self.offsets, 1.0);
        (0..f.dim).map(|i| Row { terms: Vec::new(), q: m.row(i).transpose(), r: f.constant[i] }).collect()
    }

    fn squares(&self, arg: &Expr) -> Result<Vec<Row>, ExprError> {
        let f = affine_coefficients(arg).map_err(|e| match e {
            ExprError::NotAffine { atom } => ExprError::NotQuadratic { atom },
            other => other,
        })?;
        // (aᵀx + b)² = ½xᵀ(2aaᵀ)x + 2b aᵀx + b²
        Ok(self
            .linear_rows(&f)
            .into_iter()
            .map(|row| Row { terms: vec![(2.0, row.q.clone())], q: row.q * (2.0 * row.r), r: row.r * row.r })
            .collect())
    }

    fn rows(&self, e: &Expr) -> Result<Vec<Row>, ExprError> {
        if e.is_affine() {
            return Ok(self.linear_rows(&affine_coefficients(e)?));
        }
        let atom = e.atom().expect("nonaffine expressions are atoms");
        let args = e.args();
        let dim = e.dim();
        let broadcast = |rows: Vec<Row>| -> Vec<Row> {
            if rows.len() == dim {
                rows
            } else {
                vec![rows[0].clone(); dim]
            }
        };
        Ok(match atom {
            Atom::Add | Atom::Sub => {
                let sign = if atom == Atom::Add { 1.0 } else { -1.0 };
                let a = broadcast(self.rows(&args[0])?);
                let b = broadcast(self.rows(&args[1])?);
                a.into_iter().zip(b).map(|(x, y)| x.plus(y.scale(sign))).collect()
            }
            Atom::Neg => self.rows(&args[0])?.into_iter().map(|r| r.scale(-1.0)).collect(),
            Atom::MulConst => {
                let c = args[0].constant_value().expect("constant factor");
                let rows = broadcast(self.rows(&args[1])?);
                rows.into_iter().enumerate().map(|(i, r)| r.scale(if c.len() == 1 { c[0] } else { c[i] })).collect()
            }
            Atom::Index(k) => vec![self.rows(&args[0])?.swap_remove(k)],
            Atom::Sum => {
                let rows = self.rows(&args[0])?;
                let zero = Row { terms: Vec::new(), q: DVector::zeros(self.n), r: 0.0 };
                vec![rows.into_iter().fold(zero, Row::plus)]
            }
            Atom::Square => self.squares(&args[0])?,
            Atom::SumSquares => {
                let zero = Row { terms: Vec::new(), q: DVector::zeros(self.n), r: 0.0 };
                vec![self.squares(&args[0])?.into_iter().fold(zero, Row::plus)]
            }
            other => return Err(ExprError::NotQuadratic { atom: other.name() }),
        })
    }
}

/// `P`, `q`, `r` of a scalar expression built from affine pieces, `square`
/// and `sum_squares` with nonnegative or affine combinations.
/// `offsets` places each variable in an `n`-vector.
pub fn quadratic_form(expr: &Expr, offsets: &BTreeMap<VarId, usize>, n: usize) -> Result<QuadForm, ExprError> {
    let ctx = Ctx { offsets, n };
    let mut rows = ctx.rows(expr)?;
    if rows.len() != 1 {
        return Err(ExprError::NonScalarObjective { dim: rows.len() });
    }
    let row = rows.pop().unwrap();
    let mut p = DMatrix::zeros(n, n);
    for (w, a) in &row.terms {
        p.ger(*w, a, a, 1.0);
    }
    Ok(QuadForm { p, q: row.q, r: row.r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_problem;

    fn form(src: &str) -> (QuadForm, usize) {
        let p = parse_problem(src).unwrap();
        let mut offsets = BTreeMap::new();
        let mut n = 0;
        for v in p.variables() {
            offsets.insert(v.id, n);
            n += v.dim;
        }
        (quadratic_form(p.objective(), &offsets, n).unwrap(), n)
    }

    #[test]
    fn square_of_shift() {
        let (f, _) = form("var x; minimize square(x - 3);");
        assert_eq!(f.p[(0, 0)], 2.0);
        assert_eq!(f.q[0], -6.0);
        assert_eq!(f.r, 9.0);
    }

    #[test]
    fn matches_evaluation() {
        let src = "var x[2]; var y; minimize 3 * sum_squares(x - [1, 2]) + square(x[0] + y) - 4 * y + 0.5;";
        let p = parse_problem(src).unwrap();
        let (f, _) = form(src);
        let a =
            crate::expr::Assignment::from([(p.variables()[0].id, vec![0.7, -1.1]), (p.variables()[1].id, vec![2.5])]);
        let x = DVector::from_vec(vec![0.7, -1.1, 2.5]);
        let want = p.objective_value(&a).unwrap();
        assert!((f.evaluate(&x) - want).abs() < 1e-12, "{} vs {want}", f.evaluate(&x));
        assert_eq!(f.p, f.p.transpose());
    }

    #[test]
    fn residual_atoms_are_named() {
        let p = parse_problem("var x[2]; minimize norm2(x);").unwrap();
        let offsets = BTreeMap::from([(p.variables()[0].id, 0)]);
        assert_eq!(quadratic_form(p.objective(), &offsets, 2), Err(ExprError::NotQuadratic { atom: "norm2" }));
        let p = parse_problem("var x; minimize square(abs(x));").unwrap();
        let offsets = BTreeMap::from([(p.variables()[0].id, 0)]);
        assert_eq!(quadratic_form(p.objective(), &offsets, 1), Err(ExprError::NotQuadratic { atom: "abs" }));
    }
}
