//! Quadratic coefficient extraction checked against finite differences.

mod common;

use std::collections::BTreeMap;

use common::{Case, Family, Spec};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use cvxrw::expr::{Assignment, VarId, Variable};
use cvxrw::qp::{quadratic_form, stuff_qp};
use cvxrw::reductions::eliminate_pwl_atoms;
use cvxrw::{build, Expr};

const N: usize = 3;

#[derive(Clone, Debug)]
enum Piece {
    Linear([f64; 3], f64),
    Square(f64, [f64; 3], f64),
    SumSquares(f64, [f64; 2], [f64; 2]),
}

fn coef() -> impl Strategy<Value = f64> {
    (-20i32..=20).prop_map(|k| k as f64 / 10.0)
}

fn piece() -> impl Strategy<Value = Piece> {
    let row = || [coef(), coef(), coef()];
    let weight = (0i32..=20).prop_map(|k| k as f64 / 10.0);
    prop_oneof![
        (row(), coef()).prop_map(|(a, b)| Piece::Linear(a, b)),
        (weight.clone(), row(), coef()).prop_map(|(w, a, b)| Piece::Square(w, a, b)),
        (weight, [coef(), coef()], [coef(), coef()]).prop_map(|(w, d, c)| Piece::SumSquares(w, d, c)),
    ]
}

/// `x` is `x[2]`, `y` a scalar; stacked as `(x0, x1, y)`.
fn vars() -> (Variable, Variable) {
    (Variable::new(VarId(0), "x", 2), Variable::new(VarId(1), "y", 1))
}

fn affine(a: &[f64; 3], b: f64) -> Expr {
    let (x, y) = vars();
    let lin = build::mul(Expr::constant(vec![a[0], a[1]]).unwrap(), x.expr()).unwrap();
    let s = build::add(build::sum(lin).unwrap(), build::scale(a[2], y.expr()).unwrap()).unwrap();
    build::add(s, Expr::scalar(b)).unwrap()
}

fn piece_expr(p: &Piece) -> Expr {
    let (x, _) = vars();
    match p {
        Piece::Linear(a, b) => affine(a, *b),
        Piece::Square(w, a, b) => build::scale(*w, build::square(affine(a, *b)).unwrap()).unwrap(),
        Piece::SumSquares(w, d, c) => {
            let dx = build::mul(Expr::constant(d.to_vec()).unwrap(), x.expr()).unwrap();
            let arg = build::sub(dx, Expr::constant(c.to_vec()).unwrap()).unwrap();
            build::scale(*w, build::sum_squares(arg).unwrap()).unwrap()
        }
    }
}

fn total(pieces: &[Piece]) -> Expr {
    pieces.iter().map(piece_expr).reduce(|a, b| build::add(a, b).unwrap()).unwrap()
}

fn offsets() -> BTreeMap<VarId, usize> {
    BTreeMap::from([(VarId(0), 0), (VarId(1), 2)])
}

fn at(v: &[f64]) -> Assignment {
    Assignment::from([(VarId(0), vec![v[0], v[1]]), (VarId(1), vec![v[2]])])
}

fn f(e: &Expr, v: &[f64]) -> f64 {
    e.evaluate(&at(v)).unwrap()[0]
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0]
}

fn assert_psd(p: &DMatrix<f64>) -> Result<(), TestCaseError> {
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            prop_assert!((p[(i, j)] - p[(j, i)]).abs() <= 1e-12, "asymmetric at ({i}, {j})");
        }
    }
    let smallest = p.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    prop_assert!(smallest >= -1e-9 * (1.0 + p.norm()), "eigenvalue {smallest}");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hessian_matches_finite_differences(pieces in prop::collection::vec(piece(), 1..5), points in prop::collection::vec(point(), 20)) {
        let e = total(&pieces);
        let form = quadratic_form(&e, &offsets(), N).unwrap();
        assert_psd(&form.p)?;
        let h = 1e-2;
        for x in &points {
            let direct = f(&e, x);
            let via = form.evaluate(&DVector::from_column_slice(x));
            prop_assert!((direct - via).abs() <= 1e-9 * (1.0 + direct.abs()), "{direct} vs {via}");
            for i in 0..N {
                for j in 0..N {
                    let shifted = |si: f64, sj: f64| {
                        let mut y = *x;
                        y[i] += si * h;
                        y[j] += sj * h;
                        f(&e, &y)
                    };
                    let d2 = (shifted(1.0, 1.0) - shifted(1.0, -1.0) - shifted(-1.0, 1.0) + shifted(-1.0, -1.0)) / (4.0 * h * h);
                    prop_assert!((d2 - form.p[(i, j)]).abs() <= 1e-6 * (1.0 + d2.abs()), "P[{i},{j}] = {} but {d2}", form.p[(i, j)]);
                }
                let mut up = *x;
                let mut down = *x;
                up[i] += h;
                down[i] -= h;
                let grad = (f(&e, &up) - f(&e, &down)) / (2.0 * h);
                let model = (form.p.row(i) * DVector::from_column_slice(x))[0] + form.q[i];
                prop_assert!((grad - model).abs() <= 1e-6 * (1.0 + grad.abs()), "gradient {i}: {grad} vs {model}");
            }
        }
    }

    #[test]
    fn stuffed_hessians_are_psd(seed in any::<u64>(), maximize in any::<bool>()) {
        let mut spec = Spec::new(Family::Quadratic);
        spec.maximize = maximize;
        let c = Case::generate(&spec, seed);
        let p = c.problem();
        let p = if maximize { cvxrw::reductions::flip_objective(&p).unwrap().0 } else { p };
        let (q, _) = stuff_qp(&eliminate_pwl_atoms(&p).unwrap().0).unwrap();
        assert_psd(&q.p)?;
        prop_assert_eq!(q.p.nrows(), q.num_vars());
    }
}
