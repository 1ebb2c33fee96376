//! Curvature, sign, affine extraction and shape rules on random trees.

use proptest::prelude::*;

use cvxrw::affine::affine_coefficients;
use cvxrw::expr::{Assignment, Atom, Curvature, ExprKind, Sign, VarId, Variable};
use cvxrw::{build, Expr, ExprError};

#[derive(Clone, Debug)]
enum Tree {
    X,
    Y,
    Scalar(f64),
    Pair(f64, f64),
    Add(Box<Tree>, Box<Tree>),
    Sub(Box<Tree>, Box<Tree>),
    Neg(Box<Tree>),
    Scale(f64, Box<Tree>),
    MulPair(f64, f64, Box<Tree>),
    Index(usize, Box<Tree>),
    Sum(Box<Tree>),
    Max(Box<Tree>, Box<Tree>),
    Abs(Box<Tree>),
    Square(Box<Tree>),
    SumSquares(Box<Tree>),
    Norm2(Box<Tree>),
}

fn vars() -> (Variable, Variable) {
    (Variable::new(VarId(0), "x", 2), Variable::new(VarId(1), "y", 1))
}

fn build_tree(t: &Tree) -> Result<Expr, ExprError> {
    let (x, y) = vars();
    let b = |t: &Tree| build_tree(t);
    match t {
        Tree::X => Ok(x.expr()),
        Tree::Y => Ok(y.expr()),
        Tree::Scalar(c) => Ok(Expr::scalar(*c)),
        Tree::Pair(a, c) => Expr::constant(vec![*a, *c]),
        Tree::Add(l, r) => build::add(b(l)?, b(r)?),
        Tree::Sub(l, r) => build::sub(b(l)?, b(r)?),
        Tree::Neg(e) => build::neg(b(e)?),
        Tree::Scale(c, e) => build::scale(*c, b(e)?),
        Tree::MulPair(a, c, e) => build::mul(Expr::constant(vec![*a, *c])?, b(e)?),
        Tree::Index(k, e) => build::index(b(e)?, *k),
        Tree::Sum(e) => build::sum(b(e)?),
        Tree::Max(l, r) => build::max(vec![b(l)?, b(r)?]),
        Tree::Abs(e) => build::abs(b(e)?),
        Tree::Square(e) => build::square(b(e)?),
        Tree::SumSquares(e) => build::sum_squares(b(e)?),
        Tree::Norm2(e) => build::norm2(b(e)?),
    }
}

fn coef() -> impl Strategy<Value = f64> {
    (-20i32..=20).prop_map(|k| k as f64 / 10.0)
}

fn tree(affine_only: bool) -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        Just(Tree::X),
        Just(Tree::Y),
        coef().prop_map(Tree::Scalar),
        (coef(), coef()).prop_map(|(a, b)| Tree::Pair(a, b)),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        let bx = |s: BoxedStrategy<Tree>| s.prop_map(Box::new);
        let i = inner.clone().boxed();
        let affine = prop_oneof![
            (bx(i.clone()), bx(i.clone())).prop_map(|(l, r)| Tree::Add(l, r)),
            (bx(i.clone()), bx(i.clone())).prop_map(|(l, r)| Tree::Sub(l, r)),
            bx(i.clone()).prop_map(Tree::Neg),
            (coef(), bx(i.clone())).prop_map(|(c, e)| Tree::Scale(c, e)),
            (coef(), coef(), bx(i.clone())).prop_map(|(a, b, e)| Tree::MulPair(a, b, e)),
            (0usize..2, bx(i.clone())).prop_map(|(k, e)| Tree::Index(k, e)),
            bx(i.clone()).prop_map(Tree::Sum),
        ];
        if affine_only {
            affine.boxed()
        } else {
            prop_oneof![
                3 => affine,
                1 => (bx(i.clone()), bx(i.clone())).prop_map(|(l, r)| Tree::Max(l, r)),
                1 => bx(i.clone()).prop_map(Tree::Abs),
                1 => bx(i.clone()).prop_map(Tree::Square),
                1 => bx(i.clone()).prop_map(Tree::SumSquares),
                1 => bx(i.clone()).prop_map(Tree::Norm2),
            ]
            .boxed()
        }
    })
}

fn built(affine_only: bool) -> impl Strategy<Value = Expr> {
    tree(affine_only).prop_filter_map("ill-shaped tree", |t| build_tree(&t).ok())
}

fn point() -> impl Strategy<Value = Assignment> {
    (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)
        .prop_map(|(a, b, c)| Assignment::from([(VarId(0), vec![a, b]), (VarId(1), vec![c])]))
}

fn midpoint(u: &Assignment, v: &Assignment) -> Assignment {
    u.iter().map(|(id, a)| (*id, a.iter().zip(&v[id]).map(|(p, q)| 0.5 * (p + q)).collect())).collect()
}

/// Independent restatement of the dimension rules.
fn expected_dim(atom: Atom, dims: &[usize]) -> usize {
    match atom {
        Atom::Add | Atom::Sub | Atom::Max | Atom::MulConst => dims.iter().copied().max().unwrap(),
        Atom::Neg | Atom::Abs | Atom::Square => dims[0],
        Atom::Index(_) | Atom::Sum | Atom::SumSquares | Atom::Norm2 => 1,
    }
}

fn check_shapes(e: &Expr) {
    if let ExprKind::Atom { atom, args } = e.kind() {
        let dims: Vec<usize> = args.iter().map(Expr::dim).collect();
        assert_eq!(e.dim(), expected_dim(*atom, &dims), "{atom:?} over {dims:?}");
        args.iter().for_each(check_shapes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn curvature_is_sound(e in built(false), pairs in prop::collection::vec((point(), point()), 4)) {
        let c = e.curvature();
        for (u, v) in &pairs {
            let fu = e.evaluate(u).unwrap();
            let fv = e.evaluate(v).unwrap();
            let fm = e.evaluate(&midpoint(u, v)).unwrap();
            for i in 0..e.dim() {
                let chord = 0.5 * (fu[i] + fv[i]);
                let tol = 1e-9 * (1.0 + fu[i].abs() + fv[i].abs());
                if c == Curvature::Convex {
                    prop_assert!(fm[i] <= chord + tol, "convex midpoint {} > {}", fm[i], chord);
                }
                if c == Curvature::Concave {
                    prop_assert!(fm[i] >= chord - tol, "concave midpoint {} < {}", fm[i], chord);
                }
                if c.is_affine() {
                    prop_assert!((fm[i] - chord).abs() <= tol);
                }
            }
        }
    }

    #[test]
    fn sign_is_sound(e in built(false), points in prop::collection::vec(point(), 3)) {
        for a in &points {
            let v = e.evaluate(a).unwrap();
            match e.sign() {
                Sign::NonNegative => prop_assert!(v.iter().all(|x| *x >= -1e-12), "{v:?}"),
                Sign::NonPositive => prop_assert!(v.iter().all(|x| *x <= 1e-12), "{v:?}"),
                Sign::Zero => prop_assert!(v.iter().all(|x| x.abs() <= 1e-12), "{v:?}"),
                Sign::Unknown => {}
            }
        }
    }

    #[test]
    fn affine_coefficients_reproduce_evaluation(e in built(true), a in point()) {
        let form = affine_coefficients(&e).unwrap();
        let direct = e.evaluate(&a).unwrap();
        let viaform = form.evaluate(&a).unwrap();
        prop_assert_eq!(direct.len(), viaform.len());
        for (p, q) in direct.iter().zip(&viaform) {
            prop_assert!((p - q).abs() <= 1e-10 * (1.0 + p.abs()), "{p} vs {q}");
        }
    }

    #[test]
    fn nonaffine_trees_are_refused(e in built(false)) {
        if !e.curvature().is_affine() {
            prop_assert!(affine_coefficients(&e).is_err());
        }
    }

    #[test]
    fn dims_follow_the_rules(e in built(false)) {
        check_shapes(&e);
    }
}
