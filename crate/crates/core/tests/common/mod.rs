//! Random small convex problems with closure oracles.
//!
//! Each case is generated as coefficient lists. The `.cvx` text and the
//! oracle closures are both built from those lists, so the oracle never
//! looks at the parsed expression tree.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cvxrw::expr::Assignment;
use cvxrw::{parse_problem, Problem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// abs, max and linear terms: accepted by every target.
    Pwl,
    /// adds square, sum_squares and square(max(_, 0)).
    Quadratic,
    /// adds norm2.
    Conic,
}

#[derive(Clone, Debug)]
pub struct Spec {
    pub family: Family,
    pub max_n: usize,
    pub maximize: bool,
    pub inequalities: usize,
    pub equalities: bool,
    pub fixed: bool,
    pub redundant: bool,
    pub ge_rows: bool,
    pub bound: f64,
    pub nonneg: bool,
}

impl Spec {
    pub fn new(family: Family) -> Self {
        Spec {
            family,
            max_n: 3,
            maximize: false,
            inequalities: 2,
            equalities: false,
            fixed: false,
            redundant: false,
            ge_rows: false,
            bound: 2.5,
            nonneg: false,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Term {
    Linear(Vec<f64>),
    Abs(Vec<f64>, f64, f64),
    Max(Vec<(Vec<f64>, f64)>, f64),
    Square(Vec<f64>, f64, f64),
    SquarePos(Vec<f64>, f64, f64),
    SumSquares(Vec<f64>, Vec<f64>, f64),
    Norm(Vec<f64>, Vec<f64>, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

/// `a·x REL b`.
#[derive(Clone, Debug)]
pub struct Row {
    pub a: Vec<f64>,
    pub b: f64,
    pub rel: Rel,
}

#[derive(Clone, Debug)]
pub struct Case {
    pub n: usize,
    pub terms: Vec<Term>,
    pub rows: Vec<Row>,
    pub maximize: bool,
    pub nonneg: bool,
    /// Value of the scalar `y`, pinned by `y == value`.
    pub fixed: Option<f64>,
    pub text: String,
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(p, q)| p * q).sum()
}

impl Term {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Term::Linear(a) => dot(a, x),
            Term::Abs(a, b, w) => w * (dot(a, x) + b).abs(),
            Term::Max(pieces, w) => w * pieces.iter().map(|(a, b)| dot(a, x) + b).fold(f64::NEG_INFINITY, f64::max),
            Term::Square(a, b, w) => w * (dot(a, x) + b).powi(2),
            Term::SquarePos(a, b, w) => w * (dot(a, x) + b).max(0.0).powi(2),
            Term::SumSquares(d, c, w) => w * d.iter().zip(c).zip(x).map(|((d, c), x)| (d * x - c).powi(2)).sum::<f64>(),
            Term::Norm(d, c, w) => {
                w * d.iter().zip(c).zip(x).map(|((d, c), x)| (d * x - c).powi(2)).sum::<f64>().sqrt()
            }
        }
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Coordinates below `n` are `x[i]`; coordinate `n` is the scalar `y`.
fn affine_text(a: &[f64], b: f64, n: usize) -> String {
    let name = |i: usize| if i < n { format!("x[{i}]") } else { "y".to_string() };
    let mut parts: Vec<String> =
        a.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(i, c)| format!("{} * {}", num(*c), name(i))).collect();
    if b != 0.0 || parts.is_empty() {
        parts.push(num(b));
    }
    parts.join(" + ")
}

fn vector_text(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", "))
}

impl Term {
    fn text(&self, n: usize) -> String {
        let affine_text = |a: &[f64], b: f64| affine_text(a, b, n);
        match self {
            Term::Linear(a) => affine_text(a, 0.0),
            Term::Abs(a, b, w) => format!("{} * abs({})", num(*w), affine_text(a, *b)),
            Term::Max(pieces, w) => format!(
                "{} * max({})",
                num(*w),
                pieces.iter().map(|(a, b)| affine_text(a, *b)).collect::<Vec<_>>().join(", ")
            ),
            Term::Square(a, b, w) => format!("{} * square({})", num(*w), affine_text(a, *b)),
            Term::SquarePos(a, b, w) => format!("{} * square(max({}, 0))", num(*w), affine_text(a, *b)),
            Term::SumSquares(d, c, w) => {
                format!("{} * sum_squares({} * x - {})", num(*w), vector_text(d), vector_text(c))
            }
            Term::Norm(d, c, w) => format!("{} * norm2({} * x - {})", num(*w), vector_text(d), vector_text(c)),
        }
    }
}

/// Uniform on a 0.05 lattice, so literals print and parse exactly.
fn coef(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let steps = ((hi - lo) / 0.05).round() as i64;
    let k = rng.gen_range(0..=steps);
    ((lo + 0.05 * k as f64) * 100.0).round() / 100.0
}

fn nonzero_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| coef(rng, -1.0, 1.0)).collect();
        if v.iter().any(|c| c.abs() >= 0.1) {
            return v;
        }
    }
}

fn term(rng: &mut ChaCha8Rng, family: Family, n: usize, nt: usize) -> Term {
    let mut kinds = vec![0, 1, 2];
    if family != Family::Pwl {
        kinds.extend([3, 4, 5]);
    }
    if family == Family::Conic {
        kinds.push(6);
    }
    let w = coef(rng, 0.2, 1.0);
    match *kinds.choose(rng).unwrap() {
        0 => Term::Linear((0..nt).map(|_| coef(rng, -0.5, 0.5)).collect()),
        1 => Term::Abs(nonzero_vec(rng, nt), coef(rng, -1.0, 1.0), w),
        2 => {
            let k = rng.gen_range(2..=3);
            Term::Max((0..k).map(|_| (nonzero_vec(rng, nt), coef(rng, -1.0, 1.0))).collect(), w)
        }
        3 => Term::Square(nonzero_vec(rng, nt), coef(rng, -1.0, 1.0), w),
        4 => Term::SquarePos(nonzero_vec(rng, nt), coef(rng, -1.0, 1.0), w),
        5 => Term::SumSquares(nonzero_vec(rng, n), (0..n).map(|_| coef(rng, -1.0, 1.0)).collect(), w),
        _ => Term::Norm(nonzero_vec(rng, n), (0..n).map(|_| coef(rng, -1.0, 1.0)).collect(), w),
    }
}

fn unit(n: usize, i: usize, s: f64) -> Vec<f64> {
    (0..n).map(|j| if j == i { s } else { 0.0 }).collect()
}

impl Case {
    /// Coordinates of the oracle vector: `x` then, if present, `y`.
    pub fn dims(&self) -> usize {
        self.n + usize::from(self.fixed.is_some())
    }

    pub fn generate(spec: &Spec, seed: u64) -> Case {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=spec.max_n);
        let nt = n + usize::from(spec.fixed);
        let count = rng.gen_range(1..=3);
        let terms: Vec<Term> = (0..count).map(|_| term(&mut rng, spec.family, n, nt)).collect();

        // every row holds at x0, strictly for inequalities
        let lo = if spec.nonneg { 0.0 } else { -1.0 };
        let x0: Vec<f64> = (0..nt).map(|_| coef(&mut rng, lo, 1.0)).collect();
        let fixed = spec.fixed.then(|| x0[n]);
        let mut rows = Vec::new();
        for i in 0..n {
            rows.push(Row { a: unit(nt, i, 1.0), b: spec.bound, rel: Rel::Le });
            if !spec.nonneg {
                if spec.ge_rows {
                    rows.push(Row { a: unit(nt, i, 1.0), b: -spec.bound, rel: Rel::Ge });
                } else {
                    rows.push(Row { a: unit(nt, i, -1.0), b: spec.bound, rel: Rel::Le });
                }
            }
        }
        for _ in 0..spec.inequalities {
            let a = nonzero_vec(&mut rng, nt);
            let slack = coef(&mut rng, 0.2, 1.0);
            let b = ((dot(&a, &x0) + slack) * 1e4).round() / 1e4;
            if spec.ge_rows && rng.gen_bool(0.5) {
                let neg: Vec<f64> = a.iter().map(|c| -c).collect();
                rows.push(Row { a: neg, b: -b, rel: Rel::Ge });
            } else {
                rows.push(Row { a, b, rel: Rel::Le });
            }
        }
        if spec.equalities && n > 1 && rng.gen_bool(0.7) {
            let a = nonzero_vec(&mut rng, nt);
            // x0 has two decimals and a sits on a 0.05 lattice, so a·x0 is exact at 1e-4
            let b = (dot(&a, &x0) * 1e4).round() / 1e4;
            rows.push(Row { a, b, rel: Rel::Eq });
        }
        if spec.redundant {
            let pick = rows[rng.gen_range(0..rows.len())].clone();
            rows.push(pick);
            let i = rng.gen_range(0..n);
            rows.push(Row { a: unit(nt, i, 1.0), b: spec.bound + 1.0, rel: Rel::Le });
        }
        rows.shuffle(&mut rng);

        let mut case =
            Case { n, terms, rows, fixed, maximize: spec.maximize, nonneg: spec.nonneg, text: String::new() };
        case.text = case.render();
        case
    }

    fn render(&self) -> String {
        let tag = if self.nonneg { " nonneg" } else { "" };
        let mut s = format!("var x[{}]{tag};\n", self.n);
        if self.fixed.is_some() {
            s += &format!("var y{tag};\n");
        }
        let body = self.terms.iter().map(|t| t.text(self.n)).collect::<Vec<_>>().join(" + ");
        if self.maximize {
            s += &format!("maximize -({body});\n");
        } else {
            s += &format!("minimize {body};\n");
        }
        s += "subject to\n";
        if let Some(v) = self.fixed {
            s += &format!("  y == {};\n", num(v));
        }
        for r in &self.rows {
            let op = match r.rel {
                Rel::Le => "<=",
                Rel::Ge => ">=",
                Rel::Eq => "==",
            };
            s += &format!("  {} {op} {};\n", affine_text(&r.a, 0.0, self.n), num(r.b));
        }
        s
    }

    pub fn problem(&self) -> Problem {
        parse_problem(&self.text).unwrap_or_else(|e| panic!("{e}\n{}", self.text))
    }

    /// The objective in the problem's own sense.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let f: f64 = self.terms.iter().map(|t| t.eval(x)).sum();
        if self.maximize {
            -f
        } else {
            f
        }
    }

    /// The objective as a minimization (negated for maximize cases).
    pub fn cost(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for r in &self.rows {
            let v = dot(&r.a, x) - r.b;
            worst = worst.max(match r.rel {
                Rel::Le => v,
                Rel::Ge => -v,
                Rel::Eq => v.abs(),
            });
        }
        if let Some(v) = self.fixed {
            worst = worst.max((x[self.n] - v).abs());
        }
        if self.nonneg {
            for xi in x {
                worst = worst.max(-xi);
            }
        }
        worst
    }

    /// Interval of `x[last]` allowed by the rows with every other
    /// coordinate fixed.
    fn last_interval(&self, head: &[f64], lo: f64, hi: f64) -> Option<(f64, f64)> {
        let k = self.n - 1;
        let (mut lo, mut hi) = (lo, hi);
        for r in &self.rows {
            let rest: f64 = r.a[..k].iter().zip(head).map(|(a, x)| a * x).sum();
            let ak = r.a[k];
            let (le, ge) = match r.rel {
                Rel::Le => (true, false),
                Rel::Ge => (false, true),
                Rel::Eq => (true, true),
            };
            if ak == 0.0 {
                if (le && rest > r.b) || (ge && rest < r.b) {
                    return None;
                }
                continue;
            }
            let bound = (r.b - rest) / ak;
            // a·x <= b means x_k <= bound when ak > 0
            if le {
                if ak > 0.0 {
                    hi = hi.min(bound);
                } else {
                    lo = lo.max(bound);
                }
            }
            if ge {
                if ak > 0.0 {
                    lo = lo.max(bound);
                } else {
                    hi = hi.min(bound);
                }
            }
        }
        if self.nonneg {
            lo = lo.max(0.0);
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Minimum of the cost over the feasible points of the lattice
    /// `{-r, -r + h, …, r}^n`. Exhaustive in every coordinate but the last,
    /// where the cost is convex on an interval of lattice points and an
    /// integer ternary search finds the same minimum.
    pub fn grid_min(&self, r: f64, h: f64) -> Option<(f64, Vec<f64>)> {
        assert!(self.fixed.is_none(), "grid search covers x only");
        let m = (2.0 * r / h).round() as i64;
        let at = |k: i64| -r + h * k as f64;
        let mut best: Option<(f64, Vec<f64>)> = None;
        let heads = m + 1;
        let total = (heads as usize).pow((self.n - 1) as u32);
        let mut x = vec![0.0; self.n];
        for flat in 0..total {
            let mut rest = flat;
            for xi in x.iter_mut().take(self.n - 1) {
                *xi = at((rest % heads as usize) as i64);
                rest /= heads as usize;
            }
            let (lo, hi) = match self.last_interval(&x[..self.n - 1], -r, r) {
                Some(iv) => iv,
                None => continue,
            };
            // lattice indices inside [lo, hi], with a little slack for rounding
            let k_lo = ((lo + r) / h - 1e-9).ceil() as i64;
            let k_hi = ((hi + r) / h + 1e-9).floor() as i64;
            let (mut a, mut b) = (k_lo.max(0), k_hi.min(m));
            if a > b {
                continue;
            }
            let f = |k: i64, x: &mut Vec<f64>| {
                x[self.n - 1] = at(k);
                self.cost(x)
            };
            while b - a > 2 {
                let m1 = a + (b - a) / 3;
                let m2 = b - (b - a) / 3;
                let (f1, f2) = (f(m1, &mut x), f(m2, &mut x));
                if f1 < f2 {
                    b = m2 - 1;
                } else if f1 > f2 {
                    a = m1 + 1;
                } else {
                    a = m1;
                    b = m2;
                }
            }
            for k in a..=b {
                let v = f(k, &mut x);
                if self.violation(&x) <= 1e-9 && best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                    best = Some((v, x.clone()));
                }
            }
        }
        best
    }
}

/// The oracle vector (`x`, then `y` if declared) from an assignment over
/// `problem`'s variables; `None` if a value is missing.
pub fn point_of(problem: &Problem, primal: &Assignment) -> Option<Vec<f64>> {
    let mut out = primal.get(&problem.variable_by_name("x")?.id)?.clone();
    if let Some(y) = problem.variable_by_name("y") {
        out.extend(primal.get(&y.id)?);
    }
    Some(out)
}
