//! Brute-force oracles and problem generators shared by the test targets.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sepdiag::analysis::{CheckerReport, Counterexample, Property, TOL_CHECK};
use sepdiag::expr::Expression;
use sepdiag::geometry::{sample_grid, ConvexSetSpec, LinearOperatorSpec, PointCloud};
use sepdiag::sep::{Grids, SplitProblem, MEMBERSHIP_TOL};

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn brute_diameter(points: &[Vec<f64>]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(dist(a, b));
        }
    }
    best
}

pub fn brute_directed(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().map(|p| b.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

pub fn brute_hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    brute_directed(a, b).max(brute_directed(b, a))
}

pub fn points_of(cloud: &PointCloud) -> Vec<Vec<f64>> {
    cloud.iter().map(|p| p.to_vec()).collect()
}

pub fn random_cloud(rng: &mut ChaCha8Rng, dim: usize, max_len: usize) -> Vec<Vec<f64>> {
    let len = rng.gen_range(1..=max_len);
    (0..len).map(|_| (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect()
}

pub fn to_cloud(dim: usize, points: &[Vec<f64>]) -> PointCloud {
    PointCloud::from_points(dim, points).unwrap()
}

/// `a2·p² + a1·x·p + a0·x² + b1·p + b0·x + c` in the given variable names.
pub fn random_quadratic(rng: &mut ChaCha8Rng, first: &str, second: &str) -> String {
    let mut coef = || {
        // a third of the terms vanish so affine cases come up often
        if rng.gen_bool(1.0 / 3.0) {
            0.0
        } else {
            (rng.gen_range(-2.0f64..2.0) * 8.0).round() / 8.0
        }
    };
    let (a2, a1, a0, b1, b0, c) = (coef(), coef(), coef(), coef(), coef(), coef());
    format!("({a2})*{second}^2 + ({a1})*{first}*{second} + ({a0})*{first}^2 + ({b1})*{second} + ({b0})*{first} + ({c})")
}

/// A one-dimensional problem with random quadratic bifunctions, random
/// intervals and a random nonzero scalar operator.
pub fn random_problem(rng: &mut ChaCha8Rng, h: f64) -> SplitProblem {
    let mut interval = || {
        let lo = (rng.gen_range(-1.0f64..0.5) * 4.0).round() / 4.0;
        let len = (rng.gen_range(0.5f64..2.0) * 4.0).round() / 4.0;
        ConvexSetSpec::interval(lo, lo + len).unwrap()
    };
    let (c, q) = (interval(), interval());
    let f = random_quadratic(rng, "x", "p");
    let g = random_quadratic(rng, "y", "q");
    let a = (rng.gen_range(-2.0f64..2.0) * 4.0).round() / 4.0;
    let a = if a == 0.0 { 1.0 } else { a };
    SplitProblem::new(
        c,
        q,
        Expression::bifunction(&f, "x", "p", 1).unwrap(),
        Expression::bifunction(&g, "y", "q", 1).unwrap(),
        LinearOperatorSpec::from_rows(&[vec![a]]).unwrap(),
        Grids::new(h, h).unwrap(),
    )
    .unwrap()
}

/// Residual of every outer grid pair, evaluated with the reference tree
/// walker and full inner scans.
pub fn brute_residuals(prob: &SplitProblem, h_out: f64, h_in: f64) -> Vec<(Vec<f64>, f64)> {
    let xs = points_of(&sample_grid(prob.c(), h_out).unwrap());
    let ys = points_of(&sample_grid(prob.q(), h_out).unwrap());
    let ps = points_of(&sample_grid(prob.c(), h_in).unwrap());
    let qs = points_of(&sample_grid(prob.q(), h_in).unwrap());
    let inner = |e: &Expression, z: &[f64], pool: &[Vec<f64>]| {
        pool.iter().map(|p| -e.eval_reference(&[z, p]).unwrap()).fold(f64::NEG_INFINITY, f64::max)
    };
    let rf: Vec<f64> = xs.iter().map(|x| inner(prob.f(), x, &ps)).collect();
    let rg: Vec<f64> = ys.iter().map(|y| inner(prob.g(), y, &qs)).collect();
    let mut out = Vec::new();
    for (x, fx) in xs.iter().zip(&rf) {
        let ax = prob.operator().apply(x).unwrap();
        for (y, gy) in ys.iter().zip(&rg) {
            let coupling = dist(y, &ax);
            let r = coupling.max(*fx).max(*gy).max(0.0);
            out.push(([x.as_slice(), y].concat(), r));
        }
    }
    out
}

pub fn brute_members(residuals: &[(Vec<f64>, f64)], eps: f64) -> Vec<Vec<f64>> {
    residuals.iter().filter(|(_, r)| *r <= eps + MEMBERSHIP_TOL).map(|(p, _)| p.clone()).collect()
}

/// A bifunction with a closed-form infimum over its set, plus a Lipschitz
/// bound of the section in the second variable.
pub struct KnownInfimum {
    pub label: &'static str,
    pub expr: Expression,
    pub set: ConvexSetSpec,
    pub infimum: fn(f64) -> f64,
    pub lipschitz: f64,
    pub fixed: Vec<f64>,
}

pub fn known_infima() -> Vec<KnownInfimum> {
    let line = ConvexSetSpec::whole_space(1).unwrap().with_window(2.0).unwrap();
    let unit = ConvexSetSpec::interval(0.0, 1.0).unwrap();
    let half = ConvexSetSpec::interval(0.0, f64::INFINITY).unwrap().with_window(10.0).unwrap();
    let bif = |t: &str, a: &str, b: &str| Expression::bifunction(t, a, b, 1).unwrap();
    // sup over q of 2|q| exp(-q²) is sqrt(2) exp(-1/2)
    let gauss = 2f64.sqrt() * (-0.5f64).exp();
    vec![
        KnownInfimum {
            label: "p^2 - x^2 on [-2, 2]",
            expr: bif("p^2 - x^2", "x", "p"),
            set: line.clone(),
            infimum: |x| -x * x,
            lipschitz: 4.0,
            fixed: vec![-2.0, -1.3, -0.1, 0.0, 0.37, 1.0, 2.0],
        },
        KnownInfimum {
            label: "-y^2 exp(-q^2) on [-2, 2]",
            expr: bif("-y^2*exp(-q^2)", "y", "q"),
            set: line,
            infimum: |y| -y * y,
            lipschitz: 4.0 * gauss,
            fixed: vec![-2.0, -0.7, 0.0, 0.25, 1.9],
        },
        KnownInfimum {
            label: "piecewise f on [0, 1]",
            expr: bif("if(x < 0.5, x, x^2/2)", "x", "p"),
            set: unit.clone(),
            infimum: |x| if x < 0.5 { x } else { x * x / 2.0 },
            lipschitz: 0.0,
            fixed: vec![0.0, 0.3, 0.5, 0.77, 1.0],
        },
        KnownInfimum {
            label: "piecewise g on [0, 1]",
            expr: bif("if(y == 0.5, 0, 2)", "y", "q"),
            set: unit,
            infimum: |y| if y == 0.5 { 0.0 } else { 2.0 },
            lipschitz: 0.0,
            fixed: vec![0.0, 0.5, 0.51, 1.0],
        },
        KnownInfimum {
            label: "p^2 - x^2 on [0, 10]",
            expr: bif("p^2 - x^2", "x", "p"),
            set: half.clone(),
            infimum: |x| -x * x,
            lipschitz: 20.0,
            fixed: vec![0.0, 0.001, 3.3, 10.0],
        },
        KnownInfimum {
            label: "(p - x)^2 on [0, 1]",
            expr: bif("(p - x)^2", "x", "p"),
            set: ConvexSetSpec::interval(0.0, 1.0).unwrap(),
            infimum: |_| 0.0,
            lipschitz: 2.0,
            fixed: vec![0.1, 0.3, 1.0 / 3.0, 0.9],
        },
        KnownInfimum {
            label: "q - y on [0, 10]",
            expr: bif("q - y", "y", "q"),
            set: half,
            infimum: |y| -y,
            lipschitz: 1.0,
            fixed: vec![0.0, 0.5, 9.99],
        },
    ]
}

/// Re-evaluates a counterexample with the reference evaluator and returns
/// the amount by which the property fails there.
pub fn replay(expr: &Expression, report: &CheckerReport) -> f64 {
    let c: &Counterexample = report.counterexample.as_ref().expect("refuted report has a counterexample");
    let vars = expr.variables();
    let (first, second) = (&vars[0].name, &vars[1].name);
    let input = |k: &str| c.inputs.get(k).unwrap_or_else(|| panic!("missing input {k}")).clone();
    let f = |a: &[f64], b: &[f64]| expr.eval_reference(&[a, b]).unwrap();
    match Property::from_name(&report.property).unwrap() {
        Property::Monotone => {
            let (x, p) = (input(first), input(second));
            f(&x, &p) + f(&p, &x)
        }
        Property::Hemicontinuous => {
            let (x, p, z) = (input(first), input(second), input("probe"));
            f(&z, &p) - f(&x, &p)
        }
        Property::ConvexSecond => {
            let (x, p, q) = (input(first), input(second), input(&format!("{second}'")));
            let (l, mix) = (input("lambda")[0], input("mix"));
            f(&x, &mix) - (l * f(&x, &p) + (1.0 - l) * f(&x, &q))
        }
        Property::LscSecond => {
            let (x, p, z) = (input(first), input(second), input("probe"));
            f(&x, &p) - f(&x, &z)
        }
        Property::UscFirst => {
            let (x, p, z) = (input(first), input(second), input("probe"));
            f(&z, &p) - f(&x, &p)
        }
        Property::DiagonalNonneg => {
            let q = input(second);
            -f(&q, &q)
        }
    }
}

pub const REPLAY_FLOOR: f64 = TOL_CHECK / 2.0;

/// Bifunctions used for checker replay, each over a set it is defined on.
pub fn replay_corpus(rng: &mut ChaCha8Rng, random: usize) -> Vec<(String, ConvexSetSpec)> {
    let unit = ConvexSetSpec::interval(0.0, 1.0).unwrap();
    let sym = ConvexSetSpec::interval(-1.0, 1.0).unwrap();
    let mut out: Vec<(String, ConvexSetSpec)> = vec![
        ("x + p".into(), sym.clone()),
        ("p^2 - x^2".into(), sym.clone()),
        ("-x^2*exp(-p^2)".into(), sym.clone()),
        ("if(x < 0.5, x, x^2/2)".into(), unit.clone()),
        ("if(x == 0.5, 0, 2)".into(), unit.clone()),
        ("if(p < 0.25, 1, 0) - x".into(), unit.clone()),
        ("if(x > 0.3, 1, 0)*p".into(), unit.clone()),
        ("abs(p) - abs(x)".into(), sym.clone()),
        ("exp(p) - exp(x)".into(), sym.clone()),
        ("max(p, 0.2) - min(x, 0)".into(), sym),
    ];
    for _ in 0..random {
        out.push((random_quadratic(rng, "x", "p"), unit.clone()));
    }
    out
}
