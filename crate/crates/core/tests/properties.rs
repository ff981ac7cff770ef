mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sepdiag::analysis::{diagnose_with, run_checker, CheckConfig, DiagnoseOptions, Property};
use sepdiag::config::ProblemConfig;
use sepdiag::expr::Expression;
use sepdiag::geometry::{
    diameter, directed_distance, farthest_point_cover, hausdorff, kuratowski_estimate, sample_grid, ConvexSetSpec,
    PointCloud,
};
use sepdiag::sep::{approx_solution_set, inner_infimum};

use common::*;

fn cloud_strategy(dim: usize, max_len: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, dim), 1..=max_len)
}

type Cloud = Vec<Vec<f64>>;

fn triple() -> impl Strategy<Value = (usize, Cloud, Cloud, Cloud)> {
    (1usize..=3).prop_flat_map(|d| (Just(d), cloud_strategy(d, 24), cloud_strategy(d, 24), cloud_strategy(d, 24)))
}

fn pair() -> impl Strategy<Value = (usize, Cloud, Cloud)> {
    (1usize..=3).prop_flat_map(|d| (Just(d), cloud_strategy(d, 40), cloud_strategy(d, 40)))
}

fn union(dim: usize, a: &[Vec<f64>], b: &[Vec<f64>]) -> PointCloud {
    let all: Vec<Vec<f64>> = a.iter().chain(b).cloned().collect();
    to_cloud(dim, &all)
}

/// Largest possible overshoot of the estimate over the best `b`-set cover:
/// the estimate is at most twice the farthest-point radius, and any cover
/// by `b` sets has diameter at least half of it.
fn estimator_slack(cloud: &PointCloud, budget: usize) -> f64 {
    let cover = farthest_point_cover(cloud, budget, |_, _, _| true);
    1.5 * cover.radii[budget.min(cover.radii.len()) - 1] + 1e-12
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hausdorff_is_a_metric_on_clouds((dim, a, b, c) in triple()) {
        let (ca, cb, cc) = (to_cloud(dim, &a), to_cloud(dim, &b), to_cloud(dim, &c));
        let tol = 1e-12;
        prop_assert_eq!(hausdorff(&ca, &ca).unwrap(), 0.0);
        let hab = hausdorff(&ca, &cb).unwrap();
        prop_assert!(hab >= 0.0);
        prop_assert!((hab - hausdorff(&cb, &ca).unwrap()).abs() <= tol);
        let hac = hausdorff(&ca, &cc).unwrap();
        prop_assert!(hac <= hab + hausdorff(&cb, &cc).unwrap() + tol);
        prop_assert!((hab - brute_hausdorff(&a, &b)).abs() <= tol);
    }

    #[test]
    fn directed_distance_matches_brute_force((dim, a, b) in pair()) {
        let got = directed_distance(&to_cloud(dim, &a), &to_cloud(dim, &b)).unwrap();
        prop_assert!((got - brute_directed(&a, &b)).abs() <= 1e-12);
        prop_assert_eq!(directed_distance(&to_cloud(dim, &a), &union(dim, &a, &b)).unwrap(), 0.0);
    }

    #[test]
    fn diameter_matches_brute_force_and_grows_under_union((dim, a, b) in pair()) {
        let (ca, cb) = (to_cloud(dim, &a), to_cloud(dim, &b));
        let da = diameter(&ca).unwrap();
        prop_assert_eq!(da, brute_diameter(&a));
        let du = diameter(&union(dim, &a, &b)).unwrap();
        prop_assert!(du >= da.max(diameter(&cb).unwrap()));
    }

    #[test]
    fn kuratowski_estimate_stable_under_perturbation(
        (dim, a, _) in pair(),
        shift in prop::collection::vec(-0.2f64..0.2, 40 * 3),
        budget in 1usize..=6,
    ) {
        // Q moves each point of P by at most 0.2 per coordinate
        let b: Vec<Vec<f64>> = a
            .iter()
            .enumerate()
            .map(|(i, p)| p.iter().enumerate().map(|(k, v)| v + shift[i * dim + k]).collect())
            .collect();
        let (ca, cb) = (to_cloud(dim, &a), to_cloud(dim, &b));
        let h = hausdorff(&ca, &cb).unwrap();
        let lhs = kuratowski_estimate(&ca, budget).unwrap();
        let rhs = 2.0 * h + kuratowski_estimate(&cb, budget).unwrap() + estimator_slack(&ca, budget);
        prop_assert!(lhs <= rhs, "{} > {}", lhs, rhs);
    }

    #[test]
    fn kuratowski_estimate_monotone_and_zero_for_singletons((dim, a, _) in pair()) {
        let ca = to_cloud(dim, &a);
        let mut previous = f64::INFINITY;
        for budget in 1..=a.len() + 1 {
            let v = kuratowski_estimate(&ca, budget).unwrap();
            prop_assert!(v <= previous);
            previous = v;
        }
        prop_assert_eq!(kuratowski_estimate(&ca, a.len()).unwrap(), 0.0);
    }

    #[test]
    fn halving_the_spacing_refines_dyadic_grids(lo in -4i32..4, len in 1i32..4, k in 1u32..5, dim in 1usize..=2) {
        let lower = vec![lo as f64 / 2.0; dim];
        let upper = vec![(lo + len) as f64 / 2.0; dim];
        let set = ConvexSetSpec::new_box(lower, upper).unwrap();
        let h = 0.5f64.powi(k as i32);
        let coarse = points_of(&sample_grid(&set, h).unwrap());
        let fine = points_of(&sample_grid(&set, h / 2.0).unwrap());
        prop_assert!(fine.len() > coarse.len());
        prop_assert!(coarse.iter().all(|p| fine.contains(p)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn approximate_sets_are_nested_and_match_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 1.0 / 16.0;
        let prob = random_problem(&mut rng, h);
        let brute = brute_residuals(&prob, h, h);
        let mut previous: Option<Vec<Vec<f64>>> = None;
        for eps in [2.0, 1.0, 0.3, 0.1, 0.02, 0.0] {
            let set = approx_solution_set(&prob, eps, h, h).unwrap();
            let got = points_of(&set.cloud);
            let mut want = brute_members(&brute, set.epsilon);
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assert_eq!(&got, &want);
            if let Some(bigger) = &previous {
                prop_assert!(got.iter().all(|p| bigger.contains(p)));
            }
            previous = Some(got);
        }
    }

    #[test]
    fn checker_counterexamples_replay(seed in any::<u64>(), p in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let property = Property::ALL[p];
        let text = random_quadratic(&mut rng, "x", "p");
        let expr = Expression::bifunction(&text, "x", "p", 1).unwrap();
        let set = ConvexSetSpec::interval(-1.0, 1.0).unwrap();
        let report = run_checker(property, "bifunction", &expr, &set, &CheckConfig::with_seed(seed)).unwrap();
        if !report.holds() {
            let excess = replay(&expr, &report);
            prop_assert!(excess > REPLAY_FLOOR, "{} {}: {}", text, property, excess);
        }
    }

    #[test]
    fn config_round_trips(seed in any::<u64>(), k in 1u8..=3, h in 1u32..8, window in 1.0f64..20.0) {
        let mut config = ProblemConfig::builtin(&format!("builtin:example{k}")).unwrap();
        config.seed = seed;
        config.grids.h_out = 0.5f64.powi(h as i32);
        config.set_window_radius(window);
        let text = config.to_json_pretty();
        prop_assert_eq!(ProblemConfig::from_json(&text).unwrap(), config);
    }
}

#[test]
fn inner_infimum_within_lipschitz_gap_of_closed_forms() {
    for k in known_infima() {
        for h in [1.0 / 64.0, 1.0 / 1024.0] {
            for &z in &k.fixed {
                let got = inner_infimum(&k.expr, &[z], &k.set, h).unwrap();
                let exact = (k.infimum)(z);
                assert!(got.value >= exact - 1e-12, "{} at {z}: {} below {exact}", k.label, got.value);
                assert!(got.value - exact <= k.lipschitz * h + 1e-12, "{} at {z}: gap {}", k.label, got.value - exact);
                assert!(k.set.contains(&got.argmin, 1e-12).unwrap());
            }
        }
    }
}

#[test]
fn fixed_corpus_counterexamples_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut refuted = 0;
    for (text, set) in replay_corpus(&mut rng, 10) {
        let expr = Expression::bifunction(&text, "x", "p", 1).unwrap();
        for p in Property::ALL {
            let report = run_checker(p, "bifunction", &expr, &set, &CheckConfig::default()).unwrap();
            if !report.holds() {
                refuted += 1;
                let excess = replay(&expr, &report);
                assert!(excess > REPLAY_FLOOR, "{text} / {p}: {excess}");
            }
        }
    }
    assert!(refuted >= 10);
}

#[test]
fn diagnosis_independent_of_thread_count() {
    let config = ProblemConfig::builtin("builtin:example1").unwrap();
    let prob = config.build().unwrap();
    let mut options =
        DiagnoseOptions::new(config.schedule.clone(), sepdiag::sep::Grids::new(1.0 / 256.0, 1.0 / 256.0).unwrap());
    options.checks = Some(CheckConfig::with_seed(9));
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let report = pool.install(|| diagnose_with(&prob, &options)).unwrap();
        let clouds: Vec<Vec<Vec<f64>>> = report.clouds.iter().map(|c| points_of(&c.cloud)).collect();
        (report.to_json().to_string(), clouds)
    };
    assert_eq!(run(1), run(4));
}
