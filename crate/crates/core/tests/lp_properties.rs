mod common;

use common::simplex_grid;
use fairrec::lp::{
    solve_lp, solve_maxmin_linear, sum_k_smallest_epigraph, AffineForm, Bounds, LpInstance,
    LpStatus, Relation,
};
use proptest::prelude::*;

const GRID_STEPS: usize = 60;

/// The probability simplex over `n` variables.
fn simplex(n: usize) -> LpInstance {
    let mut lp = LpInstance::new(n);
    lp.add_constraint(vec![1.0; n], Relation::Eq, 1.0);
    lp
}

fn affine_rows(n: usize) -> impl Strategy<Value = Vec<AffineForm>> {
    prop::collection::vec(
        (prop::collection::vec(-1.0f64..1.0, n), -0.5f64..0.5)
            .prop_map(|(c, b)| AffineForm::new(c, b)),
        1..6,
    )
}

fn sum_smallest(mut values: Vec<f64>, k: usize) -> f64 {
    values.sort_by(f64::total_cmp);
    values[..k].iter().sum()
}

fn instance() -> impl Strategy<Value = (usize, Vec<AffineForm>)> {
    (1usize..4).prop_flat_map(|n| (Just(n), affine_rows(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn maxmin_dominates_and_tracks_the_grid((n, rows) in instance()) {
        let sol = solve_maxmin_linear(&rows, &simplex(n)).unwrap();
        let grid_best = simplex_grid(n, GRID_STEPS)
            .iter()
            .map(|p| rows.iter().map(|r| r.eval(p)).fold(f64::INFINITY, f64::min))
            .fold(f64::MIN, f64::max);
        prop_assert!(sol.value >= grid_best - 1e-9, "{} < {}", sol.value, grid_best);
        prop_assert!(sol.value <= grid_best + n as f64 / GRID_STEPS as f64);
        prop_assert!((sol.point.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn k_smallest_dominates_and_tracks_the_grid((n, rows) in instance(), k in 1usize..6) {
        let k = 1 + (k - 1) % rows.len();
        let sol = sum_k_smallest_epigraph(&rows, k, &simplex(n)).unwrap();
        let grid_best = simplex_grid(n, GRID_STEPS)
            .iter()
            .map(|p| sum_smallest(rows.iter().map(|r| r.eval(p)).collect(), k))
            .fold(f64::MIN, f64::max);
        let achieved = sum_smallest(rows.iter().map(|r| r.eval(&sol.point)).collect(), k);
        prop_assert!((achieved - sol.value).abs() < 1e-9);
        prop_assert!(sol.value >= grid_best - 1e-9);
        prop_assert!(sol.value <= grid_best + (n * k) as f64 / GRID_STEPS as f64);
    }

    #[test]
    fn one_smallest_is_maxmin((n, rows) in instance()) {
        let a = solve_maxmin_linear(&rows, &simplex(n)).unwrap();
        let b = sum_k_smallest_epigraph(&rows, 1, &simplex(n)).unwrap();
        prop_assert!((a.value - b.value).abs() < 1e-7);
    }

    #[test]
    fn solves_are_bitwise_repeatable((n, rows) in instance()) {
        let a = solve_maxmin_linear(&rows, &simplex(n)).unwrap();
        let b = solve_maxmin_linear(&rows, &simplex(n)).unwrap();
        prop_assert_eq!(a, b);
    }

    /// Random packing programs: every sampled feasible point is beaten by the
    /// reported optimum, which is itself feasible.
    #[test]
    fn optimum_beats_feasible_samples(
        n in 1usize..6,
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut rng = common::rng(seed);
        let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut lp = LpInstance::new(n);
        lp.set_objective(objective.clone());
        for v in 0..n {
            lp.set_bounds(v, Bounds::new(0.0, rng.gen_range(0.5..2.0)));
        }
        for _ in 0..3 {
            let row: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            lp.add_constraint(row, Relation::Le, rng.gen_range(0.5..2.0));
        }
        let sol = solve_lp(&lp).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        prop_assert!(sol.is_vertex);
        prop_assert!(lp.max_violation(&sol.point) <= 1e-7);
        for _ in 0..200 {
            let x: Vec<f64> = lp.bounds().iter().map(|b| rng.gen_range(0.0..=b.upper)).collect();
            if lp.max_violation(&x) == 0.0 {
                prop_assert!(lp.objective_value(&x) <= sol.value + 1e-9);
            }
        }
    }
}
