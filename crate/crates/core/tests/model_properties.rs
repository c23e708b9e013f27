use fairrec::{
    item_utilities, user_utilities, FairnessMeasure, ItemUtilityModel, RecommendationPolicy,
    UtilityMatrix,
};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (UtilityMatrix, RecommendationPolicy)> {
    (1usize..6, 1usize..6).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(0.01f64..10.0, m * n),
            prop::collection::vec(0.0f64..1.0, m * n),
        )
            .prop_map(move |(values, raw)| {
                let w = UtilityMatrix::new(m, n, values).unwrap();
                let policy = RecommendationPolicy::from_solver_output(m, n, &raw, false);
                (w, policy)
            })
    })
}

fn delta() -> impl Strategy<Value = ItemUtilityModel> {
    (0.0f64..=1.0).prop_map(|d| ItemUtilityModel::new(d).unwrap())
}

proptest! {
    #[test]
    fn utilities_are_normalized((w, policy) in instance(), model in delta()) {
        for u in user_utilities(&policy, &w).unwrap() {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&u));
        }
        for i in item_utilities(&policy, &w, model).unwrap() {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&i));
        }
    }

    #[test]
    fn user_utility_ignores_row_scale((w, policy) in instance(), row in 0usize..6, c in 0.01f64..100.0) {
        let row = row % w.num_users();
        let mut values = w.values().to_vec();
        let n = w.num_items();
        values[row * n..(row + 1) * n].iter_mut().for_each(|v| *v *= c);
        let scaled = UtilityMatrix::new(w.num_users(), n, values).unwrap();
        let before = user_utilities(&policy, &w).unwrap();
        let after = user_utilities(&policy, &scaled).unwrap();
        prop_assert!((before[row] - after[row]).abs() < 1e-12);
    }

    #[test]
    fn item_utility_ignores_column_scale((w, policy) in instance(), col in 0usize..6, c in 0.01f64..100.0) {
        let col = col % w.num_items();
        let n = w.num_items();
        let mut values = w.values().to_vec();
        for i in 0..w.num_users() {
            values[i * n + col] *= c;
        }
        let scaled = UtilityMatrix::new(w.num_users(), n, values).unwrap();
        let before = item_utilities(&policy, &w, ItemUtilityModel::SYMMETRIC).unwrap();
        let after = item_utilities(&policy, &scaled, ItemUtilityModel::SYMMETRIC).unwrap();
        prop_assert!((before[col] - after[col]).abs() < 1e-12);
    }

    #[test]
    fn one_smallest_is_the_minimum(values in prop::collection::vec(-5.0f64..5.0, 1..20)) {
        let k1 = FairnessMeasure::SumKMin { k: 1 }.evaluate(&values).unwrap();
        let min = FairnessMeasure::MaxMin.evaluate(&values).unwrap();
        prop_assert_eq!(k1, min);
    }

    #[test]
    fn realized_utility_is_counted_once_per_side((w, policy) in instance()) {
        let users = user_utilities(&policy, &w).unwrap();
        let items = item_utilities(&policy, &w, ItemUtilityModel::SYMMETRIC).unwrap();
        let by_users: f64 = users.iter().enumerate().map(|(i, u)| u * w.row_max(i)).sum();
        let by_items: f64 = items.iter().enumerate().map(|(j, v)| v * w.column_sum(j)).sum();
        let total: f64 = (0..w.num_users())
            .flat_map(|i| (0..w.num_items()).map(move |j| (i, j)))
            .map(|(i, j)| policy.get(i, j) * w.get(i, j))
            .sum();
        prop_assert!((by_users - total).abs() < 1e-9 * total.max(1.0));
        prop_assert!((by_items - total).abs() < 1e-9 * total.max(1.0));
    }
}
