//! Utility matrices, recommendation policies and the normalized welfare
//! measures built on top of them.
//!
//! User utilities are normalized by the user's best single item, item
//! utilities by the utility the item would collect if every user were
//! recommended it. User-side quantities always read the raw matrix; item-side
//! quantities read the matrix produced by [`apply_item_utility_model`].

use crate::error::{Error, Result};

/// Absolute tolerance on policy row sums.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Strictly positive `m x n` user-item utilities, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityMatrix {
    users: usize,
    items: usize,
    values: Vec<f64>,
    type_of: Option<Vec<usize>>,
    user_labels: Option<Vec<String>>,
    item_labels: Option<Vec<String>>,
}

impl UtilityMatrix {
    pub fn new(users: usize, items: usize, values: Vec<f64>) -> Result<Self> {
        if users == 0 || items == 0 {
            return Err(Error::ShapeMismatch(format!(
                "utility matrix needs at least one user and one item, got {users}x{items}"
            )));
        }
        if values.len() != users * items {
            return Err(Error::ShapeMismatch(format!(
                "{} values supplied for a {users}x{items} matrix",
                values.len()
            )));
        }
        for (idx, &value) in values.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveEntry {
                    row: idx / items,
                    col: idx % items,
                    value,
                });
            }
        }
        Ok(Self {
            users,
            items,
            values,
            type_of: None,
            user_labels: None,
            item_labels: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let items = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != items) {
            return Err(Error::ShapeMismatch(format!(
                "row {bad} has {} entries, expected {items}",
                rows[bad].len()
            )));
        }
        Self::new(rows.len(), items, rows.concat())
    }

    /// Attaches a user -> type annotation. Users sharing a type must have
    /// identical rows.
    pub fn with_types(mut self, type_of: Vec<usize>) -> Result<Self> {
        if type_of.len() != self.users {
            return Err(Error::ShapeMismatch(format!(
                "type annotation covers {} users, matrix has {}",
                type_of.len(),
                self.users
            )));
        }
        let mut representative: Vec<(usize, usize)> = Vec::new();
        for (user, &ty) in type_of.iter().enumerate() {
            match representative.iter().find(|(t, _)| *t == ty) {
                Some(&(_, first)) => {
                    if self.row(first) != self.row(user) {
                        return Err(Error::InvalidParameter(format!(
                            "users {first} and {user} share type {ty} but have different utilities"
                        )));
                    }
                }
                None => representative.push((ty, user)),
            }
        }
        self.type_of = Some(type_of);
        Ok(self)
    }

    pub fn with_labels(mut self, users: Vec<String>, items: Vec<String>) -> Result<Self> {
        if users.len() != self.users || items.len() != self.items {
            return Err(Error::ShapeMismatch(format!(
                "labels for {}x{} given to a {}x{} matrix",
                users.len(),
                items.len(),
                self.users,
                self.items
            )));
        }
        self.user_labels = Some(users);
        self.item_labels = Some(items);
        Ok(self)
    }

    pub fn num_users(&self) -> usize {
        self.users
    }

    pub fn num_items(&self) -> usize {
        self.items
    }

    pub fn get(&self, user: usize, item: usize) -> f64 {
        self.values[user * self.items + item]
    }

    pub fn row(&self, user: usize) -> &[f64] {
        &self.values[user * self.items..(user + 1) * self.items]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.items)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn type_of(&self) -> Option<&[usize]> {
        self.type_of.as_deref()
    }

    pub fn user_labels(&self) -> Option<&[String]> {
        self.user_labels.as_deref()
    }

    pub fn item_labels(&self) -> Option<&[String]> {
        self.item_labels.as_deref()
    }

    pub fn user_label(&self, user: usize) -> String {
        match &self.user_labels {
            Some(labels) => labels[user].clone(),
            None => format!("u{}", user + 1),
        }
    }

    pub fn item_label(&self, item: usize) -> String {
        match &self.item_labels {
            Some(labels) => labels[item].clone(),
            None => format!("item{}", item + 1),
        }
    }

    pub fn row_max(&self, user: usize) -> f64 {
        self.row(user).iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn column_sum(&self, item: usize) -> f64 {
        self.rows().map(|r| r[item]).sum()
    }

    fn check_user(&self, user: usize) -> Result<()> {
        if user >= self.users {
            return Err(Error::IndexOutOfRange {
                what: "user",
                index: user,
                len: self.users,
            });
        }
        Ok(())
    }

    fn check_item(&self, item: usize) -> Result<()> {
        if item >= self.items {
            return Err(Error::IndexOutOfRange {
                what: "item",
                index: item,
                len: self.items,
            });
        }
        Ok(())
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }
}

/// Per-user (or per-type, when `reduced`) distributions over items.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationPolicy {
    rows: usize,
    items: usize,
    probs: Vec<f64>,
    reduced: bool,
}

impl RecommendationPolicy {
    pub fn new(rows: usize, items: usize, probs: Vec<f64>, reduced: bool) -> Result<Self> {
        if rows == 0 || items == 0 || probs.len() != rows * items {
            return Err(Error::ShapeMismatch(format!(
                "{} probabilities supplied for a {rows}x{items} policy",
                probs.len()
            )));
        }
        for (r, row) in probs.chunks_exact(items).enumerate() {
            if let Some(&p) = row.iter().find(|&&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidParameter(format!(
                    "policy row {r} has probability {p} outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "policy row {r} sums to {sum}, not 1"
                )));
            }
        }
        Ok(Self {
            rows,
            items,
            probs,
            reduced,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let items = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != items) {
            return Err(Error::ShapeMismatch("ragged policy rows".into()));
        }
        Self::new(rows.len(), items, rows.concat(), false)
    }

    /// Builds a policy from raw solver output: negative round-off is clipped
    /// and each row is rescaled to sum to exactly one.
    pub fn from_solver_output(rows: usize, items: usize, raw: &[f64], reduced: bool) -> Self {
        assert_eq!(raw.len(), rows * items, "solver output has the wrong length");
        let mut probs: Vec<f64> = raw.iter().map(|&p| p.max(0.0)).collect();
        for row in probs.chunks_exact_mut(items) {
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                row.iter_mut().for_each(|p| *p /= sum);
            } else {
                row.iter_mut().for_each(|p| *p = 1.0 / items as f64);
            }
        }
        Self {
            rows,
            items,
            probs,
            reduced,
        }
    }

    pub fn uniform(rows: usize, items: usize) -> Self {
        Self {
            rows,
            items,
            probs: vec![1.0 / items as f64; rows * items],
            reduced: false,
        }
    }

    /// Every user deterministically receives their favorite item (lowest
    /// index on ties).
    pub fn favorite(w: &UtilityMatrix) -> Self {
        let items = w.num_items();
        let mut probs = vec![0.0; w.num_users() * items];
        for (user, row) in w.rows().enumerate() {
            let best = argmax(row);
            probs[user * items + best] = 1.0;
        }
        Self {
            rows: w.num_users(),
            items,
            probs,
            reduced: false,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_items(&self) -> usize {
        self.items
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn get(&self, row: usize, item: usize) -> f64 {
        self.probs[row * self.items + item]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.probs[row * self.items..(row + 1) * self.items]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Expands a type-space policy to user space; `assignment[i]` is the
    /// row used for user `i`.
    pub fn expand(&self, assignment: &[usize]) -> Result<Self> {
        let mut probs = Vec::with_capacity(assignment.len() * self.items);
        for &ty in assignment {
            if ty >= self.rows {
                return Err(Error::IndexOutOfRange {
                    what: "policy row",
                    index: ty,
                    len: self.rows,
                });
            }
            probs.extend_from_slice(self.row(ty));
        }
        Ok(Self {
            rows: assignment.len(),
            items: self.items,
            probs,
            reduced: false,
        })
    }

    fn row_for_user(&self, w: &UtilityMatrix, user: usize) -> Result<usize> {
        if self.items != w.num_items() {
            return Err(Error::ShapeMismatch(format!(
                "policy covers {} items, matrix has {}",
                self.items,
                w.num_items()
            )));
        }
        if self.reduced {
            let types = w.type_of().ok_or_else(|| {
                Error::ShapeMismatch("type-space policy paired with an untyped matrix".into())
            })?;
            let ty = types[user];
            if ty >= self.rows {
                return Err(Error::ShapeMismatch(format!(
                    "user {user} has type {ty} but the policy has {} rows",
                    self.rows
                )));
            }
            Ok(ty)
        } else if self.rows == w.num_users() {
            Ok(user)
        } else {
            Err(Error::ShapeMismatch(format!(
                "policy has {} rows, matrix has {} users",
                self.rows,
                w.num_users()
            )))
        }
    }
}

/// How fairness aggregates a vector of normalized utilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FairnessMeasure {
    /// Minimum normalized utility.
    MaxMin,
    /// Sum of log normalized utilities.
    NashWelfare,
    /// Sum of the `k` smallest normalized utilities.
    SumKMin { k: usize },
}

impl FairnessMeasure {
    pub fn sum_k_min(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("sum-k-min needs k >= 1".into()));
        }
        Ok(FairnessMeasure::SumKMin { k })
    }

    pub fn name(&self) -> &'static str {
        match self {
            FairnessMeasure::MaxMin => "maxmin",
            FairnessMeasure::NashWelfare => "nash",
            FairnessMeasure::SumKMin { .. } => "sumkmin",
        }
    }

    /// Aggregates unit-weight utilities.
    pub fn evaluate(&self, utilities: &[f64]) -> Result<f64> {
        self.evaluate_weighted(utilities, &vec![1.0; utilities.len()])
    }

    /// Aggregates utilities where entry `r` stands for `weights[r]` identical
    /// agents (the type-space view of a population).
    pub fn evaluate_weighted(&self, utilities: &[f64], weights: &[f64]) -> Result<f64> {
        if utilities.is_empty() || utilities.len() != weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} utilities with {} weights",
                utilities.len(),
                weights.len()
            )));
        }
        match *self {
            FairnessMeasure::MaxMin => Ok(utilities.iter().copied().fold(f64::INFINITY, f64::min)),
            FairnessMeasure::NashWelfare => {
                let mut total = 0.0;
                for (&u, &wt) in utilities.iter().zip(weights) {
                    if u <= 0.0 {
                        return Err(Error::Domain(format!(
                            "Nash welfare is undefined with a zero utility ({u})"
                        )));
                    }
                    total += wt * u.ln();
                }
                Ok(total)
            }
            FairnessMeasure::SumKMin { k } => {
                let total_weight: f64 = weights.iter().sum();
                if k == 0 || k as f64 > total_weight + 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "sum-k-min with k = {k} over {total_weight} agents"
                    )));
                }
                let mut order: Vec<usize> = (0..utilities.len()).collect();
                order.sort_by(|&a, &b| utilities[a].total_cmp(&utilities[b]).then(a.cmp(&b)));
                let mut remaining = k as f64;
                let mut total = 0.0;
                for idx in order {
                    let take = weights[idx].min(remaining);
                    total += take * utilities[idx];
                    remaining -= take;
                    if remaining <= 0.0 {
                        break;
                    }
                }
                Ok(total)
            }
        }
    }
}

/// Item-side utilities interpolated between the user utilities
/// (`delta = 0`) and pure exposure (`delta = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItemUtilityModel {
    delta: f64,
}

impl ItemUtilityModel {
    pub const SYMMETRIC: ItemUtilityModel = ItemUtilityModel { delta: 0.0 };
    pub const EXPOSURE: ItemUtilityModel = ItemUtilityModel { delta: 1.0 };

    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!(
                "item utility interpolation {delta} outside [0, 1]"
            )));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn transform(&self, value: f64) -> f64 {
        self.delta + (1.0 - self.delta) * value
    }
}

impl Default for ItemUtilityModel {
    fn default() -> Self {
        Self::SYMMETRIC
    }
}

pub fn apply_item_utility_model(w: &UtilityMatrix, model: ItemUtilityModel) -> UtilityMatrix {
    if model.delta == 0.0 {
        return w.clone();
    }
    w.map_values(|v| model.transform(v))
}

/// `U_i = sum_j rho_ij w_ij / max_j w_ij`.
pub fn normalized_user_utility(
    policy: &RecommendationPolicy,
    w: &UtilityMatrix,
    user: usize,
) -> Result<f64> {
    w.check_user(user)?;
    let row = policy.row_for_user(w, user)?;
    let realized: f64 = policy
        .row(row)
        .iter()
        .zip(w.row(user))
        .map(|(p, v)| p * v)
        .sum();
    Ok(realized / w.row_max(user))
}

/// `I_j = sum_i rho_ij w^I_ij / sum_i w^I_ij` on the item-side utilities.
pub fn normalized_item_utility(
    policy: &RecommendationPolicy,
    w: &UtilityMatrix,
    model: ItemUtilityModel,
    item: usize,
) -> Result<f64> {
    w.check_item(item)?;
    let item_side = apply_item_utility_model(w, model);
    item_utility_on(policy, &item_side, item)
}

fn item_utility_on(policy: &RecommendationPolicy, w: &UtilityMatrix, item: usize) -> Result<f64> {
    let mut realized = 0.0;
    let mut total = 0.0;
    for user in 0..w.num_users() {
        let row = policy.row_for_user(w, user)?;
        let value = w.get(user, item);
        realized += policy.get(row, item) * value;
        total += value;
    }
    Ok(realized / total)
}

pub fn user_utilities(policy: &RecommendationPolicy, w: &UtilityMatrix) -> Result<Vec<f64>> {
    (0..w.num_users())
        .map(|i| normalized_user_utility(policy, w, i))
        .collect()
}

pub fn item_utilities(
    policy: &RecommendationPolicy,
    w: &UtilityMatrix,
    model: ItemUtilityModel,
) -> Result<Vec<f64>> {
    let item_side = apply_item_utility_model(w, model);
    (0..w.num_items())
        .map(|j| item_utility_on(policy, &item_side, j))
        .collect()
}

pub fn user_fairness(
    policy: &RecommendationPolicy,
    w: &UtilityMatrix,
    measure: FairnessMeasure,
) -> Result<f64> {
    measure.evaluate(&user_utilities(policy, w)?)
}

pub fn item_fairness(
    policy: &RecommendationPolicy,
    w: &UtilityMatrix,
    model: ItemUtilityModel,
    measure: FairnessMeasure,
) -> Result<f64> {
    measure.evaluate(&item_utilities(policy, w, model)?)
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = j;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn favorite_policy_gives_unit_user_utility() {
        let w = UtilityMatrix::from_rows(&[vec![0.2, 0.7, 0.1], vec![5.0, 1.0, 2.0]]).unwrap();
        let policy = RecommendationPolicy::favorite(&w);
        for i in 0..2 {
            assert!(close(normalized_user_utility(&policy, &w, i).unwrap(), 1.0));
        }
    }

    #[test]
    fn uniform_policy_user_utility() {
        let w = UtilityMatrix::from_rows(&[vec![3.0, 2.0, 1.0]]).unwrap();
        let policy = RecommendationPolicy::uniform(1, 3);
        assert!(close(normalized_user_utility(&policy, &w, 0).unwrap(), 2.0 / 3.0));
    }

    #[test]
    fn homogeneous_two_item_user_utility() {
        let eps = 0.1;
        let w = UtilityMatrix::from_rows(&[vec![1.0 - eps, eps]]).unwrap();
        let policy = RecommendationPolicy::from_rows(&[vec![0.5, 0.5]]).unwrap();
        assert!(close(normalized_user_utility(&policy, &w, 0).unwrap(), 5.0 / 9.0));
    }

    #[test]
    fn item_utilities_track_the_policy_for_identical_users() {
        let eps = 0.1;
        let w = UtilityMatrix::from_rows(&[vec![1.0 - eps, eps], vec![1.0 - eps, eps]]).unwrap();
        let policy = RecommendationPolicy::from_rows(&[vec![0.7, 0.3], vec![0.7, 0.3]]).unwrap();
        let items = item_utilities(&policy, &w, ItemUtilityModel::SYMMETRIC).unwrap();
        assert!(close(items[0], 0.7));
        assert!(close(items[1], 0.3));
    }

    #[test]
    fn exposure_model_is_mean_probability() {
        let w = UtilityMatrix::from_rows(&[vec![1.0, 2.0, 3.0, 4.0], vec![9.0, 1.0, 1.0, 1.0]])
            .unwrap();
        let policy = RecommendationPolicy::uniform(2, 4);
        for j in 0..4 {
            let value = normalized_item_utility(&policy, &w, ItemUtilityModel::EXPOSURE, j).unwrap();
            assert!(close(value, 0.25));
        }
    }

    #[test]
    fn starved_item_has_zero_utility_and_fairness() {
        let w = UtilityMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap();
        let policy = RecommendationPolicy::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(normalized_item_utility(&policy, &w, ItemUtilityModel::SYMMETRIC, 1).unwrap(), 0.0);
        let fairness =
            item_fairness(&policy, &w, ItemUtilityModel::SYMMETRIC, FairnessMeasure::MaxMin).unwrap();
        assert_eq!(fairness, 0.0);
    }

    #[test]
    fn diverse_favorites_give_item_fairness_one_minus_eps() {
        let eps = 0.2;
        let w = UtilityMatrix::from_rows(&[vec![eps, 1.0 - eps], vec![1.0 - eps, eps]]).unwrap();
        let policy = RecommendationPolicy::favorite(&w);
        let fairness =
            item_fairness(&policy, &w, ItemUtilityModel::SYMMETRIC, FairnessMeasure::MaxMin).unwrap();
        assert!(close(fairness, 1.0 - eps));
    }

    #[test]
    fn uniform_matrix_uniform_policy_item_fairness() {
        let w = UtilityMatrix::new(3, 5, vec![0.4; 15]).unwrap();
        let policy = RecommendationPolicy::uniform(3, 5);
        let fairness =
            item_fairness(&policy, &w, ItemUtilityModel::SYMMETRIC, FairnessMeasure::MaxMin).unwrap();
        assert!(close(fairness, 0.2));
    }

    #[test]
    fn measures_aggregate_as_documented() {
        assert_eq!(FairnessMeasure::NashWelfare.evaluate(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        let k2 = FairnessMeasure::sum_k_min(2).unwrap();
        assert!(close(k2.evaluate(&[0.9, 0.2, 0.5]).unwrap(), 0.7));
        assert!(matches!(
            FairnessMeasure::NashWelfare.evaluate(&[0.5, 0.0]),
            Err(Error::Domain(_))
        ));
        assert!(FairnessMeasure::sum_k_min(4).unwrap().evaluate(&[0.1, 0.2]).is_err());
        assert!(FairnessMeasure::sum_k_min(0).is_err());
    }

    #[test]
    fn weighted_sum_k_min_counts_multiplicity() {
        let k3 = FairnessMeasure::SumKMin { k: 3 };
        // two agents at 0.2, five at 0.6
        let value = k3.evaluate_weighted(&[0.6, 0.2], &[5.0, 2.0]).unwrap();
        assert!(close(value, 0.2 + 0.2 + 0.6));
    }

    #[test]
    fn item_model_transform() {
        let w = UtilityMatrix::from_rows(&[vec![0.4, 2.0]]).unwrap();
        assert_eq!(apply_item_utility_model(&w, ItemUtilityModel::SYMMETRIC), w);
        let exposure = apply_item_utility_model(&w, ItemUtilityModel::EXPOSURE);
        assert!(exposure.values().iter().all(|&v| v == 1.0));
        let half = apply_item_utility_model(&w, ItemUtilityModel::new(0.5).unwrap());
        assert!(close(half.get(0, 0), 0.7));
        assert!(ItemUtilityModel::new(1.5).is_err());
        assert!(ItemUtilityModel::new(-0.1).is_err());
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            UtilityMatrix::from_rows(&[vec![1.0, 0.0]]),
            Err(Error::NonPositiveEntry { row: 0, col: 1, .. })
        ));
        assert!(UtilityMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(UtilityMatrix::new(0, 2, vec![]).is_err());
        let w = UtilityMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(w.clone().with_types(vec![0, 0]).is_err());
        assert!(w.with_types(vec![0, 1]).is_ok());
        assert!(RecommendationPolicy::from_rows(&[vec![0.5, 0.6]]).is_err());
        assert!(RecommendationPolicy::from_rows(&[vec![1.2, -0.2]]).is_err());
    }

    #[test]
    fn evaluation_errors() {
        let w = UtilityMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let policy = RecommendationPolicy::uniform(2, 2);
        assert!(matches!(
            normalized_user_utility(&policy, &w, 0),
            Err(Error::ShapeMismatch(_))
        ));
        let policy = RecommendationPolicy::uniform(1, 2);
        assert!(matches!(
            normalized_user_utility(&policy, &w, 3),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(normalized_item_utility(&policy, &w, ItemUtilityModel::SYMMETRIC, 2).is_err());
    }

    #[test]
    fn reduced_policy_reads_type_rows() {
        let w = UtilityMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, 3.0], vec![3.0, 1.0]])
            .unwrap()
            .with_types(vec![0, 1, 0])
            .unwrap();
        let typed = RecommendationPolicy::new(2, 2, vec![1.0, 0.0, 0.0, 1.0], true).unwrap();
        let utilities = user_utilities(&typed, &w).unwrap();
        assert_eq!(utilities, vec![1.0, 1.0, 1.0]);
        let expanded = typed.expand(&[0, 1, 0]).unwrap();
        assert_eq!(user_utilities(&expanded, &w).unwrap(), utilities);
    }
}
