//! Item-fair and user-fair optima, tradeoff sweeps and fairness prices.
//!
//! Problems are solved in type space: users with identical rows share one
//! policy row, weighted by the number of users of that type. Every measure
//! here is concave and symmetric within a type, so some optimum treats
//! identical users identically and the reduction loses nothing.
//!
//! Variables are laid out type-major: `rho[k * n + j]` is the probability
//! that a user of type `k` is recommended item `j`.

pub mod nash;
pub mod prices;
pub mod sweep;

use crate::error::{Error, Result};
use crate::lp::{
    add_k_smallest_lift, solve_lp, solve_maxmin_linear, sum_k_smallest_weighted, AffineForm,
    Bounds, LpInstance, Relation,
};
use crate::model::{
    apply_item_utility_model, argmax, FairnessMeasure, ItemUtilityModel, RecommendationPolicy,
    UtilityMatrix,
};

use nash::{nash_concave_solve, LogTerm, NashProblem};

pub use prices::{
    fairness_prices, price_of_fairness, price_of_misestimation, FairnessPrices, MisestScope,
};
pub use sweep::{tradeoff_sweep, CurveRow, RowStatus, TradeoffCurve};

/// Tolerance for solver-level guarantees such as equal item utilities at the
/// item-fair optimum.
pub const SOLUTION_TOL: f64 = 1e-6;

/// Relative slack on the log-welfare item constraint, which keeps the barrier
/// solver's feasible set full-dimensional at `gamma = 1`.
const NASH_CONSTRAINT_SLACK: f64 = 1e-12;

/// Users grouped into types with identical rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedPopulation {
    types: UtilityMatrix,
    masses: Vec<f64>,
    assignment: Option<Vec<usize>>,
}

impl TypedPopulation {
    /// Types with explicit (possibly fractional) masses and no user list.
    pub fn new(types: UtilityMatrix, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != types.num_users() {
            return Err(Error::ShapeMismatch(format!(
                "{} masses for {} types",
                masses.len(),
                types.num_users()
            )));
        }
        if let Some(&bad) = masses.iter().find(|&&m| !(m.is_finite() && m > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "type masses must be positive, got {bad}"
            )));
        }
        Ok(Self {
            types,
            masses,
            assignment: None,
        })
    }

    pub fn num_types(&self) -> usize {
        self.types.num_users()
    }

    pub fn num_items(&self) -> usize {
        self.types.num_items()
    }

    /// One row per type.
    pub fn types(&self) -> &UtilityMatrix {
        &self.types
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Type of each original user, when the population came from a matrix.
    pub fn assignment(&self) -> Option<&[usize]> {
        self.assignment.as_deref()
    }

    /// Expands a type-space policy to one row per original user.
    pub fn expand(&self, policy: &RecommendationPolicy) -> Result<RecommendationPolicy> {
        let assignment = self.assignment.as_ref().ok_or_else(|| {
            Error::InvalidParameter("population has no user list to expand into".into())
        })?;
        policy.expand(assignment)
    }
}

/// Groups users into types, using `type_of` when present and exact row
/// equality otherwise. Types are numbered in order of first appearance.
pub fn reduce_by_types(w: &UtilityMatrix) -> TypedPopulation {
    let mut ids: Vec<usize> = Vec::new();
    let mut representatives: Vec<usize> = Vec::new();
    let mut assignment = Vec::with_capacity(w.num_users());
    for user in 0..w.num_users() {
        let found = match w.type_of() {
            Some(types) => ids.iter().position(|&id| id == types[user]),
            None => representatives.iter().position(|&r| w.row(r) == w.row(user)),
        };
        let ty = found.unwrap_or_else(|| {
            ids.push(w.type_of().map_or(0, |t| t[user]));
            representatives.push(user);
            representatives.len() - 1
        });
        assignment.push(ty);
    }
    let mut masses = vec![0.0; representatives.len()];
    for &ty in &assignment {
        masses[ty] += 1.0;
    }
    let rows: Vec<Vec<f64>> = representatives.iter().map(|&r| w.row(r).to_vec()).collect();
    let types = UtilityMatrix::from_rows(&rows).expect("rows of a valid matrix are valid");
    TypedPopulation {
        types,
        masses,
        assignment: Some(assignment),
    }
}

/// How ties among optimal policies are broken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Whatever optimum the solver returns.
    #[default]
    SolverDefault,
    /// Without an item constraint, spread each type uniformly over its
    /// favorite items. With one, average the solver's optimum with its mirror
    /// image when the population is invariant under reversing the item order
    /// and swapping each type with its reversed partner.
    CanonicalSymmetric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemOptimum {
    /// Best achievable item fairness.
    pub value: f64,
    /// Type-space policy attaining it.
    pub policy: RecommendationPolicy,
    /// True when the policy is a basic solution of the linear program.
    pub is_vertex: bool,
    /// Optimality certificate of the concave solver (0 for linear programs).
    pub certificate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserOptimum {
    pub gamma: f64,
    /// Best user fairness subject to the item constraint.
    pub value: f64,
    /// Type-space policy attaining it.
    pub policy: RecommendationPolicy,
    /// Item fairness of `policy`.
    pub item_fairness: f64,
    /// Lower bound on item fairness imposed at this `gamma`.
    pub item_target: f64,
}

/// One population, item model and measure, with precomputed normalized
/// utility coefficients.
#[derive(Debug, Clone)]
pub struct FairProblem {
    population: TypedPopulation,
    item_model: ItemUtilityModel,
    measure: FairnessMeasure,
    user_rows: Vec<AffineForm>,
    item_rows: Vec<AffineForm>,
}

impl FairProblem {
    pub fn new(
        w: &UtilityMatrix,
        item_model: ItemUtilityModel,
        measure: FairnessMeasure,
    ) -> Result<Self> {
        Self::from_population(reduce_by_types(w), item_model, measure)
    }

    pub fn from_population(
        population: TypedPopulation,
        item_model: ItemUtilityModel,
        measure: FairnessMeasure,
    ) -> Result<Self> {
        let k_types = population.num_types();
        let n = population.num_items();
        let vars = k_types * n;
        if let FairnessMeasure::SumKMin { k } = measure {
            if k == 0 || k > n || k as f64 > population.total_mass() + 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "sum-k-min with k = {k} needs 1 <= k <= min(users, items) = min({}, {n})",
                    population.total_mass()
                )));
            }
        }
        let w = population.types();
        let user_rows = (0..k_types)
            .map(|k| {
                let mut coeffs = vec![0.0; vars];
                let best = w.row_max(k);
                for j in 0..n {
                    coeffs[k * n + j] = w.get(k, j) / best;
                }
                AffineForm::linear(coeffs)
            })
            .collect();
        let item_side = apply_item_utility_model(w, item_model);
        let item_rows = (0..n)
            .map(|j| {
                let total: f64 = (0..k_types)
                    .map(|k| population.masses[k] * item_side.get(k, j))
                    .sum();
                let mut coeffs = vec![0.0; vars];
                for k in 0..k_types {
                    coeffs[k * n + j] = population.masses[k] * item_side.get(k, j) / total;
                }
                AffineForm::linear(coeffs)
            })
            .collect();
        Ok(Self {
            population,
            item_model,
            measure,
            user_rows,
            item_rows,
        })
    }

    pub fn population(&self) -> &TypedPopulation {
        &self.population
    }

    pub fn measure(&self) -> FairnessMeasure {
        self.measure
    }

    pub fn item_model(&self) -> ItemUtilityModel {
        self.item_model
    }

    fn num_vars(&self) -> usize {
        self.population.num_types() * self.population.num_items()
    }

    /// Normalized utility of each type under a type-space policy.
    pub fn user_utilities(&self, policy: &RecommendationPolicy) -> Vec<f64> {
        let p = policy.probabilities();
        self.user_rows.iter().map(|r| r.eval(p)).collect()
    }

    /// Normalized utility of each item under a type-space policy.
    pub fn item_utilities(&self, policy: &RecommendationPolicy) -> Vec<f64> {
        let p = policy.probabilities();
        self.item_rows.iter().map(|r| r.eval(p)).collect()
    }

    /// User fairness of a type-space policy, counting each type by its mass.
    pub fn user_fairness(&self, policy: &RecommendationPolicy) -> Result<f64> {
        self.measure
            .evaluate_weighted(&self.user_utilities(policy), &self.population.masses)
    }

    pub fn item_fairness(&self, policy: &RecommendationPolicy) -> Result<f64> {
        self.measure.evaluate(&self.item_utilities(policy))
    }

    fn simplex_region(&self) -> LpInstance {
        let n = self.population.num_items();
        let vars = self.num_vars();
        let mut lp = LpInstance::new(vars);
        for k in 0..self.population.num_types() {
            let mut coeffs = vec![0.0; vars];
            coeffs[k * n..(k + 1) * n].iter_mut().for_each(|c| *c = 1.0);
            lp.add_constraint(coeffs, Relation::Eq, 1.0);
        }
        lp
    }

    fn policy_from(&self, raw: &[f64]) -> RecommendationPolicy {
        RecommendationPolicy::from_solver_output(
            self.population.num_types(),
            self.population.num_items(),
            &raw[..self.num_vars()],
            true,
        )
    }

    fn blocks(&self) -> Vec<std::ops::Range<usize>> {
        let n = self.population.num_items();
        (0..self.population.num_types())
            .map(|k| k * n..(k + 1) * n)
            .collect()
    }

    fn item_log_terms(&self) -> Vec<LogTerm> {
        self.item_rows
            .iter()
            .map(|r| LogTerm::new(1.0, r.coeffs.clone()))
            .collect()
    }

    /// Best achievable item fairness and a policy attaining it.
    pub fn item_optimum(&self) -> Result<ItemOptimum> {
        match self.measure {
            FairnessMeasure::MaxMin => {
                // Some optimum equalizes all item utilities, so maximize the
                // common level directly.
                let mut lp = self.simplex_region();
                let level = lp.add_var(Bounds::NONNEGATIVE);
                let mut objective = vec![0.0; lp.num_vars()];
                objective[level] = 1.0;
                lp.set_objective(objective);
                for row in &self.item_rows {
                    let mut coeffs = row.coeffs.clone();
                    coeffs.push(-1.0);
                    lp.add_constraint(coeffs, Relation::Eq, 0.0);
                }
                let sol = solve_lp(&lp)?.into_optimal()?;
                let policy = self.policy_from(&sol.point);
                Ok(ItemOptimum {
                    value: self.item_fairness(&policy)?,
                    policy,
                    is_vertex: sol.is_vertex,
                    certificate: 0.0,
                })
            }
            FairnessMeasure::SumKMin { k } => {
                let ones = vec![1.0; self.item_rows.len()];
                let sol =
                    sum_k_smallest_weighted(&self.item_rows, &ones, k as f64, &self.simplex_region())?;
                let policy = self.policy_from(&sol.point);
                Ok(ItemOptimum {
                    value: self.item_fairness(&policy)?,
                    policy,
                    is_vertex: sol.is_vertex,
                    certificate: 0.0,
                })
            }
            FairnessMeasure::NashWelfare => {
                let sol = nash_concave_solve(&NashProblem {
                    blocks: self.blocks(),
                    objective: self.item_log_terms(),
                    constraint: None,
                    start: None,
                })?;
                let policy = self.policy_from(&sol.point);
                Ok(ItemOptimum {
                    value: self.item_fairness(&policy)?,
                    policy,
                    is_vertex: false,
                    certificate: sol.certificate,
                })
            }
        }
    }

    /// Item-fairness lower bound at `gamma`. The log-welfare measure is
    /// nonpositive, so its bound `item_star / gamma` tightens as `gamma`
    /// grows; `gamma = 0` leaves items unconstrained.
    pub fn item_target(&self, gamma: f64, item_star: f64) -> f64 {
        match self.measure {
            FairnessMeasure::NashWelfare if gamma == 0.0 => f64::NEG_INFINITY,
            FairnessMeasure::NashWelfare => item_star / gamma,
            _ => gamma * item_star,
        }
    }

    /// Best user fairness among policies whose item fairness is at least the
    /// `gamma`-scaled item optimum.
    pub fn user_optimum(
        &self,
        gamma: f64,
        item_opt: &ItemOptimum,
        tie_break: TieBreak,
    ) -> Result<UserOptimum> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {gamma} outside [0, 1]"
            )));
        }
        let target = self.item_target(gamma, item_opt.value);
        let policy = if gamma == 0.0 && tie_break == TieBreak::CanonicalSymmetric {
            self.favorite_mix()
        } else {
            let raw = self.solve_user_side(gamma, item_opt, target)?;
            let policy = self.policy_from(&raw);
            match tie_break {
                TieBreak::CanonicalSymmetric => self.symmetrize(&policy).unwrap_or(policy),
                TieBreak::SolverDefault => policy,
            }
        };
        Ok(UserOptimum {
            gamma,
            value: self.user_fairness(&policy)?,
            item_fairness: self.item_fairness(&policy)?,
            item_target: target,
            policy,
        })
    }

    fn solve_user_side(&self, gamma: f64, item_opt: &ItemOptimum, target: f64) -> Result<Vec<f64>> {
        let vars = self.num_vars();
        match self.measure {
            FairnessMeasure::MaxMin => {
                let mut region = self.simplex_region();
                if gamma > 0.0 {
                    for row in &self.item_rows {
                        region.add_constraint(row.coeffs.clone(), Relation::Ge, target);
                    }
                }
                Ok(solve_maxmin_linear(&self.user_rows, &region)?.point)
            }
            FairnessMeasure::SumKMin { k } => {
                let mut region = self.simplex_region();
                if gamma > 0.0 {
                    let (level, slacks) = add_k_smallest_lift(&mut region, &self.item_rows, vars);
                    let mut coeffs = vec![0.0; region.num_vars()];
                    coeffs[level] = k as f64;
                    for s in slacks {
                        coeffs[s] = -1.0;
                    }
                    region.add_constraint(coeffs, Relation::Ge, target);
                }
                let width = region.num_vars();
                let rows: Vec<AffineForm> = self
                    .user_rows
                    .iter()
                    .map(|r| {
                        let mut coeffs = r.coeffs.clone();
                        coeffs.resize(width, 0.0);
                        AffineForm::linear(coeffs)
                    })
                    .collect();
                Ok(sum_k_smallest_weighted(&rows, &self.population.masses, k as f64, &region)?.point)
            }
            FairnessMeasure::NashWelfare => {
                let objective: Vec<LogTerm> = self
                    .user_rows
                    .iter()
                    .zip(&self.population.masses)
                    .map(|(r, &mass)| LogTerm::new(mass, r.coeffs.clone()))
                    .collect();
                let (constraint, start) = if gamma > 0.0 {
                    let bound = target - NASH_CONSTRAINT_SLACK * target.abs().max(1.0);
                    (
                        Some((self.item_log_terms(), bound)),
                        Some(item_opt.policy.probabilities().to_vec()),
                    )
                } else {
                    (None, None)
                };
                let sol = nash_concave_solve(&NashProblem {
                    blocks: self.blocks(),
                    objective,
                    constraint,
                    start,
                })?;
                Ok(sol.point)
            }
        }
    }

    /// Each type spread uniformly over its favorite items.
    fn favorite_mix(&self) -> RecommendationPolicy {
        let w = self.population.types();
        let n = w.num_items();
        let mut probs = Vec::with_capacity(w.num_users() * n);
        for row in w.rows() {
            let best = row[argmax(row)];
            let tied: Vec<bool> = row.iter().map(|&v| v >= best * (1.0 - 1e-12)).collect();
            let count = tied.iter().filter(|&&t| t).count() as f64;
            probs.extend(tied.iter().map(|&t| if t { 1.0 / count } else { 0.0 }));
        }
        RecommendationPolicy::from_solver_output(w.num_users(), n, &probs, true)
    }

    /// For each type, the type whose row is its exact reversal with equal
    /// mass; `None` unless every type has one.
    fn reversal_partners(&self) -> Option<Vec<usize>> {
        let w = self.population.types();
        let masses = &self.population.masses;
        (0..w.num_users())
            .map(|k| {
                let rev: Vec<f64> = w.row(k).iter().rev().copied().collect();
                (0..w.num_users())
                    .find(|&p| w.row(p) == rev.as_slice() && (masses[p] - masses[k]).abs() <= 1e-12)
            })
            .collect()
    }

    fn symmetrize(&self, policy: &RecommendationPolicy) -> Option<RecommendationPolicy> {
        let partners = self.reversal_partners()?;
        let n = self.population.num_items();
        let mut probs = Vec::with_capacity(policy.probabilities().len());
        for (k, &p) in partners.iter().enumerate() {
            let own = policy.row(k);
            let mirror = policy.row(p);
            probs.extend((0..n).map(|j| 0.5 * (own[j] + mirror[n - 1 - j])));
        }
        Some(RecommendationPolicy::from_solver_output(
            self.population.num_types(),
            n,
            &probs,
            true,
        ))
    }
}

/// Best achievable item fairness on `w` and a user-space policy attaining it.
pub fn compute_if_star(
    w: &UtilityMatrix,
    item_model: ItemUtilityModel,
    measure: FairnessMeasure,
) -> Result<(f64, RecommendationPolicy)> {
    let problem = FairProblem::new(w, item_model, measure)?;
    let opt = problem.item_optimum()?;
    Ok((opt.value, problem.population().expand(&opt.policy)?))
}

/// Best user fairness on `w` among policies with item fairness at least
/// `gamma` times the optimum, and a user-space policy attaining it.
pub fn compute_uf_star(
    w: &UtilityMatrix,
    gamma: f64,
    item_model: ItemUtilityModel,
    measure: FairnessMeasure,
    tie_break: TieBreak,
) -> Result<(f64, RecommendationPolicy)> {
    let problem = FairProblem::new(w, item_model, measure)?;
    let item_opt = problem.item_optimum()?;
    let opt = problem.user_optimum(gamma, &item_opt, tie_break)?;
    Ok((opt.value, problem.population().expand(&opt.policy)?))
}
