//! Relative losses in user fairness caused by item-fairness requirements and
//! by optimizing on misestimated utilities.

use super::{FairProblem, ItemOptimum, TieBreak};
use crate::error::{Error, Result};
use crate::model::{user_utilities, FairnessMeasure, ItemUtilityModel, UtilityMatrix};

/// Which users the price of misestimation is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MisestScope {
    AllUsers,
    /// Only users whose estimated row differs from their true row.
    MisestimatedGroup,
}

impl MisestScope {
    pub fn name(&self) -> &'static str {
        match self {
            MisestScope::AllUsers => "all",
            MisestScope::MisestimatedGroup => "misest-group",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FairnessPrices {
    /// Price of fairness on the true utilities.
    pub pof: f64,
    /// `(gamma, price of misestimation)` pairs.
    pub pom_by_gamma: Vec<(f64, f64)>,
    pub scope: MisestScope,
}

fn relative_loss(reference: f64, achieved: f64, what: &str) -> Result<f64> {
    if !(reference > 0.0) {
        return Err(Error::Domain(format!(
            "{what} is undefined when the reference fairness is {reference}"
        )));
    }
    Ok((reference - achieved) / reference)
}

fn reject_log_welfare(measure: FairnessMeasure, what: &str) -> Result<()> {
    if measure == FairnessMeasure::NashWelfare {
        return Err(Error::Domain(format!(
            "{what} is a ratio of fairness values and is undefined for log welfare, whose optimum is 0"
        )));
    }
    Ok(())
}

/// `(UF*(0) - UF*(1)) / UF*(0)` on `w`.
pub fn price_of_fairness(
    w: &UtilityMatrix,
    item_model: ItemUtilityModel,
    measure: FairnessMeasure,
) -> Result<f64> {
    reject_log_welfare(measure, "the price of fairness")?;
    let problem = FairProblem::new(w, item_model, measure)?;
    let item_opt = problem.item_optimum()?;
    pof_of(&problem, &item_opt)
}

fn pof_of(problem: &FairProblem, item_opt: &ItemOptimum) -> Result<f64> {
    let free = problem.user_optimum(0.0, item_opt, TieBreak::SolverDefault)?;
    let fair = problem.user_optimum(1.0, item_opt, TieBreak::SolverDefault)?;
    relative_loss(free.value, fair.value, "the price of fairness")
}

/// Users whose estimated row differs from the true one.
pub fn misestimated_users(truth: &UtilityMatrix, estimate: &UtilityMatrix) -> Result<Vec<usize>> {
    if truth.num_users() != estimate.num_users() || truth.num_items() != estimate.num_items() {
        return Err(Error::ShapeMismatch(format!(
            "true utilities are {}x{} but estimates are {}x{}",
            truth.num_users(),
            truth.num_items(),
            estimate.num_users(),
            estimate.num_items()
        )));
    }
    Ok((0..truth.num_users())
        .filter(|&i| truth.row(i) != estimate.row(i))
        .collect())
}

struct MisestContext<'a> {
    truth: &'a UtilityMatrix,
    truth_problem: FairProblem,
    truth_item: ItemOptimum,
    estimate_problem: FairProblem,
    estimate_item: ItemOptimum,
    scope_users: Vec<usize>,
    measure: FairnessMeasure,
    tie_break: TieBreak,
}

impl<'a> MisestContext<'a> {
    fn new(
        truth: &'a UtilityMatrix,
        estimate: &UtilityMatrix,
        item_model: ItemUtilityModel,
        measure: FairnessMeasure,
        scope: MisestScope,
        tie_break: TieBreak,
    ) -> Result<Self> {
        reject_log_welfare(measure, "the price of misestimation")?;
        let misestimated = misestimated_users(truth, estimate)?;
        let scope_users = match scope {
            MisestScope::AllUsers => (0..truth.num_users()).collect(),
            MisestScope::MisestimatedGroup => {
                if misestimated.is_empty() {
                    return Err(Error::InvalidParameter(
                        "no user is misestimated, so the misestimated group is empty".into(),
                    ));
                }
                misestimated
            }
        };
        let truth_problem = FairProblem::new(truth, item_model, measure)?;
        let truth_item = truth_problem.item_optimum()?;
        let estimate_problem = FairProblem::new(estimate, item_model, measure)?;
        let estimate_item = estimate_problem.item_optimum()?;
        Ok(Self {
            truth,
            truth_problem,
            truth_item,
            estimate_problem,
            estimate_item,
            scope_users,
            measure,
            tie_break,
        })
    }

    /// Fairness of the scoped users on the true utilities when `problem`'s
    /// optimum at `gamma` is deployed.
    fn scoped_fairness(&self, problem: &FairProblem, item: &ItemOptimum, gamma: f64) -> Result<f64> {
        let opt = problem.user_optimum(gamma, item, self.tie_break)?;
        let policy = problem.population().expand(&opt.policy)?;
        let utilities = user_utilities(&policy, self.truth)?;
        let scoped: Vec<f64> = self.scope_users.iter().map(|&i| utilities[i]).collect();
        self.measure.evaluate(&scoped)
    }

    fn price(&self, gamma: f64) -> Result<f64> {
        let achieved = self.scoped_fairness(&self.estimate_problem, &self.estimate_item, gamma)?;
        let reference = self.scoped_fairness(&self.truth_problem, &self.truth_item, gamma)?;
        relative_loss(reference, achieved, "the price of misestimation")
    }
}

/// Relative loss in true user fairness over `scope` when the `gamma`-fair
/// optimum is computed on `estimate` instead of `truth`.
///
/// The reference is the same scoped measure under the `gamma`-fair optimum on
/// `truth`, computed with the same tie-break. Over all users it is the true
/// optimum itself.
pub fn price_of_misestimation(
    truth: &UtilityMatrix,
    estimate: &UtilityMatrix,
    gamma: f64,
    item_model: ItemUtilityModel,
    measure: FairnessMeasure,
    scope: MisestScope,
    tie_break: TieBreak,
) -> Result<f64> {
    MisestContext::new(truth, estimate, item_model, measure, scope, tie_break)?.price(gamma)
}

/// Price of fairness on `truth` and the price of misestimation at each
/// `gamma`, sharing item optima across the grid.
pub fn fairness_prices(
    truth: &UtilityMatrix,
    estimate: &UtilityMatrix,
    gammas: &[f64],
    item_model: ItemUtilityModel,
    measure: FairnessMeasure,
    scope: MisestScope,
    tie_break: TieBreak,
) -> Result<FairnessPrices> {
    super::sweep::validate_gamma_grid(gammas)?;
    let ctx = MisestContext::new(truth, estimate, item_model, measure, scope, tie_break)?;
    let pof = pof_of(&ctx.truth_problem, &ctx.truth_item)?;
    let pom_by_gamma = gammas
        .iter()
        .map(|&g| Ok((g, ctx.price(g)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FairnessPrices {
        pof,
        pom_by_gamma,
        scope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::{gen_homogeneous, gen_misestimation, gen_two_type};

    const SYM: ItemUtilityModel = ItemUtilityModel::SYMMETRIC;
    const MAXMIN: FairnessMeasure = FairnessMeasure::MaxMin;

    #[test]
    fn extreme_populations() {
        let eps = 0.2;
        let homogeneous = gen_homogeneous(&[1.0 - eps, eps], 4).unwrap();
        let expected = (1.0 - 2.0 * eps) / (2.0 * (1.0 - eps));
        assert!((price_of_fairness(&homogeneous, SYM, MAXMIN).unwrap() - expected).abs() < 1e-9);
        let diverse = gen_two_type(&[1.0 - eps, eps], 0.5, 4).unwrap();
        assert!(price_of_fairness(&diverse, SYM, MAXMIN).unwrap().abs() < 1e-9);
        let worked = gen_two_type(&[3.0, 2.0, 1.0], 0.5, 10).unwrap();
        assert!((price_of_fairness(&worked, SYM, MAXMIN).unwrap() - 1.0 / 7.0).abs() < 1e-9);
    }

    #[test]
    fn log_welfare_prices_are_undefined() {
        let w = gen_homogeneous(&[0.9, 0.1], 2).unwrap();
        assert!(matches!(
            price_of_fairness(&w, SYM, FairnessMeasure::NashWelfare),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn exact_estimates_cost_nothing() {
        let w = gen_two_type(&[4.0, 2.0, 1.0], 0.3, 10).unwrap();
        for gamma in [0.0, 0.5, 1.0] {
            let price = price_of_misestimation(
                &w,
                &w,
                gamma,
                SYM,
                MAXMIN,
                MisestScope::AllUsers,
                TieBreak::SolverDefault,
            )
            .unwrap();
            assert_eq!(price, 0.0);
        }
        assert!(price_of_misestimation(
            &w,
            &w,
            0.0,
            SYM,
            MAXMIN,
            MisestScope::MisestimatedGroup,
            TieBreak::SolverDefault
        )
        .is_err());
    }

    #[test]
    fn cold_start_prices() {
        let pop = gen_misestimation(&[3.0, 2.0, 1.0], 0.4, 10, 3).unwrap();
        let prices = fairness_prices(
            &pop.truth,
            &pop.estimate,
            &[0.0, 1.0],
            SYM,
            MAXMIN,
            MisestScope::AllUsers,
            TieBreak::CanonicalSymmetric,
        )
        .unwrap();
        assert!((prices.pom_by_gamma[0].1 - 1.0 / 3.0).abs() < 1e-9);
        assert!((prices.pom_by_gamma[1].1 - 2.0 / 9.0).abs() < 1e-6);
        assert!((prices.pof - 1.0 / 7.0).abs() < 1e-9);
    }
}
