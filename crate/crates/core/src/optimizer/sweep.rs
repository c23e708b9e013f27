//! User fairness as a function of the item-fairness requirement.

use std::time::Instant;

use rayon::prelude::*;

use super::{FairProblem, TieBreak, SOLUTION_TOL};
use crate::error::{Error, Result};
use crate::model::{FairnessMeasure, ItemUtilityModel, UtilityMatrix};

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    Failed(String),
}

impl RowStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RowStatus::Ok)
    }

    pub fn label(&self) -> String {
        match self {
            RowStatus::Ok => "ok".into(),
            RowStatus::Failed(msg) => format!("failed: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub gamma: f64,
    pub if_star: f64,
    pub if_target: f64,
    pub uf_achieved: f64,
    pub if_achieved: f64,
    pub status: RowStatus,
    pub solve_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    pub rows: Vec<CurveRow>,
    pub measure: FairnessMeasure,
    pub item_model: ItemUtilityModel,
    pub tie_break: TieBreak,
    pub num_users: f64,
    pub num_items: usize,
    pub num_types: usize,
}

impl TradeoffCurve {
    /// Describes every violated curve invariant: user fairness must not
    /// increase with `gamma` and every row must meet its item target.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let ok: Vec<&CurveRow> = self.rows.iter().filter(|r| r.status.is_ok()).collect();
        for pair in ok.windows(2) {
            if pair[1].uf_achieved > pair[0].uf_achieved + SOLUTION_TOL {
                problems.push(format!(
                    "user fairness rises from {} at gamma {} to {} at gamma {}",
                    pair[0].uf_achieved, pair[0].gamma, pair[1].uf_achieved, pair[1].gamma
                ));
            }
        }
        for row in ok {
            if row.if_achieved < row.if_target - SOLUTION_TOL {
                problems.push(format!(
                    "item fairness {} below target {} at gamma {}",
                    row.if_achieved, row.if_target, row.gamma
                ));
            }
        }
        problems
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.status.is_ok())
    }
}

/// Checks that `gammas` is strictly increasing inside `[0, 1]`.
pub fn validate_gamma_grid(gammas: &[f64]) -> Result<()> {
    if gammas.is_empty() {
        return Err(Error::InvalidParameter("empty gamma grid".into()));
    }
    if let Some(&g) = gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Error::InvalidParameter(format!("gamma = {g} outside [0, 1]")));
    }
    if gammas.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidParameter(
            "gamma grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Solves the user-fair problem at every `gamma`, reusing one item optimum.
pub fn tradeoff_sweep(
    w: &UtilityMatrix,
    gammas: &[f64],
    item_model: ItemUtilityModel,
    measure: FairnessMeasure,
    tie_break: TieBreak,
) -> Result<TradeoffCurve> {
    let problem = FairProblem::new(w, item_model, measure)?;
    sweep_problem(&problem, gammas, tie_break)
}

/// Rows are solved in parallel; a failed row is recorded and the sweep
/// continues.
pub fn sweep_problem(
    problem: &FairProblem,
    gammas: &[f64],
    tie_break: TieBreak,
) -> Result<TradeoffCurve> {
    validate_gamma_grid(gammas)?;
    let item_opt = problem.item_optimum()?;
    let rows = gammas
        .par_iter()
        .map(|&gamma| {
            let started = Instant::now();
            let result = problem.user_optimum(gamma, &item_opt, tie_break);
            let solve_ms = started.elapsed().as_secs_f64() * 1e3;
            match result {
                Ok(opt) => CurveRow {
                    gamma,
                    if_star: item_opt.value,
                    if_target: opt.item_target,
                    uf_achieved: opt.value,
                    if_achieved: opt.item_fairness,
                    status: RowStatus::Ok,
                    solve_ms,
                },
                Err(err) => CurveRow {
                    gamma,
                    if_star: item_opt.value,
                    if_target: problem.item_target(gamma, item_opt.value),
                    uf_achieved: f64::NAN,
                    if_achieved: f64::NAN,
                    status: RowStatus::Failed(err.to_string()),
                    solve_ms,
                },
            }
        })
        .collect();
    let population = problem.population();
    Ok(TradeoffCurve {
        rows,
        measure: problem.measure(),
        item_model: problem.item_model(),
        tie_break,
        num_users: population.total_mass(),
        num_items: population.num_items(),
        num_types: population.num_types(),
    })
}
