//! Synthetic populations: two opposing types, identical users, and the
//! cold-start setting where some users' rows are replaced by an average.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::UtilityMatrix;

/// `round(x)` with halves rounded up, robust to representation error such as
/// `0.15 * 10 = 1.4999999999999998`.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5 + 1e-9).floor().max(0.0) as usize
}

fn reversed(v: &[f64]) -> Vec<f64> {
    v.iter().rev().copied().collect()
}

fn check_values(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidParameter("value sequence is empty".into()));
    }
    if let Some(&bad) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "values must be finite and positive, got {bad}"
        )));
    }
    Ok(())
}

fn check_fraction(name: &str, value: f64, upper: f64) -> Result<()> {
    if !(value > 0.0 && value < upper) {
        return Err(Error::InvalidParameter(format!(
            "{name} = {value} outside (0, {upper})"
        )));
    }
    Ok(())
}

/// `round(alpha * m)` users with row `v`, the rest with `reverse(v)`.
pub fn gen_two_type(v: &[f64], alpha: f64, m: usize) -> Result<UtilityMatrix> {
    check_values(v)?;
    check_fraction("alpha", alpha, 1.0)?;
    let rev = reversed(v);
    if rev == v {
        return Err(Error::InvalidParameter(
            "a palindromic value sequence gives a single type".into(),
        ));
    }
    let first = round_half_up(alpha * m as f64);
    if first == 0 || first >= m {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} with {m} users leaves a type empty ({first} type-1 users)"
        )));
    }
    let mut rows = Vec::with_capacity(m);
    let mut types = Vec::with_capacity(m);
    for i in 0..m {
        let ty = usize::from(i >= first);
        rows.push(if ty == 0 { v.to_vec() } else { rev.clone() });
        types.push(ty);
    }
    UtilityMatrix::from_rows(&rows)?.with_types(types)
}

/// `m` users who all hold row `v`.
pub fn gen_homogeneous(v: &[f64], m: usize) -> Result<UtilityMatrix> {
    check_values(v)?;
    if m == 0 {
        return Err(Error::InvalidParameter("a population needs at least one user".into()));
    }
    UtilityMatrix::from_rows(&vec![v.to_vec(); m])?.with_types(vec![0; m])
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisestPopulation {
    /// True utilities; types 0 and 1.
    pub truth: UtilityMatrix,
    /// Estimated utilities; cold-start users form type 2.
    pub estimate: UtilityMatrix,
    /// Users whose estimated row differs from the true one, ascending.
    pub misestimated: Vec<usize>,
}

/// `round(beta * m)` known users of each type; the remaining cold-start users
/// alternate between the two true types and are all estimated by the
/// elementwise average of `v` and its reversal. The seed only permutes rows.
pub fn gen_misestimation(v: &[f64], beta: f64, m: usize, seed: u64) -> Result<MisestPopulation> {
    check_values(v)?;
    check_fraction("beta", beta, 0.5)?;
    let rev = reversed(v);
    if rev == v {
        return Err(Error::InvalidParameter(
            "a palindromic value sequence gives a single type".into(),
        ));
    }
    let known = round_half_up(beta * m as f64);
    if known == 0 || 2 * known >= m {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} with {m} users gives {known} known users per type and {} cold-start users",
            m.saturating_sub(2 * known)
        )));
    }
    let prior: Vec<f64> = v.iter().zip(&rev).map(|(a, b)| 0.5 * (a + b)).collect();

    // (true type, estimated type) per user before shuffling.
    let mut users: Vec<(usize, usize)> = Vec::with_capacity(m);
    users.extend(std::iter::repeat((0, 0)).take(known));
    users.extend(std::iter::repeat((1, 1)).take(known));
    users.extend((0..m - 2 * known).map(|c| (c % 2, 2)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    users.shuffle(&mut rng);

    let row_of = |ty: usize| match ty {
        0 => v.to_vec(),
        1 => rev.clone(),
        _ => prior.clone(),
    };
    let truth_rows: Vec<Vec<f64>> = users.iter().map(|&(t, _)| row_of(t)).collect();
    let estimate_rows: Vec<Vec<f64>> = users.iter().map(|&(_, e)| row_of(e)).collect();
    let truth = UtilityMatrix::from_rows(&truth_rows)?
        .with_types(users.iter().map(|&(t, _)| t).collect())?;
    let estimate = UtilityMatrix::from_rows(&estimate_rows)?
        .with_types(users.iter().map(|&(_, e)| e).collect())?;
    let misestimated = users
        .iter()
        .enumerate()
        .filter(|(_, &(_, e))| e == 2)
        .map(|(i, _)| i)
        .collect();
    Ok(MisestPopulation {
        truth,
        estimate,
        misestimated,
    })
}

/// A reproducible description of a generated population.
#[derive(Debug, Clone, PartialEq)]
pub enum PopulationRecipe {
    TwoType { v: Vec<f64>, alpha: f64, m: usize },
    Homogeneous { v: Vec<f64>, m: usize },
    Misestimation { v: Vec<f64>, beta: f64, m: usize, seed: u64 },
}

impl PopulationRecipe {
    pub fn kind(&self) -> &'static str {
        match self {
            PopulationRecipe::TwoType { .. } => "two-type",
            PopulationRecipe::Homogeneous { .. } => "homogeneous",
            PopulationRecipe::Misestimation { .. } => "misest",
        }
    }

    /// The true utility matrix, plus the estimate for the cold-start setting.
    pub fn build(&self) -> Result<(UtilityMatrix, Option<MisestPopulation>)> {
        match self {
            PopulationRecipe::TwoType { v, alpha, m } => Ok((gen_two_type(v, *alpha, *m)?, None)),
            PopulationRecipe::Homogeneous { v, m } => Ok((gen_homogeneous(v, *m)?, None)),
            PopulationRecipe::Misestimation { v, beta, m, seed } => {
                let pop = gen_misestimation(v, *beta, *m, *seed)?;
                Ok((pop.truth.clone(), Some(pop)))
            }
        }
    }
}
