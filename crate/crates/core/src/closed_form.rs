//! Analytic optima for structured populations.
//!
//! Two-type populations hold a strictly decreasing value vector `v` or its
//! reversal. The item-fair optimum is sparse around a pivot item `t`: type 1
//! is recommended items `1..=t`, type 2 items `t..=n`, and every item's
//! normalized utility is the same constant.
//!
//! The misestimation setting adds a cold-start group whose estimated row is
//! the average of the two type rows. Its item-fair optimum is symmetric under
//! item reversal, so the known types share one policy `x` (type 2 gets the
//! reversal) and the cold group gets a palindromic policy `z`.
//!
//! Indices in this module are 1-based in documentation and 0-based in code.

use crate::error::{Error, Result};

/// Entries this far below zero still count as a valid pivot candidate.
const CANDIDATE_TOL: f64 = 1e-12;

fn check_values(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidParameter("value sequence is empty".into()));
    }
    if let Some(&bad) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "values must be finite and positive, got {bad}"
        )));
    }
    if let Some(j) = v.windows(2).position(|w| w[0] <= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "values must be strictly decreasing, but v[{}] = {} <= v[{}] = {}",
            j + 1,
            v[j],
            j + 2,
            v[j + 1]
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoTypeSpec {
    v: Vec<f64>,
    alpha: f64,
}

impl TwoTypeSpec {
    pub fn new(v: Vec<f64>, alpha: f64) -> Result<Self> {
        check_values(&v)?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "type-1 fraction {alpha} outside (0, 1)"
            )));
        }
        Ok(Self { v, alpha })
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }
}

/// Type 1's share of each item's total value,
/// `q_j = a v_j / (a v_j + (1 - a) v_{n-j+1})`.
pub fn q_weights(spec: &TwoTypeSpec) -> Vec<f64> {
    q_at(&spec.v, spec.alpha)
}

fn q_at(v: &[f64], alpha: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|j| {
            let own = alpha * v[j];
            own / (own + (1.0 - alpha) * v[n - 1 - j])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoTypeSolution {
    /// Pivot item, 1-based.
    pub t: usize,
    pub q: Vec<f64>,
    pub l: f64,
    pub r: f64,
    pub if_star: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Best user fairness among item-fair policies.
    pub uf1: f64,
    /// Price of fairness; the unconstrained optimum is always 1.
    pub pof: f64,
}

impl TwoTypeSolution {
    /// Normalized utility of a type-1 user.
    pub fn type1_utility(&self, v: &[f64]) -> f64 {
        dot(&self.x, v) / v[0]
    }

    /// Normalized utility of a type-2 user (who values item `j` at `v_{n-j+1}`).
    pub fn type2_utility(&self, v: &[f64]) -> f64 {
        dot_reversed(&self.y, v) / v[0]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_reversed(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter().rev()).map(|(x, y)| x * y).sum()
}

struct TwoTypeCandidate {
    l: f64,
    r: f64,
    if_star: f64,
    x: Vec<f64>,
    y: Vec<f64>,
}

fn two_type_candidate(q: &[f64], t: usize) -> Option<TwoTypeCandidate> {
    let n = q.len();
    let l: f64 = q[..t].iter().map(|qj| 1.0 / qj).sum();
    let r: f64 = q[t + 1..].iter().map(|qj| 1.0 / (1.0 - qj)).sum();
    let denom = 1.0 + q[t] * l + (1.0 - q[t]) * r;
    let if_star = 1.0 / denom;
    let xt = 1.0 - l / denom;
    let yt = 1.0 - r / denom;
    if xt < -CANDIDATE_TOL || yt < -CANDIDATE_TOL {
        return None;
    }
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for j in 0..t {
        x[j] = if_star / q[j];
    }
    for j in t + 1..n {
        y[j] = if_star / (1.0 - q[j]);
    }
    x[t] = xt.max(0.0);
    y[t] = yt.max(0.0);
    Some(TwoTypeCandidate {
        l,
        r,
        if_star,
        x,
        y,
    })
}

/// Pivot of the item-fair optimum (1-based): the smallest `t` whose candidate
/// policy pair is valid.
pub fn two_type_pivot(spec: &TwoTypeSpec) -> usize {
    let q = q_weights(spec);
    (0..spec.n())
        .find(|&t| two_type_candidate(&q, t).is_some())
        .map_or(spec.n(), |t| t + 1)
}

pub fn two_type_solution(spec: &TwoTypeSpec) -> TwoTypeSolution {
    let q = q_weights(spec);
    let (t, cand) = (0..spec.n())
        .find_map(|t| two_type_candidate(&q, t).map(|c| (t, c)))
        .expect("the last pivot candidate always has a nonnegative type-1 entry");
    let mut sol = TwoTypeSolution {
        t: t + 1,
        q,
        l: cand.l,
        r: cand.r,
        if_star: cand.if_star,
        x: cand.x,
        y: cand.y,
        uf1: 0.0,
        pof: 0.0,
    };
    let v = spec.values();
    sol.uf1 = sol.type1_utility(v).min(sol.type2_utility(v));
    sol.pof = 1.0 - sol.uf1;
    sol
}

/// Price of fairness at each `alpha` in `alpha_grid`.
pub fn two_type_pof_curve(v: &[f64], alpha_grid: &[f64]) -> Result<Vec<f64>> {
    alpha_grid
        .iter()
        .map(|&alpha| Ok(two_type_solution(&TwoTypeSpec::new(v.to_vec(), alpha)?).pof))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisestSpec {
    v: Vec<f64>,
    beta: f64,
}

impl MisestSpec {
    pub fn new(v: Vec<f64>, beta: f64) -> Result<Self> {
        check_values(&v)?;
        if v.len() < 2 {
            return Err(Error::InvalidParameter(
                "the misestimation setting needs at least two items".into(),
            ));
        }
        if !(beta > 0.0 && beta < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "known-type fraction {beta} outside (0, 1/2)"
            )));
        }
        Ok(Self { v, beta })
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    /// True when each known type outweighs an equal share of the items
    /// (`beta > 1/n`); the cold group is then never shown items 1 or n.
    pub fn starvation_regime(&self) -> bool {
        self.beta > 1.0 / self.n() as f64
    }

    /// Weights at equal type masses, `q_j = v_j / (v_j + v_{n-j+1})`.
    pub fn q(&self) -> Vec<f64> {
        q_at(&self.v, 0.5)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisestSolution {
    /// Pivot item, 1-based, at most `(n + 1) / 2`.
    pub t: usize,
    /// Common item utility, equal to the best achievable item fairness.
    pub lambda: f64,
    /// Policy of known type-1 users.
    pub x: Vec<f64>,
    /// Policy of the cold-start group.
    pub z: Vec<f64>,
}

impl MisestSolution {
    /// Policy of known type-2 users.
    pub fn y(&self) -> Vec<f64> {
        self.x.iter().rev().copied().collect()
    }

    /// Normalized utility of a known user under their own (true) row.
    pub fn known_user_utility(&self, v: &[f64]) -> f64 {
        dot(&self.x, v) / v[0]
    }

    /// True normalized utility of a cold-start user of either hidden type;
    /// both agree because `z` is palindromic.
    pub fn cold_user_utility(&self, v: &[f64]) -> f64 {
        dot(&self.z, v) / v[0]
    }
}

fn misest_candidate(spec: &MisestSpec, q: &[f64], t: usize) -> Option<MisestSolution> {
    let n = spec.n();
    let beta = spec.beta;
    let cold = 1.0 - 2.0 * beta;
    let l: f64 = q[..t].iter().map(|qj| 1.0 / qj).sum();
    let mirror = n - 1 - t;
    let mut x = vec![0.0; n];
    let mut z = vec![0.0; n];
    let lambda;
    if mirror == t {
        // Middle pivot: the cold group sits entirely on the middle item and
        // both known types share it.
        lambda = 1.0 / (1.0 + l);
        z[t] = 1.0;
    } else {
        let gap = (n - 2 * (t + 1)) as f64;
        lambda = (2.0 * beta * q[t] + 0.5 * cold) / (1.0 + q[t] * l + 0.5 * gap);
        let zt = 0.5 * (1.0 - gap * lambda / cold);
        if zt < -CANDIDATE_TOL {
            return None;
        }
        z[t] = zt.max(0.0);
        z[mirror] = z[t];
        for zj in &mut z[t + 1..mirror] {
            *zj = lambda / cold;
        }
    }
    let xt = 1.0 - lambda * l / (2.0 * beta);
    if xt < -CANDIDATE_TOL {
        return None;
    }
    for j in 0..t {
        x[j] = lambda / (2.0 * beta * q[j]);
    }
    x[t] = xt.max(0.0);
    Some(MisestSolution {
        t: t + 1,
        lambda,
        x,
        z,
    })
}

fn check_cold_mass(spec: &MisestSpec) -> Result<()> {
    if 1.0 - 2.0 * spec.beta < 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "cold-start fraction 1 - 2*{} is too small for the closed form",
            spec.beta
        )));
    }
    Ok(())
}

/// Pivot of the misestimated item-fair optimum (1-based).
pub fn misest_pivot(spec: &MisestSpec) -> Result<usize> {
    misest_solution(spec).map(|s| s.t)
}

/// Item-fair optimum on the estimated utilities: known types `x` and
/// `reverse(x)`, cold group `z`.
pub fn misest_solution(spec: &MisestSpec) -> Result<MisestSolution> {
    check_cold_mass(spec)?;
    let q = spec.q();
    let half = (spec.n() + 1) / 2;
    (0..half)
        .find_map(|t| misest_candidate(spec, &q, t))
        .ok_or_else(|| {
            Error::Domain(format!(
                "no pivot in 1..={half} yields a valid policy for v = {:?}, beta = {}",
                spec.v, spec.beta
            ))
        })
}

/// Item utilities of the misestimated population under `(x, reverse(x), z)`.
pub fn misest_item_utilities(spec: &MisestSpec, sol: &MisestSolution) -> Vec<f64> {
    let q = spec.q();
    let y = sol.y();
    let b = spec.beta;
    (0..spec.n())
        .map(|j| 2.0 * b * (q[j] * sol.x[j] + (1.0 - q[j]) * y[j]) + (1.0 - 2.0 * b) * sol.z[j])
        .collect()
}

/// Item utilities of a two-type population under `(x, y)`.
pub fn two_type_item_utilities(sol: &TwoTypeSolution) -> Vec<f64> {
    sol.q
        .iter()
        .zip(sol.x.iter().zip(&sol.y))
        .map(|(q, (x, y))| q * x + (1.0 - q) * y)
        .collect()
}
