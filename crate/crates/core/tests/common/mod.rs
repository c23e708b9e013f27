//! Independent oracles and instance generators shared by the integration
//! tests. Nothing here calls the optimizer.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` strictly decreasing values in `[lo, hi]`.
pub fn random_decreasing(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        if v.windows(2).all(|w| w[0] - w[1] > 1e-6 * hi) {
            return v;
        }
    }
}

pub fn random_rows(rng: &mut ChaCha8Rng, m: usize, n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(lo..=hi)).collect())
        .collect()
}

pub fn reversed(v: &[f64]) -> Vec<f64> {
    v.iter().rev().copied().collect()
}

/// `[start, start + step, ...]` up to `end` inclusive (within 1e-9).
pub fn grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let count = ((end - start) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| start + i as f64 * step).collect()
}

/// All points of the probability simplex in `n` dimensions whose entries are
/// multiples of `1 / steps`.
pub fn simplex_grid(n: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for take in 0..=left {
            prefix.push(take);
            rec(n - 1, left - take, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, steps, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|p| p.into_iter().map(|c| c as f64 / steps as f64).collect())
        .collect()
}

/// Normalized utilities written out from their definitions for a typed
/// population: `rows[k]` with mass `masses[k]`, policy `policy[k]`.
pub struct TypedOracle {
    pub rows: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    pub item_rows: Vec<Vec<f64>>,
}

impl TypedOracle {
    pub fn new(rows: Vec<Vec<f64>>, masses: Vec<f64>, delta: f64) -> Self {
        let item_rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| delta + (1.0 - delta) * v).collect())
            .collect();
        Self {
            rows,
            masses,
            item_rows,
        }
    }

    pub fn user_utility(&self, k: usize, policy: &[f64]) -> f64 {
        let row = &self.rows[k];
        let best = row.iter().copied().fold(f64::MIN, f64::max);
        row.iter().zip(policy).map(|(w, p)| w * p).sum::<f64>() / best
    }

    pub fn item_utility(&self, j: usize, policies: &[&[f64]]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, row) in self.item_rows.iter().enumerate() {
            num += self.masses[k] * row[j] * policies[k][j];
            den += self.masses[k] * row[j];
        }
        num / den
    }

    pub fn min_item(&self, policies: &[&[f64]]) -> f64 {
        (0..self.rows[0].len())
            .map(|j| self.item_utility(j, policies))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_user(&self, policies: &[&[f64]]) -> f64 {
        (0..self.rows.len())
            .map(|k| self.user_utility(k, policies[k]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Grid-search estimate of the best minimum user utility among policies whose
/// minimum item utility is within `slack` of the grid's best, for one or two
/// types.
pub fn grid_search_uf_at_full_fairness(oracle: &TypedOracle, steps: usize, slack: f64) -> f64 {
    let types = oracle.rows.len();
    assert!((1..=2).contains(&types), "grid search supports one or two types");
    let points = simplex_grid(oracle.rows[0].len(), steps);
    let partners = if types == 2 { points.len() } else { 1 };
    let each = |f: &mut dyn FnMut(&[&[f64]])| {
        for a in &points {
            for b in &points[..partners] {
                f(&[a.as_slice(), b.as_slice()][..types]);
            }
        }
    };
    let mut best_item = f64::MIN;
    each(&mut |policy| best_item = best_item.max(oracle.min_item(policy)));
    let mut best_user = f64::MIN;
    each(&mut |policy| {
        if oracle.min_item(policy) >= best_item - slack {
            best_user = best_user.max(oracle.min_user(policy));
        }
    });
    best_user
}

/// Maximizes `objective . x` subject to `eq_rows x = eq_rhs` and
/// `le_rows x <= le_rhs` by enumerating every vertex. The equality rows must
/// be linearly independent and the maximum must be attained.
pub fn vertex_enumeration_max(
    objective: &[f64],
    eq_rows: &[Vec<f64>],
    eq_rhs: &[f64],
    le_rows: &[Vec<f64>],
    le_rhs: &[f64],
) -> f64 {
    let d = objective.len();
    let free = d - eq_rows.len();
    let mut best = f64::MIN;
    for active in combinations(le_rows.len(), free) {
        let rows: Vec<&Vec<f64>> = eq_rows.iter().chain(active.iter().map(|&r| &le_rows[r])).collect();
        let rhs: Vec<f64> = eq_rhs.iter().copied().chain(active.iter().map(|&r| le_rhs[r])).collect();
        let a = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        let lu = a.lu();
        if lu.determinant().abs() < 1e-12 {
            continue;
        }
        let Some(x) = lu.solve(&DVector::from_vec(rhs)) else {
            continue;
        };
        let feasible = le_rows
            .iter()
            .zip(le_rhs)
            .all(|(row, &b)| dot(row, x.as_slice()) <= b + 1e-9)
            && eq_rows
                .iter()
                .zip(eq_rhs)
                .all(|(row, &b)| (dot(row, x.as_slice()) - b).abs() <= 1e-9);
        if feasible {
            best = best.max(dot(objective, x.as_slice()));
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Exact best minimum user utility among item-fair policies, by vertex
/// enumeration of both linear programs. Variables are the type policies
/// followed by the epigraph level.
pub fn exact_uf_at_full_fairness(oracle: &TypedOracle) -> f64 {
    let types = oracle.rows.len();
    let n = oracle.rows[0].len();
    let d = types * n + 1;
    let level = d - 1;
    let mut objective = vec![0.0; d];
    objective[level] = 1.0;
    let eq_rows: Vec<Vec<f64>> = (0..types)
        .map(|k| {
            let mut row = vec![0.0; d];
            row[k * n..(k + 1) * n].iter_mut().for_each(|x| *x = 1.0);
            row
        })
        .collect();
    let eq_rhs = vec![1.0; types];
    let item_rows: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let total: f64 = (0..types).map(|k| oracle.masses[k] * oracle.item_rows[k][j]).sum();
            let mut row = vec![0.0; d];
            for k in 0..types {
                row[k * n + j] = oracle.masses[k] * oracle.item_rows[k][j] / total;
            }
            row
        })
        .collect();
    let user_rows: Vec<Vec<f64>> = (0..types)
        .map(|k| {
            let best = oracle.rows[k].iter().copied().fold(f64::MIN, f64::max);
            let mut row = vec![0.0; d];
            for j in 0..n {
                row[k * n + j] = oracle.rows[k][j] / best;
            }
            row
        })
        .collect();
    let nonnegative: Vec<Vec<f64>> = (0..d - 1)
        .map(|v| {
            let mut row = vec![0.0; d];
            row[v] = -1.0;
            row
        })
        .collect();
    // level - row . x <= 0
    let below = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|row| {
                let mut r: Vec<f64> = row.iter().map(|x| -x).collect();
                r[level] = 1.0;
                r
            })
            .collect()
    };
    let mut le_rows = below(&item_rows);
    le_rows.extend(nonnegative.iter().cloned());
    let le_rhs = vec![0.0; le_rows.len()];
    let item_star = vertex_enumeration_max(&objective, &eq_rows, &eq_rhs, &le_rows, &le_rhs);

    let mut le_rows = below(&user_rows);
    let mut le_rhs = vec![0.0; le_rows.len()];
    for row in &item_rows {
        le_rows.push(row.iter().map(|x| -x).collect());
        le_rhs.push(-item_star + 1e-12);
    }
    le_rows.extend(nonnegative);
    le_rhs.resize(le_rows.len(), 0.0);
    vertex_enumeration_max(&objective, &eq_rows, &eq_rhs, &le_rows, &le_rhs)
}

/// Dense 1-D maximization of `f` over `[lo, hi]`.
pub fn grid_max_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    (0..=points)
        .map(|i| lo + (hi - lo) * i as f64 / points as f64)
        .map(|x| (x, f(x)))
        .fold((lo, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best })
}
