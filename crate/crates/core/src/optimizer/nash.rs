//! Maximization of weighted sums of logarithms of linear forms over a product
//! of probability simplices, optionally with a lower bound on a second such
//! sum.
//!
//! The solver follows the central path of a log barrier with damped Newton
//! steps in coordinates scaled by the current iterate. Optimality is
//! certified by the Frank-Wolfe gap when only simplex constraints are present
//! and by the barrier duality bound otherwise.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Required optimality certificate.
pub const CERTIFICATE_TOL: f64 = 1e-6;
/// Newton step budget across all barrier stages.
pub const MAX_NEWTON_STEPS: usize = 100_000;

const TARGET_GAP: f64 = 1e-9;
const CENTERING_TOL: f64 = 1e-10;
const BARRIER_GROWTH: f64 = 10.0;
const STAGE_STEPS: usize = 500;

/// `weight * ln(coeffs . x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTerm {
    pub weight: f64,
    pub coeffs: Vec<f64>,
}

impl LogTerm {
    pub fn new(weight: f64, coeffs: Vec<f64>) -> Self {
        Self { weight, coeffs }
    }

    fn inner(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

fn log_sum(terms: &[LogTerm], x: &[f64]) -> f64 {
    terms.iter().map(|t| t.weight * t.inner(x).ln()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashProblem {
    /// Variable ranges that must each sum to one.
    pub blocks: Vec<Range<usize>>,
    pub objective: Vec<LogTerm>,
    /// `sum of terms >= bound`, when present.
    pub constraint: Option<(Vec<LogTerm>, f64)>,
    /// Strictly feasible starting point; uniform blocks otherwise.
    pub start: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashSolution {
    pub value: f64,
    pub point: Vec<f64>,
    /// Upper bound on the optimality gap of `value`.
    pub certificate: f64,
    pub newton_steps: usize,
}

impl NashProblem {
    fn num_vars(&self) -> usize {
        self.blocks.iter().map(|b| b.end).max().unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let mut covered = vec![false; n];
        for block in &self.blocks {
            if block.is_empty() {
                return Err(Error::InvalidParameter("empty simplex block".into()));
            }
            for j in block.clone() {
                if covered[j] {
                    return Err(Error::InvalidParameter(format!(
                        "variable {j} belongs to two simplex blocks"
                    )));
                }
                covered[j] = true;
            }
        }
        if covered.iter().any(|c| !c) {
            return Err(Error::InvalidParameter(
                "every variable must belong to a simplex block".into(),
            ));
        }
        let terms = self
            .objective
            .iter()
            .chain(self.constraint.iter().flat_map(|(t, _)| t.iter()));
        for term in terms {
            if term.coeffs.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "log term with {} coefficients for {n} variables",
                    term.coeffs.len()
                )));
            }
            if term.coeffs.iter().any(|&a| !(a >= 0.0)) || term.coeffs.iter().all(|&a| a == 0.0)
            {
                return Err(Error::InvalidParameter(
                    "log terms need nonnegative, not all zero coefficients".into(),
                ));
            }
            if !(term.weight > 0.0) {
                return Err(Error::InvalidParameter("log term weights must be positive".into()));
            }
        }
        if self.objective.is_empty() {
            return Err(Error::InvalidParameter("empty objective".into()));
        }
        Ok(())
    }

    fn slack(&self, x: &[f64]) -> Option<f64> {
        self.constraint
            .as_ref()
            .map(|(terms, bound)| log_sum(terms, x) - bound)
    }

    fn strictly_feasible(&self, x: &[f64]) -> bool {
        x.iter().all(|&v| v > 0.0)
            && self
                .objective
                .iter()
                .chain(self.constraint.iter().flat_map(|(t, _)| t.iter()))
                .all(|t| t.inner(x) > 0.0)
            && self.slack(x).map_or(true, |s| s > 0.0)
    }

    fn barrier(&self, t: f64, x: &[f64]) -> f64 {
        let mut value = t * log_sum(&self.objective, x) + x.iter().map(|v| v.ln()).sum::<f64>();
        if let Some(s) = self.slack(x) {
            value += s.ln();
        }
        value
    }

    fn objective_gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; x.len()];
        add_log_gradient(&self.objective, x, 1.0, &mut grad);
        grad
    }

    /// Frank-Wolfe gap over the simplex product.
    fn fw_gap(&self, x: &[f64]) -> f64 {
        let grad = self.objective_gradient(x);
        self.blocks
            .iter()
            .map(|b| {
                let best = grad[b.clone()].iter().copied().fold(f64::MIN, f64::max);
                let current: f64 = b.clone().map(|j| grad[j] * x[j]).sum();
                best - current
            })
            .sum()
    }
}

fn add_log_gradient(terms: &[LogTerm], x: &[f64], scale: f64, grad: &mut [f64]) {
    for term in terms {
        let f = scale * term.weight / term.inner(x);
        for (g, a) in grad.iter_mut().zip(&term.coeffs) {
            *g += f * a;
        }
    }
}

/// Adds `scale * sum_r w_r a_r a_r^T / (a_r . x)^2` to `neg_hess`, which holds
/// the negated Hessian.
fn add_log_curvature(terms: &[LogTerm], x: &[f64], scale: f64, neg_hess: &mut DMatrix<f64>) {
    for term in terms {
        let inner = term.inner(x);
        let f = scale * term.weight / (inner * inner);
        let nz: Vec<usize> = (0..x.len()).filter(|&j| term.coeffs[j] != 0.0).collect();
        for &i in &nz {
            let ai = f * term.coeffs[i];
            for &j in &nz {
                neg_hess[(i, j)] += ai * term.coeffs[j];
            }
        }
    }
}

fn renormalize(blocks: &[Range<usize>], x: &mut [f64]) {
    for b in blocks {
        let sum: f64 = x[b.clone()].iter().sum();
        x[b.clone()].iter_mut().for_each(|v| *v /= sum);
    }
}

/// Maximizes the objective of `problem`.
pub fn nash_concave_solve(problem: &NashProblem) -> Result<NashSolution> {
    problem.validate()?;
    let n = problem.num_vars();
    let k = problem.blocks.len();
    let mut x = match &problem.start {
        Some(start) => {
            if start.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "start has {} entries for {n} variables",
                    start.len()
                )));
            }
            let mut x = start.clone();
            renormalize(&problem.blocks, &mut x);
            x
        }
        None => {
            let mut x = vec![0.0; n];
            for b in &problem.blocks {
                let share = 1.0 / b.len() as f64;
                x[b.clone()].iter_mut().for_each(|v| *v = share);
            }
            x
        }
    };
    if !problem.strictly_feasible(&x) {
        return Err(Error::InvalidParameter(
            "the starting point is not strictly feasible".into(),
        ));
    }

    let inequalities = (n + usize::from(problem.constraint.is_some())) as f64;
    let mut t = 1.0;
    let mut steps = 0usize;
    loop {
        // Centering: damped Newton on the barrier at the current t.
        for _ in 0..STAGE_STEPS {
            if steps >= MAX_NEWTON_STEPS {
                return Err(Error::NonConvergence {
                    iterations: steps,
                    gap: inequalities / t,
                });
            }
            steps += 1;
            let mut grad = vec![0.0; n];
            let mut neg_hess = DMatrix::<f64>::zeros(n, n);
            add_log_gradient(&problem.objective, &x, t, &mut grad);
            add_log_curvature(&problem.objective, &x, t, &mut neg_hess);
            for j in 0..n {
                grad[j] += 1.0 / x[j];
                neg_hess[(j, j)] += 1.0 / (x[j] * x[j]);
            }
            if let Some((terms, bound)) = &problem.constraint {
                let s = log_sum(terms, &x) - bound;
                let mut g_grad = vec![0.0; n];
                add_log_gradient(terms, &x, 1.0, &mut g_grad);
                add_log_curvature(terms, &x, 1.0 / s, &mut neg_hess);
                for i in 0..n {
                    grad[i] += g_grad[i] / s;
                    for j in 0..n {
                        neg_hess[(i, j)] += g_grad[i] * g_grad[j] / (s * s);
                    }
                }
            }

            // Scaled KKT system in u = x / X: [XHX A^T; A 0].
            let size = n + k;
            let mut kkt = DMatrix::<f64>::zeros(size, size);
            let mut rhs = DVector::<f64>::zeros(size);
            for i in 0..n {
                for j in 0..n {
                    kkt[(i, j)] = x[i] * neg_hess[(i, j)] * x[j];
                }
                rhs[i] = x[i] * grad[i];
            }
            for (b, block) in problem.blocks.iter().enumerate() {
                for j in block.clone() {
                    kkt[(n + b, j)] = x[j];
                    kkt[(j, n + b)] = x[j];
                }
            }
            let solution = kkt.lu().solve(&rhs).ok_or_else(|| Error::NonConvergence {
                iterations: steps,
                gap: inequalities / t,
            })?;
            let dx: Vec<f64> = (0..n).map(|j| x[j] * solution[j]).collect();
            let decrement: f64 = grad.iter().zip(&dx).map(|(g, d)| g * d).sum();
            if !decrement.is_finite() {
                return Err(Error::NonConvergence {
                    iterations: steps,
                    gap: inequalities / t,
                });
            }
            if decrement * 0.5 <= CENTERING_TOL {
                break;
            }

            let current = problem.barrier(t, &x);
            let mut step = 1.0;
            let mut candidate = vec![0.0; n];
            let accepted = loop {
                for j in 0..n {
                    candidate[j] = x[j] + step * dx[j];
                }
                if problem.strictly_feasible(&candidate) {
                    let value = problem.barrier(t, &candidate);
                    if value >= current + 0.25 * step * decrement {
                        break true;
                    }
                }
                step *= 0.5;
                if step < 1e-20 {
                    break false;
                }
            };
            if !accepted {
                // No measurable progress is possible at this t.
                break;
            }
            renormalize(&problem.blocks, &mut candidate);
            if !problem.strictly_feasible(&candidate) {
                break;
            }
            let gained = problem.barrier(t, &candidate) - current;
            x.copy_from_slice(&candidate);
            if gained <= 1e-15 * current.abs().max(1.0) {
                // Progress is below rounding noise.
                break;
            }
        }

        if inequalities / t <= TARGET_GAP {
            break;
        }
        t *= BARRIER_GROWTH;
    }

    let certificate = if problem.constraint.is_none() {
        problem.fw_gap(&x).max(0.0)
    } else {
        inequalities / t
    };
    if certificate > CERTIFICATE_TOL {
        return Err(Error::NonConvergence {
            iterations: steps,
            gap: certificate,
        });
    }
    Ok(NashSolution {
        value: log_sum(&problem.objective, &x),
        point: x,
        certificate,
        newton_steps: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_user_takes_favorite() {
        let problem = NashProblem {
            blocks: vec![0..2],
            objective: vec![LogTerm::new(1.0, vec![1.0, 0.5])],
            constraint: None,
            start: None,
        };
        let sol = nash_concave_solve(&problem).unwrap();
        assert!(sol.value.abs() < 1e-8);
        assert!(sol.point[0] > 1.0 - 1e-8);
        assert!(sol.certificate <= CERTIFICATE_TOL);
    }

    #[test]
    fn diverse_users_take_favorites() {
        let problem = NashProblem {
            blocks: vec![0..2, 2..4],
            objective: vec![
                LogTerm::new(1.0, vec![1.0, 0.2, 0.0, 0.0]),
                LogTerm::new(1.0, vec![0.0, 0.0, 0.2, 1.0]),
            ],
            constraint: None,
            start: None,
        };
        let sol = nash_concave_solve(&problem).unwrap();
        assert!(sol.value.abs() < 1e-8);
    }

    #[test]
    fn balanced_exposure_by_log_constraint() {
        // One user valuing items (0.9, 0.1); items must each get log utility
        // at least ln(0.5), which only the even split achieves.
        let problem = NashProblem {
            blocks: vec![0..2],
            objective: vec![LogTerm::new(1.0, vec![1.0, 0.1 / 0.9])],
            constraint: Some((
                vec![LogTerm::new(1.0, vec![1.0, 0.0]), LogTerm::new(1.0, vec![0.0, 1.0])],
                2.0 * 0.5f64.ln() - 1e-12,
            )),
            start: None,
        };
        let sol = nash_concave_solve(&problem).unwrap();
        assert!((sol.point[0] - 0.5).abs() < 1e-5);
        assert!((sol.value - (5.0f64 / 9.0).ln()).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_problems() {
        let problem = NashProblem {
            blocks: vec![0..2],
            objective: vec![LogTerm::new(1.0, vec![0.0, 0.0])],
            constraint: None,
            start: None,
        };
        assert!(nash_concave_solve(&problem).is_err());
        let problem = NashProblem {
            blocks: vec![0..2],
            objective: vec![LogTerm::new(1.0, vec![1.0, 1.0])],
            constraint: Some((vec![LogTerm::new(1.0, vec![1.0, 0.0])], 0.0)),
            start: None,
        };
        assert!(matches!(
            nash_concave_solve(&problem),
            Err(Error::InvalidParameter(_))
        ));
    }
}
