//! Dense linear programming.
//!
//! [`solve_lp`] runs a two-phase primal simplex on a tableau, so every optimal
//! point it reports is a basic feasible solution. The final basis is refactored
//! with an LU decomposition to remove accumulated pivoting error before the
//! point is checked against the original constraints.
//!
//! [`solve_maxmin_linear`] and [`sum_k_smallest_epigraph`] lift the concave
//! objectives "minimum of affine forms" and "sum of the k smallest affine
//! forms" to plain linear programs.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Feasibility tolerance for reported optimal points.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Optimality tolerance on the reported objective value.
pub const OPTIMALITY_TOL: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const PHASE_ONE_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 100_000;
const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("the linear program is infeasible")]
    Infeasible,
    #[error("the linear program is unbounded")]
    Unbounded,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("malformed linear program: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }

    /// Signed amount by which `point` violates the constraint (0 if satisfied).
    pub fn violation(&self, point: &[f64]) -> f64 {
        let lhs: f64 = self.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const NONNEGATIVE: Bounds = Bounds {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    pub const FREE: Bounds = Bounds {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Self::NONNEGATIVE
    }
}

/// `maximize objective . x` subject to linear constraints and variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpInstance {
    num_vars: usize,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    bounds: Vec<Bounds>,
}

impl LpInstance {
    /// An instance with `num_vars` nonnegative variables and a zero objective.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            bounds: vec![Bounds::NONNEGATIVE; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) -> &mut Self {
        self.objective = objective;
        self
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
        self
    }

    pub fn set_bounds(&mut self, var: usize, bounds: Bounds) -> &mut Self {
        self.bounds[var] = bounds;
        self
    }

    /// Appends a variable with zero coefficients everywhere; returns its index.
    pub fn add_var(&mut self, bounds: Bounds) -> usize {
        self.num_vars += 1;
        self.objective.push(0.0);
        self.bounds.push(bounds);
        for c in &mut self.constraints {
            c.coeffs.push(0.0);
        }
        self.num_vars - 1
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.objective.len() != self.num_vars || self.bounds.len() != self.num_vars {
            return Err(LpError::Malformed(format!(
                "objective has {} coefficients and {} bounds for {} variables",
                self.objective.len(),
                self.bounds.len(),
                self.num_vars
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed("non-finite objective coefficient".into()));
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars {
                return Err(LpError::Malformed(format!(
                    "constraint {r} has {} coefficients for {} variables",
                    c.coeffs.len(),
                    self.num_vars
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(LpError::Malformed(format!("constraint {r} is not finite")));
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.lower.is_nan()
                || b.upper.is_nan()
                || b.lower == f64::INFINITY
                || b.upper == f64::NEG_INFINITY
                || b.lower > b.upper
            {
                return Err(LpError::Malformed(format!(
                    "variable {j} has bounds [{}, {}]",
                    b.lower, b.upper
                )));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, point: &[f64]) -> f64 {
        self.objective.iter().zip(point).map(|(c, x)| c * x).sum()
    }

    /// Largest constraint or bound violation at `point`.
    pub fn max_violation(&self, point: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(point))
            .fold(0.0, f64::max);
        let bounds = self
            .bounds
            .iter()
            .zip(point)
            .map(|(b, &x)| (b.lower - x).max(x - b.upper).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point; empty unless `status` is `Optimal`.
    pub point: Vec<f64>,
    pub value: f64,
    /// True when `point` is a basic feasible solution.
    pub is_vertex: bool,
    pub iterations: usize,
    pub detail: Option<String>,
}

impl LpSolution {
    fn failed(status: LpStatus, iterations: usize, detail: Option<String>) -> Self {
        Self {
            status,
            point: Vec::new(),
            value: f64::NAN,
            is_vertex: false,
            iterations,
            detail,
        }
    }

    /// Converts non-optimal statuses into errors.
    pub fn into_optimal(self) -> Result<LpSolution, LpError> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::Infeasible => Err(LpError::Infeasible),
            LpStatus::Unbounded => Err(LpError::Unbounded),
            LpStatus::NumericalFailure => Err(LpError::NumericalFailure(
                self.detail.unwrap_or_else(|| "unspecified".into()),
            )),
        }
    }
}

/// How an original variable is recovered from standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    Shift { col: usize, lower: f64 },
    Mirror { col: usize, upper: f64 },
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    /// Row-major `rows x cols` constraint matrix, all rows with `rhs >= 0`.
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    rows: usize,
    cols: usize,
    /// First artificial column; columns past it are artificial.
    first_artificial: usize,
    initial_basis: Vec<usize>,
    maps: Vec<VarMap>,
}

fn standard_form(lp: &LpInstance) -> StandardForm {
    let mut maps = Vec::with_capacity(lp.num_vars);
    let mut structural = 0usize;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for b in &lp.bounds {
        if b.lower.is_finite() {
            maps.push(VarMap::Shift {
                col: structural,
                lower: b.lower,
            });
            if b.upper.is_finite() {
                extra_rows.push((structural, b.upper - b.lower));
            }
            structural += 1;
        } else if b.upper.is_finite() {
            maps.push(VarMap::Mirror {
                col: structural,
                upper: b.upper,
            });
            structural += 1;
        } else {
            maps.push(VarMap::Split {
                pos: structural,
                neg: structural + 1,
            });
            structural += 2;
        }
    }

    // Rows over structural columns with their relation, before sign fixing.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for con in &lp.constraints {
        let mut coeffs = vec![0.0; structural];
        let mut rhs = con.rhs;
        for (j, &a) in con.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, lower } => {
                    coeffs[col] += a;
                    rhs -= a * lower;
                }
                VarMap::Mirror { col, upper } => {
                    coeffs[col] -= a;
                    rhs -= a * upper;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        rows.push((coeffs, con.relation, rhs));
    }
    for (col, cap) in extra_rows {
        let mut coeffs = vec![0.0; structural];
        coeffs[col] = 1.0;
        rows.push((coeffs, Relation::Le, cap));
    }
    for (coeffs, relation, rhs) in &mut rows {
        if *rhs < 0.0 {
            coeffs.iter_mut().for_each(|a| *a = -*a);
            *rhs = -*rhs;
            *relation = match *relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let first_artificial = structural + slacks;
    let cols = first_artificial + artificials;
    let m = rows.len();
    let mut a = vec![0.0; m * cols];
    let mut b = Vec::with_capacity(m);
    let mut initial_basis = Vec::with_capacity(m);
    let mut next_slack = structural;
    let mut next_artificial = first_artificial;
    for (i, (coeffs, relation, rhs)) in rows.into_iter().enumerate() {
        a[i * cols..i * cols + structural].copy_from_slice(&coeffs);
        b.push(rhs);
        match relation {
            Relation::Le => {
                a[i * cols + next_slack] = 1.0;
                initial_basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                a[i * cols + next_slack] = -1.0;
                next_slack += 1;
                a[i * cols + next_artificial] = 1.0;
                initial_basis.push(next_artificial);
                next_artificial += 1;
            }
            Relation::Eq => {
                a[i * cols + next_artificial] = 1.0;
                initial_basis.push(next_artificial);
                next_artificial += 1;
            }
        }
    }

    let mut c = vec![0.0; cols];
    for (j, &cj) in lp.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shift { col, .. } => c[col] += cj,
            VarMap::Mirror { col, .. } => c[col] -= cj,
            VarMap::Split { pos, neg } => {
                c[pos] += cj;
                c[neg] -= cj;
            }
        }
    }

    StandardForm {
        a,
        b,
        c,
        rows: m,
        cols,
        first_artificial,
        initial_basis,
        maps,
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

/// Simplex tableau over the standard form. Row `i` stores `B^-1 A` followed by
/// the basic value in the last slot.
struct Tableau {
    t: Vec<f64>,
    width: usize,
    rows: Vec<usize>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
    value: f64,
    iterations: usize,
}

impl Tableau {
    fn new(sf: &StandardForm) -> Self {
        let width = sf.cols + 1;
        let mut t = vec![0.0; sf.rows * width];
        for i in 0..sf.rows {
            t[i * width..i * width + sf.cols].copy_from_slice(&sf.a[i * sf.cols..(i + 1) * sf.cols]);
            t[i * width + sf.cols] = sf.b[i];
        }
        Self {
            t,
            width,
            rows: (0..sf.rows).collect(),
            basis: sf.initial_basis.clone(),
            reduced: vec![0.0; sf.cols],
            value: 0.0,
            iterations: 0,
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.width - 1]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    /// Prices out the basis for objective `c` (entries for barred columns are
    /// ignored by the caller).
    fn set_objective(&mut self, c: &[f64]) {
        let cols = self.width - 1;
        self.reduced.copy_from_slice(&c[..cols]);
        self.value = 0.0;
        for (k, &i) in self.rows.iter().enumerate() {
            let cb = c[self.basis[k]];
            if cb == 0.0 {
                continue;
            }
            for j in 0..cols {
                self.reduced[j] -= cb * self.t[i * self.width + j];
            }
            self.value += cb * self.rhs(i);
        }
    }

    fn pivot(&mut self, k: usize, q: usize) {
        let w = self.width;
        let p = self.rows[k];
        let inv = 1.0 / self.t[p * w + q];
        for j in 0..w {
            self.t[p * w + j] *= inv;
        }
        self.t[p * w + q] = 1.0;
        let pivot_row: Vec<f64> = self.t[p * w..(p + 1) * w].to_vec();
        for &i in &self.rows {
            if i == p {
                continue;
            }
            let factor = self.t[i * w + q];
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for (x, &pj) in row.iter_mut().zip(&pivot_row) {
                *x -= factor * pj;
            }
            row[q] = 0.0;
        }
        let factor = self.reduced[q];
        if factor != 0.0 {
            for (r, &pj) in self.reduced.iter_mut().zip(&pivot_row) {
                *r -= factor * pj;
            }
            self.reduced[q] = 0.0;
            self.value += factor * pivot_row[w - 1];
        }
        self.basis[k] = q;
        self.iterations += 1;
    }

    /// Maximizes the priced objective over columns `< allowed`.
    fn optimize(&mut self, allowed: usize) -> PhaseOutcome {
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return PhaseOutcome::IterationLimit;
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let mut entering = None;
            let mut best = COST_TOL;
            for j in 0..allowed {
                let r = self.reduced[j];
                if r > best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = r;
                }
            }
            let Some(q) = entering else {
                return PhaseOutcome::Optimal;
            };

            let mut leaving: Option<(usize, f64, f64)> = None;
            for (k, &i) in self.rows.iter().enumerate() {
                let a = self.at(i, q);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leaving = match leaving {
                    None => Some((k, ratio, a)),
                    Some((bk, br, ba)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br);
                        let better = if tie {
                            if bland {
                                self.basis[k] < self.basis[bk]
                            } else {
                                a > ba
                            }
                        } else {
                            ratio < br
                        };
                        if better {
                            Some((k, ratio, a))
                        } else {
                            Some((bk, br, ba))
                        }
                    }
                };
            }
            let Some((k, ratio, _)) = leaving else {
                return PhaseOutcome::Unbounded;
            };
            if ratio <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(k, q);
        }
    }

    /// Pivots basic artificial columns out after phase one; rows where that is
    /// impossible are linearly dependent and are dropped.
    fn expel_artificials(&mut self, first_artificial: usize) {
        let mut k = 0;
        while k < self.rows.len() {
            if self.basis[k] < first_artificial {
                k += 1;
                continue;
            }
            let i = self.rows[k];
            let mut best: Option<(usize, f64)> = None;
            for j in 0..first_artificial {
                let a = self.at(i, j).abs();
                if a > PIVOT_TOL && best.map_or(true, |(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            match best {
                Some((q, _)) => {
                    self.pivot(k, q);
                    k += 1;
                }
                None => {
                    self.rows.remove(k);
                    self.basis.remove(k);
                }
            }
        }
    }
}

/// Solves `lp` with the two-phase simplex method.
///
/// Returns `Err` only for malformed instances; infeasibility, unboundedness
/// and numerical trouble are reported through [`LpSolution::status`].
pub fn solve_lp(lp: &LpInstance) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let sf = standard_form(lp);
    let mut tab = Tableau::new(&sf);
    let scale = 1.0 + sf.b.iter().fold(0.0f64, |m, &b| m.max(b.abs()));

    if sf.first_artificial < sf.cols {
        let mut phase_one = vec![0.0; sf.cols];
        phase_one[sf.first_artificial..].iter_mut().for_each(|c| *c = -1.0);
        tab.set_objective(&phase_one);
        match tab.optimize(sf.cols) {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::IterationLimit => {
                return Ok(LpSolution::failed(
                    LpStatus::NumericalFailure,
                    tab.iterations,
                    Some("iteration limit reached in phase one".into()),
                ))
            }
            PhaseOutcome::Unbounded => {
                return Ok(LpSolution::failed(
                    LpStatus::NumericalFailure,
                    tab.iterations,
                    Some("phase one reported an unbounded ray".into()),
                ))
            }
        }
        if -tab.value > PHASE_ONE_TOL * scale {
            return Ok(LpSolution::failed(LpStatus::Infeasible, tab.iterations, None));
        }
        tab.expel_artificials(sf.first_artificial);
    }

    tab.set_objective(&sf.c);
    match tab.optimize(sf.first_artificial) {
        PhaseOutcome::Optimal => {}
        PhaseOutcome::Unbounded => {
            return Ok(LpSolution::failed(LpStatus::Unbounded, tab.iterations, None))
        }
        PhaseOutcome::IterationLimit => {
            return Ok(LpSolution::failed(
                LpStatus::NumericalFailure,
                tab.iterations,
                Some("iteration limit reached in phase two".into()),
            ))
        }
    }

    let std_point = basic_point(&sf, &tab);
    let point: Vec<f64> = sf
        .maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, lower } => lower + std_point[col],
            VarMap::Mirror { col, upper } => upper - std_point[col],
            VarMap::Split { pos, neg } => std_point[pos] - std_point[neg],
        })
        .collect();

    let violation = lp.max_violation(&point);
    if violation > FEASIBILITY_TOL * scale {
        return Ok(LpSolution::failed(
            LpStatus::NumericalFailure,
            tab.iterations,
            Some(format!("final point violates a constraint by {violation:e}")),
        ));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: lp.objective_value(&point),
        point,
        is_vertex: true,
        iterations: tab.iterations,
        detail: None,
    })
}

/// Reads the basic solution, recomputing the basic values from the original
/// data with a fresh factorization of the basis matrix.
fn basic_point(sf: &StandardForm, tab: &Tableau) -> Vec<f64> {
    let mut x = vec![0.0; sf.cols];
    for (k, &i) in tab.rows.iter().enumerate() {
        x[tab.basis[k]] = tab.rhs(i);
    }
    let size = tab.rows.len();
    if size > 0 {
        let basis = DMatrix::from_fn(size, size, |r, c| sf.a[tab.rows[r] * sf.cols + tab.basis[c]]);
        let rhs = DVector::from_fn(size, |r, _| sf.b[tab.rows[r]]);
        if let Some(solution) = basis.lu().solve(&rhs) {
            let residual_ok = solution.iter().all(|v| v.is_finite());
            if residual_ok {
                for (k, &col) in tab.basis.iter().enumerate() {
                    x[col] = solution[k];
                }
            }
        }
    }
    for v in &mut x {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    x
}

/// `constant + coeffs . x`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub coeffs: Vec<f64>,
    pub constant: f64,
}

impl AffineForm {
    pub fn new(coeffs: Vec<f64>, constant: f64) -> Self {
        Self { coeffs, constant }
    }

    pub fn linear(coeffs: Vec<f64>) -> Self {
        Self::new(coeffs, 0.0)
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().zip(point).map(|(a, x)| a * x).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpigraphSolution {
    pub value: f64,
    /// Values of the region's variables; auxiliary variables are dropped.
    pub point: Vec<f64>,
    pub is_vertex: bool,
}

fn check_rows(rows: &[AffineForm], region: &LpInstance) -> Result<(), LpError> {
    if rows.is_empty() {
        return Err(LpError::Malformed("no affine forms to aggregate".into()));
    }
    if let Some(r) = rows.iter().position(|r| r.coeffs.len() != region.num_vars()) {
        return Err(LpError::Malformed(format!(
            "affine form {r} has {} coefficients for {} variables",
            rows[r].coeffs.len(),
            region.num_vars()
        )));
    }
    Ok(())
}

/// Maximizes `min_r rows[r](x)` over the constraints and bounds of `region`
/// (its objective is ignored).
pub fn solve_maxmin_linear(
    rows: &[AffineForm],
    region: &LpInstance,
) -> Result<EpigraphSolution, LpError> {
    check_rows(rows, region)?;
    let n = region.num_vars();
    let mut lp = region.clone();
    lp.set_objective(vec![0.0; n]);
    let t = lp.add_var(Bounds::FREE);
    lp.objective[t] = 1.0;
    for row in rows {
        let mut coeffs = row.coeffs.clone();
        coeffs.push(-1.0);
        lp.add_constraint(coeffs, Relation::Ge, -row.constant);
    }
    let sol = solve_lp(&lp)?.into_optimal()?;
    let point = sol.point[..n].to_vec();
    let value = rows
        .iter()
        .map(|r| r.eval(&point))
        .fold(f64::INFINITY, f64::min);
    Ok(EpigraphSolution {
        value,
        point,
        is_vertex: sol.is_vertex,
    })
}

/// Maximizes the sum of the `k` smallest values among `rows[r](x)`.
pub fn sum_k_smallest_epigraph(
    rows: &[AffineForm],
    k: usize,
    region: &LpInstance,
) -> Result<EpigraphSolution, LpError> {
    sum_k_smallest_weighted(rows, &vec![1.0; rows.len()], k as f64, region)
}

/// Weighted variant: row `r` stands for `weights[r]` identical copies, and
/// the objective is the sum of the `k` smallest copies.
pub fn sum_k_smallest_weighted(
    rows: &[AffineForm],
    weights: &[f64],
    k: f64,
    region: &LpInstance,
) -> Result<EpigraphSolution, LpError> {
    check_rows(rows, region)?;
    let total: f64 = weights.iter().sum();
    if weights.len() != rows.len() || weights.iter().any(|&w| !(w > 0.0)) {
        return Err(LpError::Malformed("row weights must be positive, one per row".into()));
    }
    if !(k >= 1.0 && k <= total + 1e-9) {
        return Err(LpError::Malformed(format!(
            "k = {k} outside [1, {total}]"
        )));
    }
    let n = region.num_vars();
    let mut lp = region.clone();
    lp.set_objective(vec![0.0; n]);
    let (t, slacks) = add_k_smallest_lift(&mut lp, rows, n);
    lp.objective[t] = k;
    for (&s, &w) in slacks.iter().zip(weights) {
        lp.objective[s] = -w;
    }
    let sol = solve_lp(&lp)?.into_optimal()?;
    let point = sol.point[..n].to_vec();
    let values: Vec<f64> = rows.iter().map(|r| r.eval(&point)).collect();
    Ok(EpigraphSolution {
        value: weighted_k_smallest(&values, weights, k),
        point,
        is_vertex: sol.is_vertex,
    })
}

/// Adds a free level `t` and slacks `s_r >= max(0, t - row_r)`. The rows read
/// the first `n` variables. Returns `(t, slacks)`.
pub fn add_k_smallest_lift(
    lp: &mut LpInstance,
    rows: &[AffineForm],
    n: usize,
) -> (usize, Vec<usize>) {
    let t = lp.add_var(Bounds::FREE);
    let slacks: Vec<usize> = rows.iter().map(|_| lp.add_var(Bounds::NONNEGATIVE)).collect();
    for (row, &s) in rows.iter().zip(&slacks) {
        let mut coeffs = vec![0.0; lp.num_vars()];
        coeffs[..n].copy_from_slice(&row.coeffs);
        coeffs[t] = -1.0;
        coeffs[s] = 1.0;
        // s_r + row_r - t >= 0
        lp.add_constraint(coeffs, Relation::Ge, -row.constant);
    }
    (t, slacks)
}

pub(crate) fn weighted_k_smallest(values: &[f64], weights: &[f64], k: f64) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut remaining = k;
    let mut total = 0.0;
    for idx in order {
        if remaining <= 0.0 {
            break;
        }
        let take = weights[idx].min(remaining);
        total += take * values[idx];
        remaining -= take;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_interval(n: usize) -> LpInstance {
        let mut lp = LpInstance::new(n);
        for j in 0..n {
            lp.set_bounds(j, Bounds::new(0.0, 1.0));
        }
        lp
    }

    #[test]
    fn single_variable_upper_bound() {
        let mut lp = LpInstance::new(1);
        lp.set_objective(vec![1.0]).add_constraint(vec![1.0], Relation::Le, 3.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 3.0).abs() < 1e-12);
        assert!(sol.is_vertex);
    }

    #[test]
    fn two_variable_budget() {
        let mut lp = LpInstance::new(2);
        lp.set_objective(vec![1.0, 1.0])
            .add_constraint(vec![1.0, 1.0], Relation::Le, 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LpInstance::new(1);
        lp.add_constraint(vec![1.0], Relation::Ge, 2.0)
            .add_constraint(vec![1.0], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LpInstance::new(2);
        lp.set_objective(vec![1.0, 0.0])
            .add_constraint(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
        assert_eq!(
            solve_lp(&lp).unwrap().into_optimal(),
            Err(LpError::Unbounded)
        );
    }

    #[test]
    fn equality_and_bounds() {
        // max 2x - y s.t. x + y = 4, x in [-1, 3], y free
        let mut lp = LpInstance::new(2);
        lp.set_objective(vec![2.0, -1.0])
            .add_constraint(vec![1.0, 1.0], Relation::Eq, 4.0)
            .set_bounds(0, Bounds::new(-1.0, 3.0))
            .set_bounds(1, Bounds::FREE);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.point[0] - 3.0).abs() < 1e-12);
        assert!((sol.point[1] - 1.0).abs() < 1e-12);
        assert!((sol.value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn upper_bounded_only_variable() {
        // min x with x <= 2 and x >= -5 expressed as a constraint
        let mut lp = LpInstance::new(1);
        lp.set_objective(vec![-1.0])
            .set_bounds(0, Bounds::new(f64::NEG_INFINITY, 2.0))
            .add_constraint(vec![1.0], Relation::Ge, -5.0);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.point[0] + 5.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = LpInstance::new(2);
        lp.set_objective(vec![1.0, 2.0])
            .add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0)
            .add_constraint(vec![2.0, 2.0], Relation::Eq, 2.0);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn malformed_instances_are_rejected() {
        let mut lp = LpInstance::new(2);
        lp.add_constraint(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(solve_lp(&lp), Err(LpError::Malformed(_))));
        let mut lp = LpInstance::new(1);
        lp.set_bounds(0, Bounds::new(2.0, 1.0));
        assert!(matches!(solve_lp(&lp), Err(LpError::Malformed(_))));
    }

    #[test]
    fn maxmin_of_crossing_lines() {
        let rows = vec![
            AffineForm::linear(vec![1.0]),
            AffineForm::new(vec![-1.0], 1.0),
        ];
        let sol = solve_maxmin_linear(&rows, &unit_interval(1)).unwrap();
        assert!((sol.value - 0.5).abs() < 1e-12);
        assert!((sol.point[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn maxmin_with_single_row_is_plain_lp() {
        let rows = vec![AffineForm::linear(vec![1.0, 2.0])];
        let mut region = unit_interval(2);
        region.add_constraint(vec![1.0, 1.0], Relation::Le, 1.0);
        let sol = solve_maxmin_linear(&rows, &region).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sum_k_smallest_examples() {
        let cross = vec![
            AffineForm::linear(vec![1.0]),
            AffineForm::new(vec![-1.0], 1.0),
        ];
        let k1 = sum_k_smallest_epigraph(&cross, 1, &unit_interval(1)).unwrap();
        assert!((k1.value - 0.5).abs() < 1e-12);

        let mut three = cross.clone();
        three.push(AffineForm::new(vec![0.0], 0.8));
        let k2 = sum_k_smallest_epigraph(&three, 2, &unit_interval(1)).unwrap();
        assert!((k2.value - 1.0).abs() < 1e-12);

        let all = sum_k_smallest_epigraph(&three, 3, &unit_interval(1)).unwrap();
        assert!((all.value - 1.8).abs() < 1e-12);

        assert!(sum_k_smallest_epigraph(&three, 4, &unit_interval(1)).is_err());
    }

    #[test]
    fn weighted_k_smallest_counts_copies() {
        assert_eq!(weighted_k_smallest(&[0.5, 0.1], &[3.0, 1.0], 2.0), 0.6);
        assert_eq!(weighted_k_smallest(&[0.5, 0.1], &[3.0, 1.0], 4.0), 1.6);
    }

    #[test]
    fn solves_are_deterministic() {
        let mut lp = LpInstance::new(4);
        lp.set_objective(vec![1.0, 1.0, 1.0, 1.0])
            .add_constraint(vec![1.0, 1.0, 0.0, 0.0], Relation::Le, 1.0)
            .add_constraint(vec![0.0, 0.0, 1.0, 1.0], Relation::Le, 1.0)
            .add_constraint(vec![1.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let first = solve_lp(&lp).unwrap();
        for _ in 0..5 {
            assert_eq!(solve_lp(&lp).unwrap(), first);
        }
    }
}
