//! Dense two-phase primal simplex with Bland's rule.
//!
//! Every row gets an explicit artificial column, so the artificial block
//! of the final tableau is `B^{-1}` and both the optimal dual multipliers
//! and the phase-one Farkas ray are read off it directly.
//!
//! Sign conventions, in terms of the user's rows:
//!
//! * duals `u` satisfy `sum_r u_r b_r + sum_v w_v ub_v == objective` at an
//!   optimum, where `w` are the upper-bound multipliers;
//! * a Farkas ray `u` satisfies `sum_r u_r b_r > 0`, `sum_r u_r A_rv <= 0`
//!   for nonnegative variables (`== 0` for free ones), `u_r <= 0` on `<=`
//!   rows and `u_r >= 0` on `>=` rows.

use std::cmp::Ordering;

use thiserror::Error;

use crate::scalar::{Scalar, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBound {
    Zero,
    Free,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("simplex exceeded its iteration cap of {limit} pivots")]
    IterationLimit { limit: usize },
}

/// A linear program with the constraint matrix in triplet form.
#[derive(Debug, Clone)]
pub struct LinearProgram<S> {
    pub direction: Direction,
    pub objective: Vec<S>,
    /// `(row, column, coefficient)`; repeated positions are summed.
    pub entries: Vec<(usize, usize, S)>,
    pub row_senses: Vec<RowSense>,
    pub rhs: Vec<S>,
    pub lower: Vec<LowerBound>,
    pub upper: Vec<Option<S>>,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(direction: Direction, num_vars: usize) -> Self {
        Self {
            direction,
            objective: vec![S::zero(); num_vars],
            entries: Vec::new(),
            row_senses: Vec::new(),
            rhs: Vec::new(),
            lower: vec![LowerBound::Zero; num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn add_row(
        &mut self,
        coefficients: impl IntoIterator<Item = (usize, S)>,
        sense: RowSense,
        rhs: S,
    ) -> usize {
        let row = self.rhs.len();
        self.entries
            .extend(coefficients.into_iter().map(|(col, a)| (row, col, a)));
        self.row_senses.push(sense);
        self.rhs.push(rhs);
        row
    }

    pub fn set_objective(&mut self, col: usize, value: S) {
        self.objective[col] = value;
    }

    pub fn set_free(&mut self, col: usize) {
        self.lower[col] = LowerBound::Free;
    }

    pub fn set_upper(&mut self, col: usize, bound: S) {
        self.upper[col] = Some(bound);
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let m = self.num_rows();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Malformed("bound vectors do not match variable count".into()));
        }
        if self.row_senses.len() != m {
            return Err(LpError::Malformed("row senses do not match row count".into()));
        }
        for (row, col, a) in &self.entries {
            if *row >= m || *col >= n {
                return Err(LpError::Malformed(format!("entry ({row}, {col}) out of range")));
            }
            if !a.is_finite() {
                return Err(LpError::Malformed(format!("non-finite coefficient at ({row}, {col})")));
            }
        }
        let finite = self.objective.iter().chain(&self.rhs).all(Scalar::is_finite)
            && self.upper.iter().flatten().all(Scalar::is_finite);
        if !finite {
            return Err(LpError::Malformed("non-finite objective, rhs or bound".into()));
        }
        Ok(())
    }

    /// `A x` for every row.
    pub fn row_activity(&self, x: &[S]) -> Vec<S> {
        let mut act = vec![S::zero(); self.num_rows()];
        for (row, col, a) in &self.entries {
            act[*row] = act[*row].add_ref(&a.mul_ref(&x[*col]));
        }
        act
    }

    /// `A^T u` for every column.
    pub fn column_activity(&self, u: &[S]) -> Vec<S> {
        let mut act = vec![S::zero(); self.num_vars()];
        for (row, col, a) in &self.entries {
            act[*col] = act[*col].add_ref(&a.mul_ref(&u[*row]));
        }
        act
    }

    pub fn objective_value(&self, x: &[S]) -> S {
        crate::scalar::dot(&self.objective, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Multipliers proving that no feasible point exists.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasRay<S> {
    pub rows: Vec<S>,
    /// One multiplier per variable; zero where no upper bound is set.
    pub upper: Vec<S>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<S> {
    pub status: Status,
    pub primal: Vec<S>,
    pub duals: Vec<S>,
    pub upper_duals: Vec<S>,
    pub objective: S,
    pub farkas: Option<FarkasRay<S>>,
    pub iterations: usize,
}

impl<S: Scalar> LpSolution<S> {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// `sum_r u_r b_r + sum_v w_v ub_v`.
    pub fn dual_objective(&self, lp: &LinearProgram<S>) -> S {
        let mut total = crate::scalar::dot(&self.duals, &lp.rhs);
        for (w, ub) in self.upper_duals.iter().zip(&lp.upper) {
            if let Some(ub) = ub {
                total = total + w.mul_ref(ub);
            }
        }
        total
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: Tolerance,
    /// Pivot cap; `None` means `10 * (rows + cols)^2`.
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: Tolerance::DEFAULT,
            max_iterations: None,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: Tolerance) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

pub fn solve<S: Scalar>(lp: &LinearProgram<S>, tol: Tolerance) -> Result<LpSolution<S>, LpError> {
    solve_with(lp, &SolverOptions::with_tol(tol))
}

pub fn solve_with<S: Scalar>(
    lp: &LinearProgram<S>,
    opts: &SolverOptions,
) -> Result<LpSolution<S>, LpError> {
    let solver = Solver::new(lp, opts)?;
    solver.optimize(&lp.objective, lp.direction)
}

/// Column layout of the internal standard form.
#[derive(Debug, Clone)]
struct Layout {
    /// For each user variable: its positive column and, when free, its negative column.
    columns: Vec<(usize, Option<usize>)>,
    /// Row index of the upper-bound row for each variable, if any.
    upper_rows: Vec<Option<usize>>,
    /// `true` where a row was negated to make its right-hand side nonnegative.
    flipped: Vec<bool>,
    user_rows: usize,
    /// Structural plus slack columns; artificials follow.
    real_cols: usize,
}

#[derive(Debug, Clone)]
struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
}

impl<S: Scalar> Tableau<S> {
    fn pivot(&mut self, r: usize, j: usize, reduced: Option<&mut Vec<S>>, tol: Tolerance) {
        let pivot = self.rows[r][j].clone();
        for v in self.rows[r].iter_mut() {
            v.div_assign_ref(&pivot);
        }
        self.rhs[r].div_assign_ref(&pivot);
        self.rows[r][j] = S::one();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[j].clone();
            if factor.is_zero_tol(Tolerance(0.0)) {
                continue;
            }
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                v.sub_mul_assign(&factor, p);
            }
            row[j] = S::zero();
            self.rhs[i].sub_mul_assign(&factor, &pivot_rhs);
            if !S::EXACT && self.rhs[i].is_zero_tol(tol) {
                self.rhs[i] = S::zero();
            }
        }
        if let Some(reduced) = reduced {
            let factor = reduced[j].clone();
            if !factor.is_zero_tol(Tolerance(0.0)) {
                for (v, p) in reduced.iter_mut().zip(&pivot_row) {
                    v.sub_mul_assign(&factor, p);
                }
                reduced[j] = S::zero();
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = j;
    }

    fn reduced_costs(&self, costs: &[S]) -> Vec<S> {
        let mut reduced = costs.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &costs[b];
            if cb.is_zero_tol(Tolerance(0.0)) {
                continue;
            }
            for (r, a) in reduced.iter_mut().zip(row) {
                r.sub_mul_assign(cb, a);
            }
        }
        reduced
    }

    /// `c_B^T B^{-1}`, read from the artificial block.
    fn multipliers(&self, costs: &[S], real_cols: usize) -> Vec<S> {
        let m = self.rows.len();
        let mut y = vec![S::zero(); m];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &costs[b];
            if cb.is_zero_tol(Tolerance(0.0)) {
                continue;
            }
            for (k, yk) in y.iter_mut().enumerate() {
                *yk = yk.add_ref(&cb.mul_ref(&row[real_cols + k]));
            }
        }
        y
    }
}

enum RunOutcome {
    Optimal,
    Unbounded,
}

/// A simplex instance whose phase one has already run.
///
/// Phase two can be started repeatedly from the stored feasible basis with
/// different objectives; each call works on its own copy of the tableau.
#[derive(Debug, Clone)]
pub struct Solver<S> {
    layout: Layout,
    tableau: Tableau<S>,
    farkas: Option<FarkasRay<S>>,
    tol: Tolerance,
    limit: usize,
    iterations: usize,
    num_vars: usize,
}

impl<S: Scalar> Solver<S> {
    pub fn new(lp: &LinearProgram<S>, opts: &SolverOptions) -> Result<Self, LpError> {
        lp.validate()?;
        let tol = opts.tol;
        let (layout, tableau) = standard_form(lp);
        let dims = lp.num_rows() + lp.num_vars();
        let limit = opts.max_iterations.unwrap_or(10 * dims * dims).max(1);
        let mut solver = Solver {
            layout,
            tableau,
            farkas: None,
            tol,
            limit,
            iterations: 0,
            num_vars: lp.num_vars(),
        };
        solver.phase_one()?;
        Ok(solver)
    }

    pub fn is_feasible(&self) -> bool {
        self.farkas.is_none()
    }

    pub fn farkas(&self) -> Option<&FarkasRay<S>> {
        self.farkas.as_ref()
    }

    fn phase_one(&mut self) -> Result<(), LpError> {
        let real = self.layout.real_cols;
        let m = self.tableau.rows.len();
        let mut costs = vec![S::zero(); real + m];
        for c in costs[real..].iter_mut() {
            *c = S::one();
        }
        let mut reduced = self.tableau.reduced_costs(&costs);
        let mut iterations = self.iterations;
        run(
            &mut self.tableau,
            &mut reduced,
            real + m,
            self.tol,
            self.limit,
            &mut iterations,
        )?;
        self.iterations = iterations;

        let infeasibility = self
            .tableau
            .basis
            .iter()
            .zip(&self.tableau.rhs)
            .filter(|(&b, _)| b >= real)
            .fold(S::zero(), |acc, (_, v)| acc.add_ref(v));
        if infeasibility.is_pos(self.tol) {
            let y = self.tableau.multipliers(&costs, real);
            self.farkas = Some(self.unscale_rows(&y, false));
            return Ok(());
        }

        // Drive zero-level artificials out of the basis where a real column allows it.
        for r in 0..m {
            if self.tableau.basis[r] < real {
                continue;
            }
            let entering = (0..real).find(|&j| !self.tableau.rows[r][j].is_zero_tol(self.tol));
            if let Some(j) = entering {
                self.tableau.pivot(r, j, None, self.tol);
            }
        }
        Ok(())
    }

    /// Maps standard-form row multipliers back to the user's rows.
    fn unscale_rows(&self, y: &[S], negate: bool) -> FarkasRay<S> {
        let signed = |k: usize| {
            let v = y[k].clone();
            let v = if self.layout.flipped[k] { -v } else { v };
            if negate {
                -v
            } else {
                v
            }
        };
        let rows = (0..self.layout.user_rows).map(signed).collect();
        let upper = self
            .layout
            .upper_rows
            .iter()
            .map(|r| r.map_or_else(S::zero, signed))
            .collect();
        FarkasRay { rows, upper }
    }

    /// Runs phase two for `objective` from the stored feasible basis.
    pub fn optimize(&self, objective: &[S], direction: Direction) -> Result<LpSolution<S>, LpError> {
        if objective.len() != self.num_vars {
            return Err(LpError::Malformed("objective length does not match variable count".into()));
        }
        let real = self.layout.real_cols;
        let m = self.tableau.rows.len();
        if let Some(ray) = &self.farkas {
            return Ok(LpSolution {
                status: Status::Infeasible,
                primal: vec![S::zero(); self.num_vars],
                duals: vec![S::zero(); self.layout.user_rows],
                upper_duals: vec![S::zero(); self.num_vars],
                objective: S::zero(),
                farkas: Some(ray.clone()),
                iterations: self.iterations,
            });
        }
        let mut costs = vec![S::zero(); real + m];
        for (v, c) in objective.iter().enumerate() {
            let c = match direction {
                Direction::Maximize => -c.clone(),
                Direction::Minimize => c.clone(),
            };
            let (pos, neg) = self.layout.columns[v];
            if let Some(neg) = neg {
                costs[neg] = -c.clone();
            }
            costs[pos] = c;
        }
        let mut tableau = self.tableau.clone();
        let mut reduced = tableau.reduced_costs(&costs);
        let mut iterations = self.iterations;
        let outcome = run(&mut tableau, &mut reduced, real, self.tol, self.limit, &mut iterations)?;

        let mut structural = vec![S::zero(); real + m];
        for (&b, v) in tableau.basis.iter().zip(&tableau.rhs) {
            structural[b] = v.clone();
        }
        let primal: Vec<S> = self
            .layout
            .columns
            .iter()
            .map(|&(pos, neg)| match neg {
                Some(neg) => structural[pos].clone() - structural[neg].clone(),
                None => structural[pos].clone(),
            })
            .collect();
        let objective_value = crate::scalar::dot(objective, &primal);
        let status = match outcome {
            RunOutcome::Optimal => Status::Optimal,
            RunOutcome::Unbounded => Status::Unbounded,
        };
        let (duals, upper_duals) = if status == Status::Optimal {
            let y = tableau.multipliers(&costs, real);
            let ray = self.unscale_rows(&y, direction == Direction::Maximize);
            (ray.rows, ray.upper)
        } else {
            (vec![S::zero(); self.layout.user_rows], vec![S::zero(); self.num_vars])
        };
        Ok(LpSolution {
            status,
            primal,
            duals,
            upper_duals,
            objective: objective_value,
            farkas: None,
            iterations,
        })
    }
}

fn standard_form<S: Scalar>(lp: &LinearProgram<S>) -> (Layout, Tableau<S>) {
    let n = lp.num_vars();
    let mut next = 0usize;
    let columns: Vec<(usize, Option<usize>)> = lp
        .lower
        .iter()
        .map(|lb| {
            let pos = next;
            next += 1;
            let neg = (*lb == LowerBound::Free).then(|| {
                next += 1;
                next - 1
            });
            (pos, neg)
        })
        .collect();
    let structural = next;

    let user_rows = lp.num_rows();
    let mut senses = lp.row_senses.clone();
    let mut rhs = lp.rhs.clone();
    let mut upper_rows = vec![None; n];
    for (v, ub) in lp.upper.iter().enumerate() {
        if let Some(ub) = ub {
            upper_rows[v] = Some(senses.len());
            senses.push(RowSense::Le);
            rhs.push(ub.clone());
        }
    }
    let m = senses.len();
    let slacks = senses.iter().filter(|s| **s != RowSense::Eq).count();
    let real_cols = structural + slacks;
    let width = real_cols + m;

    let mut rows = vec![vec![S::zero(); width]; m];
    for (r, v, a) in &lp.entries {
        let (pos, neg) = columns[*v];
        rows[*r][pos] = rows[*r][pos].add_ref(a);
        if let Some(neg) = neg {
            rows[*r][neg] = rows[*r][neg].clone() - a.clone();
        }
    }
    for (v, row) in upper_rows.iter().enumerate() {
        if let Some(r) = row {
            let (pos, neg) = columns[v];
            rows[*r][pos] = S::one();
            if let Some(neg) = neg {
                rows[*r][neg] = -S::one();
            }
        }
    }
    let mut slack = structural;
    for (r, sense) in senses.iter().enumerate() {
        match sense {
            RowSense::Eq => {}
            RowSense::Le => {
                rows[r][slack] = S::one();
                slack += 1;
            }
            RowSense::Ge => {
                rows[r][slack] = -S::one();
                slack += 1;
            }
        }
    }
    let mut flipped = vec![false; m];
    for r in 0..m {
        if rhs[r].is_neg(Tolerance(0.0)) {
            flipped[r] = true;
            rhs[r] = -rhs[r].clone();
            for v in rows[r][..real_cols].iter_mut() {
                *v = -v.clone();
            }
        }
        rows[r][real_cols + r] = S::one();
    }
    let basis = (real_cols..real_cols + m).collect();
    (
        Layout {
            columns,
            upper_rows,
            flipped,
            user_rows,
            real_cols,
        },
        Tableau { rows, rhs, basis },
    )
}

/// Bland's rule: lowest-index improving column, ratio ties to the lowest basic index.
fn run<S: Scalar>(
    tableau: &mut Tableau<S>,
    reduced: &mut Vec<S>,
    eligible: usize,
    tol: Tolerance,
    limit: usize,
    iterations: &mut usize,
) -> Result<RunOutcome, LpError> {
    loop {
        let Some(j) = (0..eligible).find(|&j| reduced[j].is_neg(tol)) else {
            return Ok(RunOutcome::Optimal);
        };
        let mut best: Option<(usize, S)> = None;
        for (i, row) in tableau.rows.iter().enumerate() {
            if !row[j].is_pos(tol) {
                continue;
            }
            let ratio = tableau.rhs[i].clone() / row[j].clone();
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let order = if ratio.approx_eq(&br, tol) {
                        tableau.basis[i].cmp(&tableau.basis[bi])
                    } else {
                        ratio.partial_cmp(&br).unwrap_or(Ordering::Equal)
                    };
                    if order == Ordering::Less {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        let Some((r, _)) = best else {
            return Ok(RunOutcome::Unbounded);
        };
        *iterations += 1;
        if *iterations > limit {
            return Err(LpError::IterationLimit { limit });
        }
        tableau.pivot(r, j, Some(reduced), tol);
    }
}

/// Checks a Farkas ray against `lp` by direct substitution.
pub fn verify_farkas<S: Scalar>(lp: &LinearProgram<S>, ray: &FarkasRay<S>, tol: Tolerance) -> bool {
    if ray.rows.len() != lp.num_rows() || ray.upper.len() != lp.num_vars() {
        return false;
    }
    let signs_ok = ray.rows.iter().zip(&lp.row_senses).all(|(u, s)| match s {
        RowSense::Eq => true,
        RowSense::Le => !u.is_pos(tol),
        RowSense::Ge => !u.is_neg(tol),
    }) && ray
        .upper
        .iter()
        .zip(&lp.upper)
        .all(|(w, ub)| if ub.is_some() { !w.is_pos(tol) } else { w.is_zero_tol(tol) });
    if !signs_ok {
        return false;
    }
    let cols = lp.column_activity(&ray.rows);
    let cols_ok = cols
        .iter()
        .zip(&ray.upper)
        .zip(&lp.lower)
        .all(|((g, w), lb)| {
            let g = g.add_ref(w);
            match lb {
                LowerBound::Zero => !g.is_pos(tol),
                LowerBound::Free => g.is_zero_tol(tol),
            }
        });
    let mut value = crate::scalar::dot(&ray.rows, &lp.rhs);
    for (w, ub) in ray.upper.iter().zip(&lp.upper) {
        if let Some(ub) = ub {
            value = value + w.mul_ref(ub);
        }
    }
    cols_ok && value.is_pos(tol)
}

/// Residuals of an optimal solution: all zero (exact) or within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport {
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    pub complementary: bool,
    pub zero_gap: bool,
}

impl OptimalityReport {
    pub fn holds(&self) -> bool {
        self.primal_feasible && self.dual_feasible && self.complementary && self.zero_gap
    }
}

pub fn check_optimality<S: Scalar>(
    lp: &LinearProgram<S>,
    sol: &LpSolution<S>,
    tol: Tolerance,
) -> OptimalityReport {
    let x = &sol.primal;
    let act = lp.row_activity(x);
    let mut primal_feasible = x.iter().zip(&lp.lower).all(|(v, lb)| *lb == LowerBound::Free || !v.is_neg(tol));
    primal_feasible &= x
        .iter()
        .zip(&lp.upper)
        .all(|(v, ub)| ub.as_ref().is_none_or(|ub| !(v.clone() - ub.clone()).is_pos(tol)));
    primal_feasible &= act
        .iter()
        .zip(&lp.rhs)
        .zip(&lp.row_senses)
        .all(|((a, b), s)| {
            let d = a.clone() - b.clone();
            match s {
                RowSense::Eq => d.is_zero_tol(tol),
                RowSense::Le => !d.is_pos(tol),
                RowSense::Ge => !d.is_neg(tol),
            }
        });

    // For maximization the multipliers are mirrored so both senses share one test.
    let flip = |v: &S| match lp.direction {
        Direction::Maximize => v.clone(),
        Direction::Minimize => -v.clone(),
    };
    let u: Vec<S> = sol.duals.iter().map(flip).collect();
    let w: Vec<S> = sol.upper_duals.iter().map(flip).collect();
    let c: Vec<S> = lp.objective.iter().map(flip).collect();
    let cols = lp.column_activity(&u);
    let mut dual_feasible = u.iter().zip(&lp.row_senses).all(|(u, s)| match s {
        RowSense::Eq => true,
        RowSense::Le => !u.is_neg(tol),
        RowSense::Ge => !u.is_pos(tol),
    });
    dual_feasible &= w.iter().all(|w| !w.is_neg(tol));
    let mut complementary = true;
    for v in 0..lp.num_vars() {
        let d = cols[v].add_ref(&w[v]) - c[v].clone();
        dual_feasible &= match lp.lower[v] {
            LowerBound::Zero => !d.is_neg(tol),
            LowerBound::Free => d.is_zero_tol(tol),
        };
        complementary &= x[v].mul_ref(&d).is_zero_tol(tol);
        if let Some(ub) = &lp.upper[v] {
            complementary &= w[v].mul_ref(&(ub.clone() - x[v].clone())).is_zero_tol(tol);
        }
    }
    for r in 0..lp.num_rows() {
        complementary &= u[r].mul_ref(&(lp.rhs[r].clone() - act[r].clone())).is_zero_tol(tol);
    }
    let primal_obj = lp.objective_value(x);
    let gap = primal_obj.clone() - sol.dual_objective(lp);
    OptimalityReport {
        primal_feasible,
        dual_feasible,
        complementary,
        zero_gap: gap.is_zero_tol(S::rel_tol(&primal_obj, tol)),
    }
}
