//! The martingale transport polytope, the primal problem and its
//! superhedging dual.
//!
//! Variables are the cells `p[i][j]`, numbered `i * n + j`. Rows come in
//! three blocks: the `m` X-marginal rows, the `n` Y-marginal rows, and
//! `d` martingale rows `sum_j p[i][j] (y_j - x_i)_k = 0` per μ-atom. The
//! LP multipliers of the blocks are `phi`, `psi` and `h`.

use crate::error::{Error, Result};
use crate::linprog::{self, Direction, LinearProgram, RowSense, Solver, SolverOptions, Status};
use crate::measures::{pair_value, DiscreteMeasure, Point, Separation};
use crate::scalar::{sum, Scalar, Tolerance};

/// Atom locations and (possibly zero) masses of a transport instance.
///
/// Zero masses are allowed here so that componentwise problems can carry
/// boundary atoms that a particular coupling does not charge.
#[derive(Debug, Clone, Copy)]
pub struct Marginals<'a, S> {
    pub xs: &'a [Point<S>],
    pub mu: &'a [S],
    pub ys: &'a [Point<S>],
    pub nu: &'a [S],
}

impl<'a, S: Scalar> Marginals<'a, S> {
    pub fn of(mu: &'a DiscreteMeasure<S>, nu: &'a DiscreteMeasure<S>) -> Self {
        Self {
            xs: mu.atoms(),
            mu: mu.weights(),
            ys: nu.atoms(),
            nu: nu.weights(),
        }
    }

    pub fn m(&self) -> usize {
        self.xs.len()
    }

    pub fn n(&self) -> usize {
        self.ys.len()
    }

    pub fn dim(&self) -> usize {
        self.xs.first().map_or(0, Vec::len)
    }

    pub fn var(&self, i: usize, j: usize) -> usize {
        i * self.n() + j
    }

    /// The constraint system of the martingale transport polytope.
    pub fn assemble(&self) -> LinearProgram<S> {
        let (m, n, d) = (self.m(), self.n(), self.dim());
        let mut lp = LinearProgram::new(Direction::Maximize, m * n);
        for i in 0..m {
            lp.add_row((0..n).map(|j| (self.var(i, j), S::one())), RowSense::Eq, self.mu[i].clone());
        }
        for j in 0..n {
            lp.add_row((0..m).map(|i| (self.var(i, j), S::one())), RowSense::Eq, self.nu[j].clone());
        }
        for i in 0..m {
            for k in 0..d {
                let coefficients = (0..n).filter_map(|j| {
                    let delta = self.ys[j][k].clone() - self.xs[i][k].clone();
                    (!delta.is_zero_tol(Tolerance(0.0))).then(|| (self.var(i, j), delta))
                });
                lp.add_row(coefficients, RowSense::Eq, S::zero());
            }
        }
        lp
    }

    /// Phase one of the polytope, ready for repeated objectives.
    pub fn solver(&self, tol: Tolerance) -> Result<Solver<S>, S> {
        Ok(Solver::new(&self.assemble(), &SolverOptions::with_tol(tol))?)
    }

    /// Solves `max P[c]` and reads the dual certificate from the multipliers.
    pub fn solve(&self, cost: &CostMatrix<S>, tol: Tolerance) -> Result<TransportSolution<S>, S> {
        let mut lp = self.assemble();
        for i in 0..self.m() {
            for j in 0..self.n() {
                lp.set_objective(self.var(i, j), cost.get(i, j).clone());
            }
        }
        let sol = linprog::solve(&lp, tol)?;
        match sol.status {
            Status::Optimal => {}
            Status::Infeasible => {
                let ray = sol.farkas.expect("infeasible solutions carry a ray");
                return Err(Error::NotInConvexOrder(Box::new(self.separation(&ray.rows))));
            }
            Status::Unbounded => return Err(Error::UnexpectedStatus(Status::Unbounded)),
        }
        let coupling = Coupling::from_flat(self.m(), self.n(), &sol.primal);
        let (m, n, d) = (self.m(), self.n(), self.dim());
        let phi = sol.duals[..m].to_vec();
        let psi = sol.duals[m..m + n].to_vec();
        let h = (0..m)
            .map(|i| sol.duals[m + n + i * d..m + n + (i + 1) * d].to_vec())
            .collect();
        let dual = DualCertificate::build(phi, psi, h, self, cost);
        Ok(TransportSolution {
            value: sol.objective,
            coupling,
            dual,
        })
    }

    /// Reads `(phi, psi, h) = -(row multipliers)` from a Farkas ray.
    pub fn separation(&self, ray: &[S]) -> Separation<S> {
        let (m, n, d) = (self.m(), self.n(), self.dim());
        Separation {
            phi: ray[..m].iter().map(|v| -v.clone()).collect(),
            psi: ray[m..m + n].iter().map(|v| -v.clone()).collect(),
            h: (0..m)
                .map(|i| ray[m + n + i * d..m + n + (i + 1) * d].iter().map(|v| -v.clone()).collect())
                .collect(),
        }
    }
}

pub(crate) fn separation_from_ray<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    ray: &[S],
) -> Separation<S> {
    Marginals::of(mu, nu).separation(ray)
}

fn check_dims<S: Scalar>(mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>) -> Result<(), S> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    Ok(())
}

/// Constraints of the martingale transport polytope with a zero objective.
pub fn assemble<S: Scalar>(mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>) -> Result<LinearProgram<S>, S> {
    check_dims(mu, nu)?;
    Ok(Marginals::of(mu, nu).assemble())
}

/// A cost matrix indexed by (μ-atom, ν-atom).
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<S> {
    values: Vec<Vec<S>>,
    nonnegative: bool,
}

impl<S: Scalar> CostMatrix<S> {
    pub fn new(values: Vec<Vec<S>>) -> Result<Self, S> {
        let width = values.first().map_or(0, Vec::len);
        if values.iter().any(|row| row.len() != width) {
            return Err(Error::InvalidInput("cost rows have different lengths".into()));
        }
        if !values.iter().flatten().all(Scalar::is_finite) {
            return Err(Error::InvalidInput("cost entries must be finite".into()));
        }
        let nonnegative = values.iter().flatten().all(|v| !v.is_neg(Tolerance(0.0)));
        Ok(Self { values, nonnegative })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            values: vec![vec![S::zero(); n]; m],
            nonnegative: true,
        }
    }

    /// One on cell `(i, j)`, zero elsewhere.
    pub fn indicator(m: usize, n: usize, i: usize, j: usize) -> Self {
        let mut c = Self::zeros(m, n);
        c.values[i][j] = S::one();
        c
    }

    pub fn from_fn(mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>, f: impl Fn(&[S], &[S]) -> S) -> Result<Self, S> {
        Self::new(
            mu.atoms()
                .iter()
                .map(|x| nu.atoms().iter().map(|y| f(x, y)).collect())
                .collect(),
        )
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.values[i][j]
    }

    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn cols(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn values(&self) -> &[Vec<S>] {
        &self.values
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    /// `c + kappa` on every cell.
    pub fn shifted(&self, kappa: &S) -> Self {
        let values: Vec<Vec<S>> = self
            .values
            .iter()
            .map(|row| row.iter().map(|v| v.add_ref(kappa)).collect())
            .collect();
        let nonnegative = values.iter().flatten().all(|v| !v.is_neg(Tolerance(0.0)));
        Self { values, nonnegative }
    }

    /// The sub-matrix on the given rows and columns.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Self {
        let values: Vec<Vec<S>> = rows
            .iter()
            .map(|&i| cols.iter().map(|&j| self.values[i][j].clone()).collect())
            .collect();
        let nonnegative = values.iter().flatten().all(|v| !v.is_neg(Tolerance(0.0)));
        Self { values, nonnegative }
    }
}

/// Mass matrix of a joint measure on (μ-atoms) x (ν-atoms).
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling<S> {
    mass: Vec<Vec<S>>,
}

/// Which coupling invariants hold; every field is true for a feasible coupling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingCheck {
    pub shape: bool,
    pub nonnegative: bool,
    pub x_marginal: bool,
    pub y_marginal: bool,
    pub martingale: bool,
    /// μ-atoms whose conditional barycenter is off.
    pub martingale_failures: Vec<usize>,
}

impl CouplingCheck {
    pub fn holds(&self) -> bool {
        self.shape && self.nonnegative && self.x_marginal && self.y_marginal && self.martingale
    }
}

impl<S: Scalar> Coupling<S> {
    pub fn new(mass: Vec<Vec<S>>) -> Self {
        Self { mass }
    }

    pub fn from_flat(m: usize, n: usize, values: &[S]) -> Self {
        Self {
            mass: (0..m).map(|i| values[i * n..(i + 1) * n].to_vec()).collect(),
        }
    }

    /// Builds a coupling from `(i, j, mass)` triples; unlisted cells are zero.
    pub fn from_cells(m: usize, n: usize, cells: impl IntoIterator<Item = (usize, usize, S)>) -> Self {
        let mut mass = vec![vec![S::zero(); n]; m];
        for (i, j, v) in cells {
            mass[i][j] = mass[i][j].add_ref(&v);
        }
        Self { mass }
    }

    pub fn mass(&self, i: usize, j: usize) -> &S {
        &self.mass[i][j]
    }

    pub fn masses(&self) -> &[Vec<S>] {
        &self.mass
    }

    pub fn rows(&self) -> usize {
        self.mass.len()
    }

    pub fn cols(&self) -> usize {
        self.mass.first().map_or(0, Vec::len)
    }

    pub fn support(&self, tol: Tolerance) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for (i, row) in self.mass.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_pos(tol) {
                    cells.push((i, j));
                }
            }
        }
        cells
    }

    /// `P[c]`.
    pub fn value(&self, cost: &CostMatrix<S>) -> S {
        let mut total = S::zero();
        for (i, row) in self.mass.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                total = total + v.mul_ref(cost.get(i, j));
            }
        }
        total
    }

    /// Convex combination `(1 - t) self + t other`.
    pub fn blend(&self, other: &Coupling<S>, t: &S) -> Coupling<S> {
        let s = S::one() - t.clone();
        Coupling {
            mass: self
                .mass
                .iter()
                .zip(&other.mass)
                .map(|(a, b)| a.iter().zip(b).map(|(u, v)| s.mul_ref(u) + t.mul_ref(v)).collect())
                .collect(),
        }
    }

    pub fn check(&self, mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>, tol: Tolerance) -> CouplingCheck {
        self.check_marginals(&Marginals::of(mu, nu), tol)
    }

    pub fn check_marginals(&self, marg: &Marginals<'_, S>, tol: Tolerance) -> CouplingCheck {
        let (m, n) = (marg.m(), marg.n());
        let shape = self.mass.len() == m && self.mass.iter().all(|r| r.len() == n);
        if !shape {
            return CouplingCheck {
                shape,
                nonnegative: false,
                x_marginal: false,
                y_marginal: false,
                martingale: false,
                martingale_failures: Vec::new(),
            };
        }
        let nonnegative = self.mass.iter().flatten().all(|v| !v.is_neg(tol));
        let x_marginal = (0..m).all(|i| sum(&self.mass[i]).approx_eq(&marg.mu[i], tol));
        let y_marginal = (0..n).all(|j| {
            let col = (0..m).fold(S::zero(), |acc, i| acc.add_ref(&self.mass[i][j]));
            col.approx_eq(&marg.nu[j], tol)
        });
        let martingale_failures: Vec<usize> = (0..m)
            .filter(|&i| {
                (0..marg.dim()).any(|k| {
                    let first_moment = (0..n).fold(S::zero(), |acc, j| acc + self.mass[i][j].mul_ref(&marg.ys[j][k]));
                    !first_moment.approx_eq(&marg.mu[i].mul_ref(&marg.xs[i][k]), tol)
                })
            })
            .collect();
        CouplingCheck {
            shape,
            nonnegative,
            x_marginal,
            y_marginal,
            martingale: martingale_failures.is_empty(),
            martingale_failures,
        }
    }
}

/// A superhedging triple with its value and slack matrix
/// `s[i][j] = phi_i + psi_j + h_i . (y_j - x_i) - c[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate<S> {
    pub phi: Vec<S>,
    pub psi: Vec<S>,
    pub h: Vec<Vec<S>>,
    pub value: S,
    pub slack: Vec<Vec<S>>,
}

impl<S: Scalar> DualCertificate<S> {
    pub fn build(phi: Vec<S>, psi: Vec<S>, h: Vec<Vec<S>>, marg: &Marginals<'_, S>, cost: &CostMatrix<S>) -> Self {
        let value = crate::scalar::dot(marg.mu, &phi) + crate::scalar::dot(marg.nu, &psi);
        let slack = (0..marg.m())
            .map(|i| {
                (0..marg.n())
                    .map(|j| pair_value(&phi[i], &psi[j], &h[i], &marg.xs[i], &marg.ys[j]) - cost.get(i, j).clone())
                    .collect()
            })
            .collect();
        Self {
            phi,
            psi,
            h,
            value,
            slack,
        }
    }

    /// Pairs with zero slack.
    pub fn tight_pairs(&self, tol: Tolerance) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for (i, row) in self.slack.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                if s.is_zero_tol(tol) {
                    cells.push((i, j));
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone)]
pub struct TransportSolution<S> {
    pub coupling: Coupling<S>,
    pub value: S,
    pub dual: DualCertificate<S>,
}

/// Solves the primal and dual in one LP.
pub fn solve<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    cost: &CostMatrix<S>,
    tol: Tolerance,
) -> Result<TransportSolution<S>, S> {
    check_dims(mu, nu)?;
    if cost.rows() != mu.len() || cost.cols() != nu.len() {
        return Err(Error::InvalidInput(format!(
            "cost is {}x{}, marginals need {}x{}",
            cost.rows(),
            cost.cols(),
            mu.len(),
            nu.len()
        )));
    }
    Marginals::of(mu, nu).solve(cost, tol)
}

/// `S_{mu,nu}(c)` and an optimal coupling.
pub fn solve_primal<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    cost: &CostMatrix<S>,
    tol: Tolerance,
) -> Result<(Coupling<S>, S), S> {
    let sol = solve(mu, nu, cost, tol)?;
    Ok((sol.coupling, sol.value))
}

/// An optimal superhedging triple; its value equals the primal value.
pub fn extract_dual<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    cost: &CostMatrix<S>,
    tol: Tolerance,
) -> Result<DualCertificate<S>, S> {
    Ok(solve(mu, nu, cost, tol)?.dual)
}

/// Pairs on which a certificate must dominate the cost.
#[derive(Debug, Clone, PartialEq)]
pub enum Scope {
    AllPairs,
    Pairs(Vec<(usize, usize)>),
}

impl Scope {
    /// Every pair in `rows x cols`.
    pub fn block(rows: &[usize], cols: &[usize]) -> Self {
        Scope::Pairs(rows.iter().flat_map(|&i| cols.iter().map(move |&j| (i, j))).collect())
    }

    fn pairs(&self, m: usize, n: usize) -> Vec<(usize, usize)> {
        match self {
            Scope::AllPairs => (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect(),
            Scope::Pairs(p) => p.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation<S> {
    pub i: usize,
    pub j: usize,
    pub slack: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport<S> {
    pub violations: Vec<Violation<S>>,
    /// Reported value equals `mu[phi] + nu[psi]`.
    pub value_consistent: bool,
}

impl<S> CertificateReport<S> {
    pub fn admissible(&self) -> bool {
        self.violations.is_empty() && self.value_consistent
    }
}

/// Recomputes every slack on `scope` from `(phi, psi, h)` and the cost;
/// the stored slack matrix is not trusted.
pub fn verify_certificate<S: Scalar>(
    cert: &DualCertificate<S>,
    marg: &Marginals<'_, S>,
    cost: &CostMatrix<S>,
    scope: &Scope,
    tol: Tolerance,
) -> CertificateReport<S> {
    let mut violations = Vec::new();
    for (i, j) in scope.pairs(marg.m(), marg.n()) {
        let slack = pair_value(&cert.phi[i], &cert.psi[j], &cert.h[i], &marg.xs[i], &marg.ys[j]) - cost.get(i, j).clone();
        if slack.is_neg(tol) {
            violations.push(Violation { i, j, slack });
        }
    }
    let value = crate::scalar::dot(marg.mu, &cert.phi) + crate::scalar::dot(marg.nu, &cert.psi);
    CertificateReport {
        violations,
        value_consistent: value.approx_eq(&cert.value, S::rel_tol(&value, tol)),
    }
}
