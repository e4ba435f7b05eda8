//! Convex-geometry predicates on polytopes given by generating points.
//!
//! Nothing here builds facets. Every predicate is a small LP over convex
//! weights on the generators, which makes them decision procedures in
//! rational mode.

use crate::error::{Error, Result};
use crate::linprog::{self, Direction, LinearProgram, RowSense, Status};
use crate::measures::{points_equal, Point};
use crate::scalar::{dot, Scalar, Tolerance};

#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace<S> {
    pub base: Point<S>,
    /// Linearly independent directions in row echelon form.
    pub basis: Vec<Vec<S>>,
}

impl<S: Scalar> AffineSubspace<S> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    pub fn contains(&self, x: &[S], tol: Tolerance) -> bool {
        let diff: Vec<S> = x.iter().zip(&self.base).map(|(a, b)| a.clone() - b.clone()).collect();
        reduce(&self.basis, diff, tol).is_none()
    }

    /// Orthogonal projection of a direction `v` onto the direction space.
    pub fn project_direction(&self, v: &[S]) -> Vec<S> {
        let k = self.basis.len();
        if k == 0 {
            return vec![S::zero(); v.len()];
        }
        let mut gram: Vec<Vec<S>> = (0..k)
            .map(|a| (0..k).map(|b| dot(&self.basis[a], &self.basis[b])).collect())
            .collect();
        let mut rhs: Vec<S> = self.basis.iter().map(|b| dot(b, v)).collect();
        // The Gram matrix of independent vectors is positive definite.
        for col in 0..k {
            let pivot = (col..k)
                .max_by(|&a, &b| {
                    gram[a][col]
                        .abs_val()
                        .partial_cmp(&gram[b][col].abs_val())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            gram.swap(col, pivot);
            rhs.swap(col, pivot);
            for row in 0..k {
                if row == col {
                    continue;
                }
                let factor = gram[row][col].clone() / gram[col][col].clone();
                let pivot_row = gram[col].clone();
                for (g, p) in gram[row].iter_mut().zip(&pivot_row) {
                    g.sub_mul_assign(&factor, p);
                }
                let r = rhs[col].clone();
                rhs[row].sub_mul_assign(&factor, &r);
            }
        }
        let coeffs: Vec<S> = (0..k).map(|a| rhs[a].clone() / gram[a][a].clone()).collect();
        (0..v.len())
            .map(|t| {
                coeffs
                    .iter()
                    .zip(&self.basis)
                    .fold(S::zero(), |acc, (c, b)| acc + c.mul_ref(&b[t]))
            })
            .collect()
    }
}

/// Reduces `v` against an echelon basis; `None` when it lies in the span.
fn reduce<S: Scalar>(basis: &[Vec<S>], mut v: Vec<S>, tol: Tolerance) -> Option<Vec<S>> {
    for b in basis {
        let lead = b.iter().position(|x| !x.is_zero_tol(Tolerance(0.0)))?;
        if v[lead].is_zero_tol(Tolerance(0.0)) {
            continue;
        }
        let factor = v[lead].clone() / b[lead].clone();
        for (x, y) in v.iter_mut().zip(b) {
            x.sub_mul_assign(&factor, y);
        }
        v[lead] = S::zero();
    }
    if v.iter().all(|x| x.is_zero_tol(tol)) {
        None
    } else {
        Some(v)
    }
}

/// The smallest affine subspace containing `points`.
pub fn affine_hull<S: Scalar>(points: &[Point<S>], tol: Tolerance) -> Result<AffineSubspace<S>, S> {
    let base = points
        .first()
        .ok_or_else(|| Error::InvalidInput("affine hull of an empty set".into()))?
        .clone();
    let mut basis: Vec<Vec<S>> = Vec::new();
    for p in &points[1..] {
        if p.len() != base.len() {
            return Err(Error::DimensionMismatch {
                expected: base.len(),
                found: p.len(),
            });
        }
        let diff: Vec<S> = p.iter().zip(&base).map(|(a, b)| a.clone() - b.clone()).collect();
        if let Some(mut residual) = reduce(&basis, diff, tol) {
            for x in residual.iter_mut() {
                if x.is_zero_tol(tol) {
                    *x = S::zero();
                }
            }
            let lead = residual
                .iter()
                .position(|x| !x.is_zero_tol(Tolerance(0.0)))
                .expect("nonzero residual");
            // Keep the echelon property: eliminate the new lead from older rows.
            for b in basis.iter_mut() {
                if b[lead].is_zero_tol(Tolerance(0.0)) {
                    continue;
                }
                let factor = b[lead].clone() / residual[lead].clone();
                for (x, y) in b.iter_mut().zip(&residual) {
                    x.sub_mul_assign(&factor, y);
                }
                b[lead] = S::zero();
            }
            basis.push(residual);
        }
    }
    Ok(AffineSubspace { base, basis })
}

/// `conv(points)` kept in V-representation, with its affine hull.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope<S> {
    points: Vec<Point<S>>,
    hull: AffineSubspace<S>,
}

impl<S: Scalar> Polytope<S> {
    /// Repeated generators are dropped.
    pub fn new(points: Vec<Point<S>>, tol: Tolerance) -> Result<Self, S> {
        let mut unique: Vec<Point<S>> = Vec::with_capacity(points.len());
        for p in points {
            if !unique.iter().any(|u| points_equal(u, &p, tol)) {
                unique.push(p);
            }
        }
        let hull = affine_hull(&unique, tol)?;
        Ok(Self { points: unique, hull })
    }

    pub fn points(&self) -> &[Point<S>] {
        &self.points
    }

    pub fn hull(&self) -> &AffineSubspace<S> {
        &self.hull
    }

    pub fn dim(&self) -> usize {
        self.hull.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.hull.ambient_dim()
    }

    /// Indices of the generators that are extreme points.
    pub fn vertex_indices(&self, tol: Tolerance) -> Result<Vec<usize>, S> {
        if self.points.len() <= 2 {
            return Ok((0..self.points.len()).collect());
        }
        let mut out = Vec::new();
        for (k, p) in self.points.iter().enumerate() {
            let others: Vec<Point<S>> = self
                .points
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != k)
                .map(|(_, q)| q.clone())
                .collect();
            if !in_hull(&others, p, tol)? {
                out.push(k);
            }
        }
        Ok(out)
    }

    pub fn vertices(&self, tol: Tolerance) -> Result<Vec<Point<S>>, S> {
        Ok(self
            .vertex_indices(tol)?
            .into_iter()
            .map(|k| self.points[k].clone())
            .collect())
    }
}

fn check_ambient<S: Scalar>(expected: usize, found: usize) -> Result<(), S> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn feasible<S: Scalar>(lp: &LinearProgram<S>, tol: Tolerance) -> Result<bool, S> {
    let sol = linprog::solve(lp, tol)?;
    Ok(sol.status != Status::Infeasible)
}

/// `x in conv(points)`.
fn in_hull<S: Scalar>(points: &[Point<S>], x: &[S], tol: Tolerance) -> Result<bool, S> {
    let k = points.len();
    let mut lp = LinearProgram::new(Direction::Maximize, k);
    for (t, xt) in x.iter().enumerate() {
        lp.add_row((0..k).map(|s| (s, points[s][t].clone())), RowSense::Eq, xt.clone());
    }
    lp.add_row((0..k).map(|s| (s, S::one())), RowSense::Eq, S::one());
    feasible(&lp, tol)
}

/// Weights `mu_s + eps` with `mu_s >= 0` summing to one, where column
/// `eps_col` holds the shared `eps`. The combination, scaled by `sign`, is
/// appended to `coordinate_rows`.
fn push_interior_block<S: Scalar>(
    lp: &mut LinearProgram<S>,
    points: &[Point<S>],
    offset: usize,
    eps_col: usize,
    sign: S,
    coordinate_rows: &mut [Vec<(usize, S)>],
) {
    let k = points.len();
    for (t, row) in coordinate_rows.iter_mut().enumerate() {
        let mut eps_coef = S::zero();
        for (s, p) in points.iter().enumerate() {
            row.push((offset + s, sign.mul_ref(&p[t])));
            eps_coef = eps_coef + sign.mul_ref(&p[t]);
        }
        row.push((eps_col, eps_coef));
    }
    let mut total: Vec<(usize, S)> = (0..k).map(|s| (offset + s, S::one())).collect();
    total.push((eps_col, S::from_i64(k as i64)));
    lp.add_row(total, RowSense::Eq, S::one());
}

fn max_eps<S: Scalar>(lp: &LinearProgram<S>, tol: Tolerance) -> Result<bool, S> {
    let sol = linprog::solve(lp, tol)?;
    Ok(match sol.status {
        Status::Infeasible => false,
        Status::Optimal => sol.objective.is_pos(tol),
        Status::Unbounded => true,
    })
}

/// `x in ri conv(P)`: the largest common lower bound on convex weights
/// representing `x` is positive.
pub fn ri_contains<S: Scalar>(p: &Polytope<S>, x: &[S], tol: Tolerance) -> Result<bool, S> {
    check_ambient(p.ambient_dim(), x.len())?;
    let k = p.points.len();
    let eps = k;
    let mut lp = LinearProgram::new(Direction::Maximize, k + 1);
    lp.set_objective(eps, S::one());
    let mut rows = vec![Vec::new(); x.len()];
    push_interior_block(&mut lp, &p.points, 0, eps, S::one(), &mut rows);
    for (row, xt) in rows.into_iter().zip(x) {
        lp.add_row(row, RowSense::Eq, xt.clone());
    }
    max_eps(&lp, tol)
}

/// `ri P1 ∩ ri P2 != ∅`.
pub fn ri_intersects<S: Scalar>(p1: &Polytope<S>, p2: &Polytope<S>, tol: Tolerance) -> Result<bool, S> {
    check_ambient(p1.ambient_dim(), p2.ambient_dim())?;
    let (k1, k2) = (p1.points.len(), p2.points.len());
    let eps = k1 + k2;
    let mut lp = LinearProgram::new(Direction::Maximize, eps + 1);
    lp.set_objective(eps, S::one());
    let mut rows = vec![Vec::new(); p1.ambient_dim()];
    push_interior_block(&mut lp, &p1.points, 0, eps, S::one(), &mut rows);
    push_interior_block(&mut lp, &p2.points, k1, eps, -S::one(), &mut rows);
    for row in rows {
        lp.add_row(row, RowSense::Eq, S::zero());
    }
    max_eps(&lp, tol)
}

/// `x in conv(P)`.
pub fn closure_contains<S: Scalar>(p: &Polytope<S>, x: &[S], tol: Tolerance) -> Result<bool, S> {
    check_ambient(p.ambient_dim(), x.len())?;
    in_hull(&p.points, x, tol)
}

/// `conv(P1) == conv(P2)`.
pub fn hull_equal<S: Scalar>(p1: &Polytope<S>, p2: &Polytope<S>, tol: Tolerance) -> Result<bool, S> {
    check_ambient(p1.ambient_dim(), p2.ambient_dim())?;
    if p1.dim() != p2.dim() {
        return Ok(false);
    }
    for x in &p1.points {
        if !closure_contains(p2, x, tol)? {
            return Ok(false);
        }
    }
    for x in &p2.points {
        if !closure_contains(p1, x, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}
