//! Finitely supported probability measures and convex-order decisions.

use crate::error::{Error, Result};
use crate::linprog::{self, Status};
use crate::scalar::{dot, sum, Scalar, Tolerance};
use crate::transport::{self, Coupling};

pub type Point<S> = Vec<S>;

/// A probability measure with finitely many atoms in `R^d`.
///
/// Atoms are pairwise distinct and weights strictly positive with unit
/// total (exactly in rational mode, within the tolerance in float mode).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<S> {
    dim: usize,
    atoms: Vec<Point<S>>,
    weights: Vec<S>,
}

impl<S: Scalar> DiscreteMeasure<S> {
    /// Builds a measure, merging repeated atoms by summing their weights.
    pub fn new(atoms: Vec<Point<S>>, weights: Vec<S>, tol: Tolerance) -> Result<Self, S> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let dim = atoms[0].len();
        if dim == 0 {
            return Err(Error::InvalidMeasure("atoms must have dimension >= 1".into()));
        }
        let mut merged_atoms: Vec<Point<S>> = Vec::with_capacity(atoms.len());
        let mut merged_weights: Vec<S> = Vec::with_capacity(atoms.len());
        for (k, (atom, weight)) in atoms.into_iter().zip(weights).enumerate() {
            if atom.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: atom.len(),
                });
            }
            if !atom.iter().all(Scalar::is_finite) || !weight.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom {k} is not finite")));
            }
            if !weight.is_pos(tol) {
                return Err(Error::InvalidMeasure(format!("weight of atom {k} is not positive")));
            }
            match merged_atoms.iter().position(|a| points_equal(a, &atom, tol)) {
                Some(pos) => merged_weights[pos] = merged_weights[pos].add_ref(&weight),
                None => {
                    merged_atoms.push(atom);
                    merged_weights.push(weight);
                }
            }
        }
        let total = sum(&merged_weights);
        if !total.approx_eq(&S::one(), tol) {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(Self {
            dim,
            atoms: merged_atoms,
            weights: merged_weights,
        })
    }

    pub fn dirac(point: Point<S>) -> Self {
        Self {
            dim: point.len(),
            atoms: vec![point],
            weights: vec![S::one()],
        }
    }

    /// Equal weights on `points` (duplicates merged).
    pub fn uniform(points: Vec<Point<S>>, tol: Tolerance) -> Result<Self, S> {
        let k = points.len() as i64;
        let weights = vec![S::from_ratio(1, k.max(1)); points.len()];
        Self::new(points, weights, tol)
    }

    /// `sum_k w_k m_k` for nonnegative mixture weights summing to one.
    pub fn mixture(parts: &[(S, &DiscreteMeasure<S>)], tol: Tolerance) -> Result<Self, S> {
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for (w, m) in parts {
            if !w.is_pos(tol) {
                continue;
            }
            for (a, mw) in m.atoms.iter().zip(&m.weights) {
                atoms.push(a.clone());
                weights.push(w.mul_ref(mw));
            }
        }
        Self::new(atoms, weights, tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Point<S>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn atom(&self, i: usize) -> &[S] {
        &self.atoms[i]
    }

    pub fn weight(&self, i: usize) -> &S {
        &self.weights[i]
    }

    pub fn integrate(&self, f: impl Fn(&[S]) -> S) -> S {
        self.atoms
            .iter()
            .zip(&self.weights)
            .fold(S::zero(), |acc, (a, w)| acc + w.mul_ref(&f(a)))
    }

    /// Integrates a function given by its values on the atoms.
    pub fn integrate_values(&self, values: &[S]) -> S {
        dot(&self.weights, values)
    }

    pub fn index_of(&self, point: &[S], tol: Tolerance) -> Option<usize> {
        self.atoms.iter().position(|a| points_equal(a, point, tol))
    }
}

pub fn points_equal<S: Scalar>(a: &[S], b: &[S], tol: Tolerance) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(u, v)| u.approx_eq(v, tol))
}

/// `sum_i w_i x_i`.
pub fn barycenter<S: Scalar>(m: &DiscreteMeasure<S>) -> Point<S> {
    let mut center = vec![S::zero(); m.dim];
    for (a, w) in m.atoms.iter().zip(&m.weights) {
        for (c, x) in center.iter_mut().zip(a) {
            *c = c.add_ref(&w.mul_ref(x));
        }
    }
    center
}

/// A triple `(phi, psi, h)` on the atoms with
/// `phi_i + psi_j + h_i . (y_j - x_i) >= 0` on every pair and
/// `mu[phi] + nu[psi] < 0`; its existence rules out convex order.
#[derive(Debug, Clone, PartialEq)]
pub struct Separation<S> {
    pub phi: Vec<S>,
    pub psi: Vec<S>,
    pub h: Vec<Vec<S>>,
}

impl<S: Scalar> Separation<S> {
    pub fn value(&self, mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>) -> S {
        mu.integrate_values(&self.phi) + nu.integrate_values(&self.psi)
    }

    /// Smallest `phi_i + psi_j + h_i . (y_j - x_i)` over all atom pairs.
    pub fn min_pair_value(&self, mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>) -> S {
        let mut best: Option<S> = None;
        for (i, x) in mu.atoms().iter().enumerate() {
            for (j, y) in nu.atoms().iter().enumerate() {
                let v = pair_value(&self.phi[i], &self.psi[j], &self.h[i], x, y);
                best = Some(match best {
                    Some(b) if b <= v => b,
                    _ => v,
                });
            }
        }
        best.unwrap_or_else(S::zero)
    }

    pub fn verify(&self, mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>, tol: Tolerance) -> bool {
        if self.phi.len() != mu.len()
            || self.psi.len() != nu.len()
            || self.h.len() != mu.len()
            || self.h.iter().any(|h| h.len() != mu.dim())
        {
            return false;
        }
        self.value(mu, nu).is_neg(tol) && !self.min_pair_value(mu, nu).is_neg(tol)
    }
}

/// `phi + psi + h . (y - x)`.
pub(crate) fn pair_value<S: Scalar>(phi: &S, psi: &S, h: &[S], x: &[S], y: &[S]) -> S {
    let mut v = phi.add_ref(psi);
    for ((hk, xk), yk) in h.iter().zip(x).zip(y) {
        v = v + hk.mul_ref(&(yk.clone() - xk.clone()));
    }
    v
}

/// Outcome of a convex-order decision; exactly one witness by construction.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderCertificate<S> {
    Ordered(Coupling<S>),
    NotOrdered(Separation<S>),
}

impl<S: Scalar> OrderCertificate<S> {
    pub fn verdict(&self) -> bool {
        matches!(self, OrderCertificate::Ordered(_))
    }

    pub fn verify(&self, mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>, tol: Tolerance) -> bool {
        match self {
            OrderCertificate::Ordered(p) => p.check(mu, nu, tol).holds(),
            OrderCertificate::NotOrdered(sep) => sep.verify(mu, nu, tol),
        }
    }
}

/// Decides `mu <= nu` in convex order by feasibility of the martingale
/// transport polytope.
pub fn convex_order_check<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    tol: Tolerance,
) -> Result<OrderCertificate<S>, S> {
    let lp = transport::assemble(mu, nu)?;
    let sol = linprog::solve(&lp, tol)?;
    match sol.status {
        Status::Optimal => Ok(OrderCertificate::Ordered(Coupling::from_flat(
            mu.len(),
            nu.len(),
            &sol.primal,
        ))),
        Status::Infeasible => {
            let ray = sol.farkas.expect("infeasible solutions carry a ray");
            Ok(OrderCertificate::NotOrdered(transport::separation_from_ray(
                mu, nu, &ray.rows,
            )))
        }
        Status::Unbounded => Err(Error::UnexpectedStatus(Status::Unbounded)),
    }
}

/// One-dimensional convex order through potential functions: equal means
/// and `sum_i w_i |x_i - k|` dominated at every atom `k` of either measure.
pub fn oracle_convex_order_1d<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    tol: Tolerance,
) -> Result<bool, S> {
    if mu.dim() != 1 || nu.dim() != 1 {
        return Err(Error::InvalidInput("the potential-function oracle needs d = 1".into()));
    }
    if !barycenter(mu)[0].approx_eq(&barycenter(nu)[0], tol) {
        return Ok(false);
    }
    let potential = |m: &DiscreteMeasure<S>, k: &S| m.integrate(|x| (x[0].clone() - k.clone()).abs_val());
    let ordered = mu
        .atoms()
        .iter()
        .chain(nu.atoms())
        .all(|k| !(potential(mu, &k[0]) - potential(nu, &k[0])).is_pos(tol));
    Ok(ordered)
}
