//! Worked instances with known answers, generic over the scalar mode.

use crate::error::Result;
use crate::geometry::{closure_contains, Polytope};
use crate::measures::{DiscreteMeasure, Point};
use crate::scalar::{Scalar, Tolerance};
use crate::transport::Coupling;

fn pt<S: Scalar>(coords: &[(i64, i64)]) -> Point<S> {
    coords.iter().map(|&(n, d)| S::from_ratio(n, d)).collect()
}

fn q<S: Scalar>(n: i64, d: i64) -> S {
    S::from_ratio(n, d)
}

/// Two planar components whose restriction to the second one splits again.
///
/// μ-atoms in order `x_0, x_1, x_{-1}`; ν-atoms in order
/// `y_{-2}, y_{-1}, y_0, y_1, y_2`.
pub mod example_4_2 {
    use super::*;

    pub const X0: usize = 0;
    pub const X1: usize = 1;
    pub const XM1: usize = 2;

    pub const YM2: usize = 0;
    pub const YM1: usize = 1;
    pub const Y0: usize = 2;
    pub const Y1: usize = 3;
    pub const Y2: usize = 4;

    pub fn x_atoms<S: Scalar>() -> Vec<Point<S>> {
        vec![pt(&[(-1, 1), (0, 1)]), pt(&[(1, 2), (1, 2)]), pt(&[(1, 2), (-1, 2)])]
    }

    pub fn y_atoms<S: Scalar>() -> Vec<Point<S>> {
        vec![
            pt(&[(-2, 1), (0, 1)]),
            pt(&[(0, 1), (-1, 1)]),
            pt(&[(0, 1), (0, 1)]),
            pt(&[(0, 1), (1, 1)]),
            pt(&[(2, 1), (0, 1)]),
        ]
    }

    pub fn marginals<S: Scalar>(tol: Tolerance) -> Result<(DiscreteMeasure<S>, DiscreteMeasure<S>), S> {
        let mu = DiscreteMeasure::new(x_atoms(), vec![q(1, 3), q(1, 3), q(1, 3)], tol)?;
        let nu = DiscreteMeasure::new(
            y_atoms(),
            vec![q(1, 6), q(1, 4), q(1, 6), q(1, 4), q(1, 6)],
            tol,
        )?;
        Ok((mu, nu))
    }

    fn coupling<S: Scalar>(cells: &[(usize, usize, i64, i64)]) -> Coupling<S> {
        Coupling::from_cells(3, 5, cells.iter().map(|&(i, j, n, d)| (i, j, q(n, d))))
    }

    /// The first vertex with its literal weights 3/16, 1/16. Its rows at `x_1` and
    /// `x_{-1}` have barycenters `(1/2, 3/8)` and `(1/2, -3/8)`.
    pub fn p1_literal<S: Scalar>() -> Coupling<S> {
        coupling(&[
            (X0, YM2, 1, 6),
            (X0, Y0, 1, 6),
            (X1, Y2, 1, 12),
            (X1, Y1, 3, 16),
            (X1, YM1, 1, 16),
            (XM1, Y2, 1, 12),
            (XM1, YM1, 3, 16),
            (XM1, Y1, 1, 16),
        ])
    }

    /// The martingale coupling on the same support as [`p1_literal`].
    pub fn p1<S: Scalar>() -> Coupling<S> {
        coupling(&[
            (X0, YM2, 1, 6),
            (X0, Y0, 1, 6),
            (X1, Y2, 1, 12),
            (X1, Y1, 5, 24),
            (X1, YM1, 1, 24),
            (XM1, Y2, 1, 12),
            (XM1, YM1, 5, 24),
            (XM1, Y1, 1, 24),
        ])
    }

    pub fn p2<S: Scalar>() -> Coupling<S> {
        coupling(&[
            (X0, YM2, 1, 6),
            (X0, Y1, 1, 12),
            (X0, YM1, 1, 12),
            (X1, Y1, 1, 6),
            (X1, Y0, 1, 12),
            (X1, Y2, 1, 12),
            (XM1, YM1, 1, 6),
            (XM1, Y0, 1, 12),
            (XM1, Y2, 1, 12),
        ])
    }

    /// Vertex sets of the two components, for `{x_0}` and `{x_1, x_{-1}}`.
    pub fn component_vertices<S: Scalar>() -> [Vec<Point<S>>; 2] {
        let y = y_atoms::<S>();
        [
            vec![y[YM2].clone(), y[Y1].clone(), y[YM1].clone()],
            vec![y[Y2].clone(), y[Y1].clone(), y[YM1].clone()],
        ]
    }

    /// Vertex sets of the two pieces of `{x_1, x_{-1}}` under [`p2`].
    pub fn sub_component_vertices<S: Scalar>() -> [Vec<Point<S>>; 2] {
        let y = y_atoms::<S>();
        [
            vec![y[Y0].clone(), y[Y1].clone(), y[Y2].clone()],
            vec![y[Y0].clone(), y[YM1].clone(), y[Y2].clone()],
        ]
    }
}

/// `μ = (δ_{-1} + δ_1)/2` against uniform-plus-atoms on `[-2, 2]`, with
/// the density replaced by `n` equal cells at their centers.
pub mod example_2_1 {
    use super::*;

    pub fn marginals<S: Scalar>(n: usize, tol: Tolerance) -> Result<(DiscreteMeasure<S>, DiscreteMeasure<S>), S> {
        let mu = DiscreteMeasure::new(vec![pt(&[(-1, 1)]), pt(&[(1, 1)])], vec![q(1, 2), q(1, 2)], tol)?;
        let n = n as i64;
        let mut atoms = vec![pt(&[(-2, 1)]), pt(&[(0, 1)]), pt(&[(2, 1)])];
        let mut weights = vec![q(1, 8), q(2, 8), q(1, 8)];
        for k in 0..n {
            // Cell center -2 + (k + 1/2) 4/n.
            atoms.push(pt(&[(-2 * n + 4 * k + 2, n)]));
            weights.push(q(1, 2 * n));
        }
        Ok((mu, DiscreteMeasure::new(atoms, weights, tol)?))
    }

    /// Limiting components of `-1` and `1`.
    pub fn intervals<S: Scalar>() -> [(S, S); 2] {
        [(q(-2, 1), q(0, 1)), (q(0, 1), q(2, 1))]
    }

    /// A function convex on each component but not on the line; the
    /// shared atom 0 takes the left branch.
    pub fn weakly_convex<S: Scalar>(y: &S) -> S {
        if y.is_pos(Tolerance(0.0)) {
            (y.clone() - S::one()).abs_val() - S::from_i64(5)
        } else {
            (y.clone() + S::one()).abs_val()
        }
    }
}

/// Three planar atoms spreading to the uniform law on `[-1, 1]^2`, with
/// the density replaced by an `n x n` grid of cell centers.
pub mod example_4_1 {
    use super::*;

    pub fn marginals<S: Scalar>(n: usize, tol: Tolerance) -> Result<(DiscreteMeasure<S>, DiscreteMeasure<S>), S> {
        let mu = DiscreteMeasure::new(
            vec![pt(&[(-1, 2), (0, 1)]), pt(&[(1, 2), (1, 2)]), pt(&[(1, 2), (-1, 2)])],
            vec![q(1, 2), q(1, 4), q(1, 4)],
            tol,
        )?;
        let n = n as i64;
        let center = |k: i64| (-n + 2 * k + 1, n);
        let mut atoms = Vec::with_capacity((n * n) as usize);
        for a in 0..n {
            for b in 0..n {
                atoms.push(pt(&[center(a), center(b)]));
            }
        }
        let weights = vec![q(1, n * n); atoms.len()];
        Ok((mu, DiscreteMeasure::new(atoms, weights, tol)?))
    }

    /// The three limiting quadrilaterals, in μ-atom order.
    pub fn quadrilaterals<S: Scalar>() -> [Vec<Point<S>>; 3] {
        let p = |a: i64, b: i64| pt::<S>(&[(a, 1), (b, 1)]);
        [
            vec![p(-1, -1), p(-1, 1), p(0, 1), p(0, -1)],
            vec![p(0, 1), p(1, 1), p(1, 0), p(0, 0)],
            vec![p(0, 0), p(1, 0), p(1, -1), p(0, -1)],
        ]
    }
}

fn segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(u, v)| v - u).collect();
    let ap: Vec<f64> = a.iter().zip(p).map(|(u, v)| v - u).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (ab.iter().zip(&ap).map(|(u, v)| u * v).sum::<f64>() / len2).clamp(0.0, 1.0)
    };
    ab.iter()
        .zip(&ap)
        .map(|(u, v)| (v - t * u).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean distance from `x` to `conv(points)` for planar or linear hulls.
pub fn hull_distance(points: &[Point<f64>], x: &[f64]) -> Result<f64, f64> {
    let hull = Polytope::new(points.to_vec(), Tolerance(1e-12))?;
    if closure_contains(&hull, x, Tolerance(1e-12))? {
        return Ok(0.0);
    }
    // Outside the hull the nearest point lies on an edge, and every edge
    // joins two generators; interior chords are never closer.
    let mut best = f64::INFINITY;
    for (a, p) in points.iter().enumerate() {
        for q in &points[a..] {
            best = best.min(segment_distance(x, p, q));
        }
    }
    Ok(best)
}

/// Hausdorff distance between two polytopes in dimension at most two,
/// attained at a vertex of one of them.
pub fn hausdorff(a: &[Point<f64>], b: &[Point<f64>]) -> Result<f64, f64> {
    let mut worst: f64 = 0.0;
    for x in a {
        worst = worst.max(hull_distance(b, x)?);
    }
    for y in b {
        worst = worst.max(hull_distance(a, y)?);
    }
    Ok(worst)
}
