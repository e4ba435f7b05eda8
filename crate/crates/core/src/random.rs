//! Seeded random instances on small integer grids.
//!
//! Ordered pairs come from splitting μ-atoms along integer directions, so
//! the convex order holds by construction. All data is exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measures::{DiscreteMeasure, Point};
use crate::scalar::{rational_to, Rational, Scalar, Tolerance};
use crate::transport::CostMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, range: i64) -> Point<Rational> {
    (0..dim).map(|_| q(rng.gen_range(-range..=range), 1)).collect()
}

fn distinct_points(rng: &mut ChaCha8Rng, count: usize, dim: usize, range: i64) -> Vec<Point<Rational>> {
    let mut points: Vec<Point<Rational>> = Vec::with_capacity(count);
    while points.len() < count {
        let p = random_point(rng, dim, range);
        if !points.contains(&p) {
            points.push(p);
        }
    }
    points
}

fn random_weights(rng: &mut ChaCha8Rng, count: usize) -> Vec<Rational> {
    let counts: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = counts.iter().sum();
    counts.into_iter().map(|c| q(c, total)).collect()
}

/// A pair `mu <= nu` with at most `max_mu` and `max_nu` atoms.
///
/// Each μ-atom either stays put or splits into `x + a v` and `x - b v`
/// with weights in ratio `b : a`; atoms landing on the same point merge.
pub fn ordered_pair(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_mu: usize,
    max_nu: usize,
) -> (DiscreteMeasure<Rational>, DiscreteMeasure<Rational>) {
    let tol = Tolerance::DEFAULT;
    let m = rng.gen_range(1..=max_mu);
    let xs = distinct_points(rng, m, dim, 3);
    let weights = random_weights(rng, m);
    let mu = DiscreteMeasure::new(xs.clone(), weights.clone(), tol).expect("distinct atoms, positive weights");
    // Every split adds at most one atom, so at most `max_nu - m` splits.
    let mut budget = max_nu.saturating_sub(m);
    let mut atoms: Vec<Point<Rational>> = Vec::new();
    let mut masses: Vec<Rational> = Vec::new();
    let mut push = |p: Point<Rational>, w: Rational| match atoms.iter().position(|a| *a == p) {
        Some(k) => masses[k] = masses[k].clone() + w,
        None => {
            atoms.push(p);
            masses.push(w);
        }
    };
    for (x, w) in xs.iter().zip(&weights) {
        if budget == 0 || rng.gen_bool(0.25) {
            push(x.clone(), w.clone());
            continue;
        }
        budget -= 1;
        let v = loop {
            let v: Vec<i64> = (0..dim).map(|_| rng.gen_range(-2..=2)).collect();
            if v.iter().any(|&c| c != 0) {
                break v;
            }
        };
        let (a, b) = (rng.gen_range(1..=2i64), rng.gen_range(1..=2i64));
        let shift = |s: i64| -> Point<Rational> { x.iter().zip(&v).map(|(c, &u)| c.clone() + q(s * u, 1)).collect() };
        push(shift(a), w.clone() * q(b, a + b));
        push(shift(-b), w.clone() * q(a, a + b));
    }
    let nu = DiscreteMeasure::new(atoms, masses, tol).expect("split masses are positive");
    (mu, nu)
}

/// A one-dimensional pair for convex-order tests: ordered, reversed (so
/// usually not ordered), or independent with matched means.
pub fn order_test_pair_1d(rng: &mut ChaCha8Rng) -> (DiscreteMeasure<Rational>, DiscreteMeasure<Rational>) {
    let tol = Tolerance::DEFAULT;
    match rng.gen_range(0..3) {
        0 => ordered_pair(rng, 1, 5, 8),
        1 => {
            let (mu, nu) = ordered_pair(rng, 1, 5, 8);
            (nu, mu)
        }
        _ => {
            let a = rng.gen_range(1..=5);
            let b = rng.gen_range(1..=6);
            let mu = DiscreteMeasure::new(distinct_points(rng, a, 1, 4), random_weights(rng, a), tol).unwrap();
            let nu = DiscreteMeasure::new(distinct_points(rng, b, 1, 4), random_weights(rng, b), tol).unwrap();
            // Translate nu so both means agree.
            let shift = crate::measures::barycenter(&mu)[0].clone() - crate::measures::barycenter(&nu)[0].clone();
            let moved = nu.atoms().iter().map(|p| vec![p[0].clone() + shift.clone()]).collect();
            let nu = DiscreteMeasure::new(moved, nu.weights().to_vec(), tol).unwrap();
            (mu, nu)
        }
    }
}

/// Integer costs in `0..=9`.
pub fn cost(rng: &mut ChaCha8Rng, m: usize, n: usize) -> CostMatrix<Rational> {
    let values = (0..m).map(|_| (0..n).map(|_| q(rng.gen_range(0..=9), 1)).collect()).collect();
    CostMatrix::new(values).expect("rectangular")
}

/// Converts an exact measure to another scalar mode.
pub fn convert_measure<S: Scalar>(m: &DiscreteMeasure<Rational>, tol: Tolerance) -> DiscreteMeasure<S> {
    DiscreteMeasure::new(
        m.atoms().iter().map(|p| p.iter().map(rational_to).collect()).collect(),
        m.weights().iter().map(rational_to).collect(),
        tol,
    )
    .expect("conversion keeps validity")
}

pub fn convert_cost<S: Scalar>(c: &CostMatrix<Rational>) -> CostMatrix<S> {
    CostMatrix::new(c.values().iter().map(|r| r.iter().map(rational_to).collect()).collect()).expect("finite")
}
