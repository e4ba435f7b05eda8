//! Reference computations that never touch the library's LP kernel.
//!
//! Polytope optima come from brute-force vertex enumeration: every basic
//! feasible solution of `A x = b, x >= 0` is found by solving each column
//! subset exactly.

#![allow(dead_code, clippy::needless_range_loop)]

use motpaver::{Rational, Scalar};

pub type Q = Rational;

pub fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

/// Equality system `A x = b` over nonnegative `x`.
#[derive(Debug, Clone)]
pub struct System {
    pub a: Vec<Vec<Q>>,
    pub b: Vec<Q>,
    pub vars: usize,
}

impl System {
    fn new(vars: usize) -> Self {
        Self {
            a: Vec::new(),
            b: Vec::new(),
            vars,
        }
    }

    fn push(&mut self, row: Vec<Q>, rhs: Q) {
        assert_eq!(row.len(), self.vars);
        self.a.push(row);
        self.b.push(rhs);
    }
}

/// The unique `x` supported on `cols` with `A x = b`, if those columns are
/// independent and the system is consistent.
pub fn basic_solution(sys: &System, cols: &[usize]) -> Option<Vec<Q>> {
    let k = cols.len();
    let mut rows: Vec<Vec<Q>> = sys
        .a
        .iter()
        .zip(&sys.b)
        .map(|(row, rhs)| {
            let mut r: Vec<Q> = cols.iter().map(|&c| row[c].clone()).collect();
            r.push(rhs.clone());
            r
        })
        .collect();
    for c in 0..k {
        let pivot = (c..rows.len()).find(|&r| rows[r][c] != Q::zero())?;
        rows.swap(c, pivot);
        let p = rows[c][c].clone();
        for v in rows[c].iter_mut() {
            *v = v.clone() / p.clone();
        }
        for r in 0..rows.len() {
            if r != c && rows[r][c] != Q::zero() {
                let f = rows[r][c].clone();
                for t in 0..=k {
                    let d = f.clone() * rows[c][t].clone();
                    rows[r][t] = rows[r][t].clone() - d;
                }
            }
        }
    }
    if rows[k..].iter().any(|r| r[k] != Q::zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); sys.vars];
    for (c, &col) in cols.iter().enumerate() {
        x[col] = rows[c][k].clone();
    }
    Some(x)
}

/// Rank of the columns `cols` of `A`.
pub fn rank(sys: &System, cols: &[usize]) -> usize {
    let mut rows: Vec<Vec<Q>> = sys.a.iter().map(|row| cols.iter().map(|&c| row[c].clone()).collect()).collect();
    let mut r = 0;
    for c in 0..cols.len() {
        let Some(pivot) = (r..rows.len()).find(|&t| rows[t][c] != Q::zero()) else {
            continue;
        };
        rows.swap(r, pivot);
        for t in r + 1..rows.len() {
            if rows[t][c] != Q::zero() {
                let f = rows[t][c].clone() / rows[r][c].clone();
                for s in c..cols.len() {
                    let d = f.clone() * rows[r][s].clone();
                    rows[t][s] = rows[t][s].clone() - d;
                }
            }
        }
        r += 1;
    }
    r
}

/// Every vertex of `{A x = b, x >= 0}` with support inside `candidates`.
///
/// The support of a vertex has independent columns and extends to a basis
/// of the candidate columns, so only subsets of size `rank` are tried.
pub fn vertices(sys: &System, candidates: &[usize]) -> Vec<Vec<Q>> {
    assert!(candidates.len() <= 24, "enumeration is exponential in the candidate count");
    let r = rank(sys, candidates) as u32;
    let mut out: Vec<Vec<Q>> = Vec::new();
    for mask in 0u32..(1 << candidates.len()) {
        if mask.count_ones() != r {
            continue;
        }
        let cols: Vec<usize> = (0..candidates.len())
            .filter(|t| mask & (1 << t) != 0)
            .map(|t| candidates[t])
            .collect();
        if let Some(x) = basic_solution(sys, &cols) {
            if x.iter().all(|v| *v >= Q::zero()) && !out.contains(&x) {
                out.push(x);
            }
        }
    }
    out
}

pub fn linear(c: &[Q], x: &[Q]) -> Q {
    c.iter().zip(x).fold(Q::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

/// `max c . x` over the polytope, or `None` if it is empty.
pub fn max_linear(sys: &System, candidates: &[usize], c: &[Q]) -> Option<Q> {
    vertices(sys, candidates).iter().map(|x| linear(c, x)).max()
}

/// Martingale transport system over variables `p[i * n + j]`.
pub fn mot_system(xs: &[Vec<Q>], mu: &[Q], ys: &[Vec<Q>], nu: &[Q]) -> System {
    let (m, n) = (xs.len(), ys.len());
    let d = xs.first().map_or(0, Vec::len);
    let mut sys = System::new(m * n);
    for i in 0..m {
        let mut row = vec![Q::zero(); m * n];
        for j in 0..n {
            row[i * n + j] = Q::one();
        }
        sys.push(row, mu[i].clone());
    }
    for j in 0..n {
        let mut row = vec![Q::zero(); m * n];
        for i in 0..m {
            row[i * n + j] = Q::one();
        }
        sys.push(row, nu[j].clone());
    }
    for i in 0..m {
        for k in 0..d {
            let mut row = vec![Q::zero(); m * n];
            for j in 0..n {
                row[i * n + j] = ys[j][k].clone() - xs[i][k].clone();
            }
            sys.push(row, Q::zero());
        }
    }
    sys
}

/// Competitors of a finite plan: same x-masses, same y-masses and same
/// conditional barycenters, on the plan's x-atoms times its y-atoms.
/// Returns the system with its row and column atom lists.
pub fn competitor_system(pairs: &[(usize, usize)], weights: &[Q], ys: &[Vec<Q>]) -> (System, Vec<usize>, Vec<usize>) {
    let mut rows: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    rows.sort_unstable();
    rows.dedup();
    let mut cols: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    cols.sort_unstable();
    cols.dedup();
    let (m, n) = (rows.len(), cols.len());
    let d = ys[0].len();
    let mut sys = System::new(m * n);
    for (a, &i) in rows.iter().enumerate() {
        let mass = pairs
            .iter()
            .zip(weights)
            .filter(|(p, _)| p.0 == i)
            .fold(Q::zero(), |acc, (_, w)| acc + w.clone());
        let mut row = vec![Q::zero(); m * n];
        for b in 0..n {
            row[a * n + b] = Q::one();
        }
        sys.push(row, mass);
        for k in 0..d {
            let moment = pairs
                .iter()
                .zip(weights)
                .filter(|(p, _)| p.0 == i)
                .fold(Q::zero(), |acc, (p, w)| acc + w.clone() * ys[p.1][k].clone());
            let mut row = vec![Q::zero(); m * n];
            for (b, &j) in cols.iter().enumerate() {
                row[a * n + b] = ys[j][k].clone();
            }
            sys.push(row, moment);
        }
    }
    for (b, &j) in cols.iter().enumerate() {
        let mass = pairs
            .iter()
            .zip(weights)
            .filter(|(p, _)| p.1 == j)
            .fold(Q::zero(), |acc, (_, w)| acc + w.clone());
        let mut row = vec![Q::zero(); m * n];
        for a in 0..m {
            row[a * n + b] = Q::one();
        }
        sys.push(row, mass);
    }
    (sys, rows, cols)
}

/// Best competitor value by exhaustive vertex enumeration.
pub fn brute_competitor_max(pairs: &[(usize, usize)], weights: &[Q], ys: &[Vec<Q>], cost: &[Vec<Q>]) -> Q {
    let (sys, rows, cols) = competitor_system(pairs, weights, ys);
    let c: Vec<Q> = rows
        .iter()
        .flat_map(|&i| cols.iter().map(move |&j| cost[i][j].clone()))
        .collect();
    let all: Vec<usize> = (0..sys.vars).collect();
    max_linear(&sys, &all, &c).expect("the plan itself is a competitor")
}

/// One-dimensional convex order by call prices: equal mass, equal mean
/// and `E_mu (X - k)^+ <= E_nu (Y - k)^+` at every kink `k`.
pub fn convex_order_by_calls(mu: &[(Q, Q)], nu: &[(Q, Q)]) -> bool {
    let mass = |m: &[(Q, Q)]| m.iter().fold(Q::zero(), |acc, (_, w)| acc + w.clone());
    let mean = |m: &[(Q, Q)]| m.iter().fold(Q::zero(), |acc, (x, w)| acc + x.clone() * w.clone());
    let call = |m: &[(Q, Q)], k: &Q| {
        m.iter().fold(Q::zero(), |acc, (x, w)| {
            let payoff = x.clone() - k.clone();
            if payoff > Q::zero() {
                acc + payoff * w.clone()
            } else {
                acc
            }
        })
    };
    mass(mu) == mass(nu)
        && mean(mu) == mean(nu)
        && mu.iter().chain(nu).all(|(k, _)| call(mu, k) <= call(nu, k))
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Counterclockwise convex hull (monotone chain).
pub fn planar_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Distance from `p` to a convex polygon given counterclockwise.
fn polygon_distance(p: (f64, f64), poly: &[(f64, f64)]) -> f64 {
    let k = poly.len();
    if k >= 3 && (0..k).all(|e| cross(poly[e], poly[(e + 1) % k], p) >= 0.0) {
        return 0.0;
    }
    (0..k)
        .map(|e| segment_distance(p, poly[e], poly[(e + 1) % k]))
        .fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance between the convex hulls of two planar point sets.
/// For convex sets the farthest point is a vertex of either hull.
pub fn planar_hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (ha, hb) = (planar_hull(a), planar_hull(b));
    let one_way = |from: &[(f64, f64)], to: &[(f64, f64)]| {
        from.iter().map(|&p| polygon_distance(p, to)).fold(0.0, f64::max)
    };
    one_way(&ha, &hb).max(one_way(&hb, &ha))
}
