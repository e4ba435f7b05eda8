//! Competitors of finite plans and martingale-monotonicity sweeps.
//!
//! A competitor of a finite plan `P0` has the same X-marginal, the same
//! Y-marginal and the same conditional barycenters. Plans here live on
//! atom indices: `(i, j)` pairs `(xs[i], ys[j])` with a cost matrix.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linprog::{Direction, LowerBound, RowSense, Status};
use crate::measures::Point;
use crate::paving::ComponentPaving;
use crate::scalar::{sum, Scalar, Tolerance};
use crate::transport::{self, CostMatrix, Coupling, Marginals};

/// A finitely supported probability on atom pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePlan<S> {
    pairs: Vec<(usize, usize)>,
    weights: Vec<S>,
}

impl<S: Scalar> FinitePlan<S> {
    pub fn new(pairs: Vec<(usize, usize)>, weights: Vec<S>, tol: Tolerance) -> Result<Self, S> {
        if pairs.is_empty() || pairs.len() != weights.len() {
            return Err(Error::InvalidInput("a plan needs one positive weight per pair".into()));
        }
        if weights.iter().any(|w| !w.is_pos(tol)) {
            return Err(Error::InvalidInput("plan weights must be positive".into()));
        }
        if !sum(&weights).approx_eq(&S::one(), tol) {
            return Err(Error::InvalidInput("plan weights must sum to one".into()));
        }
        let mut seen = pairs.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != pairs.len() {
            return Err(Error::InvalidInput("plan pairs must be distinct".into()));
        }
        Ok(Self { pairs, weights })
    }

    /// Normalizes positive integer weights.
    pub fn from_counts(pairs: Vec<(usize, usize)>, counts: &[i64], tol: Tolerance) -> Result<Self, S> {
        let total: i64 = counts.iter().sum();
        let weights = counts.iter().map(|&c| S::from_ratio(c, total.max(1))).collect();
        Self::new(pairs, weights, tol)
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    /// Distinct x-atoms in first-appearance order.
    pub fn x_atoms(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for &(i, _) in &self.pairs {
            if !out.contains(&i) {
                out.push(i);
            }
        }
        out
    }

    pub fn y_atoms(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for &(_, j) in &self.pairs {
            if !out.contains(&j) {
                out.push(j);
            }
        }
        out
    }

    pub fn value(&self, cost: &CostMatrix<S>) -> S {
        self.pairs
            .iter()
            .zip(&self.weights)
            .fold(S::zero(), |acc, (&(i, j), w)| acc + w.mul_ref(cost.get(i, j)))
    }

    fn x_mass(&self, i: usize) -> S {
        sum(self.pairs.iter().zip(&self.weights).filter(|((a, _), _)| *a == i).map(|(_, w)| w))
    }

    fn y_mass(&self, j: usize) -> S {
        sum(self.pairs.iter().zip(&self.weights).filter(|((_, b), _)| *b == j).map(|(_, w)| w))
    }

    /// Conditional Y-barycenter given `X = xs[i]`.
    fn barycenter(&self, i: usize, ys: &[Point<S>]) -> Point<S> {
        let d = ys[0].len();
        let mut out = vec![S::zero(); d];
        for (&(a, j), w) in self.pairs.iter().zip(&self.weights) {
            if a == i {
                for (o, y) in out.iter_mut().zip(&ys[j]) {
                    *o = o.add_ref(&w.mul_ref(y));
                }
            }
        }
        let mass = self.x_mass(i);
        out.into_iter().map(|v| v / mass.clone()).collect()
    }

    /// Whether `other` has the same marginals and conditional barycenters.
    pub fn is_competitor_of(&self, other: &FinitePlan<S>, ys: &[Point<S>], tol: Tolerance) -> bool {
        let mut xs = self.x_atoms();
        xs.extend(other.x_atoms());
        let mut yv = self.y_atoms();
        yv.extend(other.y_atoms());
        xs.iter().all(|&i| {
            let (a, b) = (self.x_mass(i), other.x_mass(i));
            a.approx_eq(&b, tol)
                && (!a.is_pos(tol)
                    || self
                        .barycenter(i, ys)
                        .iter()
                        .zip(other.barycenter(i, ys))
                        .all(|(u, v)| u.approx_eq(&v, tol)))
        }) && yv.iter().all(|&j| self.y_mass(j).approx_eq(&other.y_mass(j), tol))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Competitor<S> {
    pub value: S,
    pub plan: FinitePlan<S>,
}

/// Maximizes `P'[c]` over competitors of `plan` supported on its x-atoms
/// times `universe`.
///
/// Universe atoms outside the plan's Y-support keep Y-mass zero, so they
/// never carry mass; the competitor set does not depend on the universe.
pub fn competitor_max<S: Scalar>(
    plan: &FinitePlan<S>,
    ys: &[Point<S>],
    cost: &CostMatrix<S>,
    universe: &[usize],
    tol: Tolerance,
) -> Result<Competitor<S>, S> {
    let plan_ys = plan.y_atoms();
    if let Some(j) = plan_ys.iter().find(|j| !universe.contains(j)) {
        return Err(Error::InvalidInput(format!("y-universe misses plan atom {j}")));
    }
    let rows = plan.x_atoms();
    let centers: Vec<Point<S>> = rows.iter().map(|&i| plan.barycenter(i, ys)).collect();
    let x_mass: Vec<S> = rows.iter().map(|&i| plan.x_mass(i)).collect();
    let targets: Vec<Point<S>> = universe.iter().map(|&j| ys[j].clone()).collect();
    let y_mass: Vec<S> = universe.iter().map(|&j| plan.y_mass(j)).collect();
    // The barycenter rows of a competitor are the martingale rows of the
    // transport polytope with each x-atom moved to its conditional mean.
    let marg = Marginals {
        xs: &centers,
        mu: &x_mass,
        ys: &targets,
        nu: &y_mass,
    };
    let sol = marg.solve(&cost.restrict(&rows, universe), tol)?;
    let mut pairs = Vec::new();
    let mut weights = Vec::new();
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in universe.iter().enumerate() {
            let w = sol.coupling.mass(a, b);
            if w.is_pos(tol) {
                pairs.push((i, j));
                weights.push(w.clone());
            }
        }
    }
    Ok(Competitor {
        value: sol.value,
        plan: FinitePlan { pairs, weights },
    })
}

/// Whether `candidate` beats `base` strictly (exact) or by more than
/// `tol (1 + |base|)` (float).
fn improves<S: Scalar>(candidate: &S, base: &S, tol: Tolerance) -> bool {
    (candidate.clone() - base.clone()).is_pos(S::rel_tol(base, tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepParams {
    /// Largest number of x-atoms in a random plan.
    pub max_x_atoms: usize,
    /// Number of random plans on top of the exhaustive two-atom sweep.
    pub random_plans: usize,
    pub seed: u64,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            max_x_atoms: 4,
            random_plans: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViolationWitness<S> {
    pub plan: FinitePlan<S>,
    pub competitor: FinitePlan<S>,
    /// `P'[c] - P0[c]`.
    pub gap: S,
}

impl<S: Scalar> ViolationWitness<S> {
    /// Rechecks the competitor relations and the gap by substitution.
    pub fn verify(&self, ys: &[Point<S>], cost: &CostMatrix<S>, tol: Tolerance) -> bool {
        let base = self.plan.value(cost);
        let gap = self.competitor.value(cost) - base.clone();
        self.plan.is_competitor_of(&self.competitor, ys, tol)
            && gap.approx_eq(&self.gap, S::rel_tol(&base, tol))
            && improves(&self.competitor.value(cost), &base, tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Violated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityCertificate<S> {
    pub verdict: Verdict,
    pub trials: usize,
    pub witness: Option<ViolationWitness<S>>,
    pub params: SweepParams,
}

/// The plans of a sweep: for every one- and two-atom subset of the
/// x-atoms of `gamma`, its full rows with equal weights; then
/// `random_plans` random sub-supports with up to `max_x_atoms` rows and
/// weights drawn from `1..=9`.
pub fn sweep_plans<S: Scalar>(gamma: &[(usize, usize)], params: &SweepParams, tol: Tolerance) -> Result<Vec<FinitePlan<S>>, S> {
    let mut rows: Vec<(usize, Vec<usize>)> = Vec::new();
    for &(i, j) in gamma {
        match rows.iter_mut().find(|(a, _)| *a == i) {
            Some((_, row)) => {
                if !row.contains(&j) {
                    row.push(j)
                }
            }
            None => rows.push((i, vec![j])),
        }
    }
    let full = |chosen: &[usize]| {
        let pairs: Vec<(usize, usize)> = chosen
            .iter()
            .flat_map(|&r| {
                let (i, row) = &rows[r];
                row.iter().map(move |&j| (*i, j))
            })
            .collect();
        let counts = vec![1; pairs.len()];
        FinitePlan::from_counts(pairs, &counts, tol)
    };
    let mut plans = Vec::new();
    for a in 0..rows.len() {
        plans.push(full(&[a])?);
        for b in a + 1..rows.len() {
            plans.push(full(&[a, b])?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let indices: Vec<usize> = (0..rows.len()).collect();
    for _ in 0..params.random_plans {
        if rows.is_empty() {
            break;
        }
        let k = rng.gen_range(1..=params.max_x_atoms.clamp(1, rows.len()));
        let mut pairs = Vec::new();
        let mut counts = Vec::new();
        for &r in indices.choose_multiple(&mut rng, k) {
            let (i, row) = &rows[r];
            let take = rng.gen_range(1..=row.len());
            for &j in row.choose_multiple(&mut rng, take) {
                pairs.push((*i, j));
                counts.push(rng.gen_range(1..=9));
            }
        }
        plans.push(FinitePlan::from_counts(pairs, &counts, tol)?);
    }
    Ok(plans)
}

/// Searches finite plans inside `gamma` for an improving competitor over
/// the ν-atoms `ys`. The first violating plan in sweep order is reported.
pub fn certify_support<S: Scalar>(
    gamma: &[(usize, usize)],
    ys: &[Point<S>],
    cost: &CostMatrix<S>,
    params: &SweepParams,
    tol: Tolerance,
) -> Result<MonotonicityCertificate<S>, S> {
    if gamma.is_empty() {
        return Err(Error::InvalidInput("the candidate support is empty".into()));
    }
    let plans = sweep_plans::<S>(gamma, params, tol)?;
    let universe: Vec<usize> = (0..ys.len()).collect();
    let outcomes: Vec<Option<ViolationWitness<S>>> = plans
        .par_iter()
        .map(|plan| {
            let base = plan.value(cost);
            let best = competitor_max(plan, ys, cost, &universe, tol)?;
            Ok(improves(&best.value, &base, tol).then(|| ViolationWitness {
                plan: plan.clone(),
                gap: best.value.clone() - base,
                competitor: best.plan,
            }))
        })
        .collect::<Result<_, S>>()?;
    let witness = outcomes.into_iter().flatten().next();
    Ok(MonotonicityCertificate {
        verdict: if witness.is_some() { Verdict::Violated } else { Verdict::Certified },
        trials: plans.len(),
        witness,
        params: params.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport<S> {
    pub value: S,
    /// Pairs with zero dual slack.
    pub gamma: Vec<(usize, usize)>,
    /// Least and greatest `P[c]` over couplings concentrated on `gamma`.
    pub min_on_gamma: S,
    pub max_on_gamma: S,
    pub optimizer_concentrated: bool,
}

impl<S: Scalar> ConcentrationReport<S> {
    /// Every coupling on `gamma` is optimal and the optimizer lives there.
    pub fn holds(&self, tol: Tolerance) -> bool {
        let t = S::rel_tol(&self.value, tol);
        self.optimizer_concentrated && self.min_on_gamma.approx_eq(&self.value, t) && self.max_on_gamma.approx_eq(&self.value, t)
    }

    pub fn is_concentrated(&self, coupling: &Coupling<S>, tol: Tolerance) -> bool {
        coupling.support(tol).iter().all(|c| self.gamma.contains(c))
    }
}

/// Solves the primal and dual, takes the tight pairs as `gamma`, and
/// checks that every coupling concentrated on `gamma` is optimal.
pub fn optimality_iff_concentrated<S: Scalar>(
    mu: &crate::measures::DiscreteMeasure<S>,
    nu: &crate::measures::DiscreteMeasure<S>,
    cost: &CostMatrix<S>,
    tol: Tolerance,
) -> Result<ConcentrationReport<S>, S> {
    let sol = transport::solve(mu, nu, cost, tol)?;
    let gamma = sol.dual.tight_pairs(tol);
    let marg = Marginals::of(mu, nu);
    let mut lp = marg.assemble();
    for i in 0..marg.m() {
        for j in 0..marg.n() {
            if !gamma.contains(&(i, j)) {
                lp.add_row([(marg.var(i, j), S::one())], RowSense::Eq, S::zero());
            }
            lp.set_objective(marg.var(i, j), cost.get(i, j).clone());
        }
    }
    debug_assert!(lp.lower.iter().all(|b| *b == LowerBound::Zero));
    let mut extreme = [S::zero(), S::zero()];
    for (slot, direction) in extreme.iter_mut().zip([Direction::Minimize, Direction::Maximize]) {
        lp.direction = direction;
        let run = crate::linprog::solve(&lp, tol)?;
        if run.status != Status::Optimal {
            return Err(Error::UnexpectedStatus(run.status));
        }
        *slot = run.objective;
    }
    let [min_on_gamma, max_on_gamma] = extreme;
    let optimizer_concentrated = sol.coupling.support(tol).iter().all(|c| gamma.contains(c));
    Ok(ConcentrationReport {
        value: sol.value,
        gamma,
        min_on_gamma,
        max_on_gamma,
        optimizer_concentrated,
    })
}

/// For each component, whether `values` restricted to its attached
/// ν-atoms has nondecreasing difference quotients in increasing order.
pub fn weakly_convex_check_1d<S: Scalar>(
    values: &[S],
    ys: &[Point<S>],
    paving: &ComponentPaving<S>,
    tol: Tolerance,
) -> Result<Vec<bool>, S> {
    if ys.first().is_some_and(|y| y.len() != 1) {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: ys[0].len(),
        });
    }
    if values.len() != ys.len() {
        return Err(Error::InvalidInput("one value per ν-atom is required".into()));
    }
    Ok(paving
        .components
        .iter()
        .map(|c| {
            let mut atoms = c.j_atoms();
            atoms.sort_by(|&a, &b| ys[a][0].partial_cmp(&ys[b][0]).expect("finite coordinates"));
            let slopes: Vec<S> = atoms
                .windows(2)
                .map(|w| (values[w[1]].clone() - values[w[0]].clone()) / (ys[w[1]][0].clone() - ys[w[0]][0].clone()))
                .collect();
            slopes.windows(2).all(|s| !(s[0].clone() - s[1].clone()).is_pos(tol))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::example_4_2 as ex;
    use crate::scalar::Rational;

    const TOL: Tolerance = Tolerance::DEFAULT;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn single_pair_is_its_own_competitor() {
        let ys = vec![vec![q(0, 1)], vec![q(1, 1)]];
        let cost = CostMatrix::new(vec![vec![q(3, 1), q(5, 1)]]).unwrap();
        let plan = FinitePlan::new(vec![(0, 1)], vec![q(1, 1)], TOL).unwrap();
        let best = competitor_max(&plan, &ys, &cost, &[0, 1], TOL).unwrap();
        assert_eq!(best.value, q(5, 1));
        assert_eq!(best.plan, plan);
    }

    #[test]
    fn plan_validation() {
        assert!(FinitePlan::<Rational>::new(vec![(0, 0), (0, 0)], vec![q(1, 2), q(1, 2)], TOL).is_err());
        assert!(FinitePlan::<Rational>::new(vec![(0, 0)], vec![q(1, 2)], TOL).is_err());
        assert!(FinitePlan::<Rational>::new(vec![], vec![], TOL).is_err());
    }

    #[test]
    fn example_supports() {
        let (_, nu) = ex::marginals::<Rational>(TOL).unwrap();
        let cost = CostMatrix::indicator(3, 5, ex::X0, ex::Y1);
        let params = SweepParams::default();
        let p2 = certify_support(&ex::p2::<Rational>().support(TOL), nu.atoms(), &cost, &params, TOL).unwrap();
        assert_eq!(p2.verdict, Verdict::Certified);
        let p1 = certify_support(&ex::p1::<Rational>().support(TOL), nu.atoms(), &cost, &params, TOL).unwrap();
        assert_eq!(p1.verdict, Verdict::Violated);
        let witness = p1.witness.unwrap();
        assert!(witness.verify(nu.atoms(), &cost, TOL));
        assert!(witness.competitor.pairs().contains(&(ex::X0, ex::Y1)));
    }

    #[test]
    fn zero_cost_full_grid_certifies() {
        let (_, nu) = ex::marginals::<Rational>(TOL).unwrap();
        let gamma: Vec<(usize, usize)> = (0..3).flat_map(|i| (0..5).map(move |j| (i, j))).collect();
        let cert = certify_support(&gamma, nu.atoms(), &CostMatrix::zeros(3, 5), &SweepParams::default(), TOL).unwrap();
        assert_eq!(cert.verdict, Verdict::Certified);
    }

    #[test]
    fn concentration_on_example() {
        let (mu, nu) = ex::marginals::<Rational>(TOL).unwrap();
        let cost = CostMatrix::indicator(3, 5, ex::X0, ex::Y1);
        let report = optimality_iff_concentrated(&mu, &nu, &cost, TOL).unwrap();
        assert!(report.holds(TOL));
        assert_eq!(report.value, q(1, 12));
        assert!(report.is_concentrated(&ex::p2(), TOL));
        assert!(!report.is_concentrated(&ex::p1(), TOL));
    }
}
