//! Disintegration of a transport problem onto its irreducible components.
//!
//! Component `k` carries `mu_k = mu(. | X in I_k)` and the image
//! `nu_k = P(Y in . | X in I_k)` of a coupling `P`, with weight
//! `eta_k = mu(I_k)`. Measures are renormalized; `eta` is kept apart.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linprog::{self, Direction, LinearProgram, LowerBound, RowSense, Status};
use crate::measures::{DiscreteMeasure, Point};
use crate::paving::{pave, ComponentPaving};
use crate::scalar::{Scalar, Tolerance};
use crate::transport::{self, verify_certificate, CostMatrix, Coupling, DualCertificate, Marginals, Scope};

#[derive(Debug, Clone)]
pub struct ComponentProblem<S> {
    pub component: usize,
    /// μ-atom indices of the members.
    pub members: Vec<usize>,
    /// ν-atom indices charged by the coupling from this component.
    pub targets: Vec<usize>,
    pub mu: DiscreteMeasure<S>,
    pub nu: DiscreteMeasure<S>,
    /// The renormalized coupling restricted to members x targets.
    pub coupling: Coupling<S>,
    pub cost: CostMatrix<S>,
    pub eta: S,
}

/// Splits `(mu, nu, coupling, cost)` along the paving.
pub fn disintegrate<S: Scalar>(
    paving: &ComponentPaving<S>,
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    coupling: &Coupling<S>,
    cost: &CostMatrix<S>,
    tol: Tolerance,
) -> Result<Vec<ComponentProblem<S>>, S> {
    if !coupling.check(mu, nu, tol).holds() {
        return Err(Error::InvalidInput("the coupling is not a martingale coupling of the marginals".into()));
    }
    paving
        .components
        .iter()
        .map(|component| {
            let eta = component.eta.clone();
            let members = component.members.clone();
            let column_mass = |j: usize| {
                members
                    .iter()
                    .fold(S::zero(), |acc, &i| acc.add_ref(coupling.mass(i, j)))
            };
            let targets: Vec<usize> = (0..nu.len()).filter(|&j| column_mass(j).is_pos(tol)).collect();
            let mu_k = DiscreteMeasure::new(
                members.iter().map(|&i| mu.atom(i).to_vec()).collect(),
                members.iter().map(|&i| mu.weight(i).clone() / eta.clone()).collect(),
                tol,
            )?;
            let nu_k = DiscreteMeasure::new(
                targets.iter().map(|&j| nu.atom(j).to_vec()).collect(),
                targets.iter().map(|&j| column_mass(j) / eta.clone()).collect(),
                tol,
            )?;
            let local = Coupling::new(
                members
                    .iter()
                    .map(|&i| targets.iter().map(|&j| coupling.mass(i, j).clone() / eta.clone()).collect())
                    .collect(),
            );
            Ok(ComponentProblem {
                component: component.id,
                cost: cost.restrict(&members, &targets),
                members,
                targets,
                mu: mu_k,
                nu: nu_k,
                coupling: local,
                eta,
            })
        })
        .collect()
}

/// `sum_k eta_k mu_k` and `sum_k eta_k nu_k` as weights on the original atoms.
pub fn mixture_weights<S: Scalar>(problems: &[ComponentProblem<S>], m: usize, n: usize) -> (Vec<S>, Vec<S>) {
    let mut mu = vec![S::zero(); m];
    let mut nu = vec![S::zero(); n];
    for p in problems {
        for (&i, w) in p.members.iter().zip(p.mu.weights()) {
            mu[i] = mu[i].add_ref(&p.eta.mul_ref(w));
        }
        for (&j, w) in p.targets.iter().zip(p.nu.weights()) {
            nu[j] = nu[j].add_ref(&p.eta.mul_ref(w));
        }
    }
    (mu, nu)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentValue<S> {
    pub component: usize,
    pub eta: S,
    pub value: S,
}

#[derive(Debug, Clone)]
pub struct DecompositionReport<S> {
    pub global: S,
    pub optimizer: Coupling<S>,
    pub components: Vec<ComponentValue<S>>,
    /// `sum_k eta_k S_k`.
    pub weighted_sum: S,
    pub holds: bool,
}

/// Compares the global value with the eta-weighted componentwise values
/// obtained from the disintegration of a primal optimizer.
pub fn check_decomposition<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    cost: &CostMatrix<S>,
    tol: Tolerance,
) -> Result<DecompositionReport<S>, S> {
    let paving = pave(mu, nu, tol)?;
    let (optimizer, global) = transport::solve_primal(mu, nu, cost, tol)?;
    check_decomposition_with(&paving, mu, nu, cost, optimizer, global, tol)
}

pub fn check_decomposition_with<S: Scalar>(
    paving: &ComponentPaving<S>,
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    cost: &CostMatrix<S>,
    optimizer: Coupling<S>,
    global: S,
    tol: Tolerance,
) -> Result<DecompositionReport<S>, S> {
    let problems = disintegrate(paving, mu, nu, &optimizer, cost, tol)?;
    let components: Vec<ComponentValue<S>> = problems
        .par_iter()
        .map(|p| {
            let (_, value) = transport::solve_primal(&p.mu, &p.nu, &p.cost, tol)?;
            Ok(ComponentValue {
                component: p.component,
                eta: p.eta.clone(),
                value,
            })
        })
        .collect::<Result<_, S>>()?;
    let weighted_sum = components
        .iter()
        .fold(S::zero(), |acc, c| acc + c.eta.mul_ref(&c.value));
    let holds = weighted_sum.approx_eq(&global, S::rel_tol(&global, tol));
    Ok(DecompositionReport {
        global,
        optimizer,
        components,
        weighted_sum,
        holds,
    })
}

/// A dual certificate of one component on members x attached atoms.
#[derive(Debug, Clone)]
pub struct ComponentDual<S> {
    pub component: usize,
    pub members: Vec<usize>,
    /// The J-atoms, including those the optimizer leaves uncharged.
    pub j_atoms: Vec<usize>,
    /// Component ν-weights on `j_atoms`; zero where the optimizer sends nothing.
    pub nu_weights: Vec<S>,
    pub certificate: DualCertificate<S>,
    pub primal_value: S,
    pub gap_zero: bool,
    pub admissible: bool,
}

/// Per-component certificates combined on the original atoms.
///
/// `psi[k]` is the ν-potential of component `k` (zero off its J-set), so
/// the glued inequality at `(i, j)` uses the potential of the component of `i`.
#[derive(Debug, Clone)]
pub struct GluedCertificate<S> {
    pub phi: Vec<S>,
    pub h: Vec<Vec<S>>,
    pub psi: Vec<Vec<S>>,
    pub atom_component: Vec<usize>,
    pub scope: Vec<(usize, usize)>,
}

impl<S: Scalar> GluedCertificate<S> {
    pub fn slack(&self, i: usize, j: usize, xs: &[Point<S>], ys: &[Point<S>], cost: &CostMatrix<S>) -> S {
        let psi = &self.psi[self.atom_component[i]][j];
        crate::measures::pair_value(&self.phi[i], psi, &self.h[i], &xs[i], &ys[j]) - cost.get(i, j).clone()
    }

    /// Violated pairs within the union of component scopes.
    pub fn scope_violations(&self, xs: &[Point<S>], ys: &[Point<S>], cost: &CostMatrix<S>, tol: Tolerance) -> Vec<(usize, usize)> {
        self.scope
            .iter()
            .copied()
            .filter(|&(i, j)| self.slack(i, j, xs, ys, cost).is_neg(tol))
            .collect()
    }

    /// One global triple taking, at each ν-atom, the potential of the first
    /// component that attaches it. Evaluated off-scope for information only.
    pub fn flatten(&self, marg: &Marginals<'_, S>, cost: &CostMatrix<S>, j_sets: &[Vec<usize>]) -> DualCertificate<S> {
        let psi = (0..marg.n())
            .map(|j| {
                j_sets
                    .iter()
                    .position(|set| set.contains(&j))
                    .map_or_else(S::zero, |k| self.psi[k][j].clone())
            })
            .collect();
        DualCertificate::build(self.phi.clone(), psi, self.h.clone(), marg, cost)
    }
}

#[derive(Debug, Clone)]
pub struct ComponentwiseDuals<S> {
    pub paving: ComponentPaving<S>,
    pub optimizer: Coupling<S>,
    pub value: S,
    pub duals: Vec<ComponentDual<S>>,
    pub glued: GluedCertificate<S>,
    /// Pairs outside every component scope where the flattened triple fails.
    pub off_scope_violations: Vec<(usize, usize)>,
}

/// Solves each component on members x J-atoms with the optimizer's
/// component ν-weights and returns its LP dual.
pub fn componentwise_dual<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    cost: &CostMatrix<S>,
    tol: Tolerance,
) -> Result<ComponentwiseDuals<S>, S> {
    let paving = pave(mu, nu, tol)?;
    let (optimizer, value) = transport::solve_primal(mu, nu, cost, tol)?;
    let duals: Vec<ComponentDual<S>> = paving
        .components
        .par_iter()
        .map(|component| {
            let members = component.members.clone();
            let j_atoms = component.j_atoms();
            let eta = component.eta.clone();
            let xs: Vec<Point<S>> = members.iter().map(|&i| mu.atom(i).to_vec()).collect();
            let ys: Vec<Point<S>> = j_atoms.iter().map(|&j| nu.atom(j).to_vec()).collect();
            let mu_w: Vec<S> = members.iter().map(|&i| mu.weight(i).clone() / eta.clone()).collect();
            let nu_w: Vec<S> = j_atoms
                .iter()
                .map(|&j| {
                    members
                        .iter()
                        .fold(S::zero(), |acc, &i| acc.add_ref(optimizer.mass(i, j)))
                        / eta.clone()
                })
                .collect();
            let marg = Marginals {
                xs: &xs,
                mu: &mu_w,
                ys: &ys,
                nu: &nu_w,
            };
            let local_cost = cost.restrict(&members, &j_atoms);
            let sol = marg.solve(&local_cost, tol)?;
            let report = verify_certificate(&sol.dual, &marg, &local_cost, &Scope::AllPairs, tol);
            Ok(ComponentDual {
                component: component.id,
                gap_zero: sol.dual.value.approx_eq(&sol.value, S::rel_tol(&sol.value, tol)),
                admissible: report.admissible(),
                primal_value: sol.value,
                certificate: sol.dual,
                members,
                j_atoms,
                nu_weights: nu_w,
            })
        })
        .collect::<Result<_, S>>()?;

    let (m, n, d) = (mu.len(), nu.len(), mu.dim());
    let mut phi = vec![S::zero(); m];
    let mut h = vec![vec![S::zero(); d]; m];
    let mut psi = vec![vec![S::zero(); n]; duals.len()];
    let mut scope = Vec::new();
    for (k, dual) in duals.iter().enumerate() {
        for (a, &i) in dual.members.iter().enumerate() {
            phi[i] = dual.certificate.phi[a].clone();
            h[i] = dual.certificate.h[a].clone();
            for &j in &dual.j_atoms {
                scope.push((i, j));
            }
        }
        for (b, &j) in dual.j_atoms.iter().enumerate() {
            psi[k][j] = dual.certificate.psi[b].clone();
        }
    }
    scope.sort_unstable();
    let glued = GluedCertificate {
        phi,
        h,
        psi,
        atom_component: paving.atom_component.clone(),
        scope,
    };
    let marg = Marginals::of(mu, nu);
    let j_sets: Vec<Vec<usize>> = duals.iter().map(|d| d.j_atoms.clone()).collect();
    let flat = glued.flatten(&marg, cost, &j_sets);
    let off_scope: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|c| glued.scope.binary_search(c).is_err())
        .collect();
    let off_scope_violations = verify_certificate(&flat, &marg, cost, &Scope::Pairs(off_scope), tol)
        .violations
        .into_iter()
        .map(|v| (v.i, v.j))
        .collect();
    Ok(ComponentwiseDuals {
        paving,
        optimizer,
        value,
        duals,
        glued,
        off_scope_violations,
    })
}

/// Whether `values` at `points` extend to a convex function: some
/// subgradient `g_j` at every point has `values_l >= values_j + g_j . (p_l - p_j)`.
pub fn convex_extendable<S: Scalar>(points: &[Point<S>], values: &[S], tol: Tolerance) -> Result<bool, S> {
    if points.len() != values.len() {
        return Err(Error::InvalidInput("one value per point is required".into()));
    }
    let k = points.len();
    if k <= 1 {
        return Ok(true);
    }
    let d = points[0].len();
    let mut lp = LinearProgram::new(Direction::Maximize, k * d);
    for c in 0..k * d {
        lp.set_free(c);
    }
    for j in 0..k {
        for l in 0..k {
            if l == j {
                continue;
            }
            let coefficients = (0..d).map(|t| (j * d + t, points[l][t].clone() - points[j][t].clone()));
            lp.add_row(coefficients, RowSense::Le, values[l].clone() - values[j].clone());
        }
    }
    debug_assert!(lp.lower.iter().all(|b| *b == LowerBound::Free));
    let sol = linprog::solve(&lp, tol)?;
    match sol.status {
        Status::Optimal => Ok(true),
        Status::Infeasible => Ok(false),
        status => Err(Error::UnexpectedStatus(status)),
    }
}

/// The paving of a component problem; it may split further.
pub fn sub_paving<S: Scalar>(problem: &ComponentProblem<S>, tol: Tolerance) -> Result<ComponentPaving<S>, S> {
    pave(&problem.mu, &problem.nu, tol)
}
