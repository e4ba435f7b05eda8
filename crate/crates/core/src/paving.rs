//! Irreducible convex paving of a pair of finitely supported marginals.
//!
//! `I(x_i)` is the relative interior of the convex hull of every ν-atom
//! that some martingale coupling can send `x_i` to. Atoms with equal
//! `I`-sets form one component. Each component then receives the ν-atoms
//! it can charge (its J-set), annotated with the least and greatest mass
//! it sends there over all couplings.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{closure_contains, hull_equal, ri_contains, ri_intersects, Polytope};
use crate::linprog::{Direction, Solver, Status};
use crate::measures::{convex_order_check, DiscreteMeasure, OrderCertificate, Point};
use crate::scalar::{sum, Scalar, Tolerance};
use crate::transport::{Coupling, Marginals};

/// Per-pair maximal masses over the martingale transport polytope.
#[derive(Debug, Clone)]
pub struct FeasibleSupport<S> {
    pub max_mass: Vec<Vec<S>>,
    /// Average of the per-pair maximizers: a feasible coupling charging
    /// exactly the supported pairs.
    pub witness: Coupling<S>,
}

impl<S: Scalar> FeasibleSupport<S> {
    pub fn contains(&self, i: usize, j: usize, tol: Tolerance) -> bool {
        self.max_mass[i][j].is_pos(tol)
    }

    pub fn pairs(&self, tol: Tolerance) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.max_mass.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_pos(tol) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// ν-atoms reachable from μ-atom `i`.
    pub fn targets(&self, i: usize, tol: Tolerance) -> Vec<usize> {
        (0..self.max_mass[i].len()).filter(|&j| self.contains(i, j, tol)).collect()
    }
}

fn not_in_order<S: Scalar>(solver: &Solver<S>, marg: &Marginals<'_, S>) -> Error<S> {
    let ray = solver.farkas().expect("infeasible solver carries a ray");
    Error::NotInConvexOrder(Box::new(marg.separation(&ray.rows)))
}

fn optimum<S: Scalar>(solver: &Solver<S>, objective: &[S], direction: Direction) -> Result<(S, Vec<S>), S> {
    let sol = solver.optimize(objective, direction)?;
    if sol.status != Status::Optimal {
        return Err(Error::UnexpectedStatus(sol.status));
    }
    Ok((sol.objective, sol.primal))
}

/// Maximizes every cell `p[i][j]` over the martingale transport polytope.
pub fn feasible_support<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    tol: Tolerance,
) -> Result<FeasibleSupport<S>, S> {
    let marg = Marginals::of(mu, nu);
    feasible_support_of(&marg, tol)
}

pub fn feasible_support_of<S: Scalar>(marg: &Marginals<'_, S>, tol: Tolerance) -> Result<FeasibleSupport<S>, S> {
    let (m, n) = (marg.m(), marg.n());
    let solver = marg.solver(tol)?;
    if !solver.is_feasible() {
        return Err(not_in_order(&solver, marg));
    }
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let results: Vec<(S, Vec<S>)> = cells
        .par_iter()
        .map(|&(i, j)| {
            let mut objective = vec![S::zero(); m * n];
            objective[marg.var(i, j)] = S::one();
            optimum(&solver, &objective, Direction::Maximize)
        })
        .collect::<Result<_, S>>()?;
    let count = S::from_i64(results.len() as i64);
    let mut average = vec![S::zero(); m * n];
    let mut max_mass = vec![vec![S::zero(); n]; m];
    for ((i, j), (value, primal)) in cells.iter().zip(results) {
        max_mass[*i][*j] = value;
        for (a, p) in average.iter_mut().zip(&primal) {
            *a = a.add_ref(p);
        }
    }
    let average: Vec<S> = average.into_iter().map(|a| a / count.clone()).collect();
    Ok(FeasibleSupport {
        max_mass,
        witness: Coupling::from_flat(m, n, &average),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassRange<S> {
    pub min: S,
    pub max: S,
}

impl<S: Scalar> MassRange<S> {
    pub fn width(&self) -> S {
        self.max.clone() - self.min.clone()
    }
}

/// Least and greatest mass of every cell over all couplings. The coupling
/// is unique exactly when every range has zero width.
pub fn cell_mass_ranges<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    tol: Tolerance,
) -> Result<Vec<Vec<MassRange<S>>>, S> {
    let marg = Marginals::of(mu, nu);
    let support = feasible_support_of(&marg, tol)?;
    let (m, n) = (marg.m(), marg.n());
    let solver = marg.solver(tol)?;
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let minima: Vec<S> = cells
        .par_iter()
        .map(|&(i, j)| {
            if !support.contains(i, j, tol) {
                return Ok(S::zero());
            }
            let mut objective = vec![S::zero(); m * n];
            objective[marg.var(i, j)] = S::one();
            Ok(optimum(&solver, &objective, Direction::Minimize)?.0)
        })
        .collect::<Result<_, S>>()?;
    let mut out = vec![Vec::with_capacity(n); m];
    for (&(i, j), min) in cells.iter().zip(minima) {
        out[i].push(MassRange {
            min,
            max: support.max_mass[i][j].clone(),
        });
    }
    Ok(out)
}

/// A ν-atom charged by a component under some coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct Attachment<S> {
    pub atom: usize,
    /// The atom lies in the relative interior of the component, not on its boundary.
    pub in_ri: bool,
    /// Positive minimum: every coupling charges the atom from this component.
    pub min_mass: S,
    pub max_mass: S,
}

#[derive(Debug, Clone)]
pub struct Component<S> {
    pub id: usize,
    /// μ-atom indices.
    pub members: Vec<usize>,
    /// Generated by every ν-atom reachable from a member; `I` is its relative interior.
    pub polytope: Polytope<S>,
    pub eta: S,
    /// Filled by [`attach_j`].
    pub attachments: Vec<Attachment<S>>,
    /// Range of the total mass sent from the component to each ν-atom; filled by [`attach_j`].
    pub mass_ranges: Vec<MassRange<S>>,
}

impl<S: Scalar> Component<S> {
    pub fn j_atoms(&self) -> Vec<usize> {
        self.attachments.iter().map(|a| a.atom).collect()
    }

    /// Attached atoms on the relative boundary.
    pub fn boundary_atoms(&self) -> Vec<usize> {
        self.attachments.iter().filter(|a| !a.in_ri).map(|a| a.atom).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ComponentPaving<S> {
    pub components: Vec<Component<S>>,
    /// Component index of every μ-atom.
    pub atom_component: Vec<usize>,
}

impl<S: Scalar> ComponentPaving<S> {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component_of(&self, i: usize) -> &Component<S> {
        &self.components[self.atom_component[i]]
    }
}

/// Groups μ-atoms by their `I`-sets and asserts the partition property.
pub fn compute_paving<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    tol: Tolerance,
) -> Result<ComponentPaving<S>, S> {
    let support = feasible_support(mu, nu, tol)?;
    paving_from_support(&Marginals::of(mu, nu), &support, tol)
}

pub fn paving_from_support<S: Scalar>(
    marg: &Marginals<'_, S>,
    support: &FeasibleSupport<S>,
    tol: Tolerance,
) -> Result<ComponentPaving<S>, S> {
    let m = marg.m();
    let targets: Vec<Vec<usize>> = (0..m).map(|i| support.targets(i, tol)).collect();
    let polytopes: Vec<Polytope<S>> = targets
        .iter()
        .map(|t| Polytope::new(t.iter().map(|&j| marg.ys[j].clone()).collect(), tol))
        .collect::<Result<_, S>>()?;

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut atom_component = vec![0; m];
    for i in 0..m {
        let mut found = None;
        for (g, members) in groups.iter().enumerate() {
            if hull_equal(&polytopes[members[0]], &polytopes[i], tol)? {
                found = Some(g);
                break;
            }
        }
        let g = match found {
            Some(g) => g,
            None => {
                groups.push(Vec::new());
                groups.len() - 1
            }
        };
        groups[g].push(i);
        atom_component[i] = g;
    }

    let mut components = Vec::with_capacity(groups.len());
    for (id, members) in groups.into_iter().enumerate() {
        let mut generators: Vec<Point<S>> = Vec::new();
        for &i in &members {
            generators.extend(targets[i].iter().map(|&j| marg.ys[j].clone()));
        }
        let polytope = Polytope::new(generators, tol)?;
        for &i in &members {
            if !ri_contains(&polytope, &marg.xs[i], tol)? {
                return Err(Error::PartitionViolation(format!(
                    "μ-atom {i} is not in the relative interior of its own component"
                )));
            }
        }
        let eta = sum(members.iter().map(|&i| &marg.mu[i]));
        components.push(Component {
            id,
            members,
            polytope,
            eta,
            attachments: Vec::new(),
            mass_ranges: Vec::new(),
        });
    }
    for a in 0..components.len() {
        for b in a + 1..components.len() {
            if ri_intersects(&components[a].polytope, &components[b].polytope, tol)? {
                return Err(Error::PartitionViolation(format!(
                    "components {a} and {b} have intersecting relative interiors"
                )));
            }
        }
    }
    Ok(ComponentPaving {
        components,
        atom_component,
    })
}

/// Minimum and maximum over all couplings of the mass each component
/// sends to each ν-atom. Cells no member can reach are zero without an LP.
pub fn component_mass_ranges<S: Scalar>(
    paving: &ComponentPaving<S>,
    marg: &Marginals<'_, S>,
    support: Option<&FeasibleSupport<S>>,
    tol: Tolerance,
) -> Result<Vec<Vec<MassRange<S>>>, S> {
    let (m, n) = (marg.m(), marg.n());
    let solver = marg.solver(tol)?;
    if !solver.is_feasible() {
        return Err(not_in_order(&solver, marg));
    }
    let jobs: Vec<(usize, usize)> = (0..paving.len()).flat_map(|k| (0..n).map(move |j| (k, j))).collect();
    let ranges: Vec<MassRange<S>> = jobs
        .par_iter()
        .map(|&(k, j)| {
            let members = &paving.components[k].members;
            let reachable = support.is_none_or(|s| members.iter().any(|&i| s.contains(i, j, tol)));
            if !reachable {
                return Ok(MassRange {
                    min: S::zero(),
                    max: S::zero(),
                });
            }
            let mut objective = vec![S::zero(); m * n];
            for &i in members {
                objective[marg.var(i, j)] = S::one();
            }
            let (max, _) = optimum(&solver, &objective, Direction::Maximize)?;
            let (min, _) = optimum(&solver, &objective, Direction::Minimize)?;
            Ok(MassRange { min, max })
        })
        .collect::<Result<_, S>>()?;
    let mut out: Vec<Vec<MassRange<S>>> = Vec::with_capacity(paving.len());
    let mut iter = ranges.into_iter();
    for _ in 0..paving.len() {
        out.push(iter.by_ref().take(n).collect());
    }
    Ok(out)
}

/// Attaches to each component the ν-atoms in its closure that it can charge.
pub fn attach_j<S: Scalar>(
    paving: ComponentPaving<S>,
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    tol: Tolerance,
) -> Result<ComponentPaving<S>, S> {
    attach_j_with(paving, &Marginals::of(mu, nu), None, tol)
}

pub fn attach_j_with<S: Scalar>(
    mut paving: ComponentPaving<S>,
    marg: &Marginals<'_, S>,
    support: Option<&FeasibleSupport<S>>,
    tol: Tolerance,
) -> Result<ComponentPaving<S>, S> {
    let ranges = component_mass_ranges(&paving, marg, support, tol)?;
    for (component, ranges) in paving.components.iter_mut().zip(ranges) {
        let mut attachments = Vec::new();
        for (j, range) in ranges.iter().enumerate() {
            if !range.max.is_pos(tol) || !closure_contains(&component.polytope, &marg.ys[j], tol)? {
                continue;
            }
            attachments.push(Attachment {
                atom: j,
                in_ri: ri_contains(&component.polytope, &marg.ys[j], tol)?,
                min_mass: range.min.clone(),
                max_mass: range.max.clone(),
            });
        }
        component.attachments = attachments;
        component.mass_ranges = ranges;
    }
    Ok(paving)
}

/// Whether the image `nu_I` of each component is the same under every coupling.
pub fn nu_invariance<S: Scalar>(
    paving: &ComponentPaving<S>,
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    tol: Tolerance,
) -> Result<Vec<bool>, S> {
    let computed;
    let ranges: Vec<&Vec<MassRange<S>>> = if paving.components.iter().all(|c| c.mass_ranges.len() == nu.len()) {
        paving.components.iter().map(|c| &c.mass_ranges).collect()
    } else {
        computed = component_mass_ranges(paving, &Marginals::of(mu, nu), None, tol)?;
        computed.iter().collect()
    };
    Ok(ranges
        .iter()
        .map(|r| r.iter().all(|range| range.min.approx_eq(&range.max, tol)))
        .collect())
}

/// Paving with J-sets attached: the full pipeline.
pub fn pave<S: Scalar>(mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>, tol: Tolerance) -> Result<ComponentPaving<S>, S> {
    let marg = Marginals::of(mu, nu);
    let support = feasible_support_of(&marg, tol)?;
    let paving = paving_from_support(&marg, &support, tol)?;
    attach_j_with(paving, &marg, Some(&support), tol)
}

/// Mixes in `(uniform on ys, dirac at their mean)` with weight `eps` so
/// the result has a single irreducible component.
///
/// `ys` must surround the support of `nu`: every ν-atom in the interior of
/// `conv(ys)`, which has to be full-dimensional.
pub fn irreducible_perturbation<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    eps: &S,
    ys: &[Point<S>],
    tol: Tolerance,
) -> Result<(DiscreteMeasure<S>, DiscreteMeasure<S>), S> {
    if !eps.is_pos(tol) {
        return Err(Error::InvalidInput("perturbation weight must be positive".into()));
    }
    if let OrderCertificate::NotOrdered(sep) = convex_order_check(mu, nu, tol)? {
        return Err(Error::NotInConvexOrder(Box::new(sep)));
    }
    let hull = Polytope::new(ys.to_vec(), tol)?;
    if hull.ambient_dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: nu.dim(),
            found: hull.ambient_dim(),
        });
    }
    if hull.dim() != nu.dim() {
        return Err(Error::InvalidInput("perturbation points must span the space".into()));
    }
    for y in nu.atoms() {
        if !ri_contains(&hull, y, tol)? {
            return Err(Error::InvalidInput("a ν-atom is not interior to the perturbation hull".into()));
        }
    }
    let spread = DiscreteMeasure::uniform(ys.to_vec(), tol)?;
    let center = DiscreteMeasure::dirac(crate::measures::barycenter(&spread));
    let total = S::one() + eps.clone();
    let keep = S::one() / total.clone();
    let add = eps.clone() / total;
    let mu_out = DiscreteMeasure::mixture(&[(keep.clone(), mu), (add.clone(), &center)], tol)?;
    let nu_out = DiscreteMeasure::mixture(&[(keep, nu), (add, &spread)], tol)?;
    Ok((mu_out, nu_out))
}
