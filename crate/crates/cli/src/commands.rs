//! Subcommands over a problem in one scalar mode.

use serde_json::{json, Value};

use motpaver::decomposition::{check_decomposition_with, componentwise_dual, convex_extendable, disintegrate, sub_paving};
use motpaver::measures::{convex_order_check, OrderCertificate};
use motpaver::monotonicity::{certify_support, optimality_iff_concentrated, SweepParams, Verdict};
use motpaver::paving::{nu_invariance, pave};
use motpaver::transport::{self, verify_certificate, CostMatrix, Marginals, Scope};
use motpaver::{Error, Scalar};

use crate::problem::Problem;
use crate::report;
use crate::svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    NotOrdered,
    Violated,
}

#[derive(Debug)]
pub struct Output {
    pub body: Value,
    pub outcome: Outcome,
    pub svg: Option<String>,
}

impl Output {
    fn ok(body: Value) -> Self {
        Self {
            body,
            outcome: Outcome::Success,
            svg: None,
        }
    }
}

/// Failures other than a verdict.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Library(String),
}

pub type Run = Result<Output, Failure>;

/// Turns a library error into a report when it carries a verdict.
pub fn from_error<S: Scalar>(e: Error<S>, problem: &Problem<S>) -> Run {
    match e {
        Error::NotInConvexOrder(sep) => {
            let verified = sep.verify(&problem.mu, &problem.nu, problem.tol);
            Ok(Output {
                body: json!({
                    "verdict": "not_ordered",
                    "certificate": {
                        "kind": "separation",
                        "separation": report::separation(&sep),
                        "value": report::scalar(&sep.value(&problem.mu, &problem.nu)),
                        "min_pair_value": report::scalar(&sep.min_pair_value(&problem.mu, &problem.nu)),
                        "verified": verified,
                    },
                }),
                outcome: Outcome::NotOrdered,
                svg: None,
            })
        }
        Error::InvalidInput(m) | Error::InvalidMeasure(m) => Err(Failure::Input(m)),
        other => Err(Failure::Library(other.to_string())),
    }
}

macro_rules! attempt {
    ($problem:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return from_error(err, $problem),
        }
    };
}

fn cost<S: Scalar>(problem: &Problem<S>) -> Result<&CostMatrix<S>, Failure> {
    problem
        .cost
        .as_ref()
        .ok_or_else(|| Failure::Input("this command needs a `cost` in the problem file".into()))
}

pub fn check_order<S: Scalar>(problem: &Problem<S>) -> Run {
    let cert = attempt!(problem, convex_order_check(&problem.mu, &problem.nu, problem.tol));
    let verified = cert.verify(&problem.mu, &problem.nu, problem.tol);
    match cert {
        OrderCertificate::Ordered(p) => Ok(Output::ok(json!({
            "verdict": "ordered",
            "certificate": {"kind": "coupling", "coupling": report::coupling(&p), "verified": verified},
        }))),
        OrderCertificate::NotOrdered(sep) => from_error(Error::NotInConvexOrder(Box::new(sep)), problem),
    }
}

pub fn solve<S: Scalar>(problem: &Problem<S>) -> Run {
    let c = cost(problem)?;
    let tol = problem.tol;
    let sol = attempt!(problem, transport::solve(&problem.mu, &problem.nu, c, tol));
    let marg = Marginals::of(&problem.mu, &problem.nu);
    let check = verify_certificate(&sol.dual, &marg, c, &Scope::AllPairs, tol);
    let complementary = sol
        .coupling
        .support(tol)
        .iter()
        .all(|&(i, j)| sol.dual.slack[i][j].is_zero_tol(S::rel_tol(&sol.value, tol)));
    Ok(Output::ok(json!({
        "verdict": "solved",
        "value": report::scalar(&sol.value),
        "coupling": report::coupling(&sol.coupling),
        "coupling_feasible": sol.coupling.check(&problem.mu, &problem.nu, tol).holds(),
        "dual": report::dual(&sol.dual),
        "gap": report::scalar(&(sol.dual.value.clone() - sol.value.clone())),
        "dual_admissible": check.admissible(),
        "violations": check.violations.iter().map(|v| json!([v.i, v.j])).collect::<Vec<_>>(),
        "complementary_slackness": complementary,
        "gauge": "phi + a, psi - a is an equally valid certificate for any constant a",
    })))
}

pub fn pave_command<S: Scalar>(problem: &Problem<S>, plot: bool) -> Run {
    let tol = problem.tol;
    let paving = attempt!(problem, pave(&problem.mu, &problem.nu, tol));
    let flags = attempt!(problem, nu_invariance(&paving, &problem.mu, &problem.nu, tol));
    let body = attempt!(
        problem,
        report::paving(&paving, problem.mu.atoms(), problem.nu.atoms(), Some(&flags), tol)
    );
    let svg = if plot {
        if problem.mu.dim() != 2 {
            return Err(Failure::Input("plots are only drawn in dimension 2".into()));
        }
        Some(attempt!(problem, svg::render(&paving, &problem.mu, &problem.nu, tol)))
    } else {
        None
    };
    Ok(Output {
        body: json!({"verdict": "paved", "paving": body}),
        outcome: Outcome::Success,
        svg,
    })
}

pub fn decompose<S: Scalar>(problem: &Problem<S>) -> Run {
    let c = cost(problem)?;
    let tol = problem.tol;
    let duals = attempt!(problem, componentwise_dual(&problem.mu, &problem.nu, c, tol));
    let decomposition = attempt!(
        problem,
        check_decomposition_with(
            &duals.paving,
            &problem.mu,
            &problem.nu,
            c,
            duals.optimizer.clone(),
            duals.value.clone(),
            tol,
        )
    );
    let problems = attempt!(
        problem,
        disintegrate(&duals.paving, &problem.mu, &problem.nu, &duals.optimizer, c, tol)
    );
    let mut components = Vec::new();
    for (p, d) in problems.iter().zip(&duals.duals) {
        let sub = attempt!(problem, sub_paving(p, tol));
        let sub_body = attempt!(problem, report::paving(&sub, p.mu.atoms(), p.nu.atoms(), None, tol));
        let ys: Vec<_> = d.j_atoms.iter().map(|&j| problem.nu.atom(j).to_vec()).collect();
        let extendable = attempt!(problem, convex_extendable(&ys, &d.certificate.psi, tol));
        let value = decomposition
            .components
            .iter()
            .find(|v| v.component == p.component)
            .map(|v| report::scalar(&v.value));
        components.push(json!({
            "component": p.component,
            "eta": report::scalar(&p.eta),
            "members": p.members,
            "targets": p.targets,
            "mu_weights": report::scalars(p.mu.weights()),
            "nu_weights": report::scalars(p.nu.weights()),
            "value": value,
            "dual": {
                "members": d.members,
                "j_atoms": d.j_atoms,
                "nu_weights": report::scalars(&d.nu_weights),
                "certificate": report::dual(&d.certificate),
                "primal_value": report::scalar(&d.primal_value),
                "gap_zero": d.gap_zero,
                "admissible": d.admissible,
                "psi_convex_extendable": extendable,
            },
            "sub_paving": sub_body,
        }));
    }
    let scope_violations = duals
        .glued
        .scope_violations(problem.mu.atoms(), problem.nu.atoms(), c, tol);
    Ok(Output::ok(json!({
        "verdict": if decomposition.holds { "decomposition_holds" } else { "decomposition_fails" },
        "global_value": report::scalar(&decomposition.global),
        "weighted_sum": report::scalar(&decomposition.weighted_sum),
        "holds": decomposition.holds,
        "optimizer": report::coupling(&decomposition.optimizer),
        "components": components,
        "glued": {
            "scope": report::pairs(&duals.glued.scope),
            "phi": report::scalars(&duals.glued.phi),
            "h": report::matrix(&duals.glued.h),
            "psi_by_component": report::matrix(&duals.glued.psi),
            "scope_violations": report::pairs(&scope_violations),
            "off_scope_violations": report::pairs(&duals.off_scope_violations),
        },
    })))
}

#[derive(Debug, Clone)]
pub enum GammaSource {
    Optimizer,
    Pairs(Vec<(usize, usize)>),
}

pub fn certify<S: Scalar>(problem: &Problem<S>, gamma: &GammaSource, params: &SweepParams) -> Run {
    let c = cost(problem)?;
    let tol = problem.tol;
    let (gamma, source) = match gamma {
        GammaSource::Optimizer => {
            let (p, _) = attempt!(problem, transport::solve_primal(&problem.mu, &problem.nu, c, tol));
            (p.support(tol), "optimizer")
        }
        GammaSource::Pairs(p) => (p.clone(), "file"),
    };
    let (m, n) = (problem.mu.len(), problem.nu.len());
    if let Some(&(i, j)) = gamma.iter().find(|&&(i, j)| i >= m || j >= n) {
        return Err(Failure::Input(format!("gamma pair ({i}, {j}) is outside the {m}x{n} atom grid")));
    }
    let cert = attempt!(problem, certify_support(&gamma, problem.nu.atoms(), c, params, tol));
    let concentration = attempt!(problem, optimality_iff_concentrated(&problem.mu, &problem.nu, c, tol));
    let witness_verified = cert.witness.as_ref().map(|w| w.verify(problem.nu.atoms(), c, tol));
    let mut body = report::monotonicity(&cert);
    body["gamma"] = report::pairs(&gamma);
    body["gamma_source"] = json!(source);
    body["witness_verified"] = json!(witness_verified);
    body["concentration"] = json!({
        "value": report::scalar(&concentration.value),
        "tight_pairs": report::pairs(&concentration.gamma),
        "min_on_tight_pairs": report::scalar(&concentration.min_on_gamma),
        "max_on_tight_pairs": report::scalar(&concentration.max_on_gamma),
        "optimizer_concentrated": concentration.optimizer_concentrated,
        "holds": concentration.holds(tol),
    });
    Ok(Output {
        body,
        outcome: if cert.verdict == Verdict::Violated { Outcome::Violated } else { Outcome::Success },
        svg: None,
    })
}

/// Reads `{"pairs": [[i, j], ...]}` or a bare array of pairs.
pub fn read_gamma(text: &str) -> Result<Vec<(usize, usize)>, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| format!("line {}, column {}: {e}", e.line(), e.column()))?;
    let list = v.get("pairs").unwrap_or(&v);
    report::read_pairs(list).ok_or_else(|| "expected an array of [i, j] index pairs".to_string())
}
