//! `--verify`: re-checks the certificates in a saved report against the
//! problem file by direct substitution, without trusting solver state.

use serde_json::{json, Value};

use motpaver::geometry::{closure_contains, hull_equal, ri_contains, ri_intersects, Polytope};
use motpaver::measures::Separation;
use motpaver::monotonicity::{certify_support, SweepParams, Verdict, ViolationWitness};
use motpaver::transport::{verify_certificate, Coupling, DualCertificate, Marginals, Scope};
use motpaver::{Point, Scalar};

use crate::problem::Problem;
use crate::report::{self, read_matrix, read_scalar, read_scalars};

/// Named checks; the verdict is reproduced when all pass.
pub struct Verification {
    pub checks: Vec<(String, bool)>,
}

impl Verification {
    fn new() -> Self {
        Self { checks: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.checks.push((name.into(), ok));
    }

    pub fn reproduced(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|(_, ok)| *ok)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.checks.iter().map(|(n, ok)| json!({"check": n, "ok": ok})).collect())
    }
}

fn malformed(field: &str) -> String {
    format!("report field `{field}` is missing or malformed")
}

fn read_separation<S: Scalar>(v: &Value) -> Option<Separation<S>> {
    Some(Separation {
        phi: read_scalars(v.get("phi")?)?,
        psi: read_scalars(v.get("psi")?)?,
        h: read_matrix(v.get("h")?)?,
    })
}

fn verify_separation<S: Scalar>(body: &Value, problem: &Problem<S>, out: &mut Verification) -> Result<(), String> {
    let sep = body
        .pointer("/certificate/separation")
        .and_then(read_separation::<S>)
        .ok_or_else(|| malformed("certificate.separation"))?;
    let shaped = sep.phi.len() == problem.mu.len() && sep.psi.len() == problem.nu.len() && sep.h.len() == problem.mu.len();
    out.check("separation has the problem's shape", shaped);
    if shaped {
        out.check("separation verifies", sep.verify(&problem.mu, &problem.nu, problem.tol));
    }
    Ok(())
}

fn read_coupling<S: Scalar>(v: Option<&Value>, field: &str) -> Result<Coupling<S>, String> {
    v.and_then(read_matrix::<S>).map(Coupling::new).ok_or_else(|| malformed(field))
}

fn read_dual<S: Scalar>(v: &Value, marg: &Marginals<'_, S>, cost: &motpaver::CostMatrix<S>) -> Option<(DualCertificate<S>, S)> {
    let phi = read_scalars(v.get("phi")?)?;
    let psi = read_scalars(v.get("psi")?)?;
    let h = read_matrix(v.get("h")?)?;
    if phi.len() != marg.m() || psi.len() != marg.n() || h.len() != marg.m() {
        return None;
    }
    let value = read_scalar(v.get("value")?)?;
    Some((DualCertificate::build(phi, psi, h, marg, cost), value))
}

fn verify_solve<S: Scalar>(body: &Value, problem: &Problem<S>, out: &mut Verification) -> Result<(), String> {
    let cost = problem.cost.as_ref().ok_or("the problem has no cost")?;
    let tol = problem.tol;
    let coupling = read_coupling::<S>(body.get("coupling"), "coupling")?;
    let value: S = body.get("value").and_then(read_scalar).ok_or_else(|| malformed("value"))?;
    let marg = Marginals::of(&problem.mu, &problem.nu);
    let (dual, dual_value) = body
        .get("dual")
        .and_then(|d| read_dual(d, &marg, cost))
        .ok_or_else(|| malformed("dual"))?;
    let t = S::rel_tol(&value, tol);
    out.check("coupling is a martingale coupling", coupling.check(&problem.mu, &problem.nu, tol).holds());
    out.check("coupling attains the reported value", coupling.value(cost).approx_eq(&value, t));
    out.check("dual value matches its potentials", dual.value.approx_eq(&dual_value, t));
    out.check(
        "dual dominates the cost on all pairs",
        verify_certificate(&dual, &marg, cost, &Scope::AllPairs, tol).admissible(),
    );
    out.check("zero duality gap", dual.value.approx_eq(&value, t));
    Ok(())
}

fn read_points<S: Scalar>(v: Option<&Value>) -> Option<Vec<Point<S>>> {
    v?.as_array()?.iter().map(read_scalars).collect()
}

fn read_indices(v: Option<&Value>) -> Option<Vec<usize>> {
    v?.as_array()?.iter().map(|x| x.as_u64().map(|u| u as usize)).collect()
}

fn verify_paving<S: Scalar>(paving: &Value, problem: &Problem<S>, out: &mut Verification) -> Result<(), String> {
    let tol = problem.tol;
    let components = paving.get("components").and_then(Value::as_array).ok_or_else(|| malformed("paving.components"))?;
    let mut polytopes = Vec::new();
    let mut seen = vec![0usize; problem.mu.len()];
    let mut eta_total = S::zero();
    for (k, c) in components.iter().enumerate() {
        let members = read_indices(c.get("members")).ok_or_else(|| malformed("members"))?;
        let vertices = read_points::<S>(c.get("vertices")).ok_or_else(|| malformed("vertices"))?;
        let eta: S = c.get("eta").and_then(read_scalar).ok_or_else(|| malformed("eta"))?;
        if members.iter().any(|&i| i >= problem.mu.len()) || vertices.is_empty() {
            out.check(format!("component {k} indexes the problem's atoms"), false);
            continue;
        }
        let polytope = Polytope::new(vertices, tol).map_err(|e| e.to_string())?;
        let mut inside = true;
        let mut mass = S::zero();
        for &i in &members {
            seen[i] += 1;
            mass = mass + problem.mu.weight(i).clone();
            inside &= ri_contains(&polytope, problem.mu.atom(i), tol).map_err(|e| e.to_string())?;
        }
        out.check(format!("component {k}: members lie in the relative interior"), inside);
        out.check(format!("component {k}: eta is the members' mass"), mass.approx_eq(&eta, tol));
        if let Some(atoms) = read_indices(c.get("j_atoms")) {
            let mut closed = true;
            for j in atoms {
                closed &= j < problem.nu.len() && closure_contains(&polytope, problem.nu.atom(j), tol).map_err(|e| e.to_string())?;
            }
            out.check(format!("component {k}: attached atoms lie in the closure"), closed);
        }
        eta_total = eta_total + eta;
        polytopes.push(polytope);
    }
    out.check("every μ-atom belongs to exactly one component", seen.iter().all(|&s| s == 1));
    out.check("weights eta sum to one", eta_total.approx_eq(&S::one(), tol));
    for a in 0..polytopes.len() {
        for b in a + 1..polytopes.len() {
            let distinct = !hull_equal(&polytopes[a], &polytopes[b], tol).map_err(|e| e.to_string())?
                && !ri_intersects(&polytopes[a], &polytopes[b], tol).map_err(|e| e.to_string())?;
            out.check(format!("components {a} and {b} are relatively disjoint"), distinct);
        }
    }
    Ok(())
}

fn verify_decompose<S: Scalar>(body: &Value, problem: &Problem<S>, out: &mut Verification) -> Result<(), String> {
    let cost = problem.cost.as_ref().ok_or("the problem has no cost")?;
    let tol = problem.tol;
    let optimizer = read_coupling::<S>(body.get("optimizer"), "optimizer")?;
    let global: S = body.get("global_value").and_then(read_scalar).ok_or_else(|| malformed("global_value"))?;
    out.check("optimizer is a martingale coupling", optimizer.check(&problem.mu, &problem.nu, tol).holds());
    out.check("optimizer attains the global value", optimizer.value(cost).approx_eq(&global, S::rel_tol(&global, tol)));
    let components = body.get("components").and_then(Value::as_array).ok_or_else(|| malformed("components"))?;
    let mut weighted = S::zero();
    for c in components {
        let k = c.get("component").and_then(Value::as_u64).unwrap_or_default();
        let dual = c.get("dual").ok_or_else(|| malformed("components.dual"))?;
        let members = read_indices(dual.get("members")).ok_or_else(|| malformed("dual.members"))?;
        let j_atoms = read_indices(dual.get("j_atoms")).ok_or_else(|| malformed("dual.j_atoms"))?;
        let nu_w = dual.get("nu_weights").and_then(read_scalars::<S>).ok_or_else(|| malformed("dual.nu_weights"))?;
        let eta: S = c.get("eta").and_then(read_scalar).ok_or_else(|| malformed("eta"))?;
        let value: S = dual.get("primal_value").and_then(read_scalar).ok_or_else(|| malformed("dual.primal_value"))?;
        if members.iter().any(|&i| i >= problem.mu.len()) || j_atoms.iter().any(|&j| j >= problem.nu.len()) || nu_w.len() != j_atoms.len() {
            out.check(format!("component {k} indexes the problem's atoms"), false);
            continue;
        }
        let xs: Vec<Point<S>> = members.iter().map(|&i| problem.mu.atom(i).to_vec()).collect();
        let ys: Vec<Point<S>> = j_atoms.iter().map(|&j| problem.nu.atom(j).to_vec()).collect();
        let mu_w: Vec<S> = members.iter().map(|&i| problem.mu.weight(i).clone() / eta.clone()).collect();
        let marg = Marginals {
            xs: &xs,
            mu: &mu_w,
            ys: &ys,
            nu: &nu_w,
        };
        let local = cost.restrict(&members, &j_atoms);
        let (cert, claimed) = dual
            .get("certificate")
            .and_then(|d| read_dual(d, &marg, &local))
            .ok_or_else(|| malformed("dual.certificate"))?;
        let t = S::rel_tol(&value, tol);
        out.check(
            format!("component {k}: certificate dominates the cost on members x J"),
            verify_certificate(&cert, &marg, &local, &Scope::AllPairs, tol).admissible(),
        );
        out.check(format!("component {k}: certificate value is reproduced"), cert.value.approx_eq(&claimed, t));
        out.check(format!("component {k}: zero gap"), cert.value.approx_eq(&value, t));
        let column = |j: usize| members.iter().fold(S::zero(), |acc, &i| acc + optimizer.mass(i, j).clone()) / eta.clone();
        out.check(
            format!("component {k}: ν-weights are the optimizer's image"),
            j_atoms.iter().zip(&nu_w).all(|(&j, w)| column(j).approx_eq(w, tol)),
        );
        weighted = weighted + eta.mul_ref(&value);
    }
    out.check("weighted component values equal the global value", weighted.approx_eq(&global, S::rel_tol(&global, tol)));
    Ok(())
}

fn verify_certify<S: Scalar>(body: &Value, problem: &Problem<S>, out: &mut Verification) -> Result<(), String> {
    let cost = problem.cost.as_ref().ok_or("the problem has no cost")?;
    let tol = problem.tol;
    let verdict = body.get("verdict").and_then(Value::as_str).ok_or_else(|| malformed("verdict"))?;
    if verdict == "violated" {
        let w = body.get("witness").ok_or_else(|| malformed("witness"))?;
        let plan = w.get("plan").and_then(|p| report::read_plan::<S>(p, tol)).ok_or_else(|| malformed("witness.plan"))?;
        let competitor = w
            .get("competitor")
            .and_then(|p| report::read_plan::<S>(p, tol))
            .ok_or_else(|| malformed("witness.competitor"))?;
        let gap = w.get("gap").and_then(read_scalar).ok_or_else(|| malformed("witness.gap"))?;
        let in_range = plan
            .pairs()
            .iter()
            .chain(competitor.pairs())
            .all(|&(i, j)| i < problem.mu.len() && j < problem.nu.len());
        out.check("witness indexes the problem's atoms", in_range);
        if in_range {
            let witness = ViolationWitness { plan, competitor, gap };
            out.check("witness competitor strictly improves the plan", witness.verify(problem.nu.atoms(), cost, tol));
        }
        return Ok(());
    }
    // A certification is a finite search; replay it from its parameters.
    let gamma = body.get("gamma").and_then(report::read_pairs).ok_or_else(|| malformed("gamma"))?;
    let sweep = body.get("sweep").ok_or_else(|| malformed("sweep"))?;
    let field = |k: &str| sweep.get(k).and_then(Value::as_u64).ok_or_else(|| malformed(k));
    let params = SweepParams {
        max_x_atoms: field("max_x_atoms")? as usize,
        random_plans: field("random_plans")? as usize,
        seed: field("seed")?,
    };
    if gamma.iter().any(|&(i, j)| i >= problem.mu.len() || j >= problem.nu.len()) {
        out.check("gamma indexes the problem's atoms", false);
        return Ok(());
    }
    let cert = certify_support(&gamma, problem.nu.atoms(), cost, &params, tol).map_err(|e| e.to_string())?;
    out.check("replayed sweep certifies gamma", cert.verdict == Verdict::Certified);
    Ok(())
}

/// Re-checks `report` for `command` against `problem`.
pub fn verify<S: Scalar>(command: &str, report: &Value, problem: &Problem<S>) -> Result<Verification, String> {
    if report.get("schema").and_then(Value::as_str) != Some(report::SCHEMA) {
        return Err(format!("not a `{}` report", report::SCHEMA));
    }
    let name = report.pointer("/command/name").and_then(Value::as_str).ok_or_else(|| malformed("command.name"))?;
    if name != command {
        return Err(format!("the report is for `{name}`, not `{command}`"));
    }
    let mut out = Verification::new();
    let verdict = report.get("verdict").and_then(Value::as_str).unwrap_or_default();
    if verdict == "not_ordered" {
        verify_separation(report, problem, &mut out)?;
        return Ok(out);
    }
    match command {
        "check-order" => {
            let coupling = read_coupling::<S>(report.pointer("/certificate/coupling"), "certificate.coupling")?;
            out.check("coupling is a martingale coupling", coupling.check(&problem.mu, &problem.nu, problem.tol).holds());
        }
        "solve" => verify_solve(report, problem, &mut out)?,
        "pave" => verify_paving(report.get("paving").ok_or_else(|| malformed("paving"))?, problem, &mut out)?,
        "decompose" => verify_decompose(report, problem, &mut out)?,
        "certify" => verify_certify(report, problem, &mut out)?,
        other => return Err(format!("reports of `{other}` cannot be verified")),
    }
    Ok(out)
}
