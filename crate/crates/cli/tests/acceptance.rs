//! Acceptance criteria 1 to 10. Prints one PASS/FAIL line per criterion
//! and exits nonzero when a criterion fails that is not listed in
//! `KNOWN_UNATTAINABLE`, or when a listed one unexpectedly passes.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

use motpaver::decomposition::{check_decomposition, disintegrate, sub_paving};
use motpaver::geometry::{closure_contains, hull_equal, ri_contains, Polytope};
use motpaver::golden::{example_2_1, example_4_1, example_4_2};
use motpaver::measures::{convex_order_check, oracle_convex_order_1d};
use motpaver::monotonicity::{certify_support, competitor_max, FinitePlan, SweepParams, Verdict};
use motpaver::paving::{
    attach_j_with, cell_mass_ranges, feasible_support, feasible_support_of, nu_invariance, pave, paving_from_support,
    ComponentPaving,
};
use motpaver::random::{cost, order_test_pair_1d, ordered_pair, rng};
use motpaver::transport::{solve, verify_certificate, Marginals, Scope};
use motpaver::{CostMatrix, Coupling, DiscreteMeasure, OrderCertificate, Point, Rational, Scalar, Tolerance};
use oracles::{brute_competitor_max, convex_order_by_calls, max_linear, mot_system, planar_hausdorff, q, Q};
use rand::Rng;
use serde_json::Value;

const TOL: Tolerance = Tolerance::DEFAULT;

/// Criteria whose literal statement contradicts exact arithmetic on the
/// literal example data, with the reason printed next to the FAIL line.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    2,
    "the literal P1 has conditional means (1/2, 3/8) and (1/2, -3/8) at x_1, x_-1, so it is not a martingale coupling",
)];

type Outcome = Result<String, String>;
type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact_point(v: &Value) -> Vec<String> {
    v.as_array()
        .expect("point")
        .iter()
        .map(|c| c["exact"].as_str().expect("exact rendering").to_string())
        .collect()
}

fn exact_set(v: &Value) -> BTreeSet<Vec<String>> {
    v.as_array().expect("point list").iter().map(exact_point).collect()
}

fn strings(points: &[(&str, &str)]) -> BTreeSet<Vec<String>> {
    points.iter().map(|(a, b)| vec![a.to_string(), b.to_string()]).collect()
}

fn run_demo(name: &str) -> Result<Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_motpaver"))
        .args(["demo", name])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("demo exited with {}", out.status))?;
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn criterion_1() -> Outcome {
    let report = run_demo("example-4.2")?;
    let components = report["paving"]["components"].as_array().ok_or("no components")?;
    ensure(components.len() == 2, || format!("{} components", components.len()))?;
    let mut found = Vec::new();
    for c in components {
        let members: Vec<u64> = c["members"].as_array().unwrap().iter().map(|m| m.as_u64().unwrap()).collect();
        found.push((members, exact_set(&c["vertices"]), c["eta"]["exact"].as_str().unwrap().to_string()));
    }
    found.sort();
    let expected = vec![
        (vec![0], strings(&[("-2", "0"), ("0", "1"), ("0", "-1")]), "1/3".to_string()),
        (vec![1, 2], strings(&[("2", "0"), ("0", "1"), ("0", "-1")]), "2/3".to_string()),
    ];
    ensure(found == expected, || format!("got {found:?}"))?;
    Ok("members {x_0}, {x_1, x_-1}; vertex sets and eta = (1/3, 2/3) exact".into())
}

fn criterion_2() -> Outcome {
    use example_4_2::*;
    let (mu, nu) = marginals::<Rational>(TOL).map_err(|e| e.to_string())?;
    let literal = p1_literal::<Rational>().check(&mu, &nu, TOL);
    let second = p2::<Rational>().check(&mu, &nu, TOL);
    let corrected = p1::<Rational>().check(&mu, &nu, TOL);
    let support = feasible_support(&mu, &nu, TOL).map_err(|e| e.to_string())?;
    let mut union: Vec<(usize, usize)> = p1_literal::<Rational>().support(TOL);
    union.extend(p2::<Rational>().support(TOL));
    union.sort_unstable();
    union.dedup();
    let union_ok = union == support.pairs(TOL);
    let detail = format!(
        "literal P1 holds={} (martingale failures at rows {:?}); P2 holds={}; corrected P1 (5/24, 1/24) holds={}; support union = maximal support: {}",
        literal.holds(),
        literal.martingale_failures,
        second.holds(),
        corrected.holds(),
        union_ok
    );
    if literal.holds() && second.holds() && union_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_3() -> Outcome {
    use example_4_2::*;
    let (mu, nu) = marginals::<Rational>(TOL).map_err(|e| e.to_string())?;
    let c = CostMatrix::indicator(3, 5, X0, Y1);
    let sol = solve(&mu, &nu, &c, TOL).map_err(|e| e.to_string())?;
    let sys = mot_system(mu.atoms(), mu.weights(), nu.atoms(), nu.weights());
    let all: Vec<usize> = (0..sys.vars).collect();
    let flat: Vec<Q> = c.values().iter().flatten().cloned().collect();
    let oracle = max_linear(&sys, &all, &flat).ok_or("empty polytope")?;
    ensure(oracle == q(1, 12), || format!("vertex enumeration gives {oracle}"))?;
    ensure(sol.value == oracle, || format!("solver value {}", sol.value))?;
    let report = check_decomposition(&mu, &nu, &c, TOL).map_err(|e| e.to_string())?;
    let mut parts: Vec<(Q, Q)> = report.components.iter().map(|v| (v.eta.clone(), v.value.clone())).collect();
    parts.sort();
    ensure(report.holds && report.global == report.weighted_sum, || "decomposition does not hold".into())?;
    ensure(parts == vec![(q(1, 3), q(1, 4)), (q(2, 3), q(0, 1))], || format!("components {parts:?}"))?;
    let params = SweepParams::default();
    let on_opt = certify_support(&sol.coupling.support(TOL), nu.atoms(), &c, &params, TOL).map_err(|e| e.to_string())?;
    ensure(on_opt.verdict == Verdict::Certified, || "optimizer support violated".into())?;
    let on_p1 = certify_support(&p1_literal::<Rational>().support(TOL), nu.atoms(), &c, &params, TOL)
        .map_err(|e| e.to_string())?;
    ensure(on_p1.verdict == Verdict::Violated, || "supp P1 certified".into())?;
    let witness = on_p1.witness.ok_or("no witness")?;
    ensure(witness.verify(nu.atoms(), &c, TOL), || "witness does not verify".into())?;
    Ok(format!(
        "S = 1/12 = 1/3*1/4 + 2/3*0; optimizer Certified; supp P1 Violated (gap {})",
        witness.gap
    ))
}

fn vertex_strings(poly: &Polytope<Q>) -> BTreeSet<Vec<String>> {
    poly.vertices(TOL)
        .expect("vertices")
        .iter()
        .map(|p| p.iter().map(|c| c.to_string()).collect())
        .collect()
}

fn criterion_4() -> Outcome {
    use example_4_2::*;
    let (mu, nu) = marginals::<Rational>(TOL).map_err(|e| e.to_string())?;
    let paving = pave(&mu, &nu, TOL).map_err(|e| e.to_string())?;
    let flags = nu_invariance(&paving, &mu, &nu, TOL).map_err(|e| e.to_string())?;
    ensure(flags == vec![false, false], || format!("nu-invariance flags {flags:?}"))?;
    let c = CostMatrix::indicator(3, 5, X0, Y1);
    let parts = disintegrate(&paving, &mu, &nu, &p2(), &c, TOL).map_err(|e| e.to_string())?;
    let part = parts.iter().find(|p| p.members == vec![X1, XM1]).ok_or("no {x_1, x_-1} component")?;
    let sub = sub_paving(part, TOL).map_err(|e| e.to_string())?;
    let mut found: Vec<BTreeSet<Vec<String>>> = sub.components.iter().map(|c| vertex_strings(&c.polytope)).collect();
    found.sort();
    let mut expected = vec![
        strings(&[("0", "0"), ("0", "1"), ("2", "0")]),
        strings(&[("0", "0"), ("0", "-1"), ("2", "0")]),
    ];
    expected.sort();
    ensure(found == expected, || format!("sub-paving {found:?}"))?;
    Ok("triangles conv{y_0,y_1,y_2}, conv{y_0,y_-1,y_2}; nu-invariance false, false".into())
}

/// Interval `[lo, hi]` of a one-dimensional component.
fn interval(paving: &ComponentPaving<Q>, k: usize) -> (Q, Q) {
    let v = paving.components[k].polytope.vertices(TOL).expect("vertices");
    let xs: Vec<Q> = v.iter().map(|p| p[0].clone()).collect();
    (xs.iter().min().unwrap().clone(), xs.iter().max().unwrap().clone())
}

fn criterion_5() -> Outcome {
    let reference = example_2_1::intervals::<Q>();
    let mut previous: Option<Q> = None;
    let mut distances = Vec::new();
    for n in [16usize, 32, 64] {
        let (mu, nu) = example_2_1::marginals::<Q>(n, TOL).map_err(|e| e.to_string())?;
        let paving = pave(&mu, &nu, TOL).map_err(|e| e.to_string())?;
        ensure(paving.len() == 2, || format!("n={n}: {} components", paving.len()))?;
        let mut found: Vec<(Q, Q, usize)> = (0..2).map(|k| {
            let (lo, hi) = interval(&paving, k);
            (lo, hi, k)
        }).collect();
        found.sort();
        let mut worst = Q::zero();
        for ((lo, hi, k), (a, b)) in found.iter().zip(&reference) {
            let d = (lo.clone() - a.clone()).abs_val().max((hi.clone() - b.clone()).abs_val());
            worst = worst.max(d);
            if n == 16 {
                let mut boundary: Vec<Q> = paving.components[*k]
                    .boundary_atoms()
                    .iter()
                    .map(|&j| nu.atom(j)[0].clone())
                    .collect();
                boundary.sort();
                ensure(boundary == vec![a.clone(), b.clone()], || format!("boundary atoms {boundary:?}"))?;
            }
        }
        let bound = q(8, n as i64);
        ensure(worst <= bound, || format!("n={n}: distance {worst} above {bound}"))?;
        if let Some(p) = &previous {
            ensure(worst <= *p, || format!("n={n}: distance grew from {p} to {worst}"))?;
        }
        previous = Some(worst.clone());
        distances.push(format!("n={n}: {worst}"));
    }
    Ok(format!(
        "two components, boundary atoms {{-2,0}} and {{0,2}}; interval distances {}",
        distances.join(", ")
    ))
}

fn criterion_6() -> Outcome {
    let n = 8;
    let (mu, nu) = example_4_1::marginals::<f64>(n, TOL).map_err(|e| e.to_string())?;
    let ranges = cell_mass_ranges(&mu, &nu, TOL).map_err(|e| e.to_string())?;
    let gap = ranges.iter().flatten().map(|r| r.width()).fold(0.0, f64::max);
    ensure(gap <= 1e-9, || format!("max cell gap {gap:e}"))?;
    let paving = pave(&mu, &nu, TOL).map_err(|e| e.to_string())?;
    ensure(paving.len() == 3, || format!("{} components", paving.len()))?;
    let quads = example_4_1::quadrilaterals::<f64>();
    let bound = 2.0 / n as f64;
    let mut worst: f64 = 0.0;
    for (i, quad) in quads.iter().enumerate() {
        let hull: Vec<(f64, f64)> = paving
            .component_of(i)
            .polytope
            .points()
            .iter()
            .map(|p| (p[0], p[1]))
            .collect();
        let reference: Vec<(f64, f64)> = quad.iter().map(|p| (p[0], p[1])).collect();
        worst = worst.max(planar_hausdorff(&hull, &reference));
    }
    ensure(worst <= bound, || format!("Hausdorff {worst} above {bound}"))?;
    Ok(format!("max cell gap {gap:.1e}; 3 components; Hausdorff {worst:.4} <= {bound}"))
}

struct Instance {
    mu: DiscreteMeasure<Q>,
    nu: DiscreteMeasure<Q>,
    cost: CostMatrix<Q>,
}

fn instances() -> Vec<Instance> {
    let mut r = rng(7);
    (0..200)
        .map(|k| {
            let (mu, nu) = ordered_pair(&mut r, 1 + k % 2, 6, 8);
            let cost = cost(&mut r, mu.len(), nu.len());
            Instance { mu, nu, cost }
        })
        .collect()
}

fn criterion_7(data: &[Instance]) -> Outcome {
    let mut r = rng(70);
    for (k, inst) in data.iter().enumerate() {
        let sol = solve(&inst.mu, &inst.nu, &inst.cost, TOL).map_err(|e| e.to_string())?;
        ensure(sol.value == sol.dual.value, || format!("instance {k}: gap"))?;
        let marg = Marginals::of(&inst.mu, &inst.nu);
        let report = verify_certificate(&sol.dual, &marg, &inst.cost, &Scope::AllPairs, TOL);
        ensure(report.admissible(), || format!("instance {k}: {} violations", report.violations.len()))?;
        for _ in 0..5 {
            let (m, n) = (inst.mu.len(), inst.nu.len());
            let a = solve(&inst.mu, &inst.nu, &cost(&mut r, m, n), TOL).map_err(|e| e.to_string())?.coupling;
            let b = solve(&inst.mu, &inst.nu, &cost(&mut r, m, n), TOL).map_err(|e| e.to_string())?.coupling;
            let p: Coupling<Q> = a.blend(&b, &q(r.gen_range(0..=8), 8));
            ensure(p.check(&inst.mu, &inst.nu, TOL).holds(), || format!("instance {k}: blend infeasible"))?;
            ensure(p.value(&inst.cost) <= sol.dual.value, || format!("instance {k}: weak duality"))?;
        }
    }
    Ok(format!("{} instances: primal == dual, certificates admissible, weak duality x5", data.len()))
}

fn criterion_8(data: &[Instance]) -> Outcome {
    for (k, inst) in data.iter().enumerate() {
        let (mu, nu) = (&inst.mu, &inst.nu);
        let marg = Marginals::of(mu, nu);
        let support = feasible_support_of(&marg, TOL).map_err(|e| e.to_string())?;
        let paving = paving_from_support(&marg, &support, TOL)
            .and_then(|p| attach_j_with(p, &marg, Some(&support), TOL))
            .map_err(|e| format!("instance {k}: {e}"))?;
        for i in 0..mu.len() {
            let c = paving.component_of(i);
            ensure(ri_contains(&c.polytope, mu.atom(i), TOL).unwrap(), || format!("instance {k}: x_{i} not in ri I"))?;
            for j in support.targets(i, TOL) {
                ensure(closure_contains(&c.polytope, nu.atom(j), TOL).unwrap(), || {
                    format!("instance {k}: conditional support of x_{i} leaves cl I")
                })?;
                ensure(c.j_atoms().contains(&j), || format!("instance {k}: y_{j} charged by x_{i} but not in J"))?;
            }
        }
        for c in &paving.components {
            let j_points: Vec<Point<Q>> = c.j_atoms().iter().map(|&j| nu.atom(j).to_vec()).collect();
            for y in &j_points {
                ensure(closure_contains(&c.polytope, y, TOL).unwrap(), || format!("instance {k}: J leaves cl I"))?;
            }
            let j_hull = Polytope::new(j_points, TOL).map_err(|e| e.to_string())?;
            ensure(hull_equal(&j_hull, &c.polytope, TOL).unwrap(), || format!("instance {k}: conv J != cl I"))?;
        }
    }
    Ok(format!("{} instances: partition, x in ri I, supports in cl I, I <= J <= cl I", data.len()))
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let (mut ordered, mut not) = (0, 0);
    for k in 0..200 {
        let (mu, nu) = order_test_pair_1d(&mut r);
        let cert = convex_order_check(&mu, &nu, TOL).map_err(|e| e.to_string())?;
        let oracle = oracle_convex_order_1d(&mu, &nu, TOL).map_err(|e| e.to_string())?;
        let pairs = |m: &DiscreteMeasure<Q>| -> Vec<(Q, Q)> {
            m.atoms().iter().zip(m.weights()).map(|(x, w)| (x[0].clone(), w.clone())).collect()
        };
        let calls = convex_order_by_calls(&pairs(&mu), &pairs(&nu));
        ensure(cert.verdict() == oracle && oracle == calls, || format!("instance {k}: verdicts disagree"))?;
        match &cert {
            OrderCertificate::NotOrdered(sep) => {
                ensure(sep.verify(&mu, &nu, TOL), || format!("instance {k}: separation does not verify"))?;
                not += 1;
            }
            OrderCertificate::Ordered(p) => {
                ensure(p.check(&mu, &nu, TOL).holds(), || format!("instance {k}: coupling fails"))?;
                ordered += 1;
            }
        }
    }
    Ok(format!("200/200 agree ({ordered} ordered, {not} not; every separation verifies)"))
}

/// Every sub-support `gamma ∩ (R x C)` with `|R|, |C| <= 3` that uses all of `R` and `C`.
fn sub_supports(gamma: &[(usize, usize)]) -> BTreeSet<Vec<(usize, usize)>> {
    let mut rows: Vec<usize> = gamma.iter().map(|p| p.0).collect();
    rows.sort_unstable();
    rows.dedup();
    let mut cols: Vec<usize> = gamma.iter().map(|p| p.1).collect();
    cols.sort_unstable();
    cols.dedup();
    let subsets = |items: &[usize]| -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for mask in 1u32..(1 << items.len()) {
            if mask.count_ones() <= 3 {
                out.push((0..items.len()).filter(|t| mask & (1 << t) != 0).map(|t| items[t]).collect());
            }
        }
        out
    };
    let mut out = BTreeSet::new();
    for r in subsets(&rows) {
        for c in subsets(&cols) {
            let cells: Vec<(usize, usize)> = gamma.iter().copied().filter(|(i, j)| r.contains(i) && c.contains(j)).collect();
            let uses_all = r.iter().all(|i| cells.iter().any(|p| p.0 == *i)) && c.iter().all(|j| cells.iter().any(|p| p.1 == *j));
            if uses_all {
                out.insert(cells);
            }
        }
    }
    out
}

fn criterion_10() -> Outcome {
    let mut r = rng(10);
    let mut plans = 0;
    for k in 0..50 {
        let (mu, nu) = ordered_pair(&mut r, 1 + k % 2, 6, 8);
        let c = cost(&mut r, mu.len(), nu.len());
        let sol = solve(&mu, &nu, &c, TOL).map_err(|e| e.to_string())?;
        let gamma = sol.coupling.support(TOL);
        let universe: Vec<usize> = (0..nu.len()).collect();
        for cells in sub_supports(&gamma) {
            let mass: Vec<Q> = cells.iter().map(|&(i, j)| sol.coupling.mass(i, j).clone()).collect();
            let total = mass.iter().fold(Q::zero(), |a, b| a + b.clone());
            let weights: Vec<Q> = mass.into_iter().map(|w| w / total.clone()).collect();
            let plan = FinitePlan::new(cells.clone(), weights.clone(), TOL).map_err(|e| e.to_string())?;
            let best = competitor_max(&plan, nu.atoms(), &c, &universe, TOL).map_err(|e| e.to_string())?;
            let brute = brute_competitor_max(&cells, &weights, nu.atoms(), c.values());
            ensure(best.value == brute, || format!("instance {k}, plan {cells:?}: {} vs {}", best.value, brute))?;
            plans += 1;
        }
        let cert = certify_support(&gamma, nu.atoms(), &c, &SweepParams::default(), TOL).map_err(|e| e.to_string())?;
        ensure(cert.verdict == Verdict::Certified, || format!("instance {k}: optimizer support violated"))?;
    }
    Ok(format!("{plans} sub-supports match enumeration; 50/50 optimizer supports Certified"))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let data = instances();
    let criteria: Vec<Criterion> = vec![
        (1, "Example 4.2 paving", Box::new(criterion_1)),
        (2, "Example 4.2 vertices", Box::new(criterion_2)),
        (3, "Example 4.2 optimization", Box::new(criterion_3)),
        (4, "Example 4.2 sub-paving", Box::new(criterion_4)),
        (5, "Example 2.1 grid paving", Box::new(criterion_5)),
        (6, "Example 4.1 grid uniqueness and hulls", Box::new(criterion_6)),
        (7, "duality suite", Box::new(|| criterion_7(&data))),
        (8, "paving suite", Box::new(|| criterion_8(&data))),
        (9, "convex-order oracle suite", Box::new(criterion_9)),
        (10, "monotonicity oracle suite", Box::new(criterion_10)),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in &criteria {
        let t = Instant::now();
        let outcome = run();
        let known = KNOWN_UNATTAINABLE.iter().find(|(k, _)| k == id);
        let secs = t.elapsed().as_secs_f64();
        match (&outcome, known) {
            (Ok(detail), None) => println!("PASS criterion {id:>2} {name} [{secs:.1}s]: {detail}"),
            (Ok(detail), Some(_)) => {
                println!("PASS criterion {id:>2} {name} [{secs:.1}s]: {detail} (listed as unattainable; revisit)");
                unexpected.push(*id);
            }
            (Err(detail), Some((_, why))) => {
                println!("FAIL criterion {id:>2} {name} [{secs:.1}s]: {detail}; known: {why}")
            }
            (Err(detail), None) => {
                println!("FAIL criterion {id:>2} {name} [{secs:.1}s]: {detail}");
                unexpected.push(*id);
            }
        }
    }
    println!("acceptance finished in {:.1}s", started.elapsed().as_secs_f64());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcomes: {unexpected:?}");
        ExitCode::FAILURE
    }
}
