mod oracles;

use motpaver::golden::example_4_2;
use motpaver::monotonicity::{
    certify_support, competitor_max, optimality_iff_concentrated, FinitePlan, SweepParams, Verdict,
};
use motpaver::random::{cost, ordered_pair, rng};
use motpaver::transport::solve;
use motpaver::{CostMatrix, Coupling, Rational, Scalar, Tolerance};
use oracles::{brute_competitor_max, mot_system, q, vertices, Q};
use rand::Rng;

const TOL: Tolerance = Tolerance::DEFAULT;

#[test]
fn competitor_max_matches_enumeration_on_random_sub_supports() {
    let mut r = rng(41);
    for k in 0..25 {
        let (mu, nu) = ordered_pair(&mut r, 1 + k % 2, 5, 7);
        let c = cost(&mut r, mu.len(), nu.len());
        let sol = solve(&mu, &nu, &c, TOL).unwrap();
        let gamma = sol.coupling.support(TOL);
        for _ in 0..6 {
            // Up to three random cells of gamma with random integer weights.
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for _ in 0..r.gen_range(1..=3) {
                let cell = gamma[r.gen_range(0..gamma.len())];
                if !pairs.contains(&cell) {
                    pairs.push(cell);
                }
            }
            let counts: Vec<i64> = pairs.iter().map(|_| r.gen_range(1..=9)).collect();
            let total: i64 = counts.iter().sum();
            let weights: Vec<Q> = counts.iter().map(|&c| q(c, total)).collect();
            let plan = FinitePlan::new(pairs.clone(), weights.clone(), TOL).unwrap();
            let universe: Vec<usize> = (0..nu.len()).collect();
            let best = competitor_max(&plan, nu.atoms(), &c, &universe, TOL).unwrap();
            let brute = brute_competitor_max(&pairs, &weights, nu.atoms(), c.values());
            assert_eq!(best.value, brute);
            assert!(best.plan.is_competitor_of(&plan, nu.atoms(), TOL));
            assert_eq!(best.plan.value(&c), best.value);
        }
    }
}

#[test]
fn optimizer_supports_are_certified() {
    let mut r = rng(42);
    for k in 0..20 {
        let (mu, nu) = ordered_pair(&mut r, 1 + k % 2, 5, 7);
        let c = cost(&mut r, mu.len(), nu.len());
        let sol = solve(&mu, &nu, &c, TOL).unwrap();
        let cert = certify_support(&sol.coupling.support(TOL), nu.atoms(), &c, &SweepParams::default(), TOL).unwrap();
        assert_eq!(cert.verdict, Verdict::Certified);
        assert!(cert.witness.is_none());
        let report = optimality_iff_concentrated(&mu, &nu, &c, TOL).unwrap();
        assert!(report.holds(TOL), "{report:?}");
    }
}

#[test]
fn suboptimal_supports_are_caught_with_a_checkable_witness() {
    use example_4_2::*;
    let (_, nu) = marginals::<Rational>(TOL).unwrap();
    let c = CostMatrix::indicator(3, 5, X0, Y1);
    let gamma = p1::<Rational>().support(TOL);
    let cert = certify_support(&gamma, nu.atoms(), &c, &SweepParams::default(), TOL).unwrap();
    assert_eq!(cert.verdict, Verdict::Violated);
    let witness = cert.witness.unwrap();
    assert!(witness.verify(nu.atoms(), &c, TOL));
    assert!(witness.gap > Q::zero());
}

/// Every vertex of the example's transport polytope, found without the LP
/// kernel. The indicator cost peaks only at the second listed coupling.
#[test]
fn example_4_2_polytope_by_enumeration() {
    use example_4_2::*;
    let (mu, nu) = marginals::<Rational>(TOL).unwrap();
    let sys = mot_system(mu.atoms(), mu.weights(), nu.atoms(), nu.weights());
    let all: Vec<usize> = (0..sys.vars).collect();
    let verts = vertices(&sys, &all);
    let flat = |p: &Coupling<Q>| -> Vec<Q> { p.masses().iter().flatten().cloned().collect() };
    assert!(verts.contains(&flat(&p2())));
    assert!(verts.contains(&flat(&p1())));
    assert!(!verts.contains(&flat(&p1_literal())));
    let target = X0 * 5 + Y1;
    let best = verts.iter().map(|v| v[target].clone()).max().unwrap();
    assert_eq!(best, q(1, 12));
    let argmax: Vec<&Vec<Q>> = verts.iter().filter(|v| v[target] == best).collect();
    assert_eq!(argmax, vec![&flat(&p2())]);

    // Along the edge from the corrected first vertex to the second, the
    // cost grows linearly and every blend stays a coupling.
    let c = CostMatrix::indicator(3, 5, X0, Y1);
    for k in 0..=8 {
        let t = q(k, 8);
        let blend = p1().blend(&p2(), &t);
        assert!(blend.check(&mu, &nu, TOL).holds());
        assert_eq!(blend.value(&c), t * q(1, 12));
    }
    assert_eq!(solve(&mu, &nu, &c, TOL).unwrap().value, q(1, 12));
}
