use motpaver::decomposition::{check_decomposition, componentwise_dual, disintegrate, mixture_weights, sub_paving};
use motpaver::golden::example_4_2;
use motpaver::paving::pave;
use motpaver::random::{cost, ordered_pair, rng};
use motpaver::transport::solve;
use motpaver::{CostMatrix, Rational, Scalar, Tolerance};

const TOL: Tolerance = Tolerance::DEFAULT;

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

#[test]
fn global_value_is_the_weighted_sum_of_component_values() {
    let mut r = rng(51);
    for k in 0..25 {
        let (mu, nu) = ordered_pair(&mut r, 1 + k % 2, 6, 8);
        let c = cost(&mut r, mu.len(), nu.len());
        let report = check_decomposition(&mu, &nu, &c, TOL).unwrap();
        assert!(report.holds);
        assert_eq!(report.global, report.weighted_sum);
    }
}

#[test]
fn disintegration_recovers_the_marginals() {
    let mut r = rng(52);
    for k in 0..15 {
        let (mu, nu) = ordered_pair(&mut r, 1 + k % 2, 6, 8);
        let c = cost(&mut r, mu.len(), nu.len());
        let paving = pave(&mu, &nu, TOL).unwrap();
        let p = solve(&mu, &nu, &c, TOL).unwrap().coupling;
        let parts = disintegrate(&paving, &mu, &nu, &p, &c, TOL).unwrap();
        let (mu_mix, nu_mix) = mixture_weights(&parts, mu.len(), nu.len());
        assert_eq!(mu_mix, mu.weights());
        assert_eq!(nu_mix, nu.weights());
        for part in &parts {
            assert!(part.coupling.check(&part.mu, &part.nu, TOL).holds());
        }
    }
}

#[test]
fn componentwise_duals_close_the_gap() {
    let mut r = rng(53);
    for k in 0..15 {
        let (mu, nu) = ordered_pair(&mut r, 1 + k % 2, 5, 7);
        let c = cost(&mut r, mu.len(), nu.len());
        let duals = componentwise_dual(&mu, &nu, &c, TOL).unwrap();
        for d in &duals.duals {
            assert!(d.gap_zero && d.admissible, "component {} fails", d.component);
        }
        assert!(duals.glued.scope_violations(mu.atoms(), nu.atoms(), &c, TOL).is_empty());
    }
}

#[test]
fn example_4_2_sub_paving_splits_into_triangles() {
    use example_4_2::*;
    let (mu, nu) = marginals::<Rational>(TOL).unwrap();
    let paving = pave(&mu, &nu, TOL).unwrap();
    let c = CostMatrix::indicator(3, 5, X0, Y1);
    let parts = disintegrate(&paving, &mu, &nu, &p2(), &c, TOL).unwrap();
    let part = parts.iter().find(|p| p.members.contains(&X1)).unwrap();
    assert_eq!(part.eta, q(2, 3));
    let sub = sub_paving(part, TOL).unwrap();
    assert_eq!(sub.len(), 2);
    let report = check_decomposition(&mu, &nu, &c, TOL).unwrap();
    assert_eq!(report.global, q(1, 12));
}
