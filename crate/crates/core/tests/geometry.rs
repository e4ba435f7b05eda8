mod oracles;

use motpaver::geometry::{closure_contains, hull_equal, ri_contains, ri_intersects, Polytope};
use motpaver::{Point, Rational, Scalar, Tolerance};
use oracles::{planar_hull, q, Q};
use proptest::prelude::*;

const TOL: Tolerance = Tolerance::DEFAULT;

fn point(c: &[i64]) -> Point<Q> {
    c.iter().map(|&v| q(v, 1)).collect()
}

fn points_strategy(dim: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, dim), 1..6)
}

fn polytope(raw: &[Vec<i64>]) -> Polytope<Q> {
    Polytope::new(raw.iter().map(|p| point(p)).collect(), TOL).unwrap()
}

#[test]
fn square_and_its_diagonals() {
    let square = polytope(&[vec![0, 0], vec![2, 0], vec![0, 2], vec![2, 2]]);
    let diagonal = polytope(&[vec![0, 0], vec![2, 2]]);
    assert_eq!(square.dim(), 2);
    assert_eq!(diagonal.dim(), 1);
    assert!(ri_contains(&square, &point(&[1, 1]), TOL).unwrap());
    assert!(!ri_contains(&square, &point(&[0, 1]), TOL).unwrap());
    assert!(closure_contains(&square, &point(&[0, 1]), TOL).unwrap());
    assert!(ri_contains(&diagonal, &point(&[1, 1]), TOL).unwrap());
    assert!(ri_intersects(&square, &diagonal, TOL).unwrap());
    let edge = polytope(&[vec![0, 0], vec![2, 0]]);
    assert!(!ri_intersects(&square, &edge, TOL).unwrap());
    let mut v = square.vertices(TOL).unwrap();
    v.sort();
    assert_eq!(v.len(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn positive_barycenters_lie_in_the_relative_interior(
        raw in points_strategy(2),
        weights in prop::collection::vec(1i64..=5, 6),
    ) {
        let p = polytope(&raw);
        let total: i64 = weights[..raw.len()].iter().sum();
        let mut center = vec![Q::zero(); 2];
        for (x, &w) in raw.iter().zip(&weights) {
            for k in 0..2 {
                center[k] = center[k].clone() + q(x[k] * w, total);
            }
        }
        prop_assert!(ri_contains(&p, &center, TOL).unwrap());
    }

    #[test]
    fn hull_equality_is_an_equivalence(
        a in points_strategy(2),
        b in points_strategy(2),
        c in points_strategy(2),
    ) {
        let (pa, pb, pc) = (polytope(&a), polytope(&b), polytope(&c));
        prop_assert!(hull_equal(&pa, &pa, TOL).unwrap());
        prop_assert_eq!(hull_equal(&pa, &pb, TOL).unwrap(), hull_equal(&pb, &pa, TOL).unwrap());
        if hull_equal(&pa, &pb, TOL).unwrap() && hull_equal(&pb, &pc, TOL).unwrap() {
            prop_assert!(hull_equal(&pa, &pc, TOL).unwrap());
        }
        // Adding interior points changes nothing.
        let mut extended = a.clone();
        extended.extend(a.iter().cloned());
        prop_assert!(hull_equal(&pa, &polytope(&extended), TOL).unwrap());
    }

    #[test]
    fn vertices_match_monotone_chain(raw in points_strategy(2)) {
        let p = polytope(&raw);
        let as_f = |v: &Point<Q>| (v[0].to_f64(), v[1].to_f64());
        let mut ours: Vec<(f64, f64)> = p.vertices(TOL).unwrap().iter().map(as_f).collect();
        let pts: Vec<(f64, f64)> = raw.iter().map(|v| (v[0] as f64, v[1] as f64)).collect();
        let mut reference = planar_hull(&pts);
        if p.dim() == 1 {
            // The chain keeps both ends of a segment; so must we.
            prop_assert_eq!(ours.len(), 2);
        }
        ours.sort_by(|a, b| a.partial_cmp(b).unwrap());
        reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert_eq!(ours, reference);
    }

    #[test]
    fn vertices_are_never_interior(raw in points_strategy(2)) {
        let p = polytope(&raw);
        for v in p.vertices(TOL).unwrap() {
            prop_assert!(closure_contains(&p, &v, TOL).unwrap());
            prop_assert_eq!(ri_contains(&p, &v, TOL).unwrap(), p.dim() == 0);
        }
    }

    #[test]
    fn one_dimensional_interiors_are_open_intervals(raw in points_strategy(1), x in -4i64..=4) {
        let p = polytope(&raw);
        let lo = raw.iter().map(|v| v[0]).min().unwrap();
        let hi = raw.iter().map(|v| v[0]).max().unwrap();
        let inside = if lo == hi { x == lo } else { lo < x && x < hi };
        prop_assert_eq!(ri_contains::<Rational>(&p, &point(&[x]), TOL).unwrap(), inside);
        prop_assert_eq!(closure_contains::<Rational>(&p, &point(&[x]), TOL).unwrap(), lo <= x && x <= hi);
    }
}
