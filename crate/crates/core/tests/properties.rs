//! Invariants over seeded random complete fans.

use std::sync::Arc;

use fanforge::corpus::random_fan;
use fanforge::exactla::linalg::{add, rank_of, scale, zeros};
use fanforge::exactla::scalar::{format_rational, parse_rational, ratio};
use fanforge::io::{fan_from_json, fan_to_json, FanJson};
use fanforge::mori::MoriCone;
use fanforge::plfun::{quasi_projectivity, PLBasis, PLFunction, QuasiProjectivity};
use fanforge::primcoll::{enumerate_primitive_collections, primitive_relation};
use fanforge::refine::{property_a_holds, property_b, simplicial_refinement, volumes_match};
use fanforge::{Fan, QVector, RaySet, Rational};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn fan_strategy() -> impl Strategy<Value = Arc<Fan>> {
    (0u64..1000, 0usize..50).prop_map(|(seed, index)| Arc::new(random_fan(seed, index).1))
}

fn sum_rays(fan: &Fan, coeffs: impl Iterator<Item = (usize, Rational)>) -> QVector {
    coeffs.fold(zeros(fan.dim()), |acc, (i, c)| add(&acc, &scale(&c, fan.ray(i))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn primitive_collections_are_minimal_non_faces(fan in fan_strategy()) {
        let n = fan.dim();
        for p in enumerate_primitive_collections(&fan) {
            prop_assert!(p.len() >= 2 && p.len() <= n + 1);
            prop_assert!(!fan.contained_in_single_cone(&p.rays));
            for i in p.rays.iter() {
                let rest = p.rays.without(i);
                prop_assert!(fan.contained_in_single_cone(&rest));
                let vectors: Vec<QVector> = rest.iter().map(|j| fan.ray(j).clone()).collect();
                prop_assert_eq!(rank_of(&vectors), rest.len());
            }
        }
    }

    #[test]
    fn primitive_relations_balance(fan in fan_strategy()) {
        for p in enumerate_primitive_collections(&fan) {
            let rel = primitive_relation(&fan, &p);
            let lhs = sum_rays(&fan, p.rays.iter().map(|i| (i, Rational::one())));
            let rhs = sum_rays(&fan, rel.support.iter().zip(rel.b.iter().cloned()));
            prop_assert_eq!(lhs, rhs);
            prop_assert!(rel.b.iter().all(|b| b.is_positive()));
            for (i, b) in rel.support.iter().zip(&rel.b) {
                if p.rays.contains(i) {
                    prop_assert!(*b < Rational::one());
                }
            }
            let s: Vec<QVector> = rel.support.iter().map(|i| fan.ray(i).clone()).collect();
            prop_assert_eq!(rank_of(&s), s.len());
            prop_assert!(rel.a_p.holds(&fan));
        }
    }

    #[test]
    fn convex_functions_pair_nonnegatively(fan in fan_strategy()) {
        let basis = PLBasis::new(&fan);
        let mori = MoriCone::new(&basis).unwrap();
        if let QuasiProjectivity::Yes(phi) = quasi_projectivity(&basis) {
            prop_assert!(phi.is_strictly_convex());
            let values = phi.ray_values();
            for rel in &mori.relations {
                prop_assert!(rel.pair(&values).is_positive());
            }
            for p in enumerate_primitive_collections(&fan) {
                prop_assert!(primitive_relation(&fan, &p).a_p.pair(&values).is_positive());
            }
        } else {
            prop_assert!(!mori.is_pointed());
        }
    }

    #[test]
    fn pl_functions_are_linear_on_cones(fan in fan_strategy(), a in -5i64..=5, b in 1i64..=4) {
        let basis = PLBasis::new(&fan);
        let fs = basis.basis_functions();
        let f = fs.iter().fold(PLFunction::zero(&fan), |acc, g| acc.add(&g.scale(&ratio(a, b))));
        for c in fan.max_cones() {
            let rays: Vec<usize> = c.ray_indices.iter().collect();
            let x = sum_rays(&fan, rays.iter().map(|&i| (i, Rational::one())));
            let expected: Rational = rays.iter().map(|&i| f.ray_value(i)).sum();
            prop_assert_eq!(f.evaluate(&x).unwrap(), expected);
        }
        let g = f.add(&f.scale(&ratio(-1, 1)));
        prop_assert!(g.ray_values().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn refinements_keep_rays_and_subdivide(fan in fan_strategy(), seed in 0u64..100) {
        let r = simplicial_refinement(&fan, &RaySet::empty(), seed).unwrap();
        prop_assert!(r.fine.is_simplicial());
        prop_assert_eq!(r.fine.rays(), fan.rays());
        prop_assert!(r.fine.is_complete());
        prop_assert!(property_a_holds(&r));
        prop_assert!(property_b(&r));
        prop_assert!(volumes_match(&r));
        for (k, &c) in r.cone_map.iter().enumerate() {
            prop_assert!(r.fine.max_cones()[k].ray_indices.is_subset(&fan.max_cones()[c].ray_indices));
        }
    }

    #[test]
    fn fan_json_round_trips(fan in fan_strategy()) {
        let back = fan_from_json(&fan_to_json(&fan)).unwrap();
        prop_assert_eq!(FanJson::from(&back), FanJson::from(fan.as_ref()));
    }
}

proptest! {
    #[test]
    fn rationals_print_in_lowest_terms(p in -1000i64..1000, q in 1i64..1000) {
        let x = ratio(p, q);
        let s = format_rational(&x);
        prop_assert_eq!(parse_rational(&s), Some(x.clone()));
        if let Some((num, den)) = s.split_once('/') {
            let (num, den): (i64, i64) = (num.parse().unwrap(), den.parse().unwrap());
            prop_assert!(den > 1);
            prop_assert_eq!(num_integer::gcd(num, den), 1);
        } else {
            prop_assert!(x.is_integer());
        }
    }
}
