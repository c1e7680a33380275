use std::f64::consts::LN_2;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graph::{bundled_graph, BUNDLED_GRAPHS};
use crate::thermo::pressure;

fn engine() -> Thermo {
    Thermo::default()
}

fn point(name: &str, lengths: &[f64]) -> ModuliPoint {
    let g = bundled_graph(name).unwrap().with_lengths(lengths).unwrap();
    normalize_to_entropy_one(&engine(), &g).unwrap()
}

fn symmetric_theta() -> ModuliPoint {
    point("theta", &[1.0, 1.0, 1.0])
}

fn random_point(name: &str, rng: &mut ChaCha8Rng) -> ModuliPoint {
    let n = bundled_graph(name).unwrap().edge_count();
    let lengths: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..3.0)).collect();
    point(name, &lengths)
}

fn relabeled(p: &ModuliPoint, perm: &[usize]) -> ModuliPoint {
    let l = p.lengths();
    let mut moved = vec![0.0; l.len()];
    for (k, &target) in perm.iter().enumerate() {
        moved[target] = l[k];
    }
    ModuliPoint::new(&engine(), p.graph().with_lengths(&moved).unwrap()).unwrap()
}

fn permute(v: &TangentVector, perm: &[usize]) -> TangentVector {
    let mut moved = vec![0.0; v.rates.len()];
    for (k, &target) in perm.iter().enumerate() {
        moved[target] = v.rates[k];
    }
    TangentVector::new(moved)
}

#[test]
fn normalization_of_theta() {
    let e = engine();
    for lengths in [[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]] {
        let p = point("theta", &lengths);
        for l in p.lengths() {
            assert!((l - LN_2).abs() < 1e-12);
        }
    }
    let p = point("theta", &[0.4, 1.1, 2.3]);
    let again = normalize_to_entropy_one(&e, p.graph()).unwrap();
    for (a, b) in p.lengths().iter().zip(again.lengths()) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(ModuliPoint::new(&e, bundled_graph("theta").unwrap()).is_err());
}

#[test]
fn thermodynamic_map_has_zero_pressure() {
    let p = symmetric_theta();
    let f = thermodynamic_map(&p);
    assert_eq!(f.depth(), 1);
    for (_, value) in f.iter() {
        assert!((value + LN_2).abs() < 1e-12);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in BUNDLED_GRAPHS {
        let p = random_point(name, &mut rng);
        assert!(
            pressure(p.transitions(), &thermodynamic_map(&p))
                .unwrap()
                .abs()
                < 1e-10
        );
    }
}

#[test]
fn tangent_basis_satisfies_constraint() {
    let e = engine();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in BUNDLED_GRAPHS {
        let p = random_point(name, &mut rng);
        let basis = tangent_basis(&e, &p).unwrap();
        assert_eq!(basis.len(), p.dimension());
        for v in &basis {
            assert!(tangency_residual(&e, &p, v).unwrap().abs() < 1e-12);
        }
    }
    let p = symmetric_theta();
    let v = TangentVector::new(vec![1.0, -1.0, 0.0]);
    assert!(tangency_residual(&e, &p, &v).unwrap().abs() < 1e-14);
}

#[test]
fn pressure_norm_basic_properties() {
    let e = engine();
    let p = symmetric_theta();
    assert_eq!(pressure_norm(&e, &p, &TangentVector::zero(3)).unwrap(), 0.0);
    let v = TangentVector::new(vec![1.0, -1.0, 0.0]);
    let n1 = pressure_norm(&e, &p, &v).unwrap();
    let n2 = pressure_norm(&e, &p, &v.scaled(2.0)).unwrap();
    assert!(n1 > 0.0);
    assert!((n2 - 4.0 * n1).abs() < 1e-12 * n2);
    let bad = TangentVector::new(vec![1.0, 0.0, 0.0]);
    assert!(matches!(
        pressure_norm(&e, &p, &bad),
        Err(Error::NotTangent { .. })
    ));
}

#[test]
fn pressure_norm_matches_curve_oracle() {
    let e = engine();
    let p = symmetric_theta();
    let v = TangentVector::new(vec![1.0, -1.0, 0.0]);
    let exact = pressure_norm(&e, &p, &v).unwrap();
    let curve = pressure_norm_by_curve(&e, &p, &v, 1e-2).unwrap();
    assert!((exact - curve).abs() < 1e-5 * exact, "{exact} vs {curve}");
}

#[test]
fn tensor_quadratic_form_matches_curve_on_basis() {
    let e = engine();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in BUNDLED_GRAPHS {
        let p = random_point(name, &mut rng);
        let t = metric_tensor(&e, &p).unwrap();
        for (k, v) in t.basis.iter().enumerate() {
            let curve = pressure_norm_by_curve(&e, &p, v, 1e-2).unwrap();
            let form = t.matrix[(k, k)];
            assert!(
                (form - curve).abs() < 1e-5 * form,
                "{name} basis {k}: {form} vs {curve}"
            );
        }
    }
}

#[test]
fn theta_tensor_is_symmetric_and_positive() {
    let t = metric_tensor(&engine(), &symmetric_theta()).unwrap();
    assert_eq!(t.matrix.nrows(), 2);
    assert!((t.matrix[(0, 0)] - t.matrix[(1, 1)]).abs() < 1e-12);
    assert!(t.asymmetry() == 0.0);
    assert!(t.is_positive_definite());
    assert!(t.min_eigenvalue() > 0.0);
}

#[test]
fn tensor_is_natural_under_automorphisms() {
    let e = engine();
    let cases: [(&str, &[f64], &[usize]); 3] = [
        ("theta", &[0.5, 1.2, 2.0], &[1, 2, 0]),
        ("theta", &[0.5, 1.2, 2.0], &[1, 0, 2]),
        ("two_loop", &[0.7, 1.9], &[1, 0]),
    ];
    for (name, lengths, perm) in cases {
        let p = point(name, lengths);
        let q = relabeled(&p, perm);
        let t = metric_tensor(&e, &p).unwrap();
        let moved: Vec<TangentVector> = t.basis.iter().map(|v| permute(v, perm)).collect();
        let s = metric_tensor_on(&e, &q, moved).unwrap();
        assert!((&t.matrix - &s.matrix).amax() < 1e-10, "{name} {perm:?}");
    }
}

#[test]
fn tensor_is_positive_definite_at_random_points() {
    let e = engine();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for name in BUNDLED_GRAPHS {
        for _ in 0..5 {
            let p = random_point(name, &mut rng);
            assert!(
                metric_tensor(&e, &p).unwrap().min_eigenvalue() > 0.0,
                "{name}"
            );
        }
    }
}

#[test]
fn random_unit_tangent_vectors_have_positive_norm() {
    let e = engine();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let p = random_point("k4", &mut rng);
    let basis = tangent_basis(&e, &p).unwrap();
    for _ in 0..100 {
        let mut v = TangentVector::zero(p.graph().edge_count());
        for b in &basis {
            v = v.plus(b, rng.gen_range(-1.0..1.0));
        }
        let v = v.scaled(1.0 / v.norm_l2());
        assert!(pressure_norm(&e, &p, &v).unwrap() > 0.0);
    }
}

#[test]
fn midpoint_coding_reproduces_the_norm() {
    let e = engine();
    let p = symmetric_theta();
    let cut = CutSystem::spanning_tree_complement(p.graph());
    let v = TangentVector::new(vec![1.0, -1.0, 0.0]);
    let a = pressure_norm(&e, &p, &v).unwrap();
    let b = metric_via_midpoint_coding(&e, &p, &v, &cut).unwrap();
    assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");
    assert!(
        metric_via_midpoint_coding(&e, &p, &TangentVector::zero(3), &cut)
            .unwrap()
            .abs()
            < 1e-15
    );
}

#[test]
fn midpoint_coding_sweep_over_bundled_graphs() {
    let e = engine();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for name in BUNDLED_GRAPHS {
        let p = random_point(name, &mut rng);
        let cut = CutSystem::spanning_tree_complement(p.graph());
        for v in tangent_basis(&e, &p).unwrap() {
            let a = pressure_norm(&e, &p, &v).unwrap();
            let b = metric_via_midpoint_coding(&e, &p, &v, &cut).unwrap();
            assert!((a - b).abs() < 1e-8 * a, "{name}: {a} vs {b}");
        }
    }
}

#[test]
fn intersection_of_a_metric_with_itself_is_one() {
    let e = engine();
    let p = point("k4", &[1.0, 1.2, 0.8, 1.1, 0.9, 1.3]);
    let j = intersection_j(&e, &p, &p, 6.0).unwrap();
    assert!((j.value - 1.0).abs() < 1e-14);
    assert!(j.geodesics > 0);
    assert!(matches!(
        intersection_j(&e, &p, &p, 0.1),
        Err(Error::NoGeodesics { .. })
    ));
}

#[test]
fn intersection_is_invariant_under_automorphisms() {
    let e = engine();
    let a = point("theta", &[1.0, 1.3, 0.7]);
    let b = point("theta", &[1.0, 1.0, 2.0]);
    let perm = [2, 0, 1];
    let direct = intersection_j(&e, &a, &b, 8.0).unwrap();
    let moved = intersection_j(&e, &relabeled(&a, &perm), &relabeled(&b, &perm), 8.0).unwrap();
    assert_eq!(direct.geodesics, moved.geodesics);
    assert!((direct.value - moved.value).abs() < 1e-12);
}

#[test]
fn intersection_on_theta_stabilizes() {
    let e = engine();
    let l1 = symmetric_theta();
    let l2 = point("theta", &[1.0, 1.0, 2.0]);
    let t = 10.0 * LN_2;
    let first = intersection_j(&e, &l1, &l2, t).unwrap().value;
    let second = intersection_j(&e, &l1, &l2, 1.5 * t).unwrap().value;
    assert!((first - second).abs() < 5e-3 * first, "{first} vs {second}");
    let sum: f64 = l2.lengths().iter().sum();
    assert!((first - sum / (3.0 * LN_2)).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn normalized_points_have_entropy_one(a in 0.2f64..4.0, b in 0.2f64..4.0, c in 0.2f64..4.0) {
        let p = point("theta", &[a, b, c]);
        let h = engine().topological_entropy(p.transitions(), &p.length_potential()).unwrap();
        prop_assert!((h - 1.0).abs() < 1e-10);
    }

    #[test]
    fn polarization_is_bilinear(x in -1.0f64..1.0, y in -1.0f64..1.0, a in 0.3f64..3.0, b in 0.3f64..3.0) {
        let e = engine();
        let p = point("two_loop", &[a, b]);
        let t = metric_tensor(&e, &p).unwrap();
        let v = t.basis[0].scaled(x);
        let direct = pressure_norm(&e, &p, &v).unwrap();
        prop_assert!((direct - t.quadratic_form(&[x])).abs() < 1e-10 * direct.max(1e-12));
        let w = t.basis[0].scaled(y);
        let inner = pressure_inner(&e, &p, &v, &w).unwrap();
        prop_assert!((inner - x * y * t.matrix[(0, 0)]).abs() < 1e-10 * t.matrix[(0, 0)]);
    }
}
