use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graph::{
    build_transition_structure, bundled_graph, enumerate_closed_geodesics, MetricGraph,
    BUNDLED_GRAPHS,
};

fn system(name: &str) -> (MetricGraph, TransitionStructure) {
    let g = bundled_graph(name).unwrap();
    let ts = build_transition_structure(&g).unwrap();
    (g, ts)
}

fn random_potential(ts: &TransitionStructure, depth: usize, rng: &mut ChaCha8Rng) -> Potential {
    Potential::from_fn(ts, depth, |_| rng.gen_range(-1.0..1.0)).unwrap()
}

#[test]
fn theta_zero_potential_has_pressure_log_two() {
    let (_, ts) = system("theta");
    for name in perron_solvers().names() {
        let engine = Thermo::from_names(name, "fundamental").unwrap();
        let p = engine.pressure(&ts, &Potential::zero(&ts)).unwrap();
        assert!((p - LN_2).abs() < 1e-13, "{name}: {p}");
    }
}

#[test]
fn constant_shift_adds_to_pressure() {
    let (_, ts) = system("theta");
    let f = Potential::constant(&ts, 0.7);
    assert!((pressure(&ts, &f).unwrap() - (LN_2 + 0.7)).abs() < 1e-13);
}

#[test]
fn theta_unit_lengths_at_log_two_have_zero_pressure() {
    let (g, ts) = system("theta");
    let f = Potential::lengths(&ts, &g).unwrap().scale(-LN_2);
    assert!(pressure(&ts, &f).unwrap().abs() < 1e-13);
}

#[test]
fn counting_pressure_on_theta() {
    let (_, ts) = system("theta");
    let zero = Potential::zero(&ts);
    let p10 = pressure_by_counting(&ts, &zero, 10).unwrap();
    // trace(A^10) = 2^10 + 2 + 2 + 2 + 2 + 2^10 for eigenvalues {2, 1, 1, -1, -1, -2}
    assert!((p10 - 2052f64.ln() / 10.0).abs() < 1e-12);
    assert!((p10 - LN_2).abs() < 0.07);
    let shifted = pressure_by_counting(&ts, &Potential::constant(&ts, 0.3), 10).unwrap();
    assert!((shifted - p10 - 0.3).abs() < 1e-12);
    assert_eq!(
        pressure_by_counting(&ts, &zero, 3).unwrap(),
        f64::NEG_INFINITY
    );
}

#[test]
fn counting_pressure_on_two_loop() {
    let (_, ts) = system("two_loop");
    let zero = Potential::zero(&ts);
    let spectral = pressure(&ts, &zero).unwrap();
    assert!((spectral - 3f64.ln()).abs() < 1e-13);
    let p8 = pressure_by_counting(&ts, &zero, 8).unwrap();
    assert!((p8 - spectral).abs() < 0.15);
}

fn counting_errors(
    name: &str,
    f: impl Fn(&MetricGraph, &TransitionStructure) -> Potential,
) -> Vec<(usize, f64)> {
    let (g, ts) = system(name);
    let f = f(&g, &ts);
    let exact = pressure(&ts, &f).unwrap();
    (4..=10)
        .filter(|n| n % ts.period() == 0)
        .map(|n| (n, (pressure_by_counting(&ts, &f, n).unwrap() - exact).abs()))
        .collect()
}

fn skewed_metric(g: &MetricGraph, ts: &TransitionStructure) -> Potential {
    let lengths: Vec<f64> = (0..g.edge_count()).map(|k| 1.0 + 0.25 * k as f64).collect();
    Potential::from_edge_values(ts, &lengths)
        .unwrap()
        .scale(-0.5)
}

#[test]
fn counting_error_decreases_with_period() {
    for name in ["theta", "two_loop"] {
        for errors in [
            counting_errors(name, |_, ts| Potential::zero(ts)),
            counting_errors(name, skewed_metric),
        ] {
            for w in errors.windows(2) {
                assert!(w[1].1 < w[0].1, "{name}: {errors:?}");
            }
        }
    }
}

#[test]
fn counting_error_oscillates_but_shrinks_on_k4_and_dumbbell() {
    // Both graphs have complex subleading non-backtracking eigenvalues, so the
    // error oscillates; K4 has no closed geodesics of period 5 at all.
    let k4 = counting_errors("k4", |_, ts| Potential::zero(ts));
    assert_eq!(k4[1], (5, f64::INFINITY));
    for name in ["k4", "dumbbell"] {
        for errors in [
            counting_errors(name, |_, ts| Potential::zero(ts)),
            counting_errors(name, skewed_metric),
        ] {
            let last = errors.last().unwrap().1;
            assert!(last < 0.5 * errors[0].1, "{name}: {errors:?}");
            assert!(
                errors
                    .iter()
                    .filter(|e| e.0 >= 9)
                    .all(|e| e.1 < errors[0].1),
                "{name}: {errors:?}"
            );
        }
    }
}

#[test]
fn entropy_of_theta_metrics() {
    let (g, ts) = system("theta");
    let h = topological_entropy(&ts, &Potential::lengths(&ts, &g).unwrap()).unwrap();
    assert!((h - LN_2).abs() < 1e-12);
    let g2 = g.with_lengths(&[2.0; 3]).unwrap();
    let h2 = topological_entropy(&ts, &Potential::lengths(&ts, &g2).unwrap()).unwrap();
    assert!((h2 - LN_2 / 2.0).abs() < 1e-12);
    let g3 = g.with_lengths(&[LN_2; 3]).unwrap();
    let h3 = topological_entropy(&ts, &Potential::lengths(&ts, &g3).unwrap()).unwrap();
    assert!((h3 - 1.0).abs() < 1e-12);
}

#[test]
fn entropy_requires_positive_potential() {
    let (_, ts) = system("theta");
    let f = Potential::from_symbol_values(&ts, &[1.0, 1.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
    assert!(matches!(
        topological_entropy(&ts, &f),
        Err(Error::NotPositive { .. })
    ));
}

#[test]
fn entropy_by_orbit_counting() {
    let (g, ts) = system("theta");
    let est = entropy_by_counting(&ts, &g, 14.0).unwrap();
    assert!((est - LN_2).abs() < 0.1 * LN_2, "{est}");
    assert!(matches!(
        entropy_by_counting(&ts, &g, 1.0),
        Err(Error::NoGeodesics { .. })
    ));
    let doubled = g.with_lengths(&[2.0; 3]).unwrap();
    let est2 = entropy_by_counting(&ts, &doubled, 28.0).unwrap();
    assert!((est2 - est / 2.0).abs() < 1e-14);
    // lengths are integers, so length < 4.5 means period at most 4
    let cycles = entropy_by_counting_with(&ts, &g, 4.5, CountingMode::Cycles).unwrap();
    let primitive = entropy_by_counting_with(&ts, &g, 4.5, CountingMode::PrimitiveCycles).unwrap();
    let periodic = entropy_by_counting_with(&ts, &g, 4.5, CountingMode::PeriodicPoints).unwrap();
    let n4 = enumerate_closed_geodesics(&ts, 4).unwrap();
    assert!((cycles - (n4.len() as f64).ln() / 4.5).abs() < 1e-14);
    let n_primitive = n4.iter().filter(|c| c.is_primitive()).count();
    assert!(n_primitive < n4.len());
    assert!((primitive - (n_primitive as f64).ln() / 4.5).abs() < 1e-14);
    let points: usize = n4.iter().map(|c| c.primitive_period()).sum();
    assert_eq!(
        points as f64,
        ts.fixed_point_count(2) + ts.fixed_point_count(4)
    );
    assert!((periodic - (points as f64).ln() / 4.5).abs() < 1e-14);
    // a geodesic of length exactly T is not counted
    let at_two = entropy_by_counting_with(&ts, &g, 2.0, CountingMode::Cycles);
    assert!(matches!(at_two, Err(Error::NoGeodesics { .. })));
}

#[test]
fn equilibrium_of_theta_is_uniform() {
    let (g, ts) = system("theta");
    for f in [
        Potential::zero(&ts),
        Potential::lengths(&ts, &g).unwrap().scale(-LN_2),
    ] {
        let state = equilibrium_state(&ts, &f).unwrap();
        for &p in state.stationary().iter() {
            assert!((p - 1.0 / 6.0).abs() < 1e-13);
        }
        for i in 0..6 {
            for &j in ts.successors(i) {
                assert!((state.transitions()[(i, j)] - 0.5).abs() < 1e-13);
            }
        }
        assert!((markov_entropy(&state) - LN_2).abs() < 1e-13);
        assert_eq!(state.period(), 2);
    }
}

#[test]
fn equilibrium_attains_pressure() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in BUNDLED_GRAPHS {
        let (_, ts) = system(name);
        for depth in 1..=3 {
            let f = random_potential(&ts, depth, &mut rng);
            let state = equilibrium_state(&ts, &f).unwrap();
            assert!(state.residual() < 1e-12);
            let gap =
                markov_entropy(&state) + integrate(&f, &state).unwrap() - state.pressure().unwrap();
            assert!(gap.abs() < 1e-10, "{name} depth {depth}: {gap}");
        }
    }
}

#[test]
fn deterministic_row_contributes_no_entropy() {
    let (_, ts) = system("two_loop");
    let block = BlockSystem::new(&ts, 1).unwrap();
    let mut q = DMatrix::zeros(4, 4);
    for i in 0..4 {
        for &j in block.successors(i) {
            q[(i, j)] = 1.0 / 3.0;
        }
    }
    // row 0 always continues with symbol 0
    q.row_mut(0).fill(0.0);
    q[(0, 0)] = 1.0;
    let state = EquilibriumState::from_transition_matrix(&block, q).unwrap();
    let pi = state.stationary().clone();
    let expected = -(1..4)
        .map(|i| pi[i] * 3.0 * (1.0 / 3.0) * (1.0f64 / 3.0).ln())
        .sum::<f64>();
    assert!((markov_entropy(&state) - expected).abs() < 1e-14);
}

#[test]
fn integrate_examples() {
    let (g, ts) = system("theta");
    let state = equilibrium_state(&ts, &Potential::zero(&ts)).unwrap();
    assert!((integrate(&Potential::constant(&ts, 2.5), &state).unwrap() - 2.5).abs() < 1e-14);
    assert!(
        (integrate(&Potential::lengths(&ts, &g).unwrap(), &state).unwrap() - 1.0).abs() < 1e-14
    );
    let deep = Potential::from_fn(&ts, 3, |_| 1.0).unwrap();
    assert!(matches!(
        integrate(&deep, &state),
        Err(Error::DepthMismatch { .. })
    ));
    // one symbol deeper than the states is integrated over transitions
    let two = Potential::from_fn(&ts, 2, |w| (w[0] + w[1]) as f64).unwrap();
    let state2 = Thermo::default()
        .equilibrium_state_at_depth(&ts, &Potential::zero(&ts), 2)
        .unwrap();
    assert!((integrate(&two, &state).unwrap() - integrate(&two, &state2).unwrap()).abs() < 1e-12);
}

#[test]
fn first_derivative_is_the_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (_, ts) = system("k4");
    for _ in 0..5 {
        let f1 = random_potential(&ts, 2, &mut rng);
        let f2 = random_potential(&ts, 1, &mut rng);
        let eps = 1e-5;
        let fd = (pressure(&ts, &f1.combine(1.0, &f2, eps, &ts).unwrap()).unwrap()
            - pressure(&ts, &f1.combine(1.0, &f2, -eps, &ts).unwrap()).unwrap())
            / (2.0 * eps);
        let exact = integrate(&f2, &equilibrium_state(&ts, &f1).unwrap()).unwrap();
        assert!(
            (fd - exact).abs() < 1e-6 * exact.abs().max(1e-3),
            "{fd} vs {exact}"
        );
    }
}

#[test]
fn variance_examples() {
    let (g, ts) = system("theta");
    let f = Potential::lengths(&ts, &g.with_lengths(&[LN_2; 3]).unwrap())
        .unwrap()
        .scale(-1.0);
    let state = equilibrium_state(&ts, &f).unwrap();
    assert_eq!(
        variance(&Potential::zero(&ts), &state, false)
            .unwrap()
            .value,
        0.0
    );

    let indicator = Potential::from_fn(&ts, 1, |w| (w[0] / 2 == 0) as u8 as f64).unwrap();
    assert!(matches!(
        variance(&indicator, &state, false),
        Err(Error::NotCentered { .. })
    ));
    let est = variance(&indicator, &state, true).unwrap();
    assert!((est.mean - 1.0 / 3.0).abs() < 1e-13);
    let centered = indicator.shift(-est.mean);
    let fd = FiniteDifference::default()
        .variance(&Thermo::default(), &ts, &f, &centered)
        .unwrap();
    assert!(
        (est.value - fd).abs() < 1e-5 * est.value,
        "{} vs {fd}",
        est.value
    );
}

#[test]
fn variance_methods_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for name in BUNDLED_GRAPHS {
        let (_, ts) = system(name);
        let f = random_potential(&ts, 2, &mut rng);
        let g = random_potential(&ts, 1, &mut rng);
        let values: Vec<f64> = variance_methods()
            .names()
            .into_iter()
            .map(|m| {
                Thermo::from_names("power", m)
                    .unwrap()
                    .second_derivative(&ts, &f, &g)
                    .unwrap()
            })
            .collect();
        for v in &values[1..] {
            assert!(
                (v - values[0]).abs() < 1e-5 * values[0],
                "{name}: {values:?}"
            );
        }
    }
}

#[test]
fn coboundaries_have_zero_variance_and_periods() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in BUNDLED_GRAPHS {
        let (_, ts) = system(name);
        let u: Vec<f64> = (0..ts.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let cb = Potential::coboundary(&ts, &u).unwrap();
        let f = random_potential(&ts, 1, &mut rng);
        let state = Thermo::default()
            .equilibrium_state_at_depth(&ts, &f, 2)
            .unwrap();
        assert!(variance(&cb, &state, false).unwrap().value < 1e-10);
        for geo in enumerate_closed_geodesics(&ts, 5).unwrap() {
            assert!(livsic_period(&geo, &cb).unwrap().abs() < 1e-12);
        }
        assert!(is_cohomologous(&f, &f.add(&cb, &ts).unwrap(), &ts, 6).unwrap());
        assert!(!is_cohomologous(&f, &f.shift(0.25), &ts, 3).unwrap());
    }
}

#[test]
fn non_coboundary_has_positive_variance() {
    let (_, ts) = system("two_loop");
    let g = Potential::from_symbol_values(&ts, &[1.0, 1.0, -1.0, -1.0]).unwrap();
    let state = equilibrium_state(&ts, &Potential::zero(&ts)).unwrap();
    assert!(variance(&g, &state, false).unwrap().value > 1e-3);
    assert!(!is_cohomologous(&g, &Potential::zero(&ts), &ts, 2).unwrap());
}

#[test]
fn livsic_periods_are_lengths() {
    let (g, ts) = system("theta");
    let g = g.with_lengths(&[1.0, 1.0, 2.0]).unwrap();
    let f = Potential::lengths(&ts, &g).unwrap();
    for geo in enumerate_closed_geodesics(&ts, 6).unwrap() {
        let len = crate::graph::geodesic_length(&geo, &g).unwrap();
        assert!((livsic_period(&geo, &f).unwrap() - len).abs() < 1e-12);
        assert_eq!(
            livsic_period(&geo, &Potential::constant(&ts, 0.5)).unwrap(),
            0.5 * geo.period() as f64
        );
    }
}

#[test]
fn automorphism_relabeling_preserves_periods() {
    let (g, ts) = system("theta");
    let f112 = Potential::lengths(&ts, &g.with_lengths(&[1.0, 1.0, 2.0]).unwrap()).unwrap();
    let f121 = Potential::lengths(&ts, &g.with_lengths(&[1.0, 2.0, 1.0]).unwrap()).unwrap();
    // swapping edges b and c is an automorphism of the theta graph
    let perm = MetricGraph::symbol_permutation(&[0, 2, 1], &[false; 3]);
    let relabeled = Potential::from_fn(&ts, 1, |w| f121.value(&[perm[w[0]]]).unwrap()).unwrap();
    assert!(is_cohomologous(&f112, &relabeled, &ts, 8).unwrap());
    assert!(!is_cohomologous(&f112, &f121.shift(0.1), &ts, 8).unwrap());
}

#[test]
fn variational_inequality_for_random_markov_measures() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (_, ts) = system("theta");
    let block = BlockSystem::new(&ts, 1).unwrap();
    let f = random_potential(&ts, 1, &mut rng);
    let p = pressure(&ts, &f).unwrap();
    for _ in 0..20 {
        let mut q = DMatrix::zeros(6, 6);
        for i in 0..6 {
            let w: Vec<f64> = block
                .successors(i)
                .iter()
                .map(|_| rng.gen_range(0.05..1.0))
                .collect();
            let total: f64 = w.iter().sum();
            for (&j, wj) in block.successors(i).iter().zip(&w) {
                q[(i, j)] = wj / total;
            }
        }
        let mu = EquilibriumState::from_transition_matrix(&block, q).unwrap();
        assert!(markov_entropy(&mu) + integrate(&f, &mu).unwrap() <= p + 1e-12);
    }
}

#[test]
fn reducible_shift_is_rejected() {
    let labels = vec!["x".into(), "X".into(), "y".into(), "Y".into()];
    let reversal = vec![1, 0, 3, 2];
    let successors = vec![vec![0, 1], vec![0, 1], vec![2, 3], vec![2, 3]];
    let ts = TransitionStructure::new(labels, reversal, successors).unwrap();
    assert!(!ts.is_irreducible());
    assert!(matches!(
        pressure(&ts, &Potential::zero(&ts)),
        Err(Error::Reducible)
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn pressure_shift_equivariance(seed in any::<u64>(), c in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, ts) = system("k4");
        let f = random_potential(&ts, 2, &mut rng);
        let p = pressure(&ts, &f).unwrap();
        let q = pressure(&ts, &f.shift(c)).unwrap();
        prop_assert!((q - p - c).abs() < 1e-12);
    }

    #[test]
    fn pressure_is_monotone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, ts) = system("dumbbell");
        let f = random_potential(&ts, 2, &mut rng);
        let bump = Potential::from_fn(&ts, 2, |_| rng.gen_range(0.0..0.5)).unwrap();
        let g = f.add(&bump, &ts).unwrap();
        prop_assert!(pressure(&ts, &f).unwrap() <= pressure(&ts, &g).unwrap() + 1e-14);
    }

    #[test]
    fn variance_is_nonnegative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, ts) = system("two_loop");
        let f = random_potential(&ts, 1, &mut rng);
        let g = random_potential(&ts, 2, &mut rng);
        let state = Thermo::default().equilibrium_state_at_depth(&ts, &f, 2).unwrap();
        prop_assert!(variance(&g, &state, true).unwrap().value >= 0.0);
    }
}
