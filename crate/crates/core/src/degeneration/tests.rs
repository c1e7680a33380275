use std::f64::consts::{LN_2, SQRT_2};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hexagon::bundled_complex;

const THIRD: f64 = 1.0 / 3.0;

fn pants() -> TriangulationComplex {
    bundled_complex("pants").unwrap()
}

fn equilateral() -> DegenerationPath {
    DegenerationPath::new(&pants(), &[THIRD, THIRD, 1.0 - 2.0 * THIRD]).unwrap()
}

fn skew() -> DegenerationPath {
    DegenerationPath::new(&pants(), &[0.2, 0.35, 0.45]).unwrap()
}

fn markable() -> Vec<TriangulationComplex> {
    [
        "pants",
        "one_holed_torus",
        "two_holed_torus",
        "four_holed_sphere",
    ]
    .iter()
    .map(|n| bundled_complex(n).unwrap())
    .collect()
}

fn uneven_path(complex: &TriangulationComplex) -> DegenerationPath {
    let n = complex.marked().unwrap().coordinate_names().len();
    let b: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i % 3) as f64).collect();
    DegenerationPath::through(complex, &b).unwrap()
}

fn random_base(rng: &mut ChaCha8Rng, min_margin: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = x.iter().sum();
        let b: Vec<f64> = x.iter().map(|v| v / s).collect();
        let b = vec![b[0], b[1], 1.0 - b[0] - b[1]];
        if cone_check(&pants(), &b).unwrap().margin > min_margin {
            return b;
        }
    }
}

#[test]
fn cone_margins() {
    let p = pants();
    let m = cone_check(&p, &[THIRD, THIRD, THIRD]).unwrap();
    assert!((m.margin - THIRD).abs() < 1e-15 && m.inside);
    let m = cone_check(&p, &[0.2, 0.35, 0.45]).unwrap();
    assert!((m.margin - 0.10).abs() < 1e-15 && m.inside);
    let m = cone_check(&p, &[0.6, 0.2, 0.2]).unwrap();
    assert!((m.margin + 0.2).abs() < 1e-15 && !m.inside);
    assert!(matches!(
        DegenerationPath::new(&p, &[0.6, 0.2, 0.2]),
        Err(Error::OutsideCone { .. })
    ));
}

#[test]
fn base_must_lie_on_simplex() {
    assert!(matches!(
        DegenerationPath::new(&pants(), &[0.5, 0.5, 0.5]),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        DegenerationPath::new(&pants(), &[0.5, 0.5]),
        Err(Error::InvalidArgument(_))
    ));
    let p = DegenerationPath::through(&pants(), &[2.0, 3.5, 4.5]).unwrap();
    assert!((p.base()[1] - 0.35).abs() < 1e-15);
}

#[test]
fn rescaled_arcs_are_small_at_45() {
    let s = rescaled_surface_at(&equilateral(), 45.0).unwrap();
    for a in s.rescaled_ortholengths() {
        assert!(a > 0.0 && a <= 1e-3, "{a}");
    }
}

#[test]
fn rescaled_sides_are_the_base() {
    let path = skew();
    for lambda in [1.0, 7.5, 30.0, 60.0] {
        let s = rescaled_surface_at(&path, lambda).unwrap();
        for (x, b) in s.rescaled_coordinates().iter().zip(path.base()) {
            assert!((x - b).abs() < 1e-14, "{x} vs {b}");
        }
    }
    assert!(rescaled_surface_at(&path, 0.5).is_err());
}

#[test]
fn rescaled_arcs_decrease_along_the_grid() {
    let path = skew();
    let arcs: Vec<Vec<f64>> = DEFAULT_T_GRID
        .iter()
        .map(|t| {
            rescaled_surface_at(&path, 1.0 / t)
                .unwrap()
                .rescaled_ortholengths()
        })
        .collect();
    for w in arcs.windows(2) {
        for (a, b) in w[0].iter().zip(&w[1]) {
            assert!(b < a);
        }
    }
}

#[test]
fn complementary_sides_reach_their_limits() {
    for c in markable() {
        let path = uneven_path(&c);
        let s = rescaled_surface_at(&path, 60.0).unwrap();
        for ((n, x), (m, lim)) in s
            .rescaled_complementary()
            .iter()
            .zip(path.complementary_limits())
        {
            assert_eq!(n, &m);
            assert!((x - lim).abs() < 1e-3, "{}: {n} {x} vs {lim}", c.name());
        }
    }
}

#[test]
fn complementary_convergence_is_exponential() {
    let c = bundled_complex("two_holed_torus").unwrap();
    let fit =
        complementary_convergence(&uneven_path(&c), &[5.0, 10.0, 15.0, 20.0, 25.0, 30.0]).unwrap();
    assert!(fit.rate > 0.0 && fit.rate.is_finite(), "{fit:?}");
    for (l, e) in fit.lambdas.iter().zip(&fit.errors) {
        assert!(*e <= fit.constant * (-fit.rate * l).exp() * (1.0 + 1e-12));
    }
    let exact = complementary_convergence(&skew(), &[5.0, 10.0]).unwrap();
    assert!(exact.errors.iter().all(|e| *e < ROUNDOFF_FLOOR));
    assert!(exact.rate.is_infinite());
}

#[test]
fn decay_slopes_match_prediction() {
    let path = skew();
    let fits = arc_decay_rates(&path, &DEFAULT_DECAY_GRID).unwrap();
    let mut slopes: Vec<f64> = fits.iter().map(|f| f.predicted_slope).collect();
    slopes.sort_by(f64::total_cmp);
    for (s, want) in slopes.iter().zip([-0.30, -0.15, -0.05]) {
        assert!((s - want).abs() < 1e-14);
    }
    for f in &fits {
        assert!((f.slope - f.predicted_slope).abs() < 1e-3, "{f:?}");
    }
    for f in arc_decay_rates(&equilateral(), &DEFAULT_DECAY_GRID).unwrap() {
        assert!((f.slope + 1.0 / 6.0).abs() < 1e-3);
        assert!(
            f.constant > SQRT_2 / 2.0 && f.constant < 2.0 * SQRT_2,
            "{}",
            f.constant
        );
    }
}

#[test]
fn decay_slopes_on_every_markable_complex() {
    for c in markable() {
        let path = uneven_path(&c);
        for f in arc_decay_rates(&path, &DEFAULT_DECAY_GRID).unwrap() {
            assert!(
                (f.slope - f.predicted_slope).abs() < 1e-3,
                "{}: {f:?}",
                c.name()
            );
        }
    }
}

#[test]
fn decay_fit_needs_three_points() {
    assert!(arc_decay_rate(&skew(), 0, &[30.0, 40.0]).is_err());
}

#[test]
fn residuals_stay_small_along_the_sweep() {
    for c in markable() {
        let path = uneven_path(&c);
        for lambda in [1.0, 5.0, 20.0, 40.0, 60.0, 80.0] {
            let s = rescaled_surface_at(&path, lambda).unwrap();
            assert!(
                s.surface.max_residual() <= 1e-10,
                "{} at {lambda}",
                c.name()
            );
        }
    }
}

#[test]
fn equilateral_limit_is_symmetric_theta() {
    let lim = limit_graph_metric(&Thermo::default(), &equilateral()).unwrap();
    for l in lim.graph.lengths() {
        assert!((l - THIRD).abs() < 1e-14);
    }
    assert!((lim.entropy - 3.0 * LN_2).abs() < 1e-10);
    for l in lim.point.lengths() {
        assert!((l - LN_2).abs() < 1e-10);
    }
}

#[test]
fn limit_lengths_sum_to_one() {
    for c in markable() {
        let lim = limit_graph_metric(&Thermo::default(), &uneven_path(&c)).unwrap();
        assert!((lim.graph.lengths().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(lim.graph.lengths().iter().all(|l| *l > 0.0));
    }
}

#[test]
fn limit_matches_passages_at_60() {
    for path in [equilateral(), skew()] {
        let lim = limit_graph_metric(&Thermo::default(), &path).unwrap();
        let s = rescaled_surface_at(&path, 60.0).unwrap();
        for (p, l) in limit_by_passages(&s).iter().zip(lim.graph.lengths()) {
            assert!((p - l).abs() < 1e-4, "{p} vs {l}");
        }
    }
}

#[test]
fn distinct_bases_give_distinct_limits() {
    let engine = Thermo::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let a = random_base(&mut rng, 0.02);
        let b = random_base(&mut rng, 0.02);
        let la =
            limit_graph_metric(&engine, &DegenerationPath::new(&pants(), &a).unwrap()).unwrap();
        let lb =
            limit_graph_metric(&engine, &DegenerationPath::new(&pants(), &b).unwrap()).unwrap();
        let gap = la
            .point
            .lengths()
            .iter()
            .zip(lb.point.lengths())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(gap > 1e-8, "{a:?} and {b:?}");
    }
}

#[test]
fn limit_is_projective() {
    let engine = Thermo::default();
    let a = limit_graph_metric(
        &engine,
        &DegenerationPath::through(&pants(), &[0.2, 0.35, 0.45]).unwrap(),
    )
    .unwrap();
    let b = limit_graph_metric(
        &engine,
        &DegenerationPath::through(&pants(), &[2.0, 3.5, 4.5]).unwrap(),
    )
    .unwrap();
    for (x, y) in a.point.lengths().iter().zip(b.point.lengths()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn potentials_converge_to_the_limit() {
    for path in [equilateral(), skew()] {
        let s = rescaled_surface_at(&path, 60.0).unwrap();
        let ts = s.surface.transitions();
        for depth in 1..=3 {
            let f = surface_potential_approx(&s, depth).unwrap();
            let g = limit_potential(&path, ts, depth).unwrap();
            for (w, v) in f.iter() {
                assert!((v - g.value(w).unwrap()).abs() < 1e-4);
            }
        }
    }
}

#[test]
fn limit_potential_is_exact_at_every_depth() {
    let engine = Thermo::default();
    for path in [equilateral(), skew()] {
        let lim = limit_graph_metric(&engine, &path).unwrap();
        let ts = crate::graph::build_transition_structure(&lim.graph).unwrap();
        let lengths = Potential::lengths(&ts, &lim.graph).unwrap();
        for depth in 1..=3 {
            let f = limit_potential(&path, &ts, depth).unwrap();
            let h = engine.topological_entropy(&ts, &f).unwrap();
            assert!((h - lim.entropy).abs() < 1e-10);
            let l = lengths.lift(&ts, depth + 1).unwrap();
            assert!(cohomologous(&f, &l, &ts));
        }
    }
}

fn cohomologous(f: &Potential, g: &Potential, ts: &TransitionStructure) -> bool {
    crate::thermo::is_cohomologous(f, g, ts, 6).unwrap()
}

#[test]
fn deeper_potentials_refine_shallower_ones() {
    let engine = Thermo::default();
    for path in [equilateral(), skew()] {
        let h0 = limit_graph_metric(&engine, &path).unwrap().entropy;
        for &t in &DEFAULT_T_GRID {
            let s = rescaled_surface_at(&path, 1.0 / t).unwrap();
            let ts = s.surface.transitions();
            let h: Vec<f64> = (1..=2)
                .map(|d| {
                    engine
                        .topological_entropy(ts, &surface_potential_approx(&s, d).unwrap())
                        .unwrap()
                })
                .collect();
            assert!(
                (h[1] - h[0]).abs() < (h[0] - h0).abs(),
                "t = {t}: {h:?} vs {h0}"
            );
        }
    }
}

#[test]
fn depth_zero_is_rejected() {
    let s = rescaled_surface_at(&skew(), 10.0).unwrap();
    assert!(surface_potential_approx(&s, 0).is_err());
}

#[test]
fn equilateral_depth_one_speed_vanishes() {
    let engine = Thermo::default();
    for &t in &DEFAULT_T_GRID {
        assert!(path_speed(&engine, &equilateral(), t, 1).unwrap().speed < 1e-12);
    }
}

#[test]
fn speeds_decrease_towards_the_graph() {
    let engine = Thermo::default();
    let speeds: Vec<SpeedEstimate> = DEFAULT_T_GRID
        .iter()
        .map(|&t| path_speed(&engine, &equilateral(), t, 2).unwrap())
        .collect();
    for w in speeds.windows(2) {
        assert!(
            w[1].speed < w[0].speed,
            "{} then {}",
            w[0].speed,
            w[1].speed
        );
    }
    let last = speeds.last().unwrap();
    assert!(last.speed < 1e-2 * speeds[0].speed);
    for s in &speeds {
        assert!(s.tangency_residual.abs() < 1e-3);
        assert!((s.step - (s.t / 10.0).min(1e-3)).abs() < 1e-18);
    }
}

#[test]
fn speed_rejects_bad_t() {
    let engine = Thermo::default();
    assert!(path_speed(&engine, &skew(), 0.0, 1).is_err());
    assert!(path_speed(&engine, &skew(), 1.5, 1).is_err());
}

#[test]
fn entropy_stays_in_band() {
    let engine = Thermo::default();
    for path in [equilateral(), skew()] {
        let consts = band_constants(&path, &DEFAULT_DECAY_GRID).unwrap();
        assert!(consts.c > 0.0 && consts.c_prime > 0.0);
        let h0 = limit_graph_metric(&engine, &path).unwrap().entropy;
        for &t in &DEFAULT_T_GRID {
            for depth in [1, 2] {
                let band = entropy_band(&engine, &path, &consts, h0, t, depth).unwrap();
                assert!(band.inside, "{band:?}");
            }
        }
    }
}

#[test]
fn band_constants_of_equilateral() {
    let consts = band_constants(&equilateral(), &DEFAULT_DECAY_GRID).unwrap();
    assert!((consts.c - THIRD).abs() < 2e-3);
    assert!((consts.c_prime - THIRD).abs() < 1e-14);
}

#[test]
fn octave_grid_shape() {
    let g = octave_grid(0.0125, 0.2, 2).unwrap();
    assert_eq!(g.len(), 9);
    assert_eq!(g[0], 0.2);
    assert_eq!(*g.last().unwrap(), 0.0125);
    assert!(g.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(octave_grid(0.1, 0.1, 3).unwrap(), vec![0.1]);
    assert!(octave_grid(0.2, 0.1, 3).is_err());
    assert!(octave_grid(0.1, 0.2, 0).is_err());
    let odd = octave_grid(0.07, 0.2, 1).unwrap();
    assert_eq!(odd, vec![0.2, 0.1, 0.07]);
}

#[test]
fn path_length_tail_contracts() {
    let pl = path_length(&Thermo::default(), &equilateral(), 0.0125, 0.2, 2, 4).unwrap();
    assert_eq!(pl.tail_increments.len(), 4);
    assert_eq!(pl.ratios.len(), 3);
    for r in &pl.ratios {
        assert!(*r < 0.7, "{:?}", pl.ratios);
    }
    assert!(pl.total.is_finite() && pl.total > 0.0);
    assert!(pl.cumulative.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn path_length_is_additive() {
    let engine = Thermo::default();
    let path = skew();
    let whole = path_length(&engine, &path, 0.025, 0.2, 1, 2).unwrap();
    let upper = path_length(&engine, &path, 0.05, 0.2, 1, 2).unwrap();
    let lower = path_length(&engine, &path, 0.025, 0.05, 1, 2).unwrap();
    assert!((upper.total + lower.total - whole.total).abs() < 1e-12 * whole.total);
}

#[test]
fn empty_range_has_zero_length() {
    let pl = path_length(&Thermo::default(), &skew(), 0.1, 0.1, 1, 4).unwrap();
    assert_eq!(pl.total, 0.0);
    assert!(pl.tail_increments.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn branches_reassemble_the_sides(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_base(&mut rng, 1e-3);
        let path = DegenerationPath::new(&pants(), &b).unwrap();
        let branches = path.marked_branches();
        prop_assert!(branches.iter().all(|x| *x > 0.0));
        prop_assert!((branches.iter().sum::<f64>() - 0.5).abs() < 1e-14);
        let comp: f64 = path.complementary_branches().iter().sum();
        prop_assert!((comp - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rescaled_arcs_follow_prediction(seed in 0u64..1000, lambda in 30.0f64..80.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path = DegenerationPath::new(&pants(), &random_base(&mut rng, 0.1)).unwrap();
        let s = rescaled_surface_at(&path, lambda).unwrap();
        for (k, log_arc) in s.surface.log_ortholengths().iter().enumerate() {
            let predicted = LN_2 + lambda * path.predicted_slope(k);
            prop_assert!((log_arc - predicted).abs() < 0.05, "{} vs {}", log_arc, predicted);
        }
    }
}
