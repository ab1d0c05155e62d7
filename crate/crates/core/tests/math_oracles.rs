use std::collections::BTreeMap;

use oli_core::math::*;
use oli_core::testing::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_layout(n: usize, rng: &mut impl Rng) -> Layout {
    Layout::new(
        (0..n)
            .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
            .collect(),
    )
    .unwrap()
}

fn flatten(g: &[[f64; 2]]) -> Vec<f64> {
    g.iter().flat_map(|p| p.iter().copied()).collect()
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..25 {
        let (n, d) = if case == 0 {
            (6, 4)
        } else {
            (rng.random_range(3..=10), rng.random_range(2..=8))
        };
        let f = random_features(n, d, &mut rng);
        let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..2.0)).collect();
        let w = WeightVector::from_raw(&raw).unwrap();
        let layout = random_layout(n, &mut rng);
        let subset: Vec<usize> = (0..n).collect();
        let g = stress_gradients(&f, &w, &layout, &subset).unwrap();
        let (fd_layout, fd_w) =
            finite_difference_gradients(&f, w.as_slice(), &layout, &subset, 1e-5);
        let e_layout = relative_error(&flatten(&g.layout), &flatten(&fd_layout));
        let e_w = relative_error(&g.weights, &fd_w);
        assert!(e_layout <= 1e-4, "case {case}: layout rel err {e_layout}");
        assert!(e_w <= 1e-4, "case {case}: weight rel err {e_w}");
    }
}

#[test]
fn gradients_vanish_at_zero_stress() {
    let (f, planar) = planted_planar(8, 5, 3);
    let layout = Layout::new(planar).unwrap();
    let subset: Vec<usize> = (0..8).collect();
    let g = stress_gradients(&f, &WeightVector::uniform(5), &layout, &subset).unwrap();
    assert!(g.stress < 1e-20);
    let norm_l = flatten(&g.layout).iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_w = g.weights.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(norm_l <= 1e-8 && norm_w <= 1e-8, "{norm_l} {norm_w}");
}

#[test]
fn layout_gradient_is_translation_free() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_features(7, 3, &mut rng);
    let layout = random_layout(7, &mut rng);
    let subset: Vec<usize> = (0..7).collect();
    let g = stress_gradients(&f, &WeightVector::uniform(3), &layout, &subset).unwrap();
    for axis in 0..2 {
        let sum: f64 = g.layout.iter().map(|p| p[axis]).sum();
        assert!(sum.abs() < 1e-12, "axis {axis}: {sum}");
    }
}

#[test]
fn subset_gradient_ignores_other_items() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = random_features(6, 3, &mut rng);
    let layout = random_layout(6, &mut rng);
    let g = stress_gradients(&f, &WeightVector::uniform(3), &layout, &[1, 3, 4]).unwrap();
    for i in [0, 2, 5] {
        assert_eq!(g.layout[i], [0.0, 0.0]);
    }
}

#[test]
fn procrustes_matches_svd_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let source = random_layout(8, &mut rng);
        let target = random_layout(8, &mut rng);
        let anchors: Vec<usize> = (0..8).collect();
        let aligned = procrustes_align(&source, &target, &anchors).unwrap();
        let residual: f64 = (0..8)
            .map(|i| {
                let p = aligned.position(i);
                let t = target.position(i);
                (p[0] - t[0]).powi(2) + (p[1] - t[1]).powi(2)
            })
            .sum();
        let oracle = procrustes_svd_residual(&source, &target, &anchors);
        assert!(
            (residual - oracle).abs() <= 1e-9 * oracle.max(1.0),
            "{residual} vs {oracle}"
        );
        // Rigid: pairwise distances are preserved.
        for (i, j) in [(0, 1), (2, 7), (3, 5)] {
            assert!((aligned.distance(i, j) - source.distance(i, j)).abs() < 1e-12);
        }
    }
}

#[test]
fn forward_recovers_planted_configurations() {
    for seed in 0..5 {
        let (f, planar) = planted_planar(10, 8, seed);
        let (layout, report) = wmds_solve(&f, &WeightVector::uniform(8), None).unwrap();
        assert!(report.final_objective <= 1e-4, "seed {seed}: {report:?}");
        assert!(report.iterations <= 300);
        assert!(report.is_non_increasing());
        // Recovered up to a similarity transform.
        let all: Vec<usize> = (0..10).collect();
        let planar = Layout::new(planar).unwrap();
        let scale = planar.distance(0, 1) / layout.distance(0, 1);
        let scaled = Layout::new(
            layout
                .positions()
                .iter()
                .map(|p| [p[0] * scale, p[1] * scale])
                .collect(),
        )
        .unwrap();
        assert!(procrustes_svd_residual(&scaled, &planar, &all) < 1e-6);
    }
}

#[test]
fn random_forward_solves_descend() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let n = rng.random_range(4..30);
        let d = rng.random_range(2..12);
        let f = random_features(n, d, &mut rng);
        let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..3.0)).collect();
        let w = WeightVector::from_raw(&raw).unwrap();
        let init = rng.random_bool(0.5).then(|| random_layout(n, &mut rng));
        let (layout, report) = wmds_solve(&f, &w, init.as_ref()).unwrap();
        assert!(report.is_non_increasing(), "{:?}", report.objective_trace);
        assert!(layout.positions().iter().flatten().all(|c| c.is_finite()));
    }
}

fn two_cluster_instance(k: usize, seed: u64) -> (FeatureMatrix, BTreeMap<usize, [f64; 2]>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::new();
    for item in 0..6 {
        for feature in 0..3 {
            values.push(if feature == k {
                if item < 3 {
                    0.0
                } else {
                    1.0
                }
            } else {
                rng.random_range(0.0..1.0)
            });
        }
    }
    let ids = (0..6).map(|i| format!("c{i}")).collect();
    let f = FeatureMatrix::new(6, 3, values, ids).unwrap();
    let moved = (0..6)
        .map(|i| {
            let base = if i < 3 { [-4.0, -4.0] } else { [4.0, 4.0] };
            let jitter = 0.1 * (i % 3) as f64;
            (i, [base[0] + jitter, base[1] - jitter])
        })
        .collect();
    (f, moved)
}

#[test]
fn inverse_upweights_the_separating_feature() {
    for k in 0..3 {
        let (f, moved) = two_cluster_instance(k, 40 + k as u64);
        let (oracle_w, _) = inverse_grid_oracle(&f, &moved, 0.01);
        let oracle_arg = (0..3)
            .max_by(|&a, &b| oracle_w[a].total_cmp(&oracle_w[b]))
            .unwrap();
        assert_eq!(oracle_arg, k);
        let (w, report) = wmds_inverse(&f, &WeightVector::uniform(3), &moved).unwrap();
        assert_eq!(w.argmax(), k, "weights {:?}", w.as_slice());
        assert!(report.is_non_increasing());
    }
}

#[test]
fn noop_drags_do_not_worsen_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = random_features(12, 5, &mut rng);
    let w = WeightVector::from_raw(&[0.5, 2.0, 1.0, 1.0, 0.5]).unwrap();
    let (layout, _) = wmds_solve(&f, &w, None).unwrap();
    let moved: BTreeMap<usize, [f64; 2]> =
        [0, 4, 9].iter().map(|&i| (i, layout.position(i))).collect();
    let before = moved_pair_stress(&f, &w, &moved).unwrap();
    let (learned, _) = wmds_inverse(&f, &w, &moved).unwrap();
    let after = moved_pair_stress(&f, &learned, &moved).unwrap();
    assert!(after <= before + 1e-9);
}

#[test]
fn inverse_matches_grid_search_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..6 {
        let d = rng.random_range(2..=4);
        let n_moved = rng.random_range(3..=6);
        let f = random_features(8, d, &mut rng);
        let moved: BTreeMap<usize, [f64; 2]> = (0..n_moved)
            .map(|i| {
                (
                    i,
                    [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
                )
            })
            .collect();
        let (_, best) = inverse_grid_oracle(&f, &moved, 0.01);
        let (w, report) = wmds_inverse(&f, &WeightVector::uniform(d), &moved).unwrap();
        let ours = report.final_objective;
        assert!((moved_pair_stress(&f, &w, &moved).unwrap() - ours).abs() < 1e-12);
        assert!(
            ours <= best * 1.02 + 1e-12,
            "case {case}: {ours} vs grid {best}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weighted_distance_is_a_metric(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 4), 3),
        raw in prop::collection::vec(0.0f64..5.0, 4),
    ) {
        let w = WeightVector::from_raw(&raw).unwrap();
        let d = |a: usize, b: usize| weighted_distance(&rows[a], &rows[b], &w).unwrap();
        prop_assert!(d(0, 1) >= 0.0);
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
        prop_assert!(d(1, 2) <= d(1, 0) + d(0, 2) + 1e-12);
    }

    #[test]
    fn raising_a_weight_never_shrinks_distances(
        a in prop::collection::vec(0.0f64..=1.0, 5),
        b in prop::collection::vec(0.0f64..=1.0, 5),
        k in 0usize..5,
        bump in 0.0f64..3.0,
    ) {
        let base = vec![0.6, 1.2, 0.8, 1.0, 1.4];
        let mut raised = base.clone();
        raised[k] += bump;
        // Direct sums: the mass renormalization is a separate, uniform rescale.
        let dist = |w: &[f64]| a.iter().zip(&b).zip(w).map(|((x, y), wk)| wk * (x - y).powi(2)).sum::<f64>().sqrt();
        let w0 = WeightVector::from_raw(&base).unwrap();
        prop_assert!((weighted_distance(&a, &b, &w0).unwrap() - dist(&base)).abs() < 1e-12);
        prop_assert!(dist(&raised) >= dist(&base));
    }

    #[test]
    fn stress_is_rigid_and_scale_invariant(
        seed in 0u64..1000,
        theta in 0.0f64..std::f64::consts::TAU,
        reflect in any::<bool>(),
        shift in (-5.0f64..5.0, -5.0f64..5.0),
        scale in 0.1f64..10.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_features(7, 3, &mut rng);
        let w = WeightVector::uniform(3);
        let layout = random_layout(7, &mut rng);
        let all: Vec<usize> = (0..7).collect();
        let target = pairwise_distances(&f, &w, &all).unwrap();
        let s0 = stress(&DistanceVector::from_layout(&layout, &all).unwrap(), &target).unwrap();
        let (sin, cos) = theta.sin_cos();
        let moved: Vec<[f64; 2]> = layout.positions().iter().map(|p| {
            let x = if reflect { -p[0] } else { p[0] };
            [scale * (cos * x - sin * p[1]) + shift.0, scale * (sin * x + cos * p[1]) + shift.1]
        }).collect();
        let moved = Layout::new(moved).unwrap();
        let s1 = stress(&DistanceVector::from_layout(&moved, &all).unwrap(), &target).unwrap();
        prop_assert!((s0 - s1).abs() <= 1e-10, "{} vs {}", s0, s1);
    }

    #[test]
    fn inverse_output_is_feasible(seed in 0u64..500, d in 1usize..6, n_moved in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_features(8, d, &mut rng);
        let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..2.0)).collect();
        let w0 = WeightVector::from_raw(&raw).unwrap();
        let moved: BTreeMap<usize, [f64; 2]> = (0..n_moved)
            .map(|i| (i, [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]))
            .collect();
        let (w, report) = wmds_inverse(&f, &w0, &moved).unwrap();
        prop_assert!(w.as_slice().iter().all(|&v| v >= WEIGHT_FLOOR));
        prop_assert!((w.mass() - w0.mass()).abs() <= 1e-9);
        prop_assert!((w.mass() - d as f64).abs() <= 1e-9);
        prop_assert!(report.is_non_increasing());
    }
}
