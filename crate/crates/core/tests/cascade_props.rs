use fmp_core::cascade::{
    build_path, generate_leaf_signs, generate_leaf_signs_with, increment_law_defect, martingale_defect,
    normalization_divisor, normalize_path, verify_self_similarity, CascadeParams, FieldOptions, Hurst, ReplicaSampler,
};
use proptest::prelude::*;

fn hurst() -> impl Strategy<Value = Hurst> {
    prop_oneof![
        (-3.0f64..=1.0).prop_map(Hurst::Finite),
        Just(Hurst::Finite(0.5)),
        Just(Hurst::Finite(1.0)),
        Just(Hurst::Symmetric),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fields_are_deterministic(h in hurst(), seed in any::<u64>(), depth in 0u32..12) {
        let p = CascadeParams::new(2, h, seed).unwrap();
        prop_assert_eq!(generate_leaf_signs(&p, depth).unwrap(), generate_leaf_signs(&p, depth).unwrap());
    }

    #[test]
    fn increments_have_magnitude_b_pow_minus_nh(h in hurst(), b in 2u32..5, seed in any::<u64>(), depth in 1u32..8) {
        let p = CascadeParams::new(b, h, seed).unwrap();
        let path = build_path(&generate_leaf_signs(&p, depth).unwrap(), &p).unwrap();
        prop_assert!(increment_law_defect(&path) <= 1e-10);
    }

    #[test]
    fn self_similarity_on_random_seeds(h in hurst(), seed in any::<u64>(), depth in 1u32..=16, cut in 0.0f64..1.0) {
        let p = CascadeParams::new(2, h, seed).unwrap();
        let field = generate_leaf_signs_with(&p, depth, FieldOptions::retaining()).unwrap();
        let level = ((f64::from(depth) * cut) as u32).min(depth);
        let report = verify_self_similarity(&field, &p, level).unwrap();
        prop_assert!(report.holds, "{:?}", report);
    }

    #[test]
    fn leaf_sign_is_product_of_raw_signs(h in hurst(), b in 2u32..4, seed in any::<u64>(), depth in 1u32..7) {
        let p = CascadeParams::new(b, h, seed).unwrap();
        let field = generate_leaf_signs_with(&p, depth, FieldOptions::retaining()).unwrap();
        prop_assert!(field.check_consistency().unwrap());
        let leaves = field.len();
        for k in 0..leaves {
            let mut node = k;
            let mut product = 1i8;
            for level in (1..=depth).rev() {
                product *= field.raw_level(level).unwrap().sign(node);
                node /= u64::from(b);
            }
            prop_assert_eq!(product, field.sign(k));
        }
    }

    #[test]
    fn path_interpolates_between_grid_points(h in hurst(), seed in any::<u64>(), depth in 1u32..10, t in 0.0f64..=1.0) {
        let p = CascadeParams::new(2, h, seed).unwrap();
        let path = build_path(&generate_leaf_signs(&p, depth).unwrap(), &p).unwrap();
        let v = path.evaluate(t).unwrap();
        let cells = path.segments() as f64;
        let k = ((t * cells).floor() as usize).min(path.values().len() - 2);
        let (a, c) = (path.values()[k], path.values()[k + 1]);
        prop_assert!(v >= a.min(c) - 1e-12 && v <= a.max(c) + 1e-12);
    }

    #[test]
    fn replicas_are_prefix_stable(h in hurst(), seed in any::<u64>(), r in 0u64..1000) {
        let p = CascadeParams::new(2, h, seed).unwrap();
        let shallow = ReplicaSampler::new(&p, 5).unwrap().leaves(r);
        let mut seen = None;
        ReplicaSampler::new(&p, 9).unwrap().run(r, |level, bits| if level == 5 { seen = Some(bits.clone()) });
        prop_assert_eq!(Some(shallow), seen);
    }
}

#[test]
fn martingale_identity_exhaustive_up_to_three() {
    for &h in &[-2.0, 0.3, 0.5, 0.7, 0.95] {
        for n in 0..=3 {
            let p = CascadeParams::finite(2, h, 0).unwrap();
            let report = martingale_defect(&p, n).unwrap();
            assert!(report.holds, "H={h} n={n}: {report:?}");
        }
    }
}

#[test]
fn trivial_cascade_is_the_identity_ramp() {
    let p = CascadeParams::finite(2, 1.0, 77).unwrap();
    let path = build_path(&generate_leaf_signs(&p, 8).unwrap(), &p).unwrap();
    for (k, v) in path.values().iter().enumerate() {
        assert!((v - k as f64 / 256.0).abs() < 1e-15);
    }
}

#[test]
fn figure_four_divisor() {
    // σ·2^{2.5k}, σ from the divergent-regime formula.
    let p = CascadeParams::finite(2, -2.0, 0).unwrap();
    let sigma = (1.0f64 + 1.0 / (2f64.powi(6) - 2.0)).sqrt();
    for k in [8u32, 12, 18] {
        let d = normalization_divisor(&p, k).unwrap();
        let want = sigma * 2f64.powf(2.5 * f64::from(k));
        assert!((d / want - 1.0).abs() < 1e-13, "k={k}");
    }
    let path = build_path(&generate_leaf_signs(&p, 8).unwrap(), &p).unwrap();
    let x = normalize_path(&path, &p).unwrap();
    assert!((x.terminal() * normalization_divisor(&p, 8).unwrap() - path.terminal()).abs() < 1e-6 * path.terminal().abs().max(1.0));
}
