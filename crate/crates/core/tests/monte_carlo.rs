use fmp_core::cascade::{sample_terminal, CascadeParams, ReplicaSampler};
use fmp_core::charfn::{charfn_at, density_of_z, DensitySpec};
use fmp_core::stats::{
    clt_small_h_test, clt_terminal_test, empirical_vs_exact_moments, increments_gaussianity, ks_critical_1pct,
    ks_normal, ks_statistic, residual_clt_test, SmallHSource, Thresholds,
};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

fn th() -> Thresholds {
    Thresholds::default()
}

#[test]
fn ks_threshold_calibration() {
    let mut rng = StdRng::seed_from_u64(2024);
    let n = 4000;
    let bound = ks_critical_1pct(n);
    let exceed = (0..100)
        .filter(|_| {
            let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            ks_normal(&xs) > bound
        })
        .count();
    assert!(exceed <= 5, "{exceed} of 100 runs exceeded {bound}");
}

#[test]
fn leaf_sign_mean_is_epsilon_mean_power() {
    // E boldε(leaf) = E(ε)^16 at depth 16, averaged over 200 seeds.
    let p = CascadeParams::finite(2, 0.9, 0).unwrap();
    let mean_eps = p.epsilon_mean();
    let per_seed: Vec<f64> = (0..200u64)
        .map(|seed| {
            let q = p.with_seed(seed);
            let leaves = ReplicaSampler::new(&q, 16).unwrap().leaves(0);
            leaves.sum_in(0, leaves.len()) as f64 / leaves.len() as f64
        })
        .collect();
    let m = per_seed.iter().sum::<f64>() / 200.0;
    let var = per_seed.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 199.0;
    let se = (var / 200.0).sqrt();
    let want = mean_eps.powi(16);
    assert!((m - want).abs() <= 4.0 * se, "{m} vs {want} (se {se})");
}

#[test]
fn critical_second_moment_small_depth() {
    let p = CascadeParams::finite(2, 0.5, 0).unwrap();
    let z = sample_terminal(&p, 4, 100_000).unwrap();
    let m2 = z.iter().map(|x| x * x).sum::<f64>() / z.len() as f64;
    let var = z.iter().map(|x| (x * x - m2).powi(2)).sum::<f64>() / (z.len() - 1) as f64;
    assert!((m2 - 3.0).abs() <= 4.0 * (var / z.len() as f64).sqrt(), "{m2}");
}

#[test]
fn empirical_moments_match_tables() {
    let p = CascadeParams::finite(2, 0.5, 0).unwrap();
    let r = empirical_vs_exact_moments(&p, 10, 100_000, 2, &th()).unwrap();
    assert!((r.observation("moment_q2_exact").unwrap() - 6.0).abs() < 1e-12);
    assert!(r.pass, "{r:?}");

    let p = CascadeParams::finite(3, 0.7, 0).unwrap();
    let r = empirical_vs_exact_moments(&p, 6, 20_000, 4, &th()).unwrap();
    assert!(r.pass, "{r:?}");

    let p = CascadeParams::finite(2, 1.0, 0).unwrap();
    let r = empirical_vs_exact_moments(&p, 8, 100, 4, &th()).unwrap();
    assert!(r.checks.iter().all(|c| c.value == 0.0));
}

#[test]
fn clt_below_one_half() {
    for &h in &[-2.0, 0.3] {
        let p = CascadeParams::finite(2, h, 0).unwrap();
        let r = clt_terminal_test(&p, &[8, 12, 16], 4000, &th()).unwrap();
        assert!(r.pass, "H={h}: {r:?}");
    }
    let s = CascadeParams::symmetric(2, 0).unwrap();
    let r = clt_terminal_test(&s, &[8, 12, 16], 4000, &th()).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn critical_clt_is_shifted_by_its_mean() {
    // X_n has mean 1/(σ√n) and unit variance: D(16) ≈ 2Φ(0.177) - 1 = 0.140.
    let p = CascadeParams::finite(2, 0.5, 0).unwrap();
    let r = clt_terminal_test(&p, &[8, 12, 16], 4000, &th()).unwrap();
    assert!(r.check_named("ks_trend").unwrap().pass);
    assert!(r.check_named("moment_z_q2").unwrap().pass);
    let d = r.observation("ks_n16").unwrap();
    assert!((d - 0.140).abs() < 0.03, "{d}");
}

#[test]
fn small_h_limit_law_variant() {
    let r = clt_small_h_test(2, &[0.8, 0.65, 0.55, 0.51], 16, 4000, 0, SmallHSource::LimitLaw, &th()).unwrap();
    assert!(r.pass, "{r:?}");
    // Finite depth: E Z_16 is exact, so the mean band holds for every H.
    let r = clt_small_h_test(2, &[0.8, 0.65], 16, 4000, 0, SmallHSource::Simulated, &th()).unwrap();
    assert!(r.per_h.iter().all(|x| x.check_named("mean_z").unwrap().pass));
    assert!(r.pass, "{r:?}");
}

#[test]
fn increments_and_negative_control() {
    let p = CascadeParams::finite(2, 0.3, 0).unwrap();
    let r = increments_gaussianity(&p, 4, 16, 4000, &th()).unwrap();
    assert!(r.pass, "{r:?}");
    let control = increments_gaussianity(&p, 4, 6, 4000, &th()).unwrap();
    let err = |x: &fmp_core::stats::StatReport| x.observation("max_covariance_error").unwrap();
    assert!(err(&control) > err(&r));
}

#[test]
fn residual_clt_point_seven() {
    let p = CascadeParams::finite(2, 0.7, 0).unwrap();
    let r = residual_clt_test(&p, &[1, 2, 4], 12, 4000, &th()).unwrap();
    assert!((r.observation("residual_sigma").unwrap() - 1.03194306047539982).abs() < 1e-12);
    assert!(r.pass, "{r:?}");
}

#[test]
fn charfn_against_empirical_and_density_against_samples() {
    let p = CascadeParams::finite(2, 0.7, 0).unwrap();
    let z = sample_terminal(&p, 16, 100_000).unwrap();
    let n = z.len() as f64;
    for &t in &[0.5, 1.0, 2.0] {
        let terms: Vec<Complex64> = z.iter().map(|x| Complex64::from_polar(1.0, t * x)).collect();
        let mean = terms.iter().sum::<Complex64>() / n;
        let var_re = terms.iter().map(|c| (c.re - mean.re).powi(2)).sum::<f64>() / (n - 1.0);
        let var_im = terms.iter().map(|c| (c.im - mean.im).powi(2)).sum::<f64>() / (n - 1.0);
        let exact = charfn_at(&p, t, 16).unwrap();
        assert!((exact.re - mean.re).abs() <= 4.0 * (var_re / n).sqrt(), "t={t}");
        assert!((exact.im - mean.im).abs() <= 4.0 * (var_im / n).sqrt(), "t={t}");
    }
    let density = density_of_z(&p, &DensitySpec::default()).unwrap();
    let d = ks_statistic(&z, |x| density.cdf_at(x));
    assert!(d <= 0.02, "{d}");
}
