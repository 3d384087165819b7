//! Re-runs the statistical checks over several seeds, printing one line per
//! seed. These are the sweeps the default thresholds were calibrated on.
//!
//! ```text
//! cargo run --release --example seed_sweep -- clt|small-h|increments|residual|fractal|density [seeds]
//! ```

use std::time::Instant;

use fmp_core::charfn::{decay_fit, density_of_z, DensitySpec};
use fmp_core::fractal::{box_dimension, holder_profile, increment_scaling_exponent};
use fmp_core::stats::{
    clt_small_h_test, clt_terminal_test, increments_gaussianity, ks_statistic, residual_clt_test, SmallHSource,
    Thresholds,
};
use fmp_core::{build_path, generate_leaf_signs, sample_terminal, CascadeParams};

fn params(h: Option<f64>, seed: u64) -> CascadeParams {
    match h {
        Some(h) => CascadeParams::finite(2, h, seed),
        None => CascadeParams::symmetric(2, seed),
    }
    .unwrap()
}

fn main() {
    let mut args = std::env::args().skip(1);
    let what = args.next().unwrap_or_else(|| "clt".into());
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);
    let th = Thresholds::default();
    for seed in 0..seeds {
        let start = Instant::now();
        let line = match what.as_str() {
            "clt" => [Some(-2.0), Some(0.3), Some(0.5), None]
                .iter()
                .map(|&h| {
                    let r = clt_terminal_test(&params(h, seed), &[8, 12, 16], 4000, &th).unwrap();
                    let ks: Vec<String> =
                        [8, 12, 16].iter().map(|n| format!("{:.3}", r.observation(&format!("ks_n{n}")).unwrap())).collect();
                    format!("[{} {}]", ks.join(" "), if r.pass { "pass" } else { "fail" })
                })
                .collect::<Vec<_>>()
                .join(" "),
            "small-h" => [SmallHSource::Simulated, SmallHSource::LimitLaw]
                .iter()
                .map(|&src| {
                    let r = clt_small_h_test(2, &[0.8, 0.65, 0.55, 0.51], 16, 4000, seed, src, &th).unwrap();
                    format!("{src:?} D={:.3?} pass={}", r.ks, r.pass)
                })
                .collect::<Vec<_>>()
                .join("; "),
            "increments" => {
                let p = params(Some(0.3), seed);
                let r = increments_gaussianity(&p, 4, 16, 4000, &th).unwrap();
                let control = increments_gaussianity(&p, 4, 6, 4000, &th).unwrap();
                format!(
                    "var z {:.2} cov z {:.2} pass={} | covariance error {:.4}, at n=6 {:.4}",
                    r.check_named("max_variance_z").unwrap().value,
                    r.check_named("max_covariance_z").unwrap().value,
                    r.pass,
                    r.observation("max_covariance_error").unwrap(),
                    control.observation("max_covariance_error").unwrap()
                )
            }
            "residual" => {
                let r = residual_clt_test(&params(Some(0.7), seed), &[1, 2, 4], 12, 4000, &th).unwrap();
                let ks: Vec<f64> = [1, 2, 4].iter().map(|n| r.observation(&format!("ks_n{n}")).unwrap()).collect();
                format!("D={ks:.4?} pass={}", r.pass)
            }
            "fractal" => [0.7, 0.95]
                .iter()
                .map(|&h| {
                    let p = params(Some(h), seed);
                    let path = build_path(&generate_leaf_signs(&p, 18).unwrap(), &p).unwrap();
                    let dim = box_dimension(&path, (4, 12)).unwrap().estimate;
                    let inc = increment_scaling_exponent(&path, (4, 12)).unwrap().estimate;
                    let prof = holder_profile(&path, 64, (4, 12)).unwrap();
                    let inside = prof.estimates.iter().filter(|e| (*e - h).abs() <= 0.1).count();
                    format!("H={h}: dim {dim:.3} inc {inc:.3} inside {inside}/64 spread {:.3}", prof.spread)
                })
                .collect::<Vec<_>>()
                .join("; "),
            "density" => [0.7, 0.95]
                .iter()
                .map(|&h| {
                    let p = params(Some(h), seed);
                    let d = density_of_z(&p, &DensitySpec::default()).unwrap();
                    let z = sample_terminal(&p, 16, 100_000).unwrap();
                    let fit = decay_fit(&p, None, d.depth).unwrap();
                    format!(
                        "H={h}: KS {:.4}, mass-1 {:.1e}, rho {:.3} (R² {:.4})",
                        ks_statistic(&z, |x| d.cdf_at(x)),
                        d.mass - 1.0,
                        fit.rho,
                        fit.fit.r_squared
                    )
                })
                .collect::<Vec<_>>()
                .join("; "),
            other => {
                eprintln!("unknown sweep `{other}`");
                std::process::exit(2);
            }
        };
        println!("seed {seed}: {line} ({:.1} s)", start.elapsed().as_secs_f64());
    }
}
