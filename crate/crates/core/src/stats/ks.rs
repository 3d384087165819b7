use alloc::vec::Vec;

/// Standard normal CDF through `erfc`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// `sup_x |F_N(x) - F(x)|` of the empirical CDF of `samples` against a
/// continuous `reference`. Zero for an empty sample.
pub fn ks_statistic(samples: &[f64], reference: impl Fn(f64) -> f64) -> f64 {
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    ks_sorted(&sorted, reference)
}

/// [`ks_statistic`] for an already sorted sample.
pub fn ks_sorted(sorted: &[f64], reference: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = reference(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// [`ks_statistic`] against `N(0, 1)`.
pub fn ks_normal(samples: &[f64]) -> f64 {
    ks_statistic(samples, normal_cdf)
}

/// Asymptotic 1% critical value `1.63/√N`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / libm::sqrt(n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        // mpmath: ncdf(1), ncdf(-3), ncdf(0.5)
        let cases = [
            (0.0, 0.5),
            (1.0, 0.841344746068542948),
            (-3.0, 0.00134989803163009452),
            (0.5, 0.691462461274013104),
            (-8.0, 6.22096057427178e-16),
        ];
        for (x, want) in cases {
            assert!((normal_cdf(x) - want).abs() <= 1e-15_f64.max(1e-12 * want), "x={x}");
        }
    }

    #[test]
    fn degenerate_samples() {
        assert_eq!(ks_normal(&[0.0]), 0.5);
        assert!(ks_normal(&[2.0; 50]) >= 0.5);
        assert!(ks_normal(&[-1.0; 50]) >= 0.5);
        assert_eq!(ks_normal(&[]), 0.0);
    }

    #[test]
    fn exact_quantiles_are_close() {
        // Midpoint quantiles give D = 1/(2N) exactly for a continuous F.
        let n = 200;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) / n as f64;
                // invert by bisection
                let (mut lo, mut hi) = (-10.0, 10.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if normal_cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        assert!((ks_normal(&samples) - 0.5 / n as f64).abs() < 1e-12);
    }
}
