//! Monte-Carlo checks of the distributional limits.
//!
//! Every check draws replicas from [`ReplicaSampler`], so a report is a
//! pure function of `(params, depths, reps)`. Replica `r` at depth `n` is a
//! prefix of replica `r` at any deeper level, which lets one pass serve
//! several depths.

mod ks;
mod report;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use ks::{ks_critical_1pct, ks_normal, ks_sorted, ks_statistic, normal_cdf};
pub use report::{Check, Observation, StatReport};

use report::Timer;

use crate::cascade::{check_budget, normalization_divisor, CascadeParams, Hurst, Regime, ReplicaSampler, DEFAULT_LEAF_BUDGET};
use crate::charfn::{density_of_z, DensitySpec};
use crate::error::{Error, Result};
use crate::moments::{normalized_moment_recursion, residual_sigma, second_moment_closed_form, second_moment_fixed_point, sigma, z_moment_recursion};

/// Acceptance thresholds; the defaults come from pilot runs.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct Thresholds {
    /// KS bound at the deepest level for `H < 1/2` and the symmetric case.
    pub ks_diffusive: f64,
    /// KS bound at the deepest level for `H = 1/2`.
    pub ks_critical: f64,
    /// KS bound for the residual CLT at the deepest level.
    pub ks_residual: f64,
    /// Width of moment bands in standard errors.
    pub z_band: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            ks_diffusive: 0.05,
            ks_critical: 0.08,
            ks_residual: 0.05,
            z_band: 4.0,
        }
    }
}

/// Sample mean of `x^q`, its standard error and the z-score against
/// `target`. A zero standard error gives `z = 0` on exact agreement and
/// `+∞` otherwise.
pub fn moment_z_score(samples: &[f64], q: u32, target: f64) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let powers: Vec<f64> = samples.iter().map(|x| libm::pow(*x, f64::from(q))).collect();
    let mean = powers.iter().sum::<f64>() / n;
    let var = powers.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let se = libm::sqrt(var / n);
    let gap = mean - target;
    let z = if se > 0.0 {
        gap / se
    } else if gap.abs() <= 1e-12 * target.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY
    };
    (mean, se, z)
}

/// Largest step up along a sequence; `<= 0` means non-increasing.
fn largest_rise(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Per-level sums `S_l = Σ boldε` of replica `r` for `l = 0..=depth`.
fn level_sums(sampler: &ReplicaSampler, r: u64) -> Vec<i64> {
    let mut sums = vec![0i64; sampler.depth() as usize + 1];
    sampler.run(r, |level, bits| sums[level as usize] = bits.sum_in(0, bits.len()));
    sums
}

fn sorted_depths(ns: &[u32]) -> Result<Vec<u32>> {
    if ns.is_empty() {
        return Err(Error::InvalidArgument("at least one depth is required".into()));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("depths must be strictly increasing".into()));
    }
    Ok(ns.to_vec())
}

fn require_reps(reps: u64) -> Result<()> {
    if reps < 2 {
        return Err(Error::InvalidArgument("at least two replicas are required".into()));
    }
    Ok(())
}

/// KS distance of `X_n(1)` against `N(0,1)` at each depth in `ns`, with the
/// first four sample moments banded against the normalised recursion at the
/// deepest level.
///
/// Checks: `ks_final`, `ks_trend` (largest rise of `D` along `ns`, must be
/// `<= 0`) and `moment_z_q` for `q = 1..=4`.
pub fn clt_terminal_test(params: &CascadeParams, ns: &[u32], reps: u64, thresholds: &Thresholds) -> Result<StatReport> {
    params.require_diffusive()?;
    require_reps(reps)?;
    let ns = sorted_depths(ns)?;
    let critical = params.regime() == Regime::Critical;
    if critical && ns[0] == 0 {
        return Err(Error::ZeroDepthNormalization);
    }
    let timer = Timer::start();
    let deepest = *ns.last().expect("non-empty");
    check_budget(params, deepest, reps, DEFAULT_LEAF_BUDGET)?;
    let sampler = ReplicaSampler::new(params, deepest)?;
    let factors = ns
        .iter()
        .map(|&n| Ok(params.increment_scale(n) / normalization_divisor(params, n)?))
        .collect::<Result<Vec<f64>>>()?;
    let draws = sampler.map(reps, |s, r| {
        let sums = level_sums(s, r);
        ns.iter().zip(&factors).map(|(&n, f)| sums[n as usize] as f64 * f).collect::<Vec<f64>>()
    });
    let table = normalized_moment_recursion(params, deepest, 4)?;

    let mut report = StatReport::new("clt_terminal", params, ns.clone(), reps);
    let mut ks = Vec::with_capacity(ns.len());
    for (i, &n) in ns.iter().enumerate() {
        let samples: Vec<f64> = draws.iter().map(|d| d[i]).collect();
        let d = ks_normal(&samples);
        report.observe(format!("ks_n{n}"), d);
        ks.push(d);
        if n == deepest {
            for q in 1..=4 {
                let target = table.value(n, q).expect("table covers the deepest level");
                let (mean, se, z) = moment_z_score(&samples, q, target);
                report.observe(format!("moment_q{q}_sample"), mean);
                report.observe(format!("moment_q{q}_exact"), target);
                report.observe(format!("moment_q{q}_se"), se);
                report.check(format!("moment_z_q{q}"), z.abs(), thresholds.z_band);
            }
        }
    }
    let bound = if critical { thresholds.ks_critical } else { thresholds.ks_diffusive };
    report.check("ks_final", *ks.last().expect("non-empty"), bound);
    if ks.len() > 1 {
        report.check("ks_trend", largest_rise(&ks), 0.0);
    }
    timer.finish(&mut report);
    Ok(report)
}

/// Where the samples of [`clt_small_h_test`] come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SmallHSource {
    /// `Z_n` from the cascade at the given depth.
    Simulated,
    /// The limit `Z` itself, by inverse CDF from the inverted density.
    LimitLaw,
}

/// Per-`H` reports of [`clt_small_h_test`] and the trend check across them.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmallHReport {
    pub source: SmallHSource,
    pub hursts: Vec<f64>,
    pub ks: Vec<f64>,
    pub per_h: Vec<StatReport>,
    /// Largest rise of `D` along the sequence; must be `<= 0`.
    pub trend: Check,
    pub pass: bool,
}

/// Smallest `n` with `E(Z_n²)` within `rel` of its limit.
pub fn depth_for_second_moment(params: &CascadeParams, rel: f64) -> Result<u32> {
    let limit = second_moment_fixed_point(params)?;
    (0..=1 << 16)
        .find(|&n| (second_moment_closed_form(params, n) - limit).abs() <= rel * limit)
        .ok_or_else(|| Error::InsufficientData("second moment does not settle".into()))
}

/// `σ_H^{-1}·Z_n` (for `b = 2`, `√(2 - 2^{2-2H})·Z_n`) against `N(0,1)` along
/// a sequence of `H` decreasing to `1/2`.
///
/// Per `H`: `mean_z` bands the sample mean against `σ_H^{-1}`,
/// `second_moment_z` bands the second moment against 1. Across: `D` must
/// decrease along the sequence.
pub fn clt_small_h_test(
    base: u32,
    hursts: &[f64],
    n: u32,
    reps: u64,
    seed: u64,
    source: SmallHSource,
    thresholds: &Thresholds,
) -> Result<SmallHReport> {
    require_reps(reps)?;
    if hursts.is_empty() {
        return Err(Error::InvalidArgument("at least one H is required".into()));
    }
    let mut per_h = Vec::with_capacity(hursts.len());
    let mut ks = Vec::with_capacity(hursts.len());
    for &h in hursts {
        let timer = Timer::start();
        let params = CascadeParams::new(base, Hurst::Finite(h), seed)?;
        params.require(Regime::Convergent)?;
        let inv_sigma = 1.0 / sigma(&params);
        let raw = match source {
            SmallHSource::Simulated => {
                check_budget(&params, n, reps, DEFAULT_LEAF_BUDGET)?;
                let sampler = ReplicaSampler::new(&params, n)?;
                sampler.map(reps, |s, r| s.terminal(r))
            }
            SmallHSource::LimitLaw => {
                let density = density_of_z(&params, &DensitySpec::default())?;
                density.sample(seed, 0, reps as usize)
            }
        };
        let samples: Vec<f64> = raw.iter().map(|z| z * inv_sigma).collect();
        let depths = match source {
            SmallHSource::Simulated => vec![n],
            SmallHSource::LimitLaw => Vec::new(),
        };
        let mut report = StatReport::new("clt_small_h", &params, depths, reps);
        let d = ks_normal(&samples);
        report.observe("ks", d);
        report.observe("sigma_h", sigma(&params));
        if source == SmallHSource::Simulated {
            let exact = second_moment_closed_form(&params, n) * inv_sigma * inv_sigma;
            report.observe("second_moment_exact_at_n", exact);
        }
        report.observe("depth_for_0.1pct_second_moment", f64::from(depth_for_second_moment(&params, 1e-3)?));
        let (mean, se, z) = moment_z_score(&samples, 1, inv_sigma);
        report.observe("mean_sample", mean);
        report.observe("mean_se", se);
        report.check("mean_z", z.abs(), thresholds.z_band);
        let (m2, se2, z2) = moment_z_score(&samples, 2, 1.0);
        report.observe("second_moment_sample", m2);
        report.observe("second_moment_se", se2);
        report.check("second_moment_z", z2.abs(), thresholds.z_band);
        timer.finish(&mut report);
        ks.push(d);
        per_h.push(report);
    }
    let rise = largest_rise(&ks);
    let trend = Check {
        name: "ks_trend_along_h".into(),
        value: if ks.len() > 1 { rise } else { 0.0 },
        threshold: 0.0,
        pass: ks.len() < 2 || rise <= 0.0,
    };
    let pass = trend.pass && per_h.iter().all(|r| r.pass);
    Ok(SmallHReport {
        source,
        hursts: hursts.to_vec(),
        ks,
        per_h,
        trend,
        pass,
    })
}

/// Largest number of generation-`p` cells [`increments_gaussianity`] tracks.
pub const MAX_INCREMENT_CELLS: u64 = 1024;

/// Joint law of the `b^p` generation-`p` increments of `X_n`.
///
/// Checks `max_variance_z` (each variance against `b^{-p}`) and
/// `max_covariance_z` (each off-diagonal covariance against 0), both in
/// standard errors. The largest per-cell KS distance against `N(0, b^{-p})`
/// and the largest absolute covariance error are observations.
pub fn increments_gaussianity(params: &CascadeParams, p: u32, n: u32, reps: u64, thresholds: &Thresholds) -> Result<StatReport> {
    params.require_diffusive()?;
    require_reps(reps)?;
    if p >= n || p > 6 {
        return Err(Error::InvalidArgument(format!("need p <= 6 and p < n, got p={p} n={n}")));
    }
    let cells = params.cell_count(p)?;
    if cells > MAX_INCREMENT_CELLS {
        return Err(Error::Capacity {
            what: "increment cells",
            requested: u128::from(cells),
            budget: u128::from(MAX_INCREMENT_CELLS),
        });
    }
    check_budget(params, n, reps, DEFAULT_LEAF_BUDGET)?;
    let timer = Timer::start();
    let sampler = ReplicaSampler::new(params, n)?;
    let sub = params.cell_count(n - p)?;
    let factor = params.increment_scale(n) / normalization_divisor(params, n)?;
    let rows = sampler.map(reps, |s, r| {
        let leaves = s.leaves(r);
        (0..cells)
            .map(|c| leaves.sum_in(c * sub, (c + 1) * sub) as f64 * factor)
            .collect::<Vec<f64>>()
    });

    let k = cells as usize;
    let nf = reps as f64;
    let mut mean = vec![0.0; k];
    for row in &rows {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x / nf;
        }
    }
    let target = 1.0 / cells as f64;
    let (mut max_var_z, mut max_cov_z, mut max_err) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..k {
        for j in i..k {
            // Centred products; their spread gives the standard error.
            let prods: Vec<f64> = rows.iter().map(|row| (row[i] - mean[i]) * (row[j] - mean[j])).collect();
            let cov = prods.iter().sum::<f64>() / (nf - 1.0);
            let m = prods.iter().sum::<f64>() / nf;
            let var = prods.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (nf - 1.0);
            let se = libm::sqrt(var / nf);
            let expected = if i == j { target } else { 0.0 };
            let z = if se > 0.0 { (cov - expected).abs() / se } else { f64::INFINITY };
            max_err = max_err.max((cov - expected).abs());
            if i == j {
                max_var_z = max_var_z.max(z);
            } else {
                max_cov_z = max_cov_z.max(z);
            }
        }
    }
    let sd = libm::sqrt(target);
    let max_ks = (0..k)
        .map(|i| {
            let col: Vec<f64> = rows.iter().map(|row| row[i] / sd).collect();
            ks_normal(&col)
        })
        .fold(0.0, f64::max);

    let mut report = StatReport::new("increments_gaussianity", params, vec![n], reps);
    report.observe("p", f64::from(p));
    report.observe("cells", cells as f64);
    report.observe("max_covariance_error", max_err);
    report.observe("max_cell_ks", max_ks);
    report.check("max_variance_z", max_var_z, thresholds.z_band);
    if k > 1 {
        report.check("max_covariance_z", max_cov_z, thresholds.z_band);
    }
    timer.finish(&mut report);
    Ok(report)
}

/// Residual CLT for `H > 1/2`: `(B - B_n)(1) / (σ·b^{n(1/2-H)})` with `B`
/// proxied by `B_{n+m}`, `σ² = E(Z²) - 1`.
///
/// Checks `ks_final`, `ks_trend` along `ns`, and `mean_z` (mean 0) at the
/// deepest `n`.
pub fn residual_clt_test(params: &CascadeParams, ns: &[u32], m: u32, reps: u64, thresholds: &Thresholds) -> Result<StatReport> {
    params.require(Regime::Convergent)?;
    require_reps(reps)?;
    if m < 12 {
        return Err(Error::InvalidArgument(format!("the limit proxy needs m >= 12, got {m}")));
    }
    let ns = sorted_depths(ns)?;
    let h = params.hurst().finite().expect("convergent");
    let res_sigma = residual_sigma(params)?;
    if res_sigma == 0.0 {
        return Err(Error::InvalidArgument("H = 1 has no residual fluctuations".into()));
    }
    let deepest = ns.last().expect("non-empty") + m;
    check_budget(params, deepest, reps, DEFAULT_LEAF_BUDGET)?;
    let timer = Timer::start();
    let sampler = ReplicaSampler::new(params, deepest)?;
    let b = f64::from(params.base());
    let draws = sampler.map(reps, |s, r| {
        let sums = level_sums(s, r);
        ns.iter()
            .map(|&n| {
                let fine = params.increment_scale(n + m) * sums[(n + m) as usize] as f64;
                let coarse = params.increment_scale(n) * sums[n as usize] as f64;
                (fine - coarse) / (res_sigma * libm::pow(b, f64::from(n) * (0.5 - h)))
            })
            .collect::<Vec<f64>>()
    });
    let mut report = StatReport::new("residual_clt", params, ns.clone(), reps);
    report.observe("m", f64::from(m));
    report.observe("residual_sigma", res_sigma);
    let mut ks = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let samples: Vec<f64> = draws.iter().map(|d| d[i]).collect();
        let d = ks_normal(&samples);
        report.observe(format!("ks_n{n}"), d);
        ks.push(d);
        if i + 1 == ns.len() {
            let (mean, se, z) = moment_z_score(&samples, 1, 0.0);
            report.observe("mean_sample", mean);
            report.observe("mean_se", se);
            report.check("mean_z", z.abs(), thresholds.z_band);
            let (m2, _, _) = moment_z_score(&samples, 2, 1.0);
            report.observe("second_moment_sample", m2);
        }
    }
    report.check("ks_final", *ks.last().expect("non-empty"), thresholds.ks_residual);
    if ks.len() > 1 {
        report.check("ks_trend", largest_rise(&ks), 0.0);
    }
    timer.finish(&mut report);
    Ok(report)
}

/// Sample moments of `Z_n` against the exact table, one `moment_z_q` check
/// per order.
pub fn empirical_vs_exact_moments(params: &CascadeParams, n: u32, reps: u64, q_max: u32, thresholds: &Thresholds) -> Result<StatReport> {
    require_reps(reps)?;
    let table = z_moment_recursion(params, n, q_max)?;
    check_budget(params, n, reps, DEFAULT_LEAF_BUDGET)?;
    let timer = Timer::start();
    let sampler = ReplicaSampler::new(params, n)?;
    let samples = sampler.map(reps, |s, r| s.terminal(r));
    let mut report = StatReport::new("empirical_vs_exact_moments", params, vec![n], reps);
    for q in 1..=q_max {
        let target = table.value(n, q).expect("table covers n");
        let (mean, se, z) = moment_z_score(&samples, q, target);
        report.observe(format!("moment_q{q}_sample"), mean);
        report.observe(format!("moment_q{q}_exact"), target);
        report.observe(format!("moment_q{q}_se"), se);
        report.check(format!("moment_z_q{q}"), z.abs(), thresholds.z_band);
    }
    timer.finish(&mut report);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th() -> Thresholds {
        Thresholds::default()
    }

    #[test]
    fn z_scores() {
        let (mean, se, z) = moment_z_score(&[1.0, 1.0, 1.0], 2, 1.0);
        assert_eq!((mean, se, z), (1.0, 0.0, 0.0));
        assert_eq!(moment_z_score(&[1.0, 1.0], 1, 2.0).2, f64::INFINITY);
        let (mean, se, _) = moment_z_score(&[-1.0, 1.0], 1, 0.0);
        assert_eq!(mean, 0.0);
        assert!((se - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_cascade_is_exact() {
        let p = CascadeParams::finite(2, 1.0, 5).unwrap();
        let report = empirical_vs_exact_moments(&p, 6, 50, 4, &th()).unwrap();
        assert!(report.pass);
        assert!(report.checks.iter().all(|c| c.value == 0.0));
    }

    #[test]
    fn reports_are_deterministic() {
        let p = CascadeParams::finite(2, 0.3, 11).unwrap();
        let mut a = clt_terminal_test(&p, &[4, 6], 300, &th()).unwrap();
        let mut b = clt_terminal_test(&p, &[4, 6], 300, &th()).unwrap();
        a.runtime_seconds = None;
        b.runtime_seconds = None;
        assert_eq!(a, b);
    }

    #[test]
    fn regime_guards() {
        let p = CascadeParams::finite(2, 0.7, 0).unwrap();
        assert!(clt_terminal_test(&p, &[4], 10, &th()).is_err());
        assert!(increments_gaussianity(&p, 2, 6, 10, &th()).is_err());
        let q = CascadeParams::finite(2, 0.3, 0).unwrap();
        assert!(residual_clt_test(&q, &[2], 12, 10, &th()).is_err());
        assert!(residual_clt_test(&p, &[2], 4, 10, &th()).is_err());
        let c = CascadeParams::finite(2, 0.5, 0).unwrap();
        assert_eq!(clt_terminal_test(&c, &[0, 2], 10, &th()), Err(Error::ZeroDepthNormalization));
        assert!(clt_terminal_test(&q, &[6, 4], 10, &th()).is_err());
    }

    #[test]
    fn depth_rule() {
        let p = CascadeParams::finite(2, 0.55, 0).unwrap();
        let n = depth_for_second_moment(&p, 1e-3).unwrap();
        assert!(n > 90 && n < 110, "{n}");
    }

    #[test]
    fn residual_levels_are_consistent() {
        let p = CascadeParams::finite(2, 0.8, 3).unwrap();
        let report = residual_clt_test(&p, &[2, 3], 12, 200, &th()).unwrap();
        assert!(report.observation("ks_n2").is_some());
        assert!(report.check_named("mean_z").is_some());
    }
}
