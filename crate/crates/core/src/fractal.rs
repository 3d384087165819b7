//! Scaling estimators on a stored path: increment exponent, box-counting
//! dimension of the graph and pointwise Hölder exponents.
//!
//! Logarithms are taken in base `b`, so for the cascade the slopes are
//! `-H` (increments, oscillations) and `2 - H` (box counts).

use alloc::vec::Vec;

use crate::cascade::SamplePath;
use crate::error::{Error, Result};
use crate::regression::LinearFit;

/// Fewest scales a fit accepts.
pub const MIN_SCALES: usize = 4;

/// Regression of a per-scale log quantity against the scale index `j`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DimensionFit {
    pub scales: Vec<u32>,
    /// `log_b` of the count or mean increment per scale.
    pub log_values: Vec<f64>,
    pub fit: LinearFit,
    pub estimate: f64,
    /// Zero increments left out of the logs.
    pub excluded: u64,
}

fn scales(range: (u32, u32)) -> Result<Vec<u32>> {
    let (lo, hi) = range;
    if hi < lo || ((hi - lo + 1) as usize) < MIN_SCALES {
        return Err(Error::InsufficientData(alloc::format!(
            "scale range {lo}..={hi} has fewer than {MIN_SCALES} scales"
        )));
    }
    Ok((lo..=hi).collect())
}

/// Grid steps per generation-`j` cell, if the path resolves it.
fn steps_per_cell(path: &SamplePath, j: u32) -> Option<usize> {
    let cells = path.params().cell_count(j).ok()?;
    let segments = path.segments();
    (segments % cells == 0 && segments >= cells).then(|| (segments / cells) as usize)
}

fn log_b(x: f64, b: f64) -> f64 {
    libm::log(x) / libm::log(b)
}

fn finish(scales: Vec<u32>, log_values: Vec<f64>, excluded: u64, transform: impl Fn(f64) -> f64) -> Result<DimensionFit> {
    let xs: Vec<f64> = scales.iter().map(|&j| f64::from(j)).collect();
    let fit = LinearFit::fit(&xs, &log_values)?;
    if !fit.slope.is_finite() {
        return Err(Error::InsufficientData("non-finite slope".into()));
    }
    Ok(DimensionFit {
        estimate: transform(fit.slope),
        scales,
        log_values,
        fit,
        excluded,
    })
}

/// `-slope` of the mean of `log_b|Δ_p|` over generation-`p` increments
/// against `p`.
///
/// `p_range` must lie in `[2, n - 6]`. Zero increments are excluded and
/// counted in [`DimensionFit::excluded`].
pub fn increment_scaling_exponent(path: &SamplePath, p_range: (u32, u32)) -> Result<DimensionFit> {
    let n = path.depth();
    if p_range.0 < 2 || p_range.1 + 6 > n {
        return Err(Error::InvalidArgument(alloc::format!(
            "p range {}..={} must lie in [2, {}]",
            p_range.0,
            p_range.1,
            n.saturating_sub(6)
        )));
    }
    let ps = scales(p_range)?;
    let b = f64::from(path.params().base());
    let values = path.values();
    let mut logs = Vec::with_capacity(ps.len());
    let mut excluded = 0u64;
    for &p in &ps {
        let step = steps_per_cell(path, p).ok_or(Error::InvalidArgument(alloc::format!(
            "path is too coarse for generation {p}"
        )))?;
        let (mut sum, mut count) = (0.0, 0u64);
        for k in (0..values.len() - 1).step_by(step) {
            let d = (values[k + step] - values[k]).abs();
            if d == 0.0 {
                excluded += 1;
            } else {
                sum += log_b(d, b);
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::InsufficientData(alloc::format!("all generation-{p} increments vanish")));
        }
        logs.push(sum / count as f64);
    }
    finish(ps, logs, excluded, |s| -s)
}

/// Number of side-`b^{-j}` boxes met by the graph: per column, from the
/// box holding the minimum to the box holding the maximum.
pub fn box_count(path: &SamplePath, j: u32) -> Result<u64> {
    let step = steps_per_cell(path, j).ok_or(Error::InvalidArgument(alloc::format!(
        "path is too coarse for boxes of generation {j}"
    )))?;
    let side = libm::pow(f64::from(path.params().base()), -f64::from(j));
    let values = path.values();
    let mut total = 0u64;
    for start in (0..values.len() - 1).step_by(step) {
        let window = &values[start..=start + step];
        let (lo, hi) = window
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        total += (libm::floor(hi / side) - libm::floor(lo / side)) as u64 + 1;
    }
    Ok(total)
}

/// Slope of `log_b N_j` against `j`; needs `n >= j_max + 2`.
pub fn box_dimension(path: &SamplePath, j_range: (u32, u32)) -> Result<DimensionFit> {
    if j_range.1 + 2 > path.depth() {
        return Err(Error::InvalidArgument(alloc::format!(
            "j_max = {} is within two levels of the path depth {}",
            j_range.1,
            path.depth()
        )));
    }
    let js = scales(j_range)?;
    let b = f64::from(path.params().base());
    let logs = js
        .iter()
        .map(|&j| box_count(path, j).map(|c| log_b(c as f64, b)))
        .collect::<Result<Vec<f64>>>()?;
    finish(js, logs, 0, |s| s)
}

/// `sup - inf` of the path over `[t - r, t + r] ∩ [0, 1]`; the window ends
/// are interpolated, the interior is exact on grid points.
pub fn oscillation(path: &SamplePath, t: f64, r: f64) -> Result<f64> {
    let lo_t = (t - r).max(0.0);
    let hi_t = (t + r).min(1.0);
    let segments = path.segments() as f64;
    let first = libm::ceil(lo_t * segments) as usize;
    let last = (libm::floor(hi_t * segments) as usize).min(path.values().len() - 1);
    let mut lo = path.evaluate(lo_t)?;
    let mut hi = lo;
    let end = path.evaluate(hi_t)?;
    lo = lo.min(end);
    hi = hi.max(end);
    if first <= last {
        for &v in &path.values()[first..=last] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Ok(hi - lo)
}

/// Pointwise Hölder exponent at `t`: `-slope` of `log_b osc_j(t)` against
/// `j`, with windows of radius `b^{-j}`.
pub fn pointwise_holder(path: &SamplePath, t: f64, j_range: (u32, u32)) -> Result<DimensionFit> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::OutOfDomain(t));
    }
    if j_range.1 + 2 > path.depth() {
        return Err(Error::InvalidArgument(alloc::format!(
            "j_max = {} is within two levels of the path depth {}",
            j_range.1,
            path.depth()
        )));
    }
    let js = scales(j_range)?;
    let b = f64::from(path.params().base());
    let mut logs = Vec::with_capacity(js.len());
    for &j in &js {
        let osc = oscillation(path, t, libm::pow(b, -f64::from(j)))?;
        if osc == 0.0 {
            return Err(Error::InsufficientData(alloc::format!("flat window at t = {t}, j = {j}")));
        }
        logs.push(log_b(osc, b));
    }
    finish(js, logs, 0, |s| -s)
}

/// Pointwise exponents at `t_i = (i + 1/2)/count`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HolderProfile {
    pub t: Vec<f64>,
    pub estimates: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation of the estimates.
    pub spread: f64,
}

pub fn holder_profile(path: &SamplePath, count: usize, j_range: (u32, u32)) -> Result<HolderProfile> {
    if count < 2 {
        return Err(Error::InvalidArgument("a profile needs two points".into()));
    }
    let t: Vec<f64> = (0..count).map(|i| (i as f64 + 0.5) / count as f64).collect();
    let estimates = t
        .iter()
        .map(|&ti| pointwise_holder(path, ti, j_range).map(|f| f.estimate))
        .collect::<Result<Vec<f64>>>()?;
    let n = count as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let spread = libm::sqrt(estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0));
    let mut sorted = estimates.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if count % 2 == 0 {
        0.5 * (sorted[count / 2 - 1] + sorted[count / 2])
    } else {
        sorted[count / 2]
    };
    Ok(HolderProfile {
        t,
        estimates,
        mean,
        median,
        spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{build_path, generate_leaf_signs, CascadeParams, PathKind};

    fn line(depth: u32) -> SamplePath {
        let p = CascadeParams::finite(2, 1.0, 0).unwrap();
        build_path(&generate_leaf_signs(&p, depth).unwrap(), &p).unwrap()
    }

    #[test]
    fn line_estimates() {
        let path = line(14);
        let inc = increment_scaling_exponent(&path, (2, 8)).unwrap();
        assert!((inc.fit.slope + 1.0).abs() < 1e-12);
        let dim = box_dimension(&path, (2, 10)).unwrap();
        assert!((dim.estimate - 1.0).abs() < 0.02, "{dim:?}");
        assert_eq!(box_count(&path, 3).unwrap(), 16);
        for t in [1.0 / 3.0, 0.5, 0.6] {
            let h = pointwise_holder(&path, t, (3, 10)).unwrap();
            assert!((h.estimate - 1.0).abs() < 0.02, "t={t}: {h:?}");
        }
    }

    #[test]
    fn affine_ramp() {
        let p = CascadeParams::finite(2, 1.0, 0).unwrap();
        let values: Vec<f64> = (0..=1024).map(|k| -0.5 * k as f64 / 1024.0).collect();
        let path = SamplePath::from_values(p, 10, 1, PathKind::Raw, values).unwrap();
        assert!((box_dimension(&path, (2, 7)).unwrap().estimate - 1.0).abs() < 0.02);
        assert!((pointwise_holder(&path, 0.4, (2, 7)).unwrap().estimate - 1.0).abs() < 0.02);
    }

    #[test]
    fn counts_are_monotone() {
        let p = CascadeParams::finite(2, 0.7, 9).unwrap();
        let path = build_path(&generate_leaf_signs(&p, 14).unwrap(), &p).unwrap();
        let counts: Vec<u64> = (1..=12).map(|j| box_count(&path, j).unwrap()).collect();
        assert!(counts.windows(2).all(|w| w[1] >= w[0]), "{counts:?}");
    }

    #[test]
    fn oscillation_window() {
        let path = line(6);
        assert!((oscillation(&path, 0.5, 0.25).unwrap() - 0.5).abs() < 1e-15);
        // Clipped at the boundary and off-grid ends.
        assert!((oscillation(&path, 0.05, 0.1).unwrap() - 0.15).abs() < 1e-15);
    }

    #[test]
    fn guards() {
        let path = line(10);
        assert!(increment_scaling_exponent(&path, (2, 5)).is_err());
        assert!(box_dimension(&path, (2, 9)).is_err());
        assert!(box_dimension(&path, (2, 4)).is_err());
        assert!(pointwise_holder(&path, 0.0, (2, 6)).is_err());
    }
}
