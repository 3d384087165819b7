use alloc::vec::Vec;

use super::field::LeafSignField;
use super::params::{CascadeParams, Regime};
use crate::error::{Error, Result};
use crate::moments::sigma;

/// What the values of a [`SamplePath`] represent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PathKind {
    /// `B_n`, or the unscaled walk `S` for the symmetric sentinel.
    Raw,
    /// `X_n`, the diffusively normalised path (`H ≤ 1/2`).
    NormalizedX,
    /// `B_n/σ_H` (`H > 1/2`).
    NormalizedTilde,
}

impl PathKind {
    pub fn name(self) -> &'static str {
        match self {
            PathKind::Raw => "raw",
            PathKind::NormalizedX => "normalized_x",
            PathKind::NormalizedTilde => "normalized_tilde",
        }
    }
}

/// A piecewise-linear path on (a decimation of) the `b`-adic grid of depth
/// `n`: `values[k]` is the value at `t = k·stride·b^{-n}`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplePath {
    params: CascadeParams,
    depth: u32,
    stride: u64,
    kind: PathKind,
    values: Vec<f64>,
}

/// Builds `B_n` on the full grid from the leaf signs.
///
/// The cumulative sums are kept as integers and scaled once, so the value
/// at `k·b^{-n}` is `b^{-nH}·S_k` up to one rounding.
pub fn build_path(signs: &LeafSignField, params: &CascadeParams) -> Result<SamplePath> {
    build_path_decimated(signs, params, 1)
}

/// Like [`build_path`] but keeps only every `stride`-th grid value.
/// `stride` must divide `b^n`.
pub fn build_path_decimated(
    signs: &LeafSignField,
    params: &CascadeParams,
    stride: u64,
) -> Result<SamplePath> {
    if signs.base() != params.base() {
        return Err(Error::InvalidArgument(alloc::format!(
            "field has base {}, parameters have base {}",
            signs.base(),
            params.base()
        )));
    }
    let cells = signs.len();
    if stride == 0 || cells % stride != 0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "stride {stride} does not divide {cells}"
        )));
    }
    let scale = params.increment_scale(signs.depth());
    let bits = signs.signs();
    let points = cells / stride;
    let mut values = Vec::with_capacity(points as usize + 1);
    let mut sum = 0i64;
    values.push(0.0);
    for k in 0..points {
        sum += bits.sum_in(k * stride, (k + 1) * stride);
        values.push(scale * sum as f64);
    }
    Ok(SamplePath {
        params: *params,
        depth: signs.depth(),
        stride,
        kind: PathKind::Raw,
        values,
    })
}

/// Smallest power of `b` that brings `b^depth` cells down to at most
/// `max_points` segments.
pub fn decimation_stride(base: u32, depth: u32, max_points: u64) -> u64 {
    let b = u64::from(base);
    let mut stride = 1u64;
    let mut remaining = depth;
    let max_points = max_points.max(1);
    while remaining > 0 && b.pow(remaining) > max_points {
        stride *= b;
        remaining -= 1;
    }
    stride
}

/// Divisor turning `B_n` into its normalised version.
///
/// * divergent: `σ·b^{n(1/2-H)}`;
/// * symmetric: `b^{n/2}` (the raw path is already the unscaled walk);
/// * critical: `σ√n`, undefined at `n = 0`;
/// * convergent: `σ_H`.
pub fn normalization_divisor(params: &CascadeParams, depth: u32) -> Result<f64> {
    let b = f64::from(params.base());
    let n = f64::from(depth);
    let s = sigma(params);
    Ok(match (params.regime(), params.hurst().finite()) {
        (Regime::Divergent, Some(h)) => s * libm::pow(b, n * (0.5 - h)),
        (Regime::Symmetric, _) => libm::pow(b, n / 2.0),
        (Regime::Critical, _) => {
            if depth == 0 {
                return Err(Error::ZeroDepthNormalization);
            }
            s * libm::sqrt(n)
        }
        _ => s,
    })
}

/// Applies the regime's normalisation to a raw path.
pub fn normalize_path(path: &SamplePath, params: &CascadeParams) -> Result<SamplePath> {
    if path.kind != PathKind::Raw {
        return Err(Error::InvalidArgument(alloc::format!(
            "path is already {}",
            path.kind.name()
        )));
    }
    let divisor = normalization_divisor(params, path.depth)?;
    let kind = if params.regime().is_diffusive() {
        PathKind::NormalizedX
    } else {
        PathKind::NormalizedTilde
    };
    Ok(SamplePath {
        params: *params,
        depth: path.depth,
        stride: path.stride,
        kind,
        values: path.values.iter().map(|v| v / divisor).collect(),
    })
}

impl SamplePath {
    /// A path from explicit grid values (first value must be 0).
    pub fn from_values(
        params: CascadeParams,
        depth: u32,
        stride: u64,
        kind: PathKind,
        values: Vec<f64>,
    ) -> Result<Self> {
        let cells = params.cell_count(depth)?;
        if stride == 0 || cells % stride != 0 || values.len() as u64 != cells / stride + 1 {
            return Err(Error::InvalidArgument(alloc::format!(
                "{} values do not fit depth {depth} with stride {stride}",
                values.len()
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidArgument("path must start at 0".into()));
        }
        Ok(Self {
            params,
            depth,
            stride,
            kind,
            values,
        })
    }

    pub fn params(&self) -> &CascadeParams {
        &self.params
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn stride(&self) -> u64 {
        self.stride
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of stored segments.
    pub fn segments(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    /// Abscissa of stored point `k`.
    pub fn t_at(&self, k: u64) -> f64 {
        k as f64 / self.segments() as f64
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("paths are never empty")
    }

    /// Piecewise-linear value at `t`; exact at stored grid points.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfDomain(t));
        }
        let segments = self.segments();
        let pos = t * segments as f64;
        let nearest = libm::round(pos);
        // Grid abscissae such as 1/3 are not representable; snap to them.
        if (pos - nearest).abs() <= 1e-9 {
            return Ok(self.values[nearest as usize]);
        }
        let k = (libm::floor(pos) as u64).min(segments - 1);
        let frac = pos - k as f64;
        let (a, b) = (self.values[k as usize], self.values[k as usize + 1]);
        Ok(a + frac * (b - a))
    }
}

/// Evaluates a path at `t`.
pub fn evaluate(path: &SamplePath, t: f64) -> Result<f64> {
    path.evaluate(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::generate_leaf_signs;

    fn finite(h: f64) -> CascadeParams {
        CascadeParams::finite(2, h, 17).unwrap()
    }

    #[test]
    fn identity_ramp_at_h_one() {
        let p = finite(1.0);
        let path = build_path(&generate_leaf_signs(&p, 8).unwrap(), &p).unwrap();
        for (k, &v) in path.values().iter().enumerate() {
            assert_eq!(v, k as f64 / 256.0);
        }
        assert!((path.evaluate(0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn two_cells_by_hand() {
        let p = finite(0.7);
        let field = LeafSignField::from_signs(2, &[1, -1]).unwrap();
        let path = build_path(&field, &p).unwrap();
        assert_eq!(path.values(), &[0.0, 2f64.powf(-0.7), 0.0]);
        assert_eq!(path.kind(), PathKind::Raw);
    }

    #[test]
    fn interpolation() {
        let p = finite(0.4);
        let path = build_path(&generate_leaf_signs(&p, 6).unwrap(), &p).unwrap();
        let v = path.values();
        assert_eq!(path.evaluate(5.0 / 64.0).unwrap(), v[5]);
        assert_eq!(path.evaluate(0.0).unwrap(), 0.0);
        assert_eq!(path.evaluate(1.0).unwrap(), v[64]);
        let mid = path.evaluate(11.5 / 64.0).unwrap();
        assert!((mid - (v[11] + v[12]) / 2.0).abs() < 1e-15);
        assert_eq!(path.evaluate(1.5), Err(Error::OutOfDomain(1.5)));
        assert!(path.evaluate(-0.1).is_err());

        // Base 3 grid points are not representable; they still hit stored values.
        let p3 = CascadeParams::finite(3, 0.6, 1).unwrap();
        let path = build_path(&generate_leaf_signs(&p3, 4).unwrap(), &p3).unwrap();
        assert_eq!(path.evaluate(1.0 / 3.0).unwrap(), path.values()[27]);
    }

    #[test]
    fn critical_normalisation() {
        let p = finite(0.5);
        let path = build_path(&generate_leaf_signs(&p, 4).unwrap(), &p).unwrap();
        let x = normalize_path(&path, &p).unwrap();
        let want = path.terminal() / ((1.0 / 2f64.sqrt()) * 2.0);
        assert!((x.terminal() - want).abs() < 1e-15);
        assert_eq!(x.kind(), PathKind::NormalizedX);
        assert!(normalize_path(&x, &p).is_err());
        assert_eq!(normalization_divisor(&p, 0), Err(Error::ZeroDepthNormalization));
    }

    #[test]
    fn divisors() {
        // sqrt(1 + 1/62) and (2 - 2^0.6)^{-1/2}, both from 30-digit evaluations.
        let d = normalization_divisor(&finite(-2.0), 8).unwrap();
        assert!((d / 2f64.powi(20) - 1.008_032_257_548_370_6).abs() < 1e-14);
        let d = normalization_divisor(&finite(0.7), 8).unwrap();
        assert!((d - 1.436_978_246_203_934_3).abs() < 1e-14);
        let s = CascadeParams::symmetric(2, 0).unwrap();
        assert_eq!(normalization_divisor(&s, 8).unwrap(), 16.0);
        let tilde = {
            let p = finite(0.7);
            let path = build_path(&generate_leaf_signs(&p, 3).unwrap(), &p).unwrap();
            normalize_path(&path, &p).unwrap()
        };
        assert_eq!(tilde.kind(), PathKind::NormalizedTilde);
    }

    #[test]
    fn symmetric_raw_path_is_the_walk() {
        let s = CascadeParams::symmetric(2, 9).unwrap();
        let field = generate_leaf_signs(&s, 10).unwrap();
        let path = build_path(&field, &s).unwrap();
        for w in path.values().windows(2) {
            assert_eq!((w[1] - w[0]).abs(), 1.0);
        }
    }

    #[test]
    fn decimation_keeps_grid_values() {
        let p = finite(0.8);
        let field = generate_leaf_signs(&p, 12).unwrap();
        let full = build_path(&field, &p).unwrap();
        let dec = build_path_decimated(&field, &p, 64).unwrap();
        assert_eq!(dec.segments(), 64);
        for (k, &v) in dec.values().iter().enumerate() {
            assert_eq!(v, full.values()[k * 64]);
        }
        assert!(build_path_decimated(&field, &p, 3).is_err());
        assert_eq!(decimation_stride(2, 27, 1 << 16), 1 << 11);
        assert_eq!(decimation_stride(2, 8, 1 << 16), 1);
        assert_eq!(decimation_stride(3, 4, 10), 9);
    }

    #[test]
    fn base_mismatch_is_rejected() {
        let field = LeafSignField::from_signs(2, &[1, 1]).unwrap();
        let p3 = CascadeParams::finite(3, 0.7, 0).unwrap();
        assert!(build_path(&field, &p3).is_err());
    }
}
