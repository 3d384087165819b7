//! Characteristic function of the limit `Z` (`H > 1/2`) and its density.
//!
//! `φ` solves `φ(t) = [p⁺ φ(b^{-H} t) + p⁻ φ(-b^{-H} t)]^b`. Starting from
//! `φ_0(t) = e^{it}` (`Z_0 = 1`), `φ_n` is the characteristic function of
//! `Z_n`. The iteration is carried on `u = φ - 1` so that small arguments,
//! which decide the moments, keep full relative precision.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::cascade::rng::{stream_rng, uniform, AUX_DOMAIN};
use crate::cascade::{CascadeParams, Regime};
use crate::error::{Error, Result};
use crate::moments::{second_moment_closed_form, second_moment_fixed_point};
use crate::regression::LinearFit;

/// Starting depth of the adaptive iteration.
pub const DEFAULT_DEPTH: u32 = 48;
/// Largest depth the adaptive iteration may reach.
pub const MAX_DEPTH: u32 = 1 << 14;
/// Max-norm gap between successive depths at which iteration stops.
pub const CAUCHY_TOLERANCE: f64 = 1e-10;
/// `|φ|` below which the Fourier tail is treated as zero.
pub const TAIL_TOLERANCE: f64 = 1e-12;
/// Largest cut-off tried when searching for a negligible tail.
pub const MAX_T: f64 = (1u64 << 20) as f64;
/// Fewest abscissae of a density grid.
pub const MIN_X_POINTS: usize = 4096;

fn pow_minus_one(y: Complex64, b: u32) -> Complex64 {
    // (1 + y)^b - 1 by the binomial expansion, without the leading 1.
    let mut acc = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    let mut binom = 1.0;
    for k in 1..=b {
        binom = binom * f64::from(b - k + 1) / f64::from(k);
        power *= y;
        acc += power * binom;
    }
    acc
}

fn base_case(s: f64) -> Complex64 {
    // e^{is} - 1
    let half = libm::sin(s / 2.0);
    Complex64::new(-2.0 * half * half, libm::sin(s))
}

/// Below this argument `φ_k(s) - 1 = is - s²E(Z_k²)/2` to full precision.
const LINEAR_ARGUMENT: f64 = 1e-30;

/// `(φ_n(t) - 1, φ_n(-t) - 1)`, each computed from its own ladder.
fn ladder(params: &CascadeParams, t: f64, depth: u32) -> (Complex64, Complex64) {
    let w = params.weight();
    let (p_plus, p_minus) = params.epsilon_probabilities();
    let b = params.base();
    // Climb from the top until the argument is small; deep ladders would
    // otherwise underflow to s = 0.
    let mut s = t;
    let mut start = depth;
    while start > 0 && s.abs() >= LINEAR_ARGUMENT {
        s *= w;
        start -= 1;
    }
    let (mut u, mut v) = if start == 0 {
        (base_case(s), base_case(-s))
    } else {
        let curvature = -0.5 * s * s * second_moment_closed_form(params, start);
        (Complex64::new(curvature, s), Complex64::new(curvature, -s))
    };
    for _ in start..depth {
        let nu = pow_minus_one(u * p_plus + v * p_minus, b);
        let nv = pow_minus_one(v * p_plus + u * p_minus, b);
        u = nu;
        v = nv;
    }
    (u, v)
}

/// `φ_n(t)` by iterating the functional equation `depth` times.
///
/// The arguments visited are `±b^{-kH} t`, `k = depth..0`; both signs are
/// carried so the cost is `O(depth)`.
pub fn charfn_at(params: &CascadeParams, t: f64, depth: u32) -> Result<Complex64> {
    params.require(Regime::Convergent)?;
    Ok(ladder(params, t, depth).0 + 1.0)
}

/// `|φ_{n+1}(t) - [p⁺ φ_n(wt) + p⁻ φ_n(-wt)]^b|`, which vanishes up to
/// rounding by construction.
pub fn functional_equation_residual(params: &CascadeParams, t: f64, depth: u32) -> Result<f64> {
    params.require(Regime::Convergent)?;
    let next = ladder(params, t, depth + 1).0 + 1.0;
    let (u, v) = ladder(params, params.weight() * t, depth);
    let (p_plus, p_minus) = params.epsilon_probabilities();
    let inner = (u + 1.0) * p_plus + (v + 1.0) * p_minus;
    Ok((next - inner.powu(params.base())).norm())
}

fn map_points<T: Send>(points: &[f64], f: impl Fn(f64) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        points.par_iter().map(|&t| f(t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        points.iter().map(|&t| f(t)).collect()
    }
}

/// `φ_n` on the symmetric grid `t_k = k·Δt`, `k = -K..=K`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharFnGrid {
    params: CascadeParams,
    dt: f64,
    depth: u32,
    t: Vec<f64>,
    values: Vec<Complex64>,
    /// `φ - 1`, kept for precision near the origin.
    offsets: Vec<Complex64>,
}

impl CharFnGrid {
    /// Grid with `2K + 1` points, `K = ceil(t_max/Δt)`, at a fixed depth.
    pub fn build(params: &CascadeParams, t_max: f64, dt: f64, depth: u32) -> Result<Self> {
        params.require(Regime::Convergent)?;
        if !(dt > 0.0 && t_max >= 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "need dt > 0 and finite t_max >= 0, got dt={dt} t_max={t_max}"
            )));
        }
        let k = libm::ceil(t_max / dt) as i64;
        let t: Vec<f64> = (-k..=k).map(|i| i as f64 * dt).collect();
        let offsets = map_points(&t, |s| ladder(params, s, depth).0);
        let values = offsets.iter().map(|u| u + 1.0).collect();
        Ok(Self {
            params: *params,
            dt,
            depth,
            t,
            values,
            offsets,
        })
    }

    /// Doubles the depth from [`DEFAULT_DEPTH`] until two successive grids
    /// differ by less than [`CAUCHY_TOLERANCE`] in max-norm.
    pub fn adaptive(params: &CascadeParams, t_max: f64, dt: f64) -> Result<Self> {
        let mut depth = DEFAULT_DEPTH;
        let mut grid = Self::build(params, t_max, dt, depth)?;
        loop {
            if depth >= MAX_DEPTH {
                return Err(Error::InsufficientData(alloc::format!(
                    "characteristic function iteration did not settle by depth {depth}"
                )));
            }
            depth *= 2;
            let next = Self::build(params, t_max, dt, depth)?;
            let gap = grid
                .offsets
                .iter()
                .zip(&next.offsets)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            grid = next;
            if gap < CAUCHY_TOLERANCE {
                return Ok(grid);
            }
        }
    }

    pub fn params(&self) -> &CascadeParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn t_max(&self) -> f64 {
        *self.t.last().expect("grid is non-empty")
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Largest `|φ(t)| - 1` over the grid (positive only through rounding).
    pub fn max_modulus_excess(&self) -> f64 {
        self.values.iter().map(|z| z.norm() - 1.0).fold(f64::MIN, f64::max)
    }

    /// Largest `|φ(-t) - conj φ(t)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.values.len();
        (0..n)
            .map(|i| (self.values[n - 1 - i] - self.values[i].conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// Depth used when a single depth is needed for the given arguments: the
/// adaptive depth of a small probe grid reaching `t_max`.
pub fn settled_depth(params: &CascadeParams, t_max: f64) -> Result<u32> {
    let probe = CharFnGrid::adaptive(params, t_max.max(1.0), t_max.max(1.0) / 64.0)?;
    Ok(probe.depth())
}

/// Smallest cut-off `T = 2^k` such that `|φ|` is negligible at `T`,
/// `1.1T`, `1.25T` and `1.5T`.
pub fn find_cutoff(params: &CascadeParams, depth: u32) -> Result<f64> {
    params.require(Regime::Convergent)?;
    let mut t = 1.0;
    let mut worst = f64::INFINITY;
    while t <= MAX_T {
        worst = [1.0, 1.1, 1.25, 1.5]
            .iter()
            .map(|f| (ladder(params, f * t, depth).0 + 1.0).norm())
            .fold(0.0, f64::max);
        if worst < TAIL_TOLERANCE {
            return Ok(t);
        }
        t *= 2.0;
    }
    Err(Error::TailNotNegligible {
        t_max: MAX_T,
        magnitude: worst,
    })
}

/// Inputs of [`density_of_z`]; `None` fields are chosen automatically.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensitySpec {
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub x_range: Option<(f64, f64)>,
    /// Number of abscissae, at least [`MIN_X_POINTS`].
    pub x_points: Option<usize>,
    pub depth: Option<u32>,
}

/// Density of `Z` on a uniform grid, with its integrated CDF.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Density {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub cdf: Vec<f64>,
    pub t_max: f64,
    pub dt: f64,
    pub depth: u32,
    /// `max |φ|` at and beyond the cut-off.
    pub tail_magnitude: f64,
    /// Largest imaginary part of the inversion sum (discarded).
    pub max_imaginary_residue: f64,
    pub mass: f64,
    pub mean: f64,
    pub second_moment: f64,
}

/// `f(x) = (1/2π) ∫ e^{-itx} φ(t) dt`, by the trapezoidal rule over the
/// symmetric `t` grid, evaluated on a uniform `x` grid.
///
/// Defaults: `T` from [`find_cutoff`]; `x` spans the mean `±14` standard
/// deviations; `Δt = π/W` with `W` the width of the `x` range, which puts
/// the aliases of the density a full width away.
pub fn density_of_z(params: &CascadeParams, spec: &DensitySpec) -> Result<Density> {
    params.require(Regime::Convergent)?;
    let sd = libm::sqrt((second_moment_fixed_point(params)? - 1.0).max(0.0));
    if sd == 0.0 {
        return Err(Error::InvalidArgument(
            "Z is degenerate (H = 1) and has no density".into(),
        ));
    }
    let (x_lo, x_hi) = spec.x_range.unwrap_or((1.0 - 14.0 * sd, 1.0 + 14.0 * sd));
    if !(x_hi > x_lo) {
        return Err(Error::InvalidArgument("empty x range".into()));
    }
    let width = x_hi - x_lo;
    let dt = spec.dt.unwrap_or(core::f64::consts::PI / width);

    let depth = match spec.depth {
        Some(d) => d,
        None => {
            let t_probe = match spec.t_max {
                Some(t) => t,
                None => find_cutoff(params, 4 * DEFAULT_DEPTH)?,
            };
            settled_depth(params, t_probe)?
        }
    };
    let t_max = match spec.t_max {
        Some(t) => t,
        None => find_cutoff(params, depth)?,
    };
    let tail_magnitude = [1.0, 1.1, 1.25, 1.5]
        .iter()
        .map(|f| (ladder(params, f * t_max, depth).0 + 1.0).norm())
        .fold(0.0, f64::max);
    if tail_magnitude >= TAIL_TOLERANCE {
        return Err(Error::TailNotNegligible {
            t_max,
            magnitude: tail_magnitude,
        });
    }

    let grid = CharFnGrid::build(params, t_max, dt, depth)?;
    let points = spec.x_points.unwrap_or(MIN_X_POINTS).max(MIN_X_POINTS);
    let step = width / (points - 1) as f64;
    let x: Vec<f64> = (0..points).map(|i| x_lo + i as f64 * step).collect();
    let k = grid.t.len() / 2;
    let phi = &grid.values;
    let sums = map_points(&x, |xv| {
        // Σ_j e^{-i t_j x} φ(t_j) with the end points halved.
        let rot = Complex64::from_polar(1.0, -dt * xv);
        let mut pos = Complex64::new(1.0, 0.0);
        let mut acc = phi[k];
        for j in 1..=k {
            pos *= rot;
            if j % 64 == 0 {
                pos = Complex64::from_polar(1.0, -(j as f64) * dt * xv);
            }
            let weight = if j == k { 0.5 } else { 1.0 };
            acc += (pos * phi[k + j] + pos.conj() * phi[k - j]) * weight;
        }
        acc * (dt / (2.0 * core::f64::consts::PI))
    });
    let density: Vec<f64> = sums.iter().map(|z| z.re).collect();
    let max_imaginary_residue = sums.iter().map(|z| z.im.abs()).fold(0.0, f64::max);

    let mut cdf = Vec::with_capacity(points);
    let (mut mass, mut mean, mut second) = (0.0, 0.0, 0.0);
    cdf.push(0.0);
    for i in 1..points {
        let (a, b) = (density[i - 1], density[i]);
        let (xa, xb) = (x[i - 1], x[i]);
        mass += 0.5 * step * (a + b);
        mean += 0.5 * step * (xa * a + xb * b);
        second += 0.5 * step * (xa * xa * a + xb * xb * b);
        cdf.push(mass);
    }
    Ok(Density {
        x,
        density,
        cdf,
        t_max,
        dt,
        depth,
        tail_magnitude,
        max_imaginary_residue,
        mass,
        mean,
        second_moment: second,
    })
}

impl Density {
    /// Integrated CDF at `x`, linear between grid points and clamped to
    /// `[0, 1]` outside.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return 0.0;
        }
        if x >= self.x[n - 1] {
            return 1.0;
        }
        let step = (self.x[n - 1] - self.x[0]) / (n - 1) as f64;
        let pos = (x - self.x[0]) / step;
        let i = (libm::floor(pos) as usize).min(n - 2);
        let frac = pos - i as f64;
        (self.cdf[i] + frac * (self.cdf[i + 1] - self.cdf[i])).clamp(0.0, 1.0)
    }

    /// Inverse of [`Self::cdf_at`] (first crossing, linear between points).
    pub fn quantile(&self, u: f64) -> f64 {
        let target = u.clamp(0.0, 1.0) * self.mass;
        let i = self.cdf.partition_point(|&c| c < target);
        if i == 0 {
            return self.x[0];
        }
        if i >= self.cdf.len() {
            return *self.x.last().expect("non-empty");
        }
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let frac = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
        self.x[i - 1] + frac * (self.x[i] - self.x[i - 1])
    }

    /// `E|Z|^{-γ}` by the trapezoidal rule, skipping a grid point that hits
    /// zero exactly. Only indicative: the integrand is singular at 0.
    pub fn negative_moment(&self, gamma: f64) -> f64 {
        let step = self.x[1] - self.x[0];
        self.x
            .iter()
            .zip(&self.density)
            .filter(|(x, _)| **x != 0.0)
            .map(|(x, f)| libm::pow(x.abs(), -gamma) * f * step)
            .sum()
    }

    /// Smallest density value (negative values are quadrature ripple).
    pub fn min_density(&self) -> f64 {
        self.density.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `reps` draws from the density by inverse CDF, from the auxiliary
    /// stream `stream` of `seed`.
    pub fn sample(&self, seed: u64, stream: u64, reps: usize) -> Vec<f64> {
        let mut rng = stream_rng(seed, AUX_DOMAIN, stream);
        (0..reps).map(|_| self.quantile(uniform(&mut rng))).collect()
    }
}

/// `E Z` and `E Z²` from central differences of `φ` at the origin.
pub fn moments_from_derivatives(params: &CascadeParams, h: f64, depth: u32) -> Result<(f64, f64)> {
    params.require(Regime::Convergent)?;
    let (u, v) = ladder(params, h, depth);
    let mean = (u - v).im / (2.0 * h);
    let second = -(u + v).re / (h * h);
    Ok((mean, second))
}

/// Least-squares fit of `log|φ(t)| ≈ c + |t|^{1/H}·log ρ`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayFit {
    pub rho: f64,
    pub fit: LinearFit,
    pub t_min: f64,
    pub t_max: f64,
    /// `(t, |φ(t)|)` samples used.
    pub samples: Vec<(f64, f64)>,
    /// `|φ|` did not increase from one octave of `t` to the next.
    pub monotone_octaves: bool,
}

/// Fits the stretched-exponential decay of `|φ|`.
///
/// Without a range, `t` is scanned over quarter octaves from 1 and the fit
/// keeps the points with `1e-12 < |φ| < 1e-2`.
pub fn decay_fit(params: &CascadeParams, t_range: Option<(f64, f64)>, depth: u32) -> Result<DecayFit> {
    params.require(Regime::Convergent)?;
    let h = params.hurst().finite().expect("convergent");
    let modulus = |t: f64| (ladder(params, t, depth).0 + 1.0).norm();
    let mut samples = Vec::new();
    match t_range {
        Some((lo, hi)) => {
            if !(hi > lo && lo > 0.0) {
                return Err(Error::InvalidArgument("decay range must satisfy 0 < lo < hi".into()));
            }
            let steps = 64;
            for i in 0..=steps {
                let t = lo * libm::pow(hi / lo, i as f64 / steps as f64);
                samples.push((t, modulus(t)));
            }
        }
        None => {
            let mut t: f64 = 1.0;
            while t <= MAX_T {
                let m = modulus(t);
                if m > TAIL_TOLERANCE && m < 1e-2 {
                    samples.push((t, m));
                }
                if m <= TAIL_TOLERANCE && !samples.is_empty() {
                    break;
                }
                t *= libm::pow(2.0, 0.25);
            }
        }
    }
    samples.retain(|&(_, m)| m > 0.0);
    if samples.len() < 4 {
        return Err(Error::InsufficientData(alloc::format!(
            "only {} usable points for the decay fit",
            samples.len()
        )));
    }
    let xs: Vec<f64> = samples.iter().map(|(t, _)| libm::pow(*t, 1.0 / h)).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, m)| libm::log(*m)).collect();
    let fit = LinearFit::fit(&xs, &ys)?;

    // Octave maxima must not grow.
    let t_min = samples[0].0;
    let t_max = samples[samples.len() - 1].0;
    let mut octave_max = Vec::new();
    let mut edge = t_min * 2.0;
    let mut current = 0.0f64;
    for &(t, m) in &samples {
        while t >= edge {
            octave_max.push(current);
            current = 0.0;
            edge *= 2.0;
        }
        current = current.max(m);
    }
    octave_max.push(current);
    let monotone_octaves = octave_max.windows(2).all(|w| w[1] <= w[0] || w[1] == 0.0);

    Ok(DecayFit {
        rho: libm::exp(fit.slope),
        fit,
        t_min,
        t_max,
        samples,
        monotone_octaves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(h: f64) -> CascadeParams {
        CascadeParams::finite(2, h, 0).unwrap()
    }

    #[test]
    fn origin_and_trivial_cascade() {
        assert_eq!(charfn_at(&p(0.7), 0.0, 40).unwrap(), Complex64::new(1.0, 0.0));
        for &t in &[0.3, 1.0, -2.5, 17.0] {
            for depth in [0, 5, 30] {
                let z = charfn_at(&p(1.0), t, depth).unwrap();
                assert!((z - Complex64::from_polar(1.0, t)).norm() < 1e-13, "t={t} n={depth}");
            }
        }
        assert!(charfn_at(&p(0.5), 1.0, 10).is_err());
    }

    #[test]
    fn functional_equation_is_exact() {
        for &t in &[0.01, 0.5, 3.0, 40.0] {
            assert!(functional_equation_residual(&p(0.7), t, 60).unwrap() < 1e-14);
        }
    }

    #[test]
    fn depth_convergence() {
        // Successive depths approach each other geometrically.
        let a = charfn_at(&p(0.7), 1.0, 150).unwrap();
        let b = charfn_at(&p(0.7), 1.0, 200).unwrap();
        assert!((a - b).norm() < 1e-8);
        let c = charfn_at(&p(0.7), 1.0, 30).unwrap();
        let d = charfn_at(&p(0.7), 1.0, 40).unwrap();
        assert!((c - d).norm() > 1e-6);
    }

    #[test]
    fn grid_invariants() {
        let g = CharFnGrid::adaptive(&p(0.8), 20.0, 0.25).unwrap();
        assert_eq!(g.values()[g.t().len() / 2], Complex64::new(1.0, 0.0));
        assert!(g.max_modulus_excess() <= 1e-12);
        assert!(g.hermitian_defect() <= 1e-12);
        assert!(g.depth() >= DEFAULT_DEPTH * 2);
    }

    #[test]
    fn derivative_moments() {
        for &h in &[0.7, 0.95] {
            let params = p(h);
            let (m1, m2) = moments_from_derivatives(&params, 1e-3, 600).unwrap();
            let exact = second_moment_fixed_point(&params).unwrap();
            assert!((m1 - 1.0).abs() < 1e-3);
            assert!((m2 - exact).abs() < 1e-3 * exact, "H={h}: {m2} vs {exact}");
        }
    }
}
