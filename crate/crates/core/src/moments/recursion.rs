use alloc::vec;
use alloc::vec::Vec;

use super::extfloat::ExtFloat;
use super::table::{MomentTable, TableKind};
use crate::cascade::{CascadeParams, Hurst, Regime};
use crate::error::{Error, Result};

/// Largest order the recursions accept for base `b`.
pub fn max_order(base: u32) -> u32 {
    if base == 2 {
        16
    } else {
        10
    }
}

fn check_order(params: &CascadeParams, q_max: u32) -> Result<()> {
    let cap = max_order(params.base());
    if q_max == 0 || q_max > cap {
        return Err(Error::InvalidArgument(alloc::format!(
            "moment order must lie in 1..={cap} for base {}, got {q_max}",
            params.base()
        )));
    }
    Ok(())
}

/// `E(ε^q)`: 1 for even `q`, `b^{H-1}` for odd `q` (0 when symmetric).
pub fn epsilon_moment(q: u32, params: &CascadeParams) -> f64 {
    if q % 2 == 0 {
        1.0
    } else {
        params.epsilon_mean()
    }
}

/// The normalising constant of the regime.
///
/// * critical: `√(1 - 1/b)`;
/// * divergent: `√(1 + (b-1)/(b^{2-2H} - b))`;
/// * convergent: `σ_H = √((b-1)/(b - b^{2-2H}))`, so `E(Z²) = σ_H²`;
/// * symmetric: 1.
pub fn sigma(params: &CascadeParams) -> f64 {
    let b = f64::from(params.base());
    match (params.regime(), params.hurst()) {
        (Regime::Symmetric, _) | (_, Hurst::Symmetric) => 1.0,
        (Regime::Critical, _) => libm::sqrt(1.0 - 1.0 / b),
        (Regime::Divergent, Hurst::Finite(h)) => {
            libm::sqrt(1.0 + (b - 1.0) / (libm::pow(b, 2.0 - 2.0 * h) - b))
        }
        (Regime::Convergent, Hurst::Finite(h)) => {
            libm::sqrt((b - 1.0) / (b - libm::pow(b, 2.0 - 2.0 * h)))
        }
    }
}

/// `ℓ = (b-1)/(b - b^{2-2H})`, the fixed point of the second-moment
/// recursion (`E Z²` when `H > 1/2`, negative when `H < 1/2`).
pub fn second_moment_fixed_point(params: &CascadeParams) -> Result<f64> {
    let h = params.hurst().finite().ok_or(Error::RegimeMismatch {
        expected: "finite Hurst parameter",
        found: Regime::Symmetric,
    })?;
    if params.regime() == Regime::Critical {
        return Err(Error::RegimeMismatch {
            expected: "non-critical",
            found: Regime::Critical,
        });
    }
    let b = f64::from(params.base());
    Ok((b - 1.0) / (b - libm::pow(b, 2.0 - 2.0 * h)))
}

/// `√(E(Z²) - 1)`, the scale of the residual `B - B_n` for `H > 1/2`.
pub fn residual_sigma(params: &CascadeParams) -> Result<f64> {
    params.require(Regime::Convergent)?;
    Ok(libm::sqrt(second_moment_fixed_point(params)? - 1.0))
}

/// Closed form of `E(Z_n²)`:
/// `ℓ + b^{n(1-2H)}(1 - ℓ)` off the critical point, `1 + n(b-1)/b` at
/// `H = 1/2` and `b^n` for the symmetric walk.
pub fn second_moment_closed_form(params: &CascadeParams, n: u32) -> f64 {
    let b = f64::from(params.base());
    let nf = f64::from(n);
    match (params.regime(), params.hurst()) {
        (Regime::Symmetric, _) | (_, Hurst::Symmetric) => libm::pow(b, nf),
        (Regime::Critical, _) => 1.0 + nf * (b - 1.0) / b,
        (_, Hurst::Finite(h)) => {
            let l = (b - 1.0) / (b - libm::pow(b, 2.0 - 2.0 * h));
            l + libm::pow(b, nf * (1.0 - 2.0 * h)) * (1.0 - l)
        }
    }
}

fn factorials(q_max: u32) -> Vec<f64> {
    let mut f = vec![1.0; q_max as usize + 1];
    for k in 1..f.len() {
        f[k] = f[k - 1] * k as f64;
    }
    f
}

/// `q!·[x^q] (Σ_k a_k x^k/k!)^b` for `q = 0..=q_max`, with `a_0 = 1`.
///
/// This is `E((Σ_j c_j Y_j)^q)` for `b` i.i.d. children with
/// `E((c Y)^k) = a_k`, i.e. the multinomial expansion over the children.
pub(crate) fn children_moments(a: &[ExtFloat], base: u32, fact: &[f64]) -> Vec<ExtFloat> {
    let q_max = a.len() - 1;
    let egf: Vec<ExtFloat> = a
        .iter()
        .enumerate()
        .map(|(k, &x)| x.scale(1.0 / fact[k]))
        .collect();
    let mut acc = egf.clone();
    for _ in 1..base {
        let mut next = vec![ExtFloat::ZERO; q_max + 1];
        for (i, &x) in acc.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in egf[..=q_max - i].iter().enumerate() {
                next[i + j] = next[i + j] + x * y;
            }
        }
        acc = next;
    }
    acc.iter()
        .enumerate()
        .map(|(q, &x)| x.scale(fact[q]))
        .collect()
}

/// One step of the raw recursion: `E Z_{n+1}^q` from `E Z_n^q`, `q ≥ 1`.
fn raw_step(params: &CascadeParams, row: &[ExtFloat], fact: &[f64]) -> Vec<ExtFloat> {
    let mut a = Vec::with_capacity(row.len() + 1);
    a.push(ExtFloat::ONE);
    for (k, &m) in row.iter().enumerate() {
        a.push(m.scale(epsilon_moment(k as u32 + 1, params)));
    }
    let sums = children_moments(&a, params.base(), fact);
    let w = ExtFloat::from(params.weight());
    (1..sums.len())
        .map(|q| w.powi(q as u32) * sums[q])
        .collect()
}

/// Exact moments `E(Z_n^q)` for `n = 0..=n_max`, `q = 1..=q_max`, by the
/// forward recursion `Z_{n+1} = b^{-H} Σ_j ε_j Z_n(j)` from `Z_0 = 1`.
///
/// In the convergent regime the table also carries the limit row.
pub fn z_moment_recursion(params: &CascadeParams, n_max: u32, q_max: u32) -> Result<MomentTable> {
    check_order(params, q_max)?;
    let fact = factorials(q_max);
    let mut rows = Vec::with_capacity(n_max as usize + 1);
    rows.push(vec![ExtFloat::ONE; q_max as usize]);
    for n in 0..n_max as usize {
        let next = raw_step(params, &rows[n], &fact);
        rows.push(next);
    }
    let table = MomentTable::new(*params, TableKind::Raw, 0, q_max, rows);
    if params.regime() == Regime::Convergent {
        Ok(table.with_limit(limit_z_moments(params, q_max)?))
    } else {
        Ok(table)
    }
}

/// Solves `E(Y^q) = b^{-qH}(b·E(ε^q)·E(Y^q) + cross_q)` order by order, where
/// `cross_q` collects the products of lower moments of distinct children.
fn fixed_point_moments(params: &CascadeParams, q_max: u32, first: f64) -> Vec<f64> {
    let fact = factorials(q_max);
    let b = f64::from(params.base());
    let h = params.hurst().finite().expect("convergent regime");
    let mut m = vec![first];
    for q in 2..=q_max {
        let mut a = Vec::with_capacity(q as usize + 1);
        a.push(ExtFloat::ONE);
        for k in 1..q {
            a.push(ExtFloat::from(epsilon_moment(k, params) * m[k as usize - 1]));
        }
        a.push(ExtFloat::ZERO);
        let cross = children_moments(&a, params.base(), &fact[..=q as usize])[q as usize].to_f64();
        let scale = libm::pow(b, -f64::from(q) * h);
        let own = b * scale * epsilon_moment(q, params);
        m.push(scale * cross / (1.0 - own));
    }
    m
}

/// `E(Z^q)` of the almost-sure limit `Z = lim Z_n` (`H > 1/2`).
pub fn limit_z_moments(params: &CascadeParams, q_max: u32) -> Result<Vec<f64>> {
    params.require(Regime::Convergent)?;
    check_order(params, q_max)?;
    Ok(fixed_point_moments(params, q_max, 1.0))
}

/// Moments of `B_H(1)/σ_H = Z/σ_H` for `H > 1/2`.
///
/// For `b = 2` each order solves the linear equation
/// `M = c_q·M + 2^{-qH}·S̃(q)` with `c_q = 2^{-(q-1)H}` for odd `q`,
/// `c_q = 2^{1-qH}` for even `q`, and
/// `S̃(q) = Σ_{k=1}^{q-1} C(q,k) E(ε^k) E(ε^{q-k}) M^{(k)} M^{(q-k)}`,
/// starting from `M^{(1)} = √(2 - 2^{2-2H})`. Other bases use the
/// multinomial form of the same fixed point.
pub fn tilde_moment_solver(params: &CascadeParams, q_max: u32) -> Result<Vec<f64>> {
    params.require(Regime::Convergent)?;
    check_order(params, q_max)?;
    let h = params.hurst().finite().expect("convergent regime");
    if params.base() != 2 {
        return Ok(fixed_point_moments(params, q_max, 1.0 / sigma(params)));
    }
    let e = |k: u32| epsilon_moment(k, params);
    let mut m = vec![libm::sqrt(2.0 - libm::pow(2.0, 2.0 - 2.0 * h))];
    for q in 2..=q_max {
        let mut s = 0.0;
        let mut binom = 1.0;
        for k in 1..q {
            binom = binom * f64::from(q - k + 1) / f64::from(k);
            s += binom * e(k) * e(q - k) * m[k as usize - 1] * m[(q - k) as usize - 1];
        }
        let c = if q % 2 == 1 {
            libm::pow(2.0, -f64::from(q - 1) * h)
        } else {
            libm::pow(2.0, 1.0 - f64::from(q) * h)
        };
        m.push(libm::pow(2.0, -f64::from(q) * h) * s / (1.0 - c));
    }
    Ok(m)
}

/// `M_n^{(q)} = E(X_n(1)^q)` for the diffusive regimes.
///
/// Uses `Y_{n+1} = r_n·b^{-1/2}·Σ_j ε_j Y_n(j)` with `r_n = √(n/(n+1))` at
/// `H = 1/2` and `r_n = 1` otherwise. The critical table starts at `n = 1`
/// (`M_1 = E(Z_1^q)/σ^q`), the others at `M_0 = σ^{-q}`.
pub fn normalized_moment_recursion(
    params: &CascadeParams,
    n_max: u32,
    q_max: u32,
) -> Result<MomentTable> {
    params.require_diffusive()?;
    check_order(params, q_max)?;
    let fact = factorials(q_max);
    let critical = params.regime() == Regime::Critical;
    let n_min = u32::from(critical);
    if n_max < n_min {
        return Err(Error::ZeroDepthNormalization);
    }
    let inv_sigma = ExtFloat::from(1.0 / sigma(params));
    let start: Vec<ExtFloat> = if critical {
        raw_step(params, &vec![ExtFloat::ONE; q_max as usize], &fact)
            .into_iter()
            .enumerate()
            .map(|(k, x)| x * inv_sigma.powi(k as u32 + 1))
            .collect()
    } else {
        (1..=q_max).map(|q| inv_sigma.powi(q)).collect()
    };
    let b = f64::from(params.base());
    let mut rows = vec![start];
    let mut ratios = Vec::new();
    for n in n_min..n_max {
        let r = if critical {
            libm::sqrt(f64::from(n) / f64::from(n + 1))
        } else {
            1.0
        };
        ratios.push(r);
        let prev = rows.last().expect("non-empty");
        let mut a = Vec::with_capacity(q_max as usize + 1);
        a.push(ExtFloat::ONE);
        for (k, &m) in prev.iter().enumerate() {
            a.push(m.scale(epsilon_moment(k as u32 + 1, params)));
        }
        let sums = children_moments(&a, params.base(), &fact);
        let c = ExtFloat::from(r / libm::sqrt(b));
        rows.push((1..sums.len()).map(|q| c.powi(q as u32) * sums[q]).collect());
    }
    Ok(MomentTable::new(*params, TableKind::Normalized, n_min, q_max, rows).with_ratios(ratios))
}
