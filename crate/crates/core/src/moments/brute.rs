use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::extfloat::ExtFloat;
use super::table::{MomentTable, TableKind};
use crate::cascade::{CascadeParams, Hurst};
use crate::error::{Error, Result};

/// Largest number of tree nodes the oracle enumerates (`2^nodes` cases).
pub const MAX_ORACLE_NODES: u64 = 20;

/// How the oracle turns its exact integer sums into expectations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OracleMode {
    /// `b^{-H}` and `p±` are rational (integer `H` or the symmetric
    /// sentinel): the result is exact.
    ExactRational,
    /// The inputs `b^{-nH}` and `p⁺` are the exact rationals of their
    /// rounded `f64` values (`p⁻ = 1 - p⁺`); everything after that is exact.
    RoundedInputs,
}

/// Picks [`OracleMode::ExactRational`] whenever the inputs are rational.
pub fn oracle_mode(params: &CascadeParams) -> OracleMode {
    match params.hurst() {
        Hurst::Symmetric => OracleMode::ExactRational,
        Hurst::Finite(h) if h == libm::trunc(h) && h.abs() < 64.0 => OracleMode::ExactRational,
        Hurst::Finite(_) => OracleMode::RoundedInputs,
    }
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

fn int_pow(base: &BigRational, e: u64) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= base;
    }
    acc
}

/// `(b^{-nH}, p⁺, p⁻)` as rationals.
fn rational_inputs(params: &CascadeParams, n: u32, mode: OracleMode) -> (BigRational, BigRational, BigRational) {
    let b = BigRational::from_integer(BigInt::from(params.base()));
    match (mode, params.hurst()) {
        (OracleMode::ExactRational, Hurst::Symmetric) => {
            let half = BigRational::new(1.into(), 2.into());
            (BigRational::one(), half.clone(), half)
        }
        (OracleMode::ExactRational, Hurst::Finite(h)) => {
            let h = h as i64;
            // b^{-H} and b^{H-1}
            let w = if h >= 0 {
                int_pow(&b, h as u64).recip()
            } else {
                int_pow(&b, (-h) as u64)
            };
            let mean = w.recip() / &b;
            let two = BigRational::from_integer(2.into());
            let p_plus = (BigRational::one() + &mean) / &two;
            let p_minus = (BigRational::one() - &mean) / two;
            (int_pow(&w, u64::from(n)), p_plus, p_minus)
        }
        (OracleMode::RoundedInputs, _) => {
            let p_plus = rational(params.p_plus());
            let p_minus = BigRational::one() - &p_plus;
            (rational(params.increment_scale(n)), p_plus, p_minus)
        }
    }
}

/// Exact integer sums `c[k][q] = Σ S^q` over all sign assignments with `k`
/// minus signs among the `nodes` raw signs, where `S = Σ boldε(leaf)`.
fn enumerate(base: u32, n: u32, q_max: u32) -> Result<(u64, Vec<Vec<i128>>)> {
    let b = u64::from(base);
    let mut nodes = 0u64;
    let mut width = 1u64;
    for _ in 0..n {
        width = width.saturating_mul(b);
        nodes = nodes.saturating_add(width);
    }
    if nodes > MAX_ORACLE_NODES {
        return Err(Error::Capacity {
            what: "oracle tree nodes",
            requested: u128::from(nodes),
            budget: u128::from(MAX_ORACLE_NODES),
        });
    }
    let mut sums = vec![vec![0i128; q_max as usize + 1]; nodes as usize + 1];
    let mut bold = vec![1i8; width as usize];
    let mut next = vec![1i8; width as usize];
    for mask in 0..(1u64 << nodes) {
        bold[0] = 1;
        let mut len = 1usize;
        let mut offset = 0u64;
        for _ in 0..n {
            let child = len * b as usize;
            for i in 0..child {
                let raw = if (mask >> (offset + i as u64)) & 1 == 1 { -1 } else { 1 };
                next[i] = bold[i / b as usize] * raw;
            }
            offset += child as u64;
            len = child;
            core::mem::swap(&mut bold, &mut next);
        }
        let s: i128 = bold[..len].iter().map(|&x| i128::from(x)).sum();
        let row = &mut sums[mask.count_ones() as usize];
        let mut power = 1i128;
        for entry in row.iter_mut().skip(1) {
            power *= s;
            *entry += power;
        }
    }
    Ok((nodes, sums))
}

/// Exact `E(Z_n^q)`, `q = 1..=q_max`, as a probability-weighted sum over
/// every sign assignment of the depth-`n` tree.
pub fn brute_force_exact(
    params: &CascadeParams,
    n: u32,
    q_max: u32,
    mode: OracleMode,
) -> Result<Vec<BigRational>> {
    let (nodes, sums) = enumerate(params.base(), n, q_max)?;
    let (w, p_plus, p_minus) = rational_inputs(params, n, mode);
    let weights: Vec<BigRational> = (0..=nodes)
        .map(|k| int_pow(&p_minus, k) * int_pow(&p_plus, nodes - k))
        .collect();
    Ok((1..=q_max as usize)
        .map(|q| {
            let mut total = BigRational::zero();
            for (k, row) in sums.iter().enumerate() {
                if row[q] != 0 {
                    total += BigRational::from_integer(BigInt::from(row[q])) * &weights[k];
                }
            }
            total * int_pow(&w, q as u64)
        })
        .collect())
}

/// Moment table of `Z_0, …, Z_{n_max}` from the enumeration oracle, in the
/// mode chosen by [`oracle_mode`].
pub fn brute_force_moments(params: &CascadeParams, n_max: u32, q_max: u32) -> Result<MomentTable> {
    if q_max == 0 {
        return Err(Error::InvalidArgument("q_max must be at least 1".into()));
    }
    let mode = oracle_mode(params);
    let rows = (0..=n_max)
        .map(|n| {
            brute_force_exact(params, n, q_max, mode).map(|row| {
                row.iter()
                    .map(|x| ExtFloat::from(x.to_f64().unwrap_or(f64::NAN)))
                    .collect()
            })
        })
        .collect::<Result<Vec<Vec<ExtFloat>>>>()?;
    Ok(MomentTable::new(*params, TableKind::Raw, 0, q_max, rows))
}
