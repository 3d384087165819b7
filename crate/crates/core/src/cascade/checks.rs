use alloc::vec;
use alloc::vec::Vec;

use super::field::LeafSignField;
use super::params::{CascadeParams, Regime};
use super::path::{build_path, SamplePath};
use crate::error::{Error, Result};

/// Tolerance of [`verify_self_similarity`].
pub const SELF_SIMILARITY_TOLERANCE: f64 = 1e-10;
/// Tolerance of [`martingale_defect`].
pub const MARTINGALE_TOLERANCE: f64 = 1e-12;

/// Outcome of [`verify_self_similarity`].
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SelfSimilarityReport {
    pub p: u32,
    pub n: u32,
    /// Number of `(w, t)` pairs compared.
    pub checked: u64,
    /// Largest relative violation.
    pub max_violation: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// Checks the scaling relation
/// `B_{p+n}(t) - B_{p+n}(t_w) = boldε(w)·b^{-pH}·B_n(w)(b^p(t - t_w))`
/// for every node `w` of generation `p` and every grid point `t ∈ I_w`.
///
/// The left side comes from the stored leaves through [`build_path`]; the
/// right side from the retained raw signs, so corrupting a retained sign is
/// detected.
pub fn verify_self_similarity(
    field: &LeafSignField,
    params: &CascadeParams,
    p: u32,
) -> Result<SelfSimilarityReport> {
    if !field.has_levels() {
        return Err(Error::LevelsNotRetained);
    }
    let depth = field.depth();
    if p > depth {
        return Err(Error::InvalidArgument(alloc::format!(
            "p = {p} exceeds the field depth {depth}"
        )));
    }
    let n = depth - p;
    let path = build_path(field, params)?;
    let bold_p = field.bold_level(p)?;
    let below = field.product_between(p, depth)?;
    let sub = params.cell_count(n)?;
    let scale_p = params.increment_scale(p);
    let scale_n = params.increment_scale(n);
    let floor = params.increment_scale(depth);
    let values = path.values();

    let mut max_violation = 0.0f64;
    let mut checked = 0u64;
    for w in 0..bold_p.len() {
        let origin = w * sub;
        let sign = f64::from(bold_p.sign(w));
        let mut walk = 0i64;
        for m in 0..=sub {
            if m > 0 {
                walk += i64::from(below.sign(origin + m - 1));
            }
            let lhs = values[(origin + m) as usize] - values[origin as usize];
            let rhs = sign * scale_p * (scale_n * walk as f64);
            let size = lhs.abs().max(rhs.abs()).max(floor);
            max_violation = max_violation.max((lhs - rhs).abs() / size);
            checked += 1;
        }
    }
    Ok(SelfSimilarityReport {
        p,
        n,
        checked,
        max_violation,
        tolerance: SELF_SIMILARITY_TOLERANCE,
        holds: max_violation < SELF_SIMILARITY_TOLERANCE,
    })
}

/// Largest relative deviation of `|increment|` from `b^{-nH}` over a raw,
/// undecimated path.
pub fn increment_law_defect(path: &SamplePath) -> f64 {
    let scale = path.params().increment_scale(path.depth()) * path.stride() as f64;
    path.values()
        .windows(2)
        .map(|w| ((w[1] - w[0]).abs() - scale).abs() / scale)
        .fold(0.0, f64::max)
}

/// Outcome of [`martingale_defect`].
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MartingaleReport {
    pub n: u32,
    /// Generation-`n` sign patterns conditioned on.
    pub patterns: u64,
    /// Generation-`n+1` assignments enumerated per pattern.
    pub assignments: u64,
    /// Largest relative gap `|E[B_{n+1}(t) | gen ≤ n] - B_n(t)|`.
    pub max_defect: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// Largest node count [`martingale_defect`] enumerates per level.
pub const MARTINGALE_MAX_CHILDREN: u64 = 20;
/// Largest total number of (pattern, assignment) pairs.
pub const MARTINGALE_MAX_WORK: u64 = 1 << 28;

/// Verifies `E[B_{n+1}(t) | generations ≤ n] = B_n(t)` exhaustively.
///
/// For every generation-`n` pattern of `boldε` and every assignment of the
/// generation-`n+1` raw signs, weighted by its probability, the conditional
/// mean of `B_{n+1}` is compared with `B_n` at all generation-`n+1` grid
/// points (both sides are affine in between).
pub fn martingale_defect(params: &CascadeParams, n: u32) -> Result<MartingaleReport> {
    if params.regime() == Regime::Symmetric {
        return Err(Error::RegimeMismatch {
            expected: "finite Hurst parameter",
            found: Regime::Symmetric,
        });
    }
    let b = u64::from(params.base());
    let parents = params.cell_count(n)?;
    let children = parents * b;
    let patterns = 1u64 << parents.min(63);
    let assignments = 1u64 << children.min(63);
    if children > MARTINGALE_MAX_CHILDREN
        || u128::from(patterns) * u128::from(assignments) > u128::from(MARTINGALE_MAX_WORK)
    {
        return Err(Error::Capacity {
            what: "martingale enumeration",
            requested: u128::from(patterns) * u128::from(assignments),
            budget: u128::from(MARTINGALE_MAX_WORK),
        });
    }
    let (p_plus, p_minus) = params.epsilon_probabilities();
    let weights: Vec<f64> = (0..=children)
        .map(|k| libm::pow(p_minus, k as f64) * libm::pow(p_plus, (children - k) as f64))
        .collect();
    let scale_n = params.increment_scale(n);
    let scale_next = params.increment_scale(n + 1);

    let mut max_defect = 0.0f64;
    for pattern in 0..patterns {
        let inherited = (0..children).fold(0u64, |acc, i| acc | (((pattern >> (i / b)) & 1) << i));
        // Assignments putting boldε = -1 on child i, binned by how many raw
        // minus signs they carry; exact integers, weighted only at the end.
        let bins = children as usize + 1;
        let mut counts = vec![0u64; children as usize * bins];
        let mut per_k = vec![0u64; bins];
        for raw in 0..assignments {
            let k = raw.count_ones() as usize;
            per_k[k] += 1;
            let bold = inherited ^ raw;
            for i in 0..children as usize {
                if (bold >> i) & 1 == 1 {
                    counts[i * bins + k] += 1;
                }
            }
        }
        let weigh = |c: &[u64]| c.iter().zip(&weights).map(|(&c, w)| c as f64 * w).sum::<f64>();
        let total = weigh(&per_k);
        let minus: Vec<f64> = counts.chunks(bins).map(weigh).collect();
        let mut mean = 0.0;
        let mut coarse = 0.0;
        for m in 0..=children {
            if m > 0 {
                let i = (m - 1) as usize;
                mean += scale_next * (total - 2.0 * minus[i]);
                let parent_sign = if (pattern >> ((m - 1) / b)) & 1 == 1 { -1.0 } else { 1.0 };
                coarse += scale_n * parent_sign / b as f64;
            }
            let size = coarse.abs().max(scale_next);
            max_defect = max_defect.max((mean - coarse).abs() / size);
        }
    }
    Ok(MartingaleReport {
        n,
        patterns,
        assignments,
        max_defect,
        tolerance: MARTINGALE_TOLERANCE,
        holds: max_defect <= MARTINGALE_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{generate_leaf_signs, generate_leaf_signs_with, FieldOptions};

    fn retained(p: &CascadeParams, depth: u32) -> LeafSignField {
        generate_leaf_signs_with(p, depth, FieldOptions::retaining()).unwrap()
    }

    #[test]
    fn self_similarity_holds() {
        for &h in &[1.0, 0.7, 0.5, -2.0] {
            let p = CascadeParams::finite(2, h, 42).unwrap();
            let report = verify_self_similarity(&retained(&p, 8), &p, 3).unwrap();
            assert!(report.holds, "H={h}: {report:?}");
            assert_eq!(report.checked, 8 * 33);
        }
        let p = CascadeParams::finite(2, 1.0, 0).unwrap();
        assert_eq!(verify_self_similarity(&retained(&p, 6), &p, 2).unwrap().max_violation, 0.0);
    }

    #[test]
    fn corruption_is_detected() {
        let p = CascadeParams::finite(2, 0.7, 42).unwrap();
        for level in [2, 6] {
            let mut field = retained(&p, 8);
            field.flip_retained_sign(level, 1).unwrap();
            let report = verify_self_similarity(&field, &p, 3).unwrap();
            assert!(!report.holds && report.max_violation > 0.1, "{report:?}");
        }
    }

    #[test]
    fn needs_levels() {
        let p = CascadeParams::finite(2, 0.7, 42).unwrap();
        let field = generate_leaf_signs(&p, 5).unwrap();
        assert_eq!(verify_self_similarity(&field, &p, 2), Err(Error::LevelsNotRetained));
    }

    #[test]
    fn increments_have_fixed_magnitude() {
        let p = CascadeParams::finite(2, -2.0, 3).unwrap();
        let path = build_path(&generate_leaf_signs(&p, 10).unwrap(), &p).unwrap();
        assert!(increment_law_defect(&path) < 1e-12);
    }

    #[test]
    fn martingale_exhaustive() {
        for &h in &[-2.0, 0.3, 0.5, 0.7, 0.95, 1.0] {
            for n in 0..=2 {
                let p = CascadeParams::finite(2, h, 0).unwrap();
                let report = martingale_defect(&p, n).unwrap();
                assert!(report.holds, "H={h} n={n}: {report:?}");
            }
        }
        let p = CascadeParams::finite(3, 0.3, 0).unwrap();
        assert!(martingale_defect(&p, 1).unwrap().holds);
        assert!(matches!(martingale_defect(&p, 2), Err(Error::Capacity { .. })));
        let s = CascadeParams::symmetric(2, 0).unwrap();
        assert!(martingale_defect(&s, 1).is_err());
    }
}
