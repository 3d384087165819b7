use alloc::vec::Vec;

use super::bits::{inherited_word, lane_mask, words_for, SignBits};
use super::params::CascadeParams;
use super::rng::{field_stream, MinusSampler, MAX_FIELD_WORDS};
use crate::error::{Error, Result};

/// Generation options for [`generate_leaf_signs_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldOptions {
    /// Keep the raw signs `ε(w)` of every level (needed by the structural
    /// checks). Costs about twice the leaf storage.
    pub retain_levels: bool,
    /// Upper bound on the bytes held by the field while it is generated.
    pub memory_budget_bytes: u64,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self {
            retain_levels: false,
            memory_budget_bytes: 1 << 30,
        }
    }
}

impl FieldOptions {
    pub fn retaining() -> Self {
        Self {
            retain_levels: true,
            ..Self::default()
        }
    }
}

/// Products `boldε(w)` over the generation-`n` nodes, in grid order.
///
/// Entry `k` belongs to the node whose cell is `[k·b^{-n}, (k+1)·b^{-n}]`.
/// When levels are retained, `levels[k-1]` holds the raw `ε` of the
/// generation-`k` nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafSignField {
    base: u32,
    depth: u32,
    signs: SignBits,
    levels: Option<Vec<SignBits>>,
}

/// Child level from its parent: `bold_k[i] = bold_{k-1}[i/b] · raw_k[i]`.
pub(crate) fn expand_into(
    parent: &SignBits,
    base: u32,
    out: &mut Vec<u64>,
    mut raw: impl FnMut(usize) -> u64,
) -> u64 {
    let child_len = parent.len() * u64::from(base);
    out.clear();
    out.extend((0..words_for(child_len)).map(|j| inherited_word(parent, base, j, child_len) ^ raw(j)));
    child_len
}

fn raw_word(sampler: &MinusSampler, seed: u64, level: u32, j: usize, len: u64) -> u64 {
    if let Some(word) = sampler.constant_word() {
        return word & lane_mask(len, j);
    }
    let mut rng = field_stream(seed, level, j as u64);
    sampler.word(&mut rng) & lane_mask(len, j)
}

#[cfg(feature = "parallel")]
fn raw_level(sampler: &MinusSampler, seed: u64, level: u32, len: u64) -> Vec<u64> {
    use rayon::prelude::*;
    (0..words_for(len))
        .into_par_iter()
        .map(|j| raw_word(sampler, seed, level, j, len))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn raw_level(sampler: &MinusSampler, seed: u64, level: u32, len: u64) -> Vec<u64> {
    (0..words_for(len))
        .map(|j| raw_word(sampler, seed, level, j, len))
        .collect()
}

/// Generates the leaf signs of a depth-`depth` cascade with default options.
pub fn generate_leaf_signs(params: &CascadeParams, depth: u32) -> Result<LeafSignField> {
    generate_leaf_signs_with(params, depth, FieldOptions::default())
}

/// Generates the leaf signs level by level.
///
/// The raw signs of word `j` of level `k` come from the field stream
/// `(k, j)`, so the result depends only on `(seed, b, H, depth)`.
pub fn generate_leaf_signs_with(
    params: &CascadeParams,
    depth: u32,
    options: FieldOptions,
) -> Result<LeafSignField> {
    let base = params.base();
    let cells = params.cell_count(depth)?;
    let leaf_words = words_for(cells) as u128;
    if leaf_words > u128::from(MAX_FIELD_WORDS) {
        return Err(Error::Capacity {
            what: "sign words per level",
            requested: leaf_words,
            budget: u128::from(MAX_FIELD_WORDS),
        });
    }
    // Two leaf-sized buffers, or all levels plus the leaves when retained
    // (the geometric sum of the upper levels is below one leaf level).
    let bytes = leaf_words * 8 * if options.retain_levels { 3 } else { 2 };
    if bytes > u128::from(options.memory_budget_bytes) {
        return Err(Error::Capacity {
            what: "sign field bytes",
            requested: bytes,
            budget: u128::from(options.memory_budget_bytes),
        });
    }

    let sampler = MinusSampler::new(params.p_minus());
    let mut levels = options.retain_levels.then(Vec::new);
    let mut current = SignBits::plus(1);
    let mut scratch = Vec::with_capacity(words_for(cells));
    for level in 1..=depth {
        let child_len = current.len() * u64::from(base);
        let raw = raw_level(&sampler, params.seed(), level, child_len);
        expand_into(&current, base, &mut scratch, |j| raw[j]);
        let next = SignBits::from_words(child_len, core::mem::take(&mut scratch));
        scratch = core::mem::replace(&mut current, next).into_words();
        if let Some(levels) = levels.as_mut() {
            levels.push(SignBits::from_words(child_len, raw));
        }
    }
    Ok(LeafSignField {
        base,
        depth,
        signs: current,
        levels,
    })
}

impl LeafSignField {
    /// A field from explicit leaf signs (`±1`), without retained levels.
    pub fn from_signs(base: u32, signs: &[i8]) -> Result<Self> {
        let depth = depth_of(base, signs.len() as u64)?;
        Ok(Self {
            base,
            depth,
            signs: SignBits::from_signs(signs),
            levels: None,
        })
    }

    /// A field from the raw signs of every level; `levels[k-1]` must hold
    /// the `b^k` signs of generation `k`.
    pub fn from_level_signs(base: u32, levels: &[Vec<i8>]) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidBase(base));
        }
        let mut current = SignBits::plus(1);
        let mut raw_levels = Vec::with_capacity(levels.len());
        for (k, raw) in levels.iter().enumerate() {
            let want = current.len() * u64::from(base);
            if raw.len() as u64 != want {
                return Err(Error::InvalidArgument(alloc::format!(
                    "level {} has {} signs, expected {want}",
                    k + 1,
                    raw.len()
                )));
            }
            let raw = SignBits::from_signs(raw);
            let mut words = Vec::new();
            expand_into(&current, base, &mut words, |j| raw.words()[j]);
            current = SignBits::from_words(want, words);
            raw_levels.push(raw);
        }
        Ok(Self {
            base,
            depth: levels.len() as u32,
            signs: current,
            levels: Some(raw_levels),
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> u64 {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &SignBits {
        &self.signs
    }

    pub fn sign(&self, k: u64) -> i8 {
        self.signs.sign(k)
    }

    pub fn has_levels(&self) -> bool {
        self.levels.is_some()
    }

    /// Raw signs `ε(w)` of generation `level` (1-based).
    pub fn raw_level(&self, level: u32) -> Result<&SignBits> {
        let levels = self.levels.as_ref().ok_or(Error::LevelsNotRetained)?;
        if level == 0 || level > self.depth {
            return Err(Error::InvalidArgument(alloc::format!(
                "level {level} outside 1..={}",
                self.depth
            )));
        }
        Ok(&levels[level as usize - 1])
    }

    /// `boldε` of every generation-`level` node, rebuilt from the retained
    /// raw signs. Level 0 is the root with the empty product `+1`.
    pub fn bold_level(&self, level: u32) -> Result<SignBits> {
        self.product_between(0, level)
    }

    /// For every node `v` of generation `to`, the product of the raw signs
    /// strictly below generation `from` on the branch to `v`, that is
    /// `ε(v_1…v_{from+1})⋯ε(v_1…v_to)`.
    pub fn product_between(&self, from: u32, to: u32) -> Result<SignBits> {
        let levels = self.levels.as_ref().ok_or(Error::LevelsNotRetained)?;
        if from > to || to > self.depth {
            return Err(Error::InvalidArgument(alloc::format!(
                "levels {from}..{to} outside 0..={}",
                self.depth
            )));
        }
        let b = u64::from(self.base);
        let mut current = SignBits::plus(b.pow(from));
        for raw in &levels[from as usize..to as usize] {
            let mut words = Vec::new();
            let len = expand_into(&current, self.base, &mut words, |j| raw.words()[j]);
            current = SignBits::from_words(len, words);
        }
        Ok(current)
    }

    /// Checks `boldε(w·j) = boldε(w)·ε(w·j)` along every branch, i.e. that
    /// the stored leaves equal the products of the retained raw signs.
    pub fn check_consistency(&self) -> Result<bool> {
        Ok(self.bold_level(self.depth)? == self.signs)
    }

    /// Flips one retained raw sign without touching the leaves. Only useful
    /// to build negative controls for the structural checks.
    pub fn flip_retained_sign(&mut self, level: u32, index: u64) -> Result<()> {
        self.raw_level(level)?;
        let raw = &mut self.levels.as_mut().expect("checked above")[level as usize - 1];
        raw.flip(index);
        Ok(())
    }
}

fn depth_of(base: u32, len: u64) -> Result<u32> {
    if base < 2 {
        return Err(Error::InvalidBase(base));
    }
    let b = u64::from(base);
    let mut cells = 1u64;
    let mut depth = 0;
    while cells < len {
        cells = cells.saturating_mul(b);
        depth += 1;
    }
    if cells != len {
        return Err(Error::InvalidArgument(alloc::format!(
            "{len} signs is not a power of {base}"
        )));
    }
    Ok(depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(h: f64, seed: u64) -> CascadeParams {
        CascadeParams::finite(2, h, seed).unwrap()
    }

    #[test]
    fn trivial_cascade_is_all_plus() {
        let field = generate_leaf_signs(&params(1.0, 3), 10).unwrap();
        assert_eq!(field.len(), 1024);
        assert_eq!(field.signs().count_minus(), 0);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_leaf_signs(&params(0.7, 11), 12).unwrap();
        let b = generate_leaf_signs(&params(0.7, 11), 12).unwrap();
        let c = generate_leaf_signs(&params(0.7, 12), 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.signs(), c.signs());
    }

    #[test]
    fn retention_does_not_change_leaves() {
        let p = CascadeParams::finite(3, 0.3, 5).unwrap();
        let plain = generate_leaf_signs(&p, 6).unwrap();
        let kept = generate_leaf_signs_with(&p, 6, FieldOptions::retaining()).unwrap();
        assert_eq!(plain.signs(), kept.signs());
        assert!(!plain.has_levels());
        assert!(kept.check_consistency().unwrap());
        assert_eq!(plain.check_consistency(), Err(Error::LevelsNotRetained));
    }

    #[test]
    fn corrupting_a_level_breaks_consistency() {
        let mut field =
            generate_leaf_signs_with(&params(0.6, 1), 7, FieldOptions::retaining()).unwrap();
        field.flip_retained_sign(4, 9).unwrap();
        assert!(!field.check_consistency().unwrap());
    }

    #[test]
    fn products_by_hand() {
        // ε(0) = -1, ε(1) = +1; level 2: (+1, -1, -1, -1)
        let field = LeafSignField::from_level_signs(2, &[vec![-1, 1], vec![1, -1, -1, -1]]).unwrap();
        let leaves: Vec<i8> = field.signs().iter().collect();
        assert_eq!(leaves, [-1, 1, -1, -1]);
        let below: Vec<i8> = field.product_between(1, 2).unwrap().iter().collect();
        assert_eq!(below, [1, -1, -1, -1]);
        assert!(LeafSignField::from_level_signs(2, &[vec![1, 1, 1]]).is_err());
    }

    #[test]
    fn explicit_leaves() {
        let field = LeafSignField::from_signs(3, &[1, -1, 1, 1, 1, 1, -1, -1, 1]).unwrap();
        assert_eq!(field.depth(), 2);
        assert_eq!(field.sign(7), -1);
        assert!(LeafSignField::from_signs(2, &[1, 1, 1]).is_err());
    }

    #[test]
    fn memory_budget_is_enforced() {
        let options = FieldOptions {
            retain_levels: false,
            memory_budget_bytes: 1024,
        };
        assert!(matches!(
            generate_leaf_signs_with(&params(0.7, 0), 20, options),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            generate_leaf_signs(&CascadeParams::finite(2, 0.7, 0).unwrap(), 70),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn minus_frequency_matches_probability() {
        // Raw signs at the last level are i.i.d. Bernoulli(p⁻).
        let p = params(0.3, 2024);
        let field = generate_leaf_signs_with(&p, 16, FieldOptions::retaining()).unwrap();
        let raw = field.raw_level(16).unwrap();
        let n = raw.len() as f64;
        let q = p.p_minus();
        let freq = raw.count_minus() as f64 / n;
        assert!((freq - q).abs() < 4.0 * (q * (1.0 - q) / n).sqrt(), "{freq} vs {q}");
    }
}
