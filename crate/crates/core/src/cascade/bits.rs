use alloc::vec;
use alloc::vec::Vec;

/// Packed ±1 values, one bit each; a set bit means `-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignBits {
    len: u64,
    words: Vec<u64>,
}

pub(crate) fn words_for(len: u64) -> usize {
    usize::try_from(len.div_ceil(64)).expect("bit count exceeds address space")
}

/// Mask of the valid lanes of word `j` in a vector of `len` bits.
pub(crate) fn lane_mask(len: u64, j: usize) -> u64 {
    let start = j as u64 * 64;
    let valid = len.saturating_sub(start).min(64);
    if valid == 64 {
        u64::MAX
    } else {
        (1u64 << valid) - 1
    }
}

impl SignBits {
    /// All `+1`.
    pub fn plus(len: u64) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_signs(signs: &[i8]) -> Self {
        let mut bits = Self::plus(signs.len() as u64);
        for (i, &s) in signs.iter().enumerate() {
            assert!(s == 1 || s == -1, "sign must be ±1, got {s}");
            bits.set_minus(i as u64, s < 0);
        }
        bits
    }

    pub(crate) fn from_words(len: u64, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        Self { len, words }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn into_words(self) -> Vec<u64> {
        self.words
    }

    pub fn is_minus(&self, i: u64) -> bool {
        assert!(i < self.len, "index {i} out of range {}", self.len);
        (self.words[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    pub fn sign(&self, i: u64) -> i8 {
        if self.is_minus(i) {
            -1
        } else {
            1
        }
    }

    pub fn set_minus(&mut self, i: u64, minus: bool) {
        assert!(i < self.len, "index {i} out of range {}", self.len);
        let w = &mut self.words[(i / 64) as usize];
        let bit = 1u64 << (i % 64);
        if minus {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    pub fn flip(&mut self, i: u64) {
        let m = self.is_minus(i);
        self.set_minus(i, !m);
    }

    pub fn count_minus(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Number of `-1` entries in `start..end`.
    pub fn count_minus_in(&self, start: u64, end: u64) -> u64 {
        assert!(start <= end && end <= self.len);
        if start == end {
            return 0;
        }
        let (first, last) = ((start / 64) as usize, ((end - 1) / 64) as usize);
        let lo_mask = u64::MAX << (start % 64);
        let hi_mask = u64::MAX >> (63 - (end - 1) % 64);
        if first == last {
            return u64::from((self.words[first] & lo_mask & hi_mask).count_ones());
        }
        let mut total = u64::from((self.words[first] & lo_mask).count_ones());
        total += self.words[first + 1..last]
            .iter()
            .map(|w| u64::from(w.count_ones()))
            .sum::<u64>();
        total + u64::from((self.words[last] & hi_mask).count_ones())
    }

    /// Sum of the signed values in `start..end`.
    pub fn sum_in(&self, start: u64, end: u64) -> i64 {
        let minus = self.count_minus_in(start, end);
        (end - start) as i64 - 2 * minus as i64
    }

    pub fn iter(&self) -> impl Iterator<Item = i8> + '_ {
        (0..self.len).map(move |i| self.sign(i))
    }
}

/// Spreads the 32 bits of `x` to the even lanes of a `u64` and duplicates
/// each into the following odd lane.
#[inline]
pub(crate) fn duplicate_bits(x: u32) -> u64 {
    let mut v = u64::from(x);
    v = (v | (v << 16)) & 0x0000_FFFF_0000_FFFF;
    v = (v | (v << 8)) & 0x00FF_00FF_00FF_00FF;
    v = (v | (v << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    v = (v | (v << 2)) & 0x3333_3333_3333_3333;
    v = (v | (v << 1)) & 0x5555_5555_5555_5555;
    v | (v << 1)
}

/// Word `j` of the child level, where each child copies its parent's bit
/// (child `i` has parent `i / base`).
#[inline]
pub(crate) fn inherited_word(parent: &SignBits, base: u32, j: usize, child_len: u64) -> u64 {
    if base == 2 {
        let pw = parent.words[j / 2];
        let half = if j % 2 == 0 { pw as u32 } else { (pw >> 32) as u32 };
        return duplicate_bits(half) & lane_mask(child_len, j);
    }
    let b = u64::from(base);
    let start = j as u64 * 64;
    let end = (start + 64).min(child_len);
    let mut word = 0u64;
    for i in start..end {
        if parent.is_minus(i / b) {
            word |= 1 << (i - start);
        }
    }
    word
}
