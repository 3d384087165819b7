//! Counter-based random streams and bit-sliced Bernoulli draws.
//!
//! Every stream is a ChaCha8 keystream. The 256-bit key holds the user seed
//! (little-endian, bytes 0..8) and a domain tag (bytes 8..16); the remaining
//! key bytes are zero. The 64-bit ChaCha stream id selects the stream inside
//! a domain:
//!
//! * [`FIELD_DOMAIN`]: one stream per 64-node word of a level,
//!   `stream = (level << 48) | word`. Word `j` of level `k` holds the nodes
//!   with in-level index `64j..64j+63` (node `i` of level `k` is the word
//!   `w_1…w_k` whose base-`b` value is `i`, so `t_w = i·b^{-k}`).
//! * [`REPLICA_DOMAIN`]: one stream per Monte-Carlo replica, `stream = r`,
//!   consumed level by level, word by word.
//!
//! A word of signs consumes a variable number of `u64` draws (see
//! [`MinusSampler`]); the stream assignment alone fixes the outcome, so a
//! subtree or a replica regenerates identically whatever the traversal order.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Domain tag of per-word sign-field streams (ASCII "field").
pub const FIELD_DOMAIN: u64 = 0x0064_6c65_6966;
/// Domain tag of per-replica streams (ASCII "replica").
pub const REPLICA_DOMAIN: u64 = 0x0061_6369_6c70_6572;
/// Domain tag of auxiliary draws (inverse-CDF sampling and the like).
pub const AUX_DOMAIN: u64 = 0x0078_7561;

/// Largest word index representable in a field stream id.
pub const MAX_FIELD_WORDS: u64 = 1 << 48;

pub fn stream_rng(seed: u64, domain: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

pub fn field_stream(seed: u64, level: u32, word: u64) -> ChaCha8Rng {
    debug_assert!(word < MAX_FIELD_WORDS);
    stream_rng(seed, FIELD_DOMAIN, (u64::from(level) << 48) | word)
}

pub fn replica_stream(seed: u64, replica: u64) -> ChaCha8Rng {
    stream_rng(seed, REPLICA_DOMAIN, replica)
}

/// Uniform double in `[0, 1)` from the top 53 bits of a draw.
pub fn uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws 64 independent Bernoulli(`q`) bits at once.
///
/// Each lane compares a lazily generated uniform `U` with the binary
/// expansion of `q`: the `k`-th draw supplies the `k`-th bit of every lane's
/// `U`, lanes whose bit differs from `q`'s are decided, and the rest carry
/// on. The bit is `U < q`, so `P(bit) = q` exactly for the double `q`, at an
/// expected cost of about 7.3 draws per word.
#[derive(Clone, Debug)]
pub struct MinusSampler {
    digits: Vec<bool>,
    certain: bool,
}

impl MinusSampler {
    pub fn new(q: f64) -> Self {
        assert!((0.0..=1.0).contains(&q), "probability out of range: {q}");
        let mut digits = Vec::new();
        if q == 1.0 {
            return Self {
                digits,
                certain: true,
            };
        }
        let mut x = q;
        while x > 0.0 {
            x *= 2.0;
            if x >= 1.0 {
                digits.push(true);
                x -= 1.0;
            } else {
                digits.push(false);
            }
        }
        Self {
            digits,
            certain: false,
        }
    }

    /// `true` when no randomness is needed (`q` is 0 or 1).
    pub fn is_degenerate(&self) -> bool {
        self.constant_word().is_some()
    }

    /// The word every draw returns when no randomness is needed.
    pub fn constant_word(&self) -> Option<u64> {
        match (self.certain, self.digits.is_empty()) {
            (true, _) => Some(u64::MAX),
            (false, true) => Some(0),
            _ => None,
        }
    }

    pub fn word<R: RngCore>(&self, rng: &mut R) -> u64 {
        if self.certain {
            return u64::MAX;
        }
        let mut undecided = u64::MAX;
        let mut hits = 0u64;
        for &digit in &self.digits {
            let u = rng.next_u64();
            if digit {
                hits |= undecided & !u;
                undecided &= u;
            } else {
                undecided &= !u;
            }
            if undecided == 0 {
                break;
            }
        }
        hits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a = field_stream(7, 3, 11).next_u64();
        assert_eq!(a, field_stream(7, 3, 11).next_u64());
        assert_ne!(a, field_stream(7, 3, 12).next_u64());
        assert_ne!(a, field_stream(7, 4, 11).next_u64());
        assert_ne!(a, field_stream(8, 3, 11).next_u64());
        assert_ne!(
            replica_stream(7, 0).next_u64(),
            stream_rng(7, FIELD_DOMAIN, 0).next_u64()
        );
    }

    #[test]
    fn degenerate_and_fair() {
        let s = MinusSampler::new(0.0);
        assert!(s.is_degenerate());
        let mut rng = replica_stream(1, 1);
        assert_eq!(s.word(&mut rng), 0);

        // q = 1/2 costs one draw and returns its complement.
        let s = MinusSampler::new(0.5);
        let mut a = replica_stream(1, 2);
        let mut b = replica_stream(1, 2);
        assert_eq!(s.word(&mut a), !b.next_u64());

        let s = MinusSampler::new(1.0);
        let mut rng = replica_stream(1, 3);
        for _ in 0..100 {
            assert_eq!(s.word(&mut rng), u64::MAX);
        }
    }

    #[test]
    fn bernoulli_frequency() {
        for &q in &[0.093_873_801_821_882_2, 0.3, 0.437_5, 0.05] {
            let s = MinusSampler::new(q);
            let mut rng = replica_stream(99, 0);
            let words = 20_000u32;
            let ones: u32 = (0..words).map(|_| s.word(&mut rng).count_ones()).sum();
            let n = f64::from(words) * 64.0;
            let freq = f64::from(ones) / n;
            let se = (q * (1.0 - q) / n).sqrt();
            assert!((freq - q).abs() < 4.0 * se, "q={q} freq={freq}");
        }
    }

    #[test]
    fn lanes_are_independent() {
        // Adjacent lanes must not be correlated: P(both) = q².
        let q = 0.3;
        let s = MinusSampler::new(q);
        let mut rng = replica_stream(5, 0);
        let words = 40_000u32;
        let both: u32 = (0..words)
            .map(|_| {
                let w = s.word(&mut rng);
                (w & (w >> 1) & 0x5555_5555_5555_5555).count_ones()
            })
            .sum();
        let n = f64::from(words) * 32.0;
        let freq = f64::from(both) / n;
        let p = q * q;
        let se = (p * (1.0 - p) / n).sqrt();
        assert!((freq - p).abs() < 4.0 * se, "freq={freq}");
    }
}
