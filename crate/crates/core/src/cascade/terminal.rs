use alloc::vec::Vec;

use super::bits::{lane_mask, SignBits};
use super::field::expand_into;
use super::params::CascadeParams;
use super::rng::{replica_stream, MinusSampler};
use crate::error::{Error, Result};

/// Default bound on `reps·b^n`, the number of leaf signs drawn by one call.
pub const DEFAULT_LEAF_BUDGET: u128 = 1 << 40;

/// Largest depth a replica may have: its leaves are held in memory.
pub const MAX_REPLICA_DEPTH_CELLS: u64 = 1 << 32;

/// Draws independent cascades, one replica stream each.
///
/// Replica `r` reads its raw signs from the stream `r` of the replica
/// domain, level by level and word by word, so any replica can be redrawn
/// on its own.
#[derive(Clone, Debug)]
pub struct ReplicaSampler {
    params: CascadeParams,
    depth: u32,
    sampler: MinusSampler,
}

impl ReplicaSampler {
    pub fn new(params: &CascadeParams, depth: u32) -> Result<Self> {
        let cells = params.cell_count(depth)?;
        if cells > MAX_REPLICA_DEPTH_CELLS {
            return Err(Error::Capacity {
                what: "leaves per replica",
                requested: u128::from(cells),
                budget: u128::from(MAX_REPLICA_DEPTH_CELLS),
            });
        }
        Ok(Self {
            params: *params,
            depth,
            sampler: MinusSampler::new(params.p_minus()),
        })
    }

    pub fn params(&self) -> &CascadeParams {
        &self.params
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Generates replica `r`, handing `boldε` of every level `0..=depth` to
    /// `visit` in order.
    pub fn run(&self, replica: u64, mut visit: impl FnMut(u32, &SignBits)) {
        let base = self.params.base();
        let mut rng = replica_stream(self.params.seed(), replica);
        let constant = self.sampler.constant_word();
        let mut current = SignBits::plus(1);
        let mut scratch = Vec::new();
        visit(0, &current);
        for level in 1..=self.depth {
            let child_len = current.len() * u64::from(base);
            expand_into(&current, base, &mut scratch, |j| {
                let w = match constant {
                    Some(w) => w,
                    None => self.sampler.word(&mut rng),
                };
                w & lane_mask(child_len, j)
            });
            let next = SignBits::from_words(child_len, core::mem::take(&mut scratch));
            scratch = core::mem::replace(&mut current, next).into_words();
            visit(level, &current);
        }
    }

    /// Leaf signs of replica `r`.
    pub fn leaves(&self, replica: u64) -> SignBits {
        let mut out = SignBits::plus(0);
        self.run(replica, |level, bits| {
            if level == self.depth {
                out = bits.clone();
            }
        });
        out
    }

    /// `Z_n = B_n(1)` of replica `r`.
    pub fn terminal(&self, replica: u64) -> f64 {
        let mut z = 0.0;
        let scale = self.params.increment_scale(self.depth);
        self.run(replica, |level, bits| {
            if level == self.depth {
                z = scale * bits.sum_in(0, bits.len()) as f64;
            }
        });
        z
    }

    /// Applies `f` to replicas `0..reps`, in parallel when enabled; the
    /// output order is the replica order.
    pub fn map<T: Send>(&self, reps: u64, f: impl Fn(&Self, u64) -> T + Sync + Send) -> Vec<T> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..reps).into_par_iter().map(|r| f(self, r)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..reps).map(|r| f(self, r)).collect()
        }
    }
}

pub(crate) fn check_budget(params: &CascadeParams, depth: u32, reps: u64, budget: u128) -> Result<()> {
    let cells = params.cell_count(depth)?;
    let work = u128::from(cells) * u128::from(reps);
    if work > budget {
        return Err(Error::Capacity {
            what: "leaf draws (reps x cells)",
            requested: work,
            budget,
        });
    }
    Ok(())
}

/// `reps` independent draws of `Z_n = B_n(1)`.
pub fn sample_terminal(params: &CascadeParams, n: u32, reps: u64) -> Result<Vec<f64>> {
    sample_terminal_with_budget(params, n, reps, DEFAULT_LEAF_BUDGET)
}

pub fn sample_terminal_with_budget(
    params: &CascadeParams,
    n: u32,
    reps: u64,
    budget: u128,
) -> Result<Vec<f64>> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    check_budget(params, n, reps, budget)?;
    let sampler = ReplicaSampler::new(params, n)?;
    Ok(sampler.map(reps, |s, r| s.terminal(r)))
}
