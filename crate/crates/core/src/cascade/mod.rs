//! Sign fields, sample paths and their structural identities.
//!
//! The generation-`k` nodes of the `b`-ary tree are indexed in grid order:
//! node `i` owns the cell `[i·b^{-k}, (i+1)·b^{-k}]` and its children are
//! `b·i .. b·i + b - 1`. Sign vectors are bit-packed, see [`SignBits`].

mod bits;
mod checks;
mod field;
mod params;
mod path;
pub mod rng;
mod terminal;

pub use bits::SignBits;
pub use checks::{
    increment_law_defect, martingale_defect, verify_self_similarity, MartingaleReport,
    SelfSimilarityReport, MARTINGALE_TOLERANCE, SELF_SIMILARITY_TOLERANCE,
};
pub use field::{generate_leaf_signs, generate_leaf_signs_with, FieldOptions, LeafSignField};
pub use params::{CascadeParams, Hurst, Regime};
pub use path::{
    build_path, build_path_decimated, decimation_stride, evaluate, normalization_divisor,
    normalize_path, PathKind, SamplePath,
};
pub use terminal::{
    sample_terminal, sample_terminal_with_budget, ReplicaSampler, DEFAULT_LEAF_BUDGET,
};

pub(crate) use terminal::check_budget;

/// The regime of a parameter set.
pub fn regime_of(params: &CascadeParams) -> Regime {
    params.regime()
}

/// `(p⁺, p⁻)` of a parameter set.
pub fn epsilon_probabilities(params: &CascadeParams) -> (f64, f64) {
    params.epsilon_probabilities()
}
