//! Signed b-adic multiplicative cascades.
//!
//! A cascade assigns an i.i.d. sign `ε(w)` to every node `w` of the b-ary
//! tree and builds the piecewise-linear martingale `B_n` whose increment over
//! the generation-`n` cell `I_w` is `ε(w_1)…ε(w_1…w_n)·b^{-nH}`. The crate
//! covers the whole verification chain for these processes:
//!
//! * [`cascade`]: parameters, reproducible sign fields, sample paths,
//!   normalisations and structural identities;
//! * [`moments`]: exact moment tables of the total mass `Z_n = B_n(1)`,
//!   their limits, the normalised recursions and a brute-force oracle;
//! * [`charfn`]: the characteristic function of the limit `Z` through its
//!   functional equation, Fourier inversion to a density, and tail fits;
//! * [`stats`]: Kolmogorov–Smirnov and moment based Monte-Carlo checks;
//! * [`fractal`]: Hölder exponent and box-dimension estimators.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. The `parallel` feature spreads replica generation over rayon;
//! results do not depend on the schedule.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod cascade;
pub mod charfn;
mod error;
pub mod fractal;
pub mod moments;
mod regression;
pub mod stats;

pub use crate::cascade::{
    build_path, build_path_decimated, generate_leaf_signs, generate_leaf_signs_with,
    normalize_path, sample_terminal, verify_self_similarity, CascadeParams, FieldOptions, Hurst,
    LeafSignField, PathKind, Regime, SamplePath,
};
pub use crate::error::{Error, Result};
pub use crate::regression::LinearFit;
