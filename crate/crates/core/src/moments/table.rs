use alloc::vec::Vec;

use super::extfloat::ExtFloat;
use crate::cascade::CascadeParams;

/// Status of a table entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EntryFlag {
    /// Finite-`n` value representable as `f64`.
    Finite,
    /// `n → ∞` limit.
    Limit,
    /// Finite-`n` value beyond the `f64` range; the extended value is kept.
    Overflow,
}

impl EntryFlag {
    pub fn name(self) -> &'static str {
        match self {
            EntryFlag::Finite => "finite",
            EntryFlag::Limit => "limit",
            EntryFlag::Overflow => "overflow",
        }
    }
}

/// Which moments a table holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TableKind {
    /// `E(Z_n^q)`.
    Raw,
    /// `M_n^{(q)} = E(X_n(1)^q)`.
    Normalized,
    /// `E(Z^q)` rescaled by `σ_H^{-q}`.
    Tilde,
}

/// One cell of a [`MomentTable`]; `n` is `None` on the limit row.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentEntry {
    pub n: Option<u32>,
    pub q: u32,
    pub value: f64,
    pub log2_abs: f64,
    pub flag: EntryFlag,
}

/// Moments indexed by depth `n ∈ n_min..=n_max` and order `q ∈ 1..=q_max`,
/// with an optional limit row.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentTable {
    params: CascadeParams,
    kind: TableKind,
    n_min: u32,
    q_max: u32,
    rows: Vec<Vec<ExtFloat>>,
    limit: Option<Vec<f64>>,
    ratios: Option<Vec<f64>>,
}

impl MomentTable {
    pub(crate) fn new(
        params: CascadeParams,
        kind: TableKind,
        n_min: u32,
        q_max: u32,
        rows: Vec<Vec<ExtFloat>>,
    ) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == q_max as usize));
        Self {
            params,
            kind,
            n_min,
            q_max,
            rows,
            limit: None,
            ratios: None,
        }
    }

    pub(crate) fn with_limit(mut self, limit: Vec<f64>) -> Self {
        debug_assert_eq!(limit.len(), self.q_max as usize);
        self.limit = Some(limit);
        self
    }

    pub(crate) fn with_ratios(mut self, ratios: Vec<f64>) -> Self {
        self.ratios = Some(ratios);
        self
    }

    pub fn params(&self) -> &CascadeParams {
        &self.params
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn n_min(&self) -> u32 {
        self.n_min
    }

    pub fn n_max(&self) -> u32 {
        self.n_min + self.rows.len() as u32 - 1
    }

    pub fn q_max(&self) -> u32 {
        self.q_max
    }

    /// Extended-range value at `(n, q)`.
    pub fn ext(&self, n: u32, q: u32) -> Option<ExtFloat> {
        if q == 0 || q > self.q_max || n < self.n_min {
            return None;
        }
        self.rows
            .get((n - self.n_min) as usize)
            .map(|row| row[q as usize - 1])
    }

    /// Value at `(n, q)` as `f64` (infinite when flagged as overflow).
    pub fn value(&self, n: u32, q: u32) -> Option<f64> {
        self.ext(n, q).map(ExtFloat::to_f64)
    }

    pub fn flag(&self, n: u32, q: u32) -> Option<EntryFlag> {
        self.ext(n, q).map(|x| {
            if x.fits_f64() {
                EntryFlag::Finite
            } else {
                EntryFlag::Overflow
            }
        })
    }

    /// Limit value of order `q`, when the table carries one.
    pub fn limit(&self, q: u32) -> Option<f64> {
        let limit = self.limit.as_ref()?;
        (q >= 1 && q <= self.q_max).then(|| limit[q as usize - 1])
    }

    /// The factors `r_n` of the normalised recursion, indexed from `n_min`.
    pub fn ratios(&self) -> Option<&[f64]> {
        self.ratios.as_deref()
    }

    /// Row-major entries, the limit row last.
    pub fn entries(&self) -> impl Iterator<Item = MomentEntry> + '_ {
        let finite = self.rows.iter().enumerate().flat_map(move |(i, row)| {
            row.iter().enumerate().map(move |(j, x)| MomentEntry {
                n: Some(self.n_min + i as u32),
                q: j as u32 + 1,
                value: x.to_f64(),
                log2_abs: x.log2_abs(),
                flag: if x.fits_f64() {
                    EntryFlag::Finite
                } else {
                    EntryFlag::Overflow
                },
            })
        });
        let limit = self.limit.iter().flat_map(|row| {
            row.iter().enumerate().map(|(j, &v)| MomentEntry {
                n: None,
                q: j as u32 + 1,
                value: v,
                log2_abs: libm::log2(v.abs()),
                flag: EntryFlag::Limit,
            })
        });
        finite.chain(limit)
    }

    pub fn has_overflow(&self) -> bool {
        self.rows.iter().flatten().any(|x| !x.fits_f64())
    }
}
