use alloc::format;

use crate::error::{Error, Result};

/// Hurst parameter of the weight `W = ε·b^{-H}`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Hurst {
    /// A finite value `H ≤ 1`; negative values are legal.
    Finite(f64),
    /// The `H = -∞` limit: fair signs and unit normalisation.
    Symmetric,
}

impl Hurst {
    pub fn finite(self) -> Option<f64> {
        match self {
            Hurst::Finite(h) => Some(h),
            Hurst::Symmetric => None,
        }
    }
}

impl core::fmt::Display for Hurst {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Hurst::Finite(h) => write!(f, "{h}"),
            Hurst::Symmetric => f.write_str("symmetric"),
        }
    }
}

/// Phase of the construction, fixed by `H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    /// `1/2 < H ≤ 1`: `B_n` converges almost surely.
    Convergent,
    /// `H = 1/2`: divergent, normalised by `σ√n`.
    Critical,
    /// Finite `H < 1/2`: divergent, normalised by `σ·b^{n(1/2-H)}`.
    Divergent,
    /// `H = -∞`.
    Symmetric,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Convergent => "convergent",
            Regime::Critical => "critical",
            Regime::Divergent => "divergent",
            Regime::Symmetric => "symmetric",
        }
    }

    /// `true` for the regimes where `B_n` must be renormalised (`H ≤ 1/2`).
    pub fn is_diffusive(self) -> bool {
        !matches!(self, Regime::Convergent)
    }
}

/// Base, Hurst parameter and seed of a cascade.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CascadeParams {
    base: u32,
    hurst: Hurst,
    seed: u64,
}

impl CascadeParams {
    pub fn new(base: u32, hurst: Hurst, seed: u64) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidBase(base));
        }
        if let Hurst::Finite(h) = hurst {
            if !(h <= 1.0) || !h.is_finite() {
                return Err(Error::InvalidHurst(h));
            }
        }
        Ok(Self { base, hurst, seed })
    }

    /// Shorthand for a finite `H`.
    pub fn finite(base: u32, hurst: f64, seed: u64) -> Result<Self> {
        Self::new(base, Hurst::Finite(hurst), seed)
    }

    pub fn symmetric(base: u32, seed: u64) -> Result<Self> {
        Self::new(base, Hurst::Symmetric, seed)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_hurst(self, hurst: Hurst) -> Result<Self> {
        Self::new(self.base, hurst, self.seed)
    }

    pub fn regime(&self) -> Regime {
        match self.hurst {
            Hurst::Symmetric => Regime::Symmetric,
            Hurst::Finite(h) if h > 0.5 => Regime::Convergent,
            Hurst::Finite(h) if h == 0.5 => Regime::Critical,
            Hurst::Finite(_) => Regime::Divergent,
        }
    }

    /// `E(ε) = b^{H-1}`; zero for the symmetric sentinel.
    pub fn epsilon_mean(&self) -> f64 {
        match self.hurst {
            Hurst::Finite(h) => libm::pow(f64::from(self.base), h - 1.0),
            Hurst::Symmetric => 0.0,
        }
    }

    /// Probabilities `(p⁺, p⁻)` of `ε = +1` and `ε = -1`.
    pub fn epsilon_probabilities(&self) -> (f64, f64) {
        match self.hurst {
            Hurst::Symmetric => (0.5, 0.5),
            Hurst::Finite(_) => {
                let m = self.epsilon_mean();
                ((1.0 + m) / 2.0, (1.0 - m) / 2.0)
            }
        }
    }

    pub fn p_plus(&self) -> f64 {
        self.epsilon_probabilities().0
    }

    pub fn p_minus(&self) -> f64 {
        self.epsilon_probabilities().1
    }

    /// Magnitude `b^{-H}` of one weight; the symmetric walk is unscaled.
    pub fn weight(&self) -> f64 {
        match self.hurst {
            Hurst::Finite(h) => libm::pow(f64::from(self.base), -h),
            Hurst::Symmetric => 1.0,
        }
    }

    /// Magnitude `b^{-nH}` of a generation-`n` increment of the raw path.
    ///
    /// For the symmetric sentinel the raw path is the unscaled walk `S`, so
    /// this is 1.
    pub fn increment_scale(&self, depth: u32) -> f64 {
        match self.hurst {
            Hurst::Finite(h) => libm::pow(f64::from(self.base), -(f64::from(depth) * h)),
            Hurst::Symmetric => 1.0,
        }
    }

    /// Number of cells `b^depth`, if it fits in a `u64`.
    pub fn cell_count(&self, depth: u32) -> Result<u64> {
        u64::from(self.base)
            .checked_pow(depth)
            .ok_or_else(|| Error::Capacity {
                what: "cell count",
                requested: u128::MAX,
                budget: u128::from(u64::MAX),
            })
    }

    pub(crate) fn require(&self, regime: Regime) -> Result<()> {
        if self.regime() == regime {
            Ok(())
        } else {
            Err(Error::RegimeMismatch {
                expected: regime.name(),
                found: self.regime(),
            })
        }
    }

    pub(crate) fn require_diffusive(&self) -> Result<()> {
        if self.regime().is_diffusive() {
            Ok(())
        } else {
            Err(Error::RegimeMismatch {
                expected: "critical, divergent or symmetric",
                found: self.regime(),
            })
        }
    }

    /// One-line description used in report headers.
    pub fn label(&self) -> alloc::string::String {
        format!("b={} H={} seed={}", self.base, self.hurst, self.seed)
    }
}
