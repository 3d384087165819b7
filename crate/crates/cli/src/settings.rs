use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fmp_core::stats::{SmallHSource, Thresholds};
use fmp_core::{CascadeParams, Hurst};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FMP_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "fmp-out";

/// `H` as written on the command line or in a config file: a number, or
/// `symmetric` / `-inf` for the fair-sign limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HurstRepr", into = "HurstRepr")]
pub struct HurstValue(pub Hurst);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum HurstRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<HurstRepr> for HurstValue {
    type Error = String;

    fn try_from(r: HurstRepr) -> Result<Self, String> {
        match r {
            HurstRepr::Number(h) => Ok(Self(Hurst::Finite(h))),
            HurstRepr::Text(s) => s.parse(),
        }
    }
}

impl From<HurstValue> for HurstRepr {
    fn from(h: HurstValue) -> Self {
        match h.0 {
            Hurst::Finite(x) => HurstRepr::Number(x),
            Hurst::Symmetric => HurstRepr::Text("symmetric".into()),
        }
    }
}

impl FromStr for HurstValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "symmetric" | "sym" | "-inf" => Ok(Self(Hurst::Symmetric)),
            t => t
                .parse::<f64>()
                .map(|h| Self(Hurst::Finite(h)))
                .map_err(|_| format!("expected a number or `symmetric`, got `{t}`")),
        }
    }
}

impl fmt::Display for HurstValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CltKind {
    /// `X_n(1)` against `N(0,1)` (`H <= 1/2`).
    Terminal,
    /// `σ_H^{-1} Z_n` along a sequence of `H` decreasing to 1/2.
    SmallH,
    /// Joint law of the generation-`p` increments (`H <= 1/2`).
    Increments,
    /// `(B - B_n)(1)` rescaled (`H > 1/2`).
    Residual,
    /// Sample moments of `Z_n` against the exact table.
    Moments,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SourceArg {
    Simulated,
    LimitLaw,
}

impl From<SourceArg> for SmallHSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Simulated => SmallHSource::Simulated,
            SourceArg::LimitLaw => SmallHSource::LimitLaw,
        }
    }
}

macro_rules! settings {
    ($($(#[$doc:meta])* $field:ident : $ty:ty),* $(,)?) => {
        /// Every tunable of every command. Files, flags and defaults are
        /// layered field by field; the resolved value is echoed into each
        /// output's metadata.
        #[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct Settings {
            $($(#[$doc])* #[serde(skip_serializing_if = "Option::is_none")] pub $field: Option<$ty>,)*
        }

        impl Settings {
            /// `top` wins wherever it is set.
            pub fn overlay(self, top: Settings) -> Settings {
                Settings { $($field: top.$field.or(self.$field),)* }
            }
        }
    };
}

settings! {
    #[serde(rename = "b")]
    base: u32,
    #[serde(rename = "H")]
    hurst: HurstValue,
    seed: u64,
    /// Depths `n` (one or several, command dependent).
    depths: Vec<u32>,
    reps: u64,
    out_dir: PathBuf,
    formats: Vec<Format>,
    /// Largest number of path segments written per depth.
    max_points: u64,
    normalize: bool,
    q: u32,
    p: u32,
    gaussian: bool,
    sigma: bool,
    m: u32,
    kind: CltKind,
    hursts: Vec<f64>,
    source: SourceArg,
    j_min: u32,
    j_max: u32,
    p_min: u32,
    p_max: u32,
    points: usize,
    t_max: f64,
    dt: f64,
    x_points: usize,
    depth: u32,
    ks_diffusive: f64,
    ks_critical: f64,
    ks_residual: f64,
    z_band: f64,
    dimension_tolerance: f64,
    exponent_tolerance: f64,
    holder_tolerance: f64,
    holder_spread: f64,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Output directory: flag or file, else the environment, else
    /// [`DEFAULT_OUT_DIR`].
    pub fn resolve_out_dir(&mut self) -> PathBuf {
        let dir = self.out_dir.clone().unwrap_or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
        });
        self.out_dir = Some(dir.clone());
        dir
    }

    /// `self.field`, or `default` written back so the echo is complete.
    pub fn get_or<T: Clone>(slot: &mut Option<T>, default: T) -> T {
        slot.get_or_insert(default).clone()
    }

    pub fn params(&mut self) -> Result<CascadeParams, CliError> {
        let hurst = self
            .hurst
            .ok_or_else(|| CliError::Usage("missing --H (a number <= 1, or `symmetric`)".into()))?;
        let base = Self::get_or(&mut self.base, 2);
        let seed = Self::get_or(&mut self.seed, 0);
        Ok(CascadeParams::new(base, hurst.0, seed)?)
    }

    pub fn thresholds(&mut self) -> Thresholds {
        let d = Thresholds::default();
        Thresholds {
            ks_diffusive: Self::get_or(&mut self.ks_diffusive, d.ks_diffusive),
            ks_critical: Self::get_or(&mut self.ks_critical, d.ks_critical),
            ks_residual: Self::get_or(&mut self.ks_residual, d.ks_residual),
            z_band: Self::get_or(&mut self.z_band, d.z_band),
        }
    }

    pub fn wants(&self, format: Format) -> bool {
        self.formats.as_ref().is_some_and(|f| f.contains(&format))
    }
}
