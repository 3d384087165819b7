use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::settings::{CltKind, Format, HurstValue, Settings, SourceArg};

#[derive(Debug, Parser)]
#[command(name = "fmp", version, about = "Signed b-adic multiplicative cascades: simulation and checks")]
pub struct Cli {
    /// TOML file of settings; flags on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output directory [default: $FMP_OUT_DIR, else ./fmp-out].
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample paths B_n (or their normalisation) per depth.
    Simulate(SimulateArgs),
    /// Exact moment tables, normalising constants and Gaussian moments.
    Moments(MomentsArgs),
    /// Monte-Carlo limit-law checks, as JSON reports.
    Clt(CltArgs),
    /// Box dimension and Hölder exponent estimates.
    Fractal(FractalArgs),
    /// Density of the limit Z by Fourier inversion (H > 1/2).
    Density(DensityArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Moments(_) => "moments",
            Command::Clt(_) => "clt",
            Command::Fractal(_) => "fractal",
            Command::Density(_) => "density",
        }
    }

    /// The flags given, as a settings layer.
    pub fn settings(&self) -> Settings {
        match self {
            Command::Simulate(a) => a.settings(),
            Command::Moments(a) => a.settings(),
            Command::Clt(a) => a.settings(),
            Command::Fractal(a) => a.settings(),
            Command::Density(a) => a.settings(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Branching number b.
    #[arg(long = "b")]
    pub base: Option<u32>,
    /// Hurst parameter H <= 1, or `symmetric`.
    #[arg(long = "H", allow_hyphen_values = true)]
    pub hurst: Option<HurstValue>,
    /// Shorthand for `--H symmetric`.
    #[arg(long, conflicts_with = "hurst")]
    pub symmetric: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output formats, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub formats: Option<Vec<Format>>,
}

impl ModelArgs {
    fn settings(&self) -> Settings {
        Settings {
            base: self.base,
            hurst: if self.symmetric {
                Some(HurstValue(fmp_core::Hurst::Symmetric))
            } else {
                self.hurst
            },
            seed: self.seed,
            formats: self.formats.clone(),
            ..Default::default()
        }
    }
}

fn flag(set: bool) -> Option<bool> {
    set.then_some(true)
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Depths to draw [default: 8,12,18,27].
    #[arg(long, alias = "n", value_delimiter = ',')]
    pub depths: Option<Vec<u32>>,
    /// Write the regime's normalised path instead of B_n.
    #[arg(long)]
    pub normalize: bool,
    /// Most segments written per path [default: 65536].
    #[arg(long)]
    pub max_points: Option<u64>,
}

impl SimulateArgs {
    fn settings(&self) -> Settings {
        Settings {
            depths: self.depths.clone(),
            normalize: flag(self.normalize),
            max_points: self.max_points,
            ..self.model.settings()
        }
    }
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Largest generation n [default: 20].
    #[arg(long = "n")]
    pub n: Option<u32>,
    /// Largest order q [default: 6].
    #[arg(long)]
    pub q: Option<u32>,
    /// Gaussian even moments by induction, up to order 2p.
    #[arg(long)]
    pub gaussian: bool,
    #[arg(long, requires = "gaussian")]
    pub p: Option<u32>,
    /// Print the normalising constants.
    #[arg(long)]
    pub sigma: bool,
}

impl MomentsArgs {
    fn settings(&self) -> Settings {
        Settings {
            depths: self.n.map(|n| vec![n]),
            q: self.q,
            gaussian: flag(self.gaussian),
            p: self.p,
            sigma: flag(self.sigma),
            ..self.model.settings()
        }
    }
}

#[derive(Debug, Args)]
pub struct CltArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Which check [default: terminal for H <= 1/2, residual above].
    #[arg(long, value_enum)]
    pub kind: Option<CltKind>,
    /// Depths, comma separated [default: 8,12,16; 16 for small-h and increments; 1,2,4 for residual].
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    #[arg(long)]
    pub reps: Option<u64>,
    /// H sequence for `small-h` [default: 0.8,0.65,0.55,0.51].
    #[arg(long, value_delimiter = ',')]
    pub hursts: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub source: Option<SourceArg>,
    /// Generation of the increments for `increments` [default: 4].
    #[arg(long)]
    pub p: Option<u32>,
    /// Extra levels standing in for the limit in `residual` [default: 12].
    #[arg(long)]
    pub m: Option<u32>,
    /// Largest order for `moments` [default: 4].
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub ks_diffusive: Option<f64>,
    #[arg(long)]
    pub ks_critical: Option<f64>,
    #[arg(long)]
    pub ks_residual: Option<f64>,
    /// Width of moment bands in standard errors.
    #[arg(long)]
    pub z_band: Option<f64>,
}

impl CltArgs {
    fn settings(&self) -> Settings {
        Settings {
            kind: self.kind,
            depths: self.n.clone(),
            reps: self.reps,
            hursts: self.hursts.clone(),
            source: self.source,
            p: self.p,
            m: self.m,
            q: self.q,
            ks_diffusive: self.ks_diffusive,
            ks_critical: self.ks_critical,
            ks_residual: self.ks_residual,
            z_band: self.z_band,
            ..self.model.settings()
        }
    }
}

#[derive(Debug, Args)]
pub struct FractalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Path depth [default: 18].
    #[arg(long = "n")]
    pub n: Option<u32>,
    /// Box and window scales j_min..=j_max [default: 4..=12].
    #[arg(long)]
    pub j_min: Option<u32>,
    #[arg(long)]
    pub j_max: Option<u32>,
    /// Increment generations p_min..=p_max [default: 4..=12].
    #[arg(long)]
    pub p_min: Option<u32>,
    #[arg(long)]
    pub p_max: Option<u32>,
    /// Points of the Hölder profile [default: 64].
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub dimension_tolerance: Option<f64>,
    #[arg(long)]
    pub exponent_tolerance: Option<f64>,
    #[arg(long)]
    pub holder_tolerance: Option<f64>,
    #[arg(long)]
    pub holder_spread: Option<f64>,
}

impl FractalArgs {
    fn settings(&self) -> Settings {
        Settings {
            depths: self.n.map(|n| vec![n]),
            j_min: self.j_min,
            j_max: self.j_max,
            p_min: self.p_min,
            p_max: self.p_max,
            points: self.points,
            dimension_tolerance: self.dimension_tolerance,
            exponent_tolerance: self.exponent_tolerance,
            holder_tolerance: self.holder_tolerance,
            holder_spread: self.holder_spread,
            ..self.model.settings()
        }
    }
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Fourier cut-off T [default: automatic].
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Abscissae of the density grid [default: 4096].
    #[arg(long)]
    pub x_points: Option<usize>,
    /// Iteration depth of φ [default: adaptive].
    #[arg(long)]
    pub depth: Option<u32>,
}

impl DensityArgs {
    fn settings(&self) -> Settings {
        Settings {
            t_max: self.t_max,
            dt: self.dt,
            x_points: self.x_points,
            depth: self.depth,
            ..self.model.settings()
        }
    }
}
