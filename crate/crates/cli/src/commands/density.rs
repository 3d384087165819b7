use fmp_core::charfn::{decay_fit, density_of_z, CharFnGrid, DecayFit, Density, DensitySpec};
use fmp_core::moments::second_moment_fixed_point;
use fmp_core::stats::{Check, Observation};
use fmp_core::Regime;
use serde::Serialize;

use super::{announce, check, print_checks, Ctx};
use crate::output::{real, write_csv, write_json};
use crate::settings::Format;
use crate::{CliError, Outcome};

pub const MASS_TOLERANCE: f64 = 1e-6;
pub const MEAN_TOLERANCE: f64 = 1e-4;
pub const SECOND_MOMENT_TOLERANCE: f64 = 1e-3;
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;
/// Exponent of the reported `E|Z|^{-γ}`.
pub const NEGATIVE_MOMENT_GAMMA: f64 = 0.5;

#[derive(Serialize)]
struct Summary {
    t_max: f64,
    dt: f64,
    depth: u32,
    x_points: usize,
    mass: f64,
    mean: f64,
    second_moment: f64,
    second_moment_exact: f64,
    tail_magnitude: f64,
    max_imaginary_residue: f64,
    decay: Option<DecayFit>,
    decay_error: Option<String>,
    observations: Vec<Observation>,
    checks: Vec<Check>,
    pass: bool,
}

pub(super) fn run(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let params = ctx.settings.params()?;
    if params.regime() != Regime::Convergent {
        return Err(CliError::regime("density", params.regime()));
    }
    let s = &ctx.settings;
    let spec = DensitySpec {
        t_max: s.t_max,
        dt: s.dt,
        x_range: None,
        x_points: s.x_points,
        depth: s.depth,
    };
    ctx.formats(&[Format::Csv, Format::Json]);
    let meta = ctx.meta();

    let density = density_of_z(&params, &spec)?;
    let exact = second_moment_fixed_point(&params)?;
    let (decay, decay_error) = match decay_fit(&params, None, density.depth) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let rho = decay.as_ref().map_or(f64::NAN, |d| d.rho);
    let checks = vec![
        check("mass_error", (density.mass - 1.0).abs(), MASS_TOLERANCE),
        check("mean_error", (density.mean - 1.0).abs(), MEAN_TOLERANCE),
        check("second_moment_error", (density.second_moment - exact).abs(), SECOND_MOMENT_TOLERANCE),
        check("max_imaginary_residue", density.max_imaginary_residue, IMAGINARY_TOLERANCE),
        Check {
            name: "decay_rho".into(),
            value: rho,
            threshold: 1.0,
            pass: rho > 0.0 && rho < 1.0,
        },
    ];
    let pass = checks.iter().all(|c| c.pass);
    let mut observations = vec![
        Observation {
            name: format!("negative_moment_{NEGATIVE_MOMENT_GAMMA}"),
            value: density.negative_moment(NEGATIVE_MOMENT_GAMMA),
        },
        Observation {
            name: "min_density".into(),
            value: density.min_density(),
        },
    ];
    if let Some(d) = &decay {
        observations.push(Observation {
            name: "decay_r_squared".into(),
            value: d.fit.r_squared,
        });
    }
    println!(
        "T = {}, dt = {:.6}, depth {}, mass {:.12}, mean {:.12}, E Z^2 {:.10} (exact {exact:.10})",
        density.t_max, density.dt, density.depth, density.mass, density.mean, density.second_moment
    );
    match (&decay, &decay_error) {
        (Some(d), _) => println!("decay: rho = {:.6}, R^2 = {:.4}", d.rho, d.fit.r_squared),
        (None, Some(e)) => println!("decay fit unavailable: {e}"),
        _ => {}
    }
    print_checks(&params.label(), &checks);

    if ctx.wants(Format::Csv) {
        announce(write_density(ctx, &meta, &density)?);
        let grid = CharFnGrid::build(&params, density.t_max, density.dt, density.depth)?;
        let rows = grid.t().iter().zip(grid.values()).map(|(t, v)| [real(*t), real(v.re), real(v.im)]);
        announce(write_csv(&ctx.path("charfn.csv"), &meta, &["t", "re", "im"], rows)?);
    }
    if ctx.wants(Format::Json) {
        let summary = Summary {
            t_max: density.t_max,
            dt: density.dt,
            depth: density.depth,
            x_points: density.x.len(),
            mass: density.mass,
            mean: density.mean,
            second_moment: density.second_moment,
            second_moment_exact: exact,
            tail_magnitude: density.tail_magnitude,
            max_imaginary_residue: density.max_imaginary_residue,
            decay,
            decay_error,
            observations,
            checks,
            pass,
        };
        announce(write_json(&ctx.path("density.json"), &meta, &summary)?);
    }
    Ok(Outcome::from_pass(pass))
}

fn write_density(ctx: &Ctx, meta: &crate::output::Meta, d: &Density) -> Result<std::path::PathBuf, CliError> {
    let rows = d
        .x
        .iter()
        .zip(&d.density)
        .zip(&d.cdf)
        .map(|((x, f), c)| [real(*x), real(*f), real(*c)]);
    write_csv(&ctx.path("density.csv"), meta, &["x", "density", "cdf"], rows)
}
