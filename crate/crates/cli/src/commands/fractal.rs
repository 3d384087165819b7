use fmp_core::fractal::{box_count, box_dimension, holder_profile, increment_scaling_exponent, DimensionFit, HolderProfile};
use fmp_core::stats::Check;
use fmp_core::{build_path, generate_leaf_signs, Regime};
use serde::Serialize;

use super::{announce, check, print_checks, Ctx};
use crate::output::{real, write_csv, write_json};
use crate::settings::{Format, Settings};
use crate::{CliError, Outcome};

pub const DEFAULT_N: u32 = 18;
pub const DEFAULT_SCALES: (u32, u32) = (4, 12);
pub const DEFAULT_POINTS: usize = 64;
pub const DEFAULT_DIMENSION_TOLERANCE: f64 = 0.1;
pub const DEFAULT_EXPONENT_TOLERANCE: f64 = 0.05;
pub const DEFAULT_HOLDER_TOLERANCE: f64 = 0.1;
pub const DEFAULT_HOLDER_SPREAD: f64 = 0.1;

#[derive(Serialize)]
struct FractalResult {
    hurst: f64,
    depth: u32,
    box_dimension: DimensionFit,
    box_counts: Vec<u64>,
    increment_exponent: DimensionFit,
    holder: HolderProfile,
    /// Profile points with `|estimate - H|` above the tolerance.
    holder_outside: usize,
    checks: Vec<Check>,
    pass: bool,
}

pub(super) fn run(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let params = ctx.settings.params()?;
    if params.regime() != Regime::Convergent {
        return Err(CliError::regime("fractal", params.regime()));
    }
    let h = params.hurst().finite().expect("convergent H is finite");
    let s = &mut ctx.settings;
    let n = match Settings::get_or(&mut s.depths, vec![DEFAULT_N]).as_slice() {
        [n] => *n,
        _ => return Err(CliError::Usage("`fractal` takes a single --n".into())),
    };
    let j = (
        Settings::get_or(&mut s.j_min, DEFAULT_SCALES.0),
        Settings::get_or(&mut s.j_max, DEFAULT_SCALES.1),
    );
    let p = (
        Settings::get_or(&mut s.p_min, DEFAULT_SCALES.0),
        Settings::get_or(&mut s.p_max, DEFAULT_SCALES.1),
    );
    let points = Settings::get_or(&mut s.points, DEFAULT_POINTS);
    let dim_tol = Settings::get_or(&mut s.dimension_tolerance, DEFAULT_DIMENSION_TOLERANCE);
    let exp_tol = Settings::get_or(&mut s.exponent_tolerance, DEFAULT_EXPONENT_TOLERANCE);
    let holder_tol = Settings::get_or(&mut s.holder_tolerance, DEFAULT_HOLDER_TOLERANCE);
    let spread_max = Settings::get_or(&mut s.holder_spread, DEFAULT_HOLDER_SPREAD);
    ctx.formats(&[Format::Csv, Format::Json]);
    let meta = ctx.meta();

    let path = build_path(&generate_leaf_signs(&params, n)?, &params)?;
    let dim = box_dimension(&path, j)?;
    let counts = dim
        .scales
        .iter()
        .map(|&j| box_count(&path, j))
        .collect::<Result<Vec<_>, _>>()?;
    let inc = increment_scaling_exponent(&path, p)?;
    let holder = holder_profile(&path, points, j)?;
    let worst = holder.estimates.iter().map(|e| (e - h).abs()).fold(0.0, f64::max);
    let outside = holder.estimates.iter().filter(|e| (*e - h).abs() > holder_tol).count();
    let checks = vec![
        check("box_dimension_error", (dim.estimate - (2.0 - h)).abs(), dim_tol),
        check("increment_exponent_error", (inc.estimate - h).abs(), exp_tol),
        check("holder_max_error", worst, holder_tol),
        check("holder_spread", holder.spread, spread_max),
    ];
    let pass = checks.iter().all(|c| c.pass);
    println!(
        "box dimension {:.4} (2 - H = {:.4}), increment exponent {:.4}, Hölder median {:.4}, spread {:.4}, {outside}/{points} outside",
        dim.estimate,
        2.0 - h,
        inc.estimate,
        holder.median,
        holder.spread
    );
    print_checks(&params.label(), &checks);

    let result = FractalResult {
        hurst: h,
        depth: n,
        box_dimension: dim,
        box_counts: counts,
        increment_exponent: inc,
        holder,
        holder_outside: outside,
        checks,
        pass,
    };
    if ctx.wants(Format::Csv) {
        let d = &result.box_dimension;
        let rows = d
            .scales
            .iter()
            .zip(&result.box_counts)
            .zip(&d.log_values)
            .map(|((j, c), l)| [j.to_string(), c.to_string(), real(*l)]);
        announce(write_csv(&ctx.path("fractal_boxes.csv"), &meta, &["j", "count", "log_b_count"], rows)?);
        let i = &result.increment_exponent;
        let rows = i.scales.iter().zip(&i.log_values).map(|(p, l)| [p.to_string(), real(*l)]);
        announce(write_csv(&ctx.path("fractal_increments.csv"), &meta, &["p", "mean_log_b_increment"], rows)?);
        let hp = &result.holder;
        let rows = hp.t.iter().zip(&hp.estimates).map(|(t, e)| [real(*t), real(*e)]);
        announce(write_csv(&ctx.path("fractal_holder.csv"), &meta, &["t", "estimate"], rows)?);
    }
    if ctx.wants(Format::Json) {
        announce(write_json(&ctx.path("fractal.json"), &meta, &result)?);
    }
    Ok(Outcome::from_pass(pass))
}
