use fmp_core::cascade::decimation_stride;
use fmp_core::{build_path_decimated, generate_leaf_signs, normalize_path, PathKind};
use serde::Serialize;

use super::{announce, positive, Ctx};
use crate::output::{real, write_csv, write_json, write_svg};
use crate::settings::{Format, Settings};
use crate::{CliError, Outcome};

pub const DEFAULT_DEPTHS: [u32; 4] = [8, 12, 18, 27];
pub const DEFAULT_MAX_POINTS: u64 = 1 << 16;

#[derive(Serialize)]
struct PathSummary {
    depth: u32,
    kind: &'static str,
    stride: u64,
    segments: u64,
    terminal: f64,
    min: f64,
    max: f64,
}

pub(super) fn run(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let params = ctx.settings.params()?;
    let s = &mut ctx.settings;
    let depths = Settings::get_or(&mut s.depths, DEFAULT_DEPTHS.to_vec());
    let max_points = positive("max-points", Settings::get_or(&mut s.max_points, DEFAULT_MAX_POINTS))?;
    let normalize = Settings::get_or(&mut s.normalize, false);
    ctx.formats(&[Format::Csv, Format::Svg]);
    let meta = ctx.meta();

    let mut summaries = Vec::with_capacity(depths.len());
    for &n in &depths {
        let field = generate_leaf_signs(&params, n)?;
        let stride = decimation_stride(params.base(), n, max_points);
        let mut path = build_path_decimated(&field, &params, stride)?;
        drop(field);
        if normalize {
            path = normalize_path(&path, &params)?;
        }
        let kind = path.kind();
        let stem = match kind {
            PathKind::Raw => format!("simulate_n{n}"),
            _ => format!("simulate_n{n}_{}", kind.name()),
        };
        let t: Vec<f64> = (0..=path.segments()).map(|k| path.t_at(k)).collect();
        let values = path.values();
        if ctx.wants(Format::Csv) {
            let rows = t.iter().zip(values).map(|(&t, &v)| [real(t), real(v)]);
            announce(write_csv(&ctx.path(&format!("{stem}.csv")), &meta, &["t", "value"], rows)?);
        }
        if ctx.wants(Format::Svg) {
            let title = format!("{} {} n={n}", params.label(), kind.name());
            announce(write_svg(&ctx.path(&format!("{stem}.svg")), &meta, &title, &t, values)?);
        }
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        summaries.push(PathSummary {
            depth: n,
            kind: kind.name(),
            stride,
            segments: path.segments(),
            terminal: path.terminal(),
            min,
            max,
        });
    }
    if ctx.wants(Format::Json) {
        announce(write_json(&ctx.path("simulate.json"), &meta, &summaries)?);
    }
    Ok(Outcome::Pass)
}
