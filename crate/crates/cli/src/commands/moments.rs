use fmp_core::moments::{
    gaussian_even_moments_exact, limit_z_moments, normalized_moment_recursion, residual_sigma,
    second_moment_fixed_point, sigma, tilde_moment_solver, z_moment_recursion, MomentTable,
};
use fmp_core::Regime;
use serde::Serialize;

use super::{announce, Ctx};
use crate::output::{real, write_csv, write_json};
use crate::settings::{Format, Settings};
use crate::{CliError, Outcome};

pub const DEFAULT_N: u32 = 20;
pub const DEFAULT_Q: u32 = 6;
pub const DEFAULT_P: u32 = 8;

#[derive(Serialize)]
struct Constant {
    name: &'static str,
    value: f64,
}

#[derive(Default, Serialize)]
struct MomentsResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    gaussian: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    constants: Vec<Constant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    raw: Option<MomentTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalized: Option<MomentTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tilde: Option<Vec<f64>>,
}

fn table_rows(table: &MomentTable) -> impl Iterator<Item = [String; 4]> + '_ {
    table.entries().map(|e| {
        [
            e.n.map_or_else(|| "inf".to_owned(), |n| n.to_string()),
            e.q.to_string(),
            real(e.value),
            e.flag.name().to_owned(),
        ]
    })
}

fn constants(params: &fmp_core::CascadeParams) -> Result<Vec<Constant>, CliError> {
    let mut out = vec![Constant {
        name: "sigma",
        value: sigma(params),
    }];
    if params.regime() == Regime::Convergent {
        out.push(Constant {
            name: "second_moment_limit",
            value: second_moment_fixed_point(params)?,
        });
        out.push(Constant {
            name: "residual_sigma",
            value: residual_sigma(params)?,
        });
    }
    Ok(out)
}

pub(super) fn run(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let gaussian = ctx.settings.gaussian.unwrap_or(false);
    let only_sigma = ctx.settings.sigma.unwrap_or(false);
    if gaussian && ctx.settings.hurst.is_none() {
        return run_gaussian(ctx);
    }
    let params = ctx.settings.params()?;
    let s = &mut ctx.settings;
    let (n, q) = if only_sigma {
        (None, None)
    } else {
        let n = match s.depths.as_deref() {
            None => Settings::get_or(&mut s.depths, vec![DEFAULT_N])[0],
            Some(&[n]) => n,
            Some(_) => return Err(CliError::Usage("`moments` takes a single --n".into())),
        };
        (Some(n), Some(Settings::get_or(&mut s.q, DEFAULT_Q)))
    };
    let p = gaussian.then(|| Settings::get_or(&mut s.p, DEFAULT_P));
    ctx.formats(&[Format::Csv]);
    let meta = ctx.meta();

    let mut result = MomentsResult {
        constants: constants(&params)?,
        ..Default::default()
    };
    for c in &result.constants {
        println!("{} = {}", c.name, c.value);
    }
    if let Some(p) = p {
        result.gaussian = Some(gaussian_list(p));
    }
    if let (Some(n), Some(q)) = (n, q) {
        let raw = z_moment_recursion(&params, n, q)?;
        if raw.has_overflow() {
            eprintln!("note: some entries exceed the f64 range and are flagged `overflow`");
        }
        result.raw = Some(raw);
        match params.regime() {
            Regime::Convergent => {
                let limit = limit_z_moments(&params, q)?;
                let tilde = tilde_moment_solver(&params, q)?;
                println!("limit E(Z^q), q = 1..{q}: {}", join(&limit));
                result.tilde = Some(tilde);
            }
            _ => result.normalized = Some(normalized_moment_recursion(&params, n, q)?),
        }
    }

    if ctx.wants(Format::Csv) {
        let rows = result.constants.iter().map(|c| [c.name.to_owned(), real(c.value)]);
        announce(write_csv(&ctx.path("sigma.csv"), &meta, &["name", "value"], rows)?);
        if let Some(g) = &result.gaussian {
            announce(write_gaussian(ctx, &meta, g)?);
        }
        let header = ["n", "q", "value", "flag"];
        if let Some(raw) = &result.raw {
            announce(write_csv(&ctx.path("moments.csv"), &meta, &header, table_rows(raw))?);
        }
        if let Some(norm) = &result.normalized {
            announce(write_csv(&ctx.path("moments_normalized.csv"), &meta, &header, table_rows(norm))?);
        }
        if let Some(tilde) = &result.tilde {
            let rows = tilde.iter().enumerate().map(|(k, &v)| [(k + 1).to_string(), real(v)]);
            announce(write_csv(&ctx.path("moments_tilde.csv"), &meta, &["q", "value"], rows)?);
        }
    }
    if ctx.wants(Format::Json) {
        announce(write_json(&ctx.path("moments.json"), &meta, &result)?);
    }
    Ok(Outcome::Pass)
}

fn gaussian_list(p: u32) -> Vec<String> {
    let list: Vec<String> = gaussian_even_moments_exact(p).iter().map(ToString::to_string).collect();
    println!("M^(2p), p = 1..{p}: {}", list.join(", "));
    list
}

fn write_gaussian(ctx: &Ctx, meta: &crate::output::Meta, list: &[String]) -> Result<std::path::PathBuf, CliError> {
    let rows = list.iter().enumerate().map(|(k, v)| [(k + 1).to_string(), (2 * k + 2).to_string(), v.clone()]);
    write_csv(&ctx.path("gaussian.csv"), meta, &["p", "order", "value"], rows)
}

/// `--gaussian` without a cascade: the induction alone.
fn run_gaussian(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let p = Settings::get_or(&mut ctx.settings.p, DEFAULT_P);
    if p == 0 {
        return Err(CliError::Usage("--p must be at least 1".into()));
    }
    ctx.formats(&[Format::Csv]);
    let meta = ctx.meta();
    let list = gaussian_list(p);
    if ctx.wants(Format::Csv) {
        announce(write_gaussian(ctx, &meta, &list)?);
    }
    if ctx.wants(Format::Json) {
        let result = MomentsResult {
            gaussian: Some(list),
            ..Default::default()
        };
        announce(write_json(&ctx.path("moments.json"), &meta, &result)?);
    }
    Ok(Outcome::Pass)
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}
