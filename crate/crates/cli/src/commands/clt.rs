use fmp_core::stats::{
    clt_small_h_test, clt_terminal_test, empirical_vs_exact_moments, increments_gaussianity,
    residual_clt_test, SmallHSource, StatReport,
};
use fmp_core::Regime;

use super::{announce, positive, print_checks, Ctx};
use crate::output::write_json;
use crate::settings::{CltKind, Format, Settings, SourceArg};
use crate::{CliError, Outcome};

pub const DEFAULT_REPS: u64 = 4000;
pub const DEFAULT_TERMINAL_DEPTHS: [u32; 3] = [8, 12, 16];
pub const DEFAULT_RESIDUAL_DEPTHS: [u32; 3] = [1, 2, 4];
pub const DEFAULT_SINGLE_DEPTH: u32 = 16;
pub const DEFAULT_HURSTS: [f64; 4] = [0.8, 0.65, 0.55, 0.51];
pub const DEFAULT_INCREMENT_P: u32 = 4;
pub const DEFAULT_RESIDUAL_M: u32 = 12;
pub const DEFAULT_MOMENT_Q: u32 = 4;

fn single(depths: &[u32], kind: &str) -> Result<u32, CliError> {
    match depths {
        [n] => Ok(*n),
        _ => Err(CliError::Usage(format!("`clt --kind {kind}` takes a single --n"))),
    }
}

/// Runtime varies between runs; it goes to stdout, not into the file.
fn strip_runtime(report: &mut StatReport) {
    if let Some(t) = report.runtime_seconds.take() {
        println!("{}: {t:.2} s", report.test);
    }
}

pub(super) fn run(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let s = &mut ctx.settings;
    let reps = positive("reps", Settings::get_or(&mut s.reps, DEFAULT_REPS))?;
    let thresholds = s.thresholds();
    let kind = match s.kind {
        Some(k) => k,
        None => {
            let params = s.params()?;
            *s.kind.insert(match params.regime() {
                Regime::Convergent => CltKind::Residual,
                _ => CltKind::Terminal,
            })
        }
    };
    ctx.formats(&[Format::Json]);

    if kind == CltKind::SmallH {
        let s = &mut ctx.settings;
        let base = Settings::get_or(&mut s.base, 2);
        let seed = Settings::get_or(&mut s.seed, 0);
        let hursts = Settings::get_or(&mut s.hursts, DEFAULT_HURSTS.to_vec());
        let n = single(&Settings::get_or(&mut s.depths, vec![DEFAULT_SINGLE_DEPTH]), "small-h")?;
        let source: SmallHSource = Settings::get_or(&mut s.source, SourceArg::Simulated).into();
        let meta = ctx.meta();
        let mut report = clt_small_h_test(base, &hursts, n, reps, seed, source, &thresholds)?;
        for r in &mut report.per_h {
            strip_runtime(r);
            print_checks(&r.label, &r.checks);
        }
        println!("ks along H: {:?}", report.ks);
        print_checks("trend", [&report.trend]);
        if ctx.wants(Format::Json) {
            announce(write_json(&ctx.path("clt_small_h.json"), &meta, &report)?);
        }
        return Ok(Outcome::from_pass(report.pass));
    }

    let params = ctx.settings.params()?;
    let s = &mut ctx.settings;
    let (mut report, file) = match kind {
        CltKind::Terminal => {
            let ns = Settings::get_or(&mut s.depths, DEFAULT_TERMINAL_DEPTHS.to_vec());
            let meta = ctx.meta();
            (clt_terminal_test(&params, &ns, reps, &thresholds)?, ("clt_terminal.json", meta))
        }
        CltKind::Increments => {
            let n = single(&Settings::get_or(&mut s.depths, vec![DEFAULT_SINGLE_DEPTH]), "increments")?;
            let p = Settings::get_or(&mut s.p, DEFAULT_INCREMENT_P);
            let meta = ctx.meta();
            (increments_gaussianity(&params, p, n, reps, &thresholds)?, ("clt_increments.json", meta))
        }
        CltKind::Residual => {
            let ns = Settings::get_or(&mut s.depths, DEFAULT_RESIDUAL_DEPTHS.to_vec());
            let m = Settings::get_or(&mut s.m, DEFAULT_RESIDUAL_M);
            let meta = ctx.meta();
            (residual_clt_test(&params, &ns, m, reps, &thresholds)?, ("clt_residual.json", meta))
        }
        CltKind::Moments => {
            let n = single(&Settings::get_or(&mut s.depths, vec![DEFAULT_SINGLE_DEPTH]), "moments")?;
            let q = Settings::get_or(&mut s.q, DEFAULT_MOMENT_Q);
            let meta = ctx.meta();
            (empirical_vs_exact_moments(&params, n, reps, q, &thresholds)?, ("clt_moments.json", meta))
        }
        CltKind::SmallH => unreachable!("handled above"),
    };
    strip_runtime(&mut report);
    print_checks(&report.label, &report.checks);
    let (name, meta) = file;
    if ctx.wants(Format::Json) {
        announce(write_json(&ctx.path(name), &meta, &report)?);
    }
    Ok(Outcome::from_pass(report.pass))
}
