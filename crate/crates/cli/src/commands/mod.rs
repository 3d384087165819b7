use std::path::{Path, PathBuf};

use fmp_core::stats::Check;

use crate::output::Meta;
use crate::settings::Format;
use crate::{CliError, Outcome, Settings};

mod clt;
mod density;
mod fractal;
mod moments;
mod simulate;

pub(crate) fn dispatch(command: &'static str, settings: Settings, out: &Path) -> Result<Outcome, CliError> {
    let mut ctx = Ctx {
        command,
        settings,
        out: out.to_owned(),
    };
    match command {
        "simulate" => simulate::run(&mut ctx),
        "moments" => moments::run(&mut ctx),
        "clt" => clt::run(&mut ctx),
        "fractal" => fractal::run(&mut ctx),
        "density" => density::run(&mut ctx),
        other => unreachable!("unknown command {other}"),
    }
}

pub(crate) struct Ctx {
    command: &'static str,
    settings: Settings,
    out: PathBuf,
}

impl Ctx {
    /// Default formats, written back for the echo.
    fn formats(&mut self, default: &[Format]) {
        if self.settings.formats.is_none() {
            self.settings.formats = Some(default.to_vec());
        }
    }

    fn wants(&self, f: Format) -> bool {
        self.settings.wants(f)
    }

    /// Freezes the settings; call once every default is resolved.
    fn meta(&self) -> Meta {
        Meta::new(self.command, &self.settings)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn announce(path: PathBuf) {
    println!("wrote {}", path.display());
}

fn check(name: &str, value: f64, threshold: f64) -> Check {
    Check {
        name: name.to_owned(),
        value,
        threshold,
        pass: value <= threshold,
    }
}

fn print_checks<'a>(title: &str, checks: impl IntoIterator<Item = &'a Check>) {
    println!("{title}");
    for c in checks {
        let verdict = if c.pass { "pass" } else { "FAIL" };
        println!("  {verdict} {} = {:.4e} (threshold {:e})", c.name, c.value, c.threshold);
    }
}

/// Rejects values that the core would only catch deep inside a run.
fn positive<T: PartialOrd + Default + std::fmt::Display>(name: &str, v: T) -> Result<T, CliError> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {v}")))
    }
}
