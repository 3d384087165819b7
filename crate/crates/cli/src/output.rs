//! File writers. CSV and SVG files open with `#`/comment lines holding the
//! metadata; JSON files carry it under `"meta"`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{CliError, Settings};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// What every output echoes about the run that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Settings,
}

impl Meta {
    /// The output directory is left out: it does not affect any content,
    /// and runs into different directories should produce identical files.
    pub fn new(command: &str, config: &Settings) -> Self {
        Meta {
            tool: "fmp",
            version: VERSION,
            command: command.to_owned(),
            config: Settings {
                out_dir: None,
                ..config.clone()
            },
        }
    }

    fn config_json(&self) -> String {
        serde_json::to_string(&self.config).expect("settings serialise")
    }

    fn lines(&self) -> [String; 3] {
        [
            format!("fmp {}", self.version),
            format!("command: {}", self.command),
            format!("config: {}", self.config_json()),
        ]
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(CliError::io(path))
}

/// Writes `header` and `rows` under the metadata comment block.
pub fn write_csv<I, R>(path: &Path, meta: &Meta, header: &[&str], rows: I) -> Result<PathBuf, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = create(path)?;
    for line in meta.lines() {
        writeln!(out, "# {line}").map_err(CliError::io(path))?;
    }
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(header)?;
    for row in rows {
        csv.write_record(row)?;
    }
    csv.flush().map_err(CliError::io(path))?;
    Ok(path.to_owned())
}

/// Reads back the data rows of a file written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header = reader.headers()?.iter().map(str::to_owned).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_owned).collect()))
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    meta: &'a Meta,
    result: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, meta: &Meta, result: &T) -> Result<PathBuf, CliError> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, &Document { meta, result })?;
    writeln!(out).and_then(|_| out.flush()).map_err(CliError::io(path))?;
    Ok(path.to_owned())
}

const SVG_WIDTH: f64 = 1000.0;
const SVG_HEIGHT: f64 = 500.0;
const SVG_MARGIN: f64 = 20.0;

/// A single polyline of `(t, value)` scaled into the frame.
pub fn write_svg(path: &Path, meta: &Meta, title: &str, t: &[f64], values: &[f64]) -> Result<PathBuf, CliError> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let inner_w = SVG_WIDTH - 2.0 * SVG_MARGIN;
    let inner_h = SVG_HEIGHT - 2.0 * SVG_MARGIN;
    let mut points = String::with_capacity(values.len() * 20);
    for (&t, &v) in t.iter().zip(values) {
        let x = SVG_MARGIN + t * inner_w;
        let y = SVG_MARGIN + (hi - v) / span * inner_h;
        points.push_str(&format!("{x:.3},{y:.3} "));
    }
    let mut out = create(path)?;
    let comment = meta.lines().join("\n").replace("--", "- -");
    write!(
        out,
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!--\n{comment}\n-->\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\">\n\
         <title>{}</title>\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"0.6\" points=\"{}\"/>\n\
         </svg>\n",
        escape(title),
        points.trim_end()
    )
    .and_then(|_| out.flush())
    .map_err(CliError::io(path))?;
    Ok(path.to_owned())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.064906480063335e-300, 3.0] {
            assert_eq!(real(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(real(3.0), "3.0000000000000000e0");
        assert_eq!(real(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_with_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let meta = Meta::new("test", &Settings::default());
        write_csv(&path, &meta, &["a", "b"], [vec!["1".to_owned(), real(0.5)]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# fmp "));
        let (header, rows) = read_csv(&path).unwrap();
        assert_eq!(header, ["a", "b"]);
        assert_eq!(rows, [["1", "5.0000000000000000e-1"]]);
    }
}
