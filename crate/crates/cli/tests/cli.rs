use std::path::Path;
use std::process::{Command, Output};

use fmp_cli::output::read_csv;

fn fmp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmp"))
        .args(args)
        .env("FMP_OUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn column(path: &Path, k: usize) -> Vec<f64> {
    let (_, rows) = read_csv(path).unwrap();
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

fn config_line(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path).unwrap();
    let line = text.lines().find_map(|l| l.strip_prefix("# config: ")).unwrap();
    serde_json::from_str(line).unwrap()
}

#[test]
fn identity_ramp() {
    let dir = tempfile::tempdir().unwrap();
    let o = fmp(dir.path(), &["simulate", "--b", "2", "--H", "1", "--depths", "8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = dir.path().join("simulate_n8.csv");
    let t = column(&csv, 0);
    let v = column(&csv, 1);
    assert_eq!(t.len(), 257);
    assert_eq!(t, v);
    assert!(dir.path().join("simulate_n8.svg").exists());
}

#[test]
fn deterministic_per_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["simulate", "--H", "0.7", "--seed", "7", "--depths", "8,12", "--formats", "csv,svg,json"];
    assert_eq!(code(&fmp(a.path(), &args)), 0);
    assert_eq!(code(&fmp(b.path(), &args)), 0);
    for name in ["simulate_n8.csv", "simulate_n12.csv", "simulate_n12.svg", "simulate.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let other = tempfile::tempdir().unwrap();
    fmp(other.path(), &["simulate", "--H", "0.7", "--seed", "8", "--depths", "8"]);
    assert_ne!(column(&a.path().join("simulate_n8.csv"), 1), column(&other.path().join("simulate_n8.csv"), 1));
}

#[test]
fn normalised_divisor() {
    let dir = tempfile::tempdir().unwrap();
    fmp(dir.path(), &["simulate", "--H", "-2", "--depths", "8", "--formats", "csv"]);
    fmp(dir.path(), &["simulate", "--H", "-2", "--depths", "8", "--normalize", "--formats", "csv"]);
    let raw = column(&dir.path().join("simulate_n8.csv"), 1);
    let norm = column(&dir.path().join("simulate_n8_normalized_x.csv"), 1);
    let sigma = (1.0f64 + 1.0 / 62.0).sqrt();
    let divisor = sigma * 2f64.powf(8.0 * 2.5);
    for (r, x) in raw.iter().zip(&norm) {
        assert!((r / divisor - x).abs() <= 1e-15 * x.abs().max(1e-300), "{r} {x}");
    }
}

#[test]
fn moment_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = fmp(dir.path(), &["moments", "--b", "2", "--H", "0.5", "--n", "20", "--q", "6"]);
    assert_eq!(code(&o), 0);
    let (header, rows) = read_csv(&dir.path().join("moments.csv")).unwrap();
    assert_eq!(header, ["n", "q", "value", "flag"]);
    let row = rows.iter().find(|r| r[0] == "4" && r[1] == "2").unwrap();
    assert!((row[2].parse::<f64>().unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(rows.len(), 21 * 6);
    assert!(dir.path().join("moments_normalized.csv").exists());

    let o = fmp(dir.path(), &["moments", "--gaussian", "--p", "4"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("1, 3, 15, 105"));
    let (_, rows) = read_csv(&dir.path().join("gaussian.csv")).unwrap();
    let values: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(values, ["1", "3", "15", "105"]);

    let o = fmp(dir.path(), &["moments", "--b", "3", "--H", "0.5", "--sigma"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("sigma = 0.816496580927726"));

    let o = fmp(dir.path(), &["moments", "--H", "0.7", "--n", "30", "--q", "4"]);
    assert_eq!(code(&o), 0);
    let (_, rows) = read_csv(&dir.path().join("moments.csv")).unwrap();
    let limit = rows.iter().find(|r| r[0] == "inf" && r[1] == "2").unwrap();
    assert_eq!(limit[3], "limit");
    assert!((limit[2].parse::<f64>().unwrap() - 2.064_906_480_063_335).abs() < 1e-12);
    assert!(dir.path().join("moments_tilde.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = fmp(dir.path(), &["density", "--H", "0.3"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1/2 < H <= 1"));
    assert_eq!(code(&fmp(dir.path(), &["fractal", "--H", "0.5"])), 2);
    assert_eq!(code(&fmp(dir.path(), &["simulate"])), 2);
    assert_eq!(code(&fmp(dir.path(), &["simulate", "--H", "1.5"])), 2);
    assert_eq!(code(&fmp(dir.path(), &["simulate", "--H", "0.7", "--bogus"])), 2);
    assert_eq!(code(&fmp(dir.path(), &["moments", "--H", "0.7", "--q", "40"])), 2);

    let strict = ["clt", "--H", "0.3", "--n", "4,6", "--reps", "200", "--ks-diffusive", "0"];
    let o = fmp(dir.path(), &strict);
    assert_eq!(code(&o), 1);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("clt_terminal.json")).unwrap()).unwrap();
    assert_eq!(report["result"]["pass"], false);
    assert_eq!(report["meta"]["config"]["ks_diffusive"], 0.0);
    assert!(report["result"]["runtime_seconds"].is_null());

    let o = fmp(dir.path(), &["density", "--H", "0.7"]);
    assert_eq!(code(&o), 0);
    let rows = column(&dir.path().join("density.csv"), 1);
    assert_eq!(rows.len(), 4096);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    let out = dir.path().join("from-file");
    std::fs::write(
        &config,
        format!("H = 0.7\nseed = 5\ndepths = [8]\nformats = [\"csv\"]\nout_dir = {:?}\n", out.display().to_string()),
    )
    .unwrap();
    let c = config.to_str().unwrap();
    let o = fmp(dir.path(), &["simulate", "--config", c, "--seed", "9"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let echo = config_line(&out.join("simulate_n8.csv"));
    assert_eq!(echo["seed"], 9);
    assert_eq!(echo["H"], 0.7);
    assert!(!out.join("simulate_n8.svg").exists());

    let flag_dir = dir.path().join("from-flag");
    let o = fmp(dir.path(), &["simulate", "--config", c, "--out-dir", flag_dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(config_line(&flag_dir.join("simulate_n8.csv"))["seed"], 5);

    std::fs::write(&config, "H = 0.7\nunknown_key = 1\n").unwrap();
    assert_eq!(code(&fmp(dir.path(), &["simulate", "--config", c])), 2);
}

#[test]
fn environment_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = fmp(dir.path(), &["simulate", "--symmetric", "--depths", "6", "--formats", "csv"]);
    assert_eq!(code(&o), 0);
    let csv = dir.path().join("simulate_n6.csv");
    assert_eq!(config_line(&csv)["H"], "symmetric");
    let v = column(&csv, 1);
    assert!(v.windows(2).all(|w| (w[1] - w[0]).abs() == 1.0));
}
