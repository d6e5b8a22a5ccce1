use std::path::Path;
use std::process::{Command, Output};

fn ksch(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ksch"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("KSCH_THREADS", t),
        None => cmd.env_remove("KSCH_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

const SMALL: &str = "[grid]\ncells = [16]\n\n[step]\nt_end = 1e-3\n";

#[test]
fn run_passes_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = ksch(&["run", "--config", &cfg, "--out", out.to_str().unwrap()], Some("2"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.toml", "report.json", "summary.json", "diagnostics.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let header = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert!(header.starts_with("t,dt,mass,"));
}

#[test]
fn overrides_reach_the_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = ksch(
        &["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--override", "model.gamma=6", "--override", "grid.cells=[20]"],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let echo: toml::Table = std::fs::read_to_string(out.join("config.toml")).unwrap().parse().unwrap();
    assert_eq!(echo["model"]["gamma"].as_float(), Some(6.0));
    assert_eq!(echo["grid"]["cells"].as_array().unwrap()[0].as_integer(), Some(20));
}

#[test]
fn bad_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[initial]\nkind = \"cosine\"\nbogus = 1\n");
    let o = ksch(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn bad_thread_count_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[grid]\ncells = [16]\n\n[step]\nt_end = 1e-4\n\n[sweep]\ngammas = [5.0]\n");
    let o = ksch(&["sweep-gamma", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()], Some("zero"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("KSCH_THREADS"));
}

#[test]
fn monitor_violation_exits_two() {
    // KS and CH differ at O(h); on two coarse grids the ratio cannot reach 100.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[grid]\ncells = [16]\n\n[step]\nt_end = 1e-3\n\n[equivalence]\ncells = [16, 32]\nmin_ratio = 100.0\n",
    );
    let out = dir.path().join("o");
    let o = ksch(&["equivalence", "--config", &cfg, "--out", out.to_str().unwrap()], Some("1"));
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("equivalence.json").exists());
    assert!(out.join("report.json").exists());
}

#[test]
fn galerkin_compare_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[grid]\ncells = [32]\n\n[model]\neps_mobility = 1e-3\n\n[step]\nt_end = 1e-3\n\n[galerkin]\nmodes = 8\n",
    );
    let out = dir.path().join("o");
    let o = ksch(&["galerkin-compare", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert!(matches!(o.status.code(), Some(0) | Some(2)), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("galerkin.csv").exists());
}

#[test]
fn unknown_subcommand_is_rejected() {
    let o = ksch(&["plot", "--out", "x"], None);
    assert!(!o.status.success());
}
