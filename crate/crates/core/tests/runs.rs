//! End-to-end runs through the experiment layer.

use ksch::experiments::*;
use ksch::Error;

#[test]
fn two_dimensional_mass_and_positivity() {
    let mut cfg = RunConfig::default();
    cfg.grid.cells = vec![24, 16];
    cfg.grid.length = vec![1.0, 0.75];
    cfg.initial.condition = InitialCondition::Random { mean: 0.4, amplitude: 0.3, cutoff: 4, seed: 7 };
    cfg.step.t_end = 5e-3;
    for form in ["ch", "ks"] {
        cfg.step.formulation = form.into();
        let out = simulate(&cfg).unwrap();
        assert!(out.passed(), "{form}: {:?}", out.violations);
        assert!(out.summary.max_relative_mass_drift <= 1e-12);
        assert!(out.summary.min_n >= 0.0);
    }
}

#[test]
fn same_config_gives_identical_output() {
    let mut cfg = RunConfig::default();
    cfg.grid.cells = vec![48];
    cfg.step.t_end = 2e-3;
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        write_run(d.path(), &simulate(&cfg).unwrap()).unwrap();
    }
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    assert_eq!(read(&dirs[0], "diagnostics.csv"), read(&dirs[1], "diagnostics.csv"));
    assert_eq!(read(&dirs[0], "snapshots/snapshot_0001.csv"), read(&dirs[1], "snapshots/snapshot_0001.csv"));
}

#[test]
fn unknown_initial_key_is_rejected() {
    let err = RunConfig::from_toml_str("[initial]\nkind = \"cosine\"\nbase = 0.5\namplitud = 0.1\n").unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
    let err = RunConfig::from_toml_with_overrides("", &["step.t_ned=1".into()]).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
}

#[test]
fn ks_rejects_regularized_mobility() {
    let mut cfg = RunConfig::default();
    cfg.step.formulation = "ks".into();
    cfg.model.eps_mobility = 1e-3;
    cfg.grid.cells = vec![16];
    assert!(simulate(&cfg).is_err());
}

#[test]
fn upwind_entropy_residual_is_first_order() {
    let run = |cells: usize| {
        let mut cfg = RunConfig::default();
        cfg.grid.cells = vec![cells];
        cfg.initial.condition = InitialCondition::Cosine { base: 0.5, amplitude: 0.3, frequency: 1.0 };
        cfg.step.adaptive = false;
        cfg.step.dt_init = 0.1 / (cells * cells) as f64;
        cfg.step.t_end = 5e-3;
        let out = simulate(&cfg).unwrap();
        ksch::diagnostics::entropy_identity_residual(&out.records)
            .unwrap()
            .iter()
            .fold(0.0f64, |m, r| m.max(r.abs()))
    };
    let order = (run(64) / run(128)).log2();
    assert!(order >= 0.95, "order {order}");
}
