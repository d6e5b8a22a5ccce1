//! Configuration, persistence and the named experiments driven by the command line.

pub mod compare;
pub mod config;
pub mod dependence;
pub mod equivalence;
pub mod io;
pub mod parallel;
pub mod run;
pub mod sweep;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use compare::{galerkin_compare, CompareMeasurement, CompareReport};
pub use config::{apply_override, GridSpec, InitialCondition, InitialSpec, RunConfig};
pub use dependence::{twin_run, DependenceReport};
pub use equivalence::{equivalence_check, EquivalenceLevel, EquivalenceReport};
pub use parallel::{thread_pool, THREADS_ENV};
pub use run::{simulate, simulate_from, write_run, RunOutput};
pub use sweep::{sweep_gamma, sweep_sigma, SweepMember, SweepReport};

use crate::error::{Error, Result};

/// Outcome of an experiment: whether every monitor passed, plus its own report as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub passed: bool,
    pub violations: Vec<String>,
    pub details: serde_json::Value,
}

impl ExperimentReport {
    fn new<T: Serialize>(experiment: &str, violations: Vec<String>, details: &T) -> Result<Self> {
        Ok(Self {
            experiment: experiment.into(),
            passed: violations.is_empty(),
            violations,
            details: serde_json::to_value(details)?,
        })
    }
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Runs the experiment, writing artifacts under `out` when given. Monitor violations
    /// are reported in the result; `Err` means the computation itself failed.
    fn execute(&self, cfg: &RunConfig, out: Option<&Path>) -> Result<ExperimentReport>;
}

pub type ExperimentFactory = fn() -> Box<dyn Experiment>;

/// Experiments by name.
pub struct ExperimentRegistry {
    factories: BTreeMap<&'static str, ExperimentFactory>,
}

impl ExperimentRegistry {
    pub fn empty() -> Self {
        Self { factories: BTreeMap::new() }
    }

    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register("run", || Box::new(Run));
        r.register("sweep-sigma", || Box::new(SigmaSweep));
        r.register("sweep-gamma", || Box::new(GammaSweep));
        r.register("equivalence", || Box::new(Equivalence));
        r.register("galerkin-compare", || Box::new(GalerkinCompare));
        r
    }

    pub fn register(&mut self, name: &'static str, factory: ExperimentFactory) {
        self.factories.insert(name, factory);
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn Experiment>> {
        self.factories.get(name).map(|f| f()).ok_or_else(|| Error::UnknownStrategy {
            kind: "experiment",
            name: name.into(),
            available: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }
}

/// Runs a named experiment and, with `out`, writes the resolved config and `report.json`.
pub fn execute(name: &str, cfg: &RunConfig, out: Option<&Path>) -> Result<ExperimentReport> {
    let exp = ExperimentRegistry::with_builtin().create(name)?;
    if let Some(dir) = out {
        io::ensure_dir(dir)?;
        std::fs::write(dir.join("config.toml"), cfg.to_toml_string()?)?;
    }
    let report = exp.execute(cfg, out)?;
    if let Some(dir) = out {
        io::write_json(&dir.join(io::REPORT_FILE), &report)?;
    }
    Ok(report)
}

struct Run;

impl Experiment for Run {
    fn name(&self) -> &'static str {
        "run"
    }
    fn description(&self) -> &'static str {
        "single trajectory with diagnostics and snapshots"
    }
    fn execute(&self, cfg: &RunConfig, out: Option<&Path>) -> Result<ExperimentReport> {
        let result = simulate(cfg)?;
        if let Some(dir) = out {
            write_run(dir, &result)?;
        }
        #[derive(Serialize)]
        struct Details<'a> {
            summary: &'a crate::diagnostics::RunSummary,
            bounds: &'a crate::diagnostics::BoundsReport,
            final_time: f64,
        }
        ExperimentReport::new(
            self.name(),
            result.violations.clone(),
            &Details { summary: &result.summary, bounds: &result.bounds, final_time: result.final_state.t },
        )
    }
}

struct SigmaSweep;

impl Experiment for SigmaSweep {
    fn name(&self) -> &'static str {
        "sweep-sigma"
    }
    fn description(&self) -> &'static str {
        "relaxation sweep against the sigma = 0 reference"
    }
    fn execute(&self, cfg: &RunConfig, out: Option<&Path>) -> Result<ExperimentReport> {
        let r = sweep_sigma(cfg, out)?;
        ExperimentReport::new(self.name(), r.violations.clone(), &r)
    }
}

struct GammaSweep;

impl Experiment for GammaSweep {
    fn name(&self) -> &'static str {
        "sweep-gamma"
    }
    fn description(&self) -> &'static str {
        "pressure-exponent sweep toward the incompressible limit"
    }
    fn execute(&self, cfg: &RunConfig, out: Option<&Path>) -> Result<ExperimentReport> {
        let r = sweep_gamma(cfg, out)?;
        ExperimentReport::new(self.name(), r.violations.clone(), &r)
    }
}

struct Equivalence;

impl Experiment for Equivalence {
    fn name(&self) -> &'static str {
        "equivalence"
    }
    fn description(&self) -> &'static str {
        "Cahn-Hilliard form vs Keller-Segel form under refinement"
    }
    fn execute(&self, cfg: &RunConfig, out: Option<&Path>) -> Result<ExperimentReport> {
        let r = equivalence_check(cfg, out)?;
        ExperimentReport::new(self.name(), r.violations.clone(), &r)
    }
}

struct GalerkinCompare;

impl Experiment for GalerkinCompare {
    fn name(&self) -> &'static str {
        "galerkin-compare"
    }
    fn description(&self) -> &'static str {
        "spectral Galerkin vs finite volume"
    }
    fn execute(&self, cfg: &RunConfig, out: Option<&Path>) -> Result<ExperimentReport> {
        let r = galerkin_compare(cfg, out)?;
        ExperimentReport::new(self.name(), r.violations.clone(), &r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names() {
        let r = ExperimentRegistry::with_builtin();
        assert_eq!(r.names(), ["equivalence", "galerkin-compare", "run", "sweep-gamma", "sweep-sigma"]);
        for n in r.names() {
            assert_eq!(r.create(n).unwrap().name(), n);
        }
        assert!(matches!(r.create("plot"), Err(Error::UnknownStrategy { .. })));
    }

    #[test]
    fn run_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::default();
        cfg.grid.cells = vec![16];
        cfg.step.t_end = 1e-3;
        let report = execute("run", &cfg, Some(dir.path())).unwrap();
        assert!(report.passed);
        for f in ["config.toml", "report.json", "summary.json", "diagnostics.csv", "snapshots/snapshot_0001.csv"] {
            assert!(dir.path().join(f).exists(), "{f} missing");
        }
        let echoed = RunConfig::load(&dir.path().join("config.toml"), &[]).unwrap();
        assert_eq!(echoed, cfg);
    }
}
