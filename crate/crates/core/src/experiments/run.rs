//! Single-trajectory runs.

use std::path::Path;

use serde::Serialize;

use super::config::RunConfig;
use super::io;
use crate::diagnostics::{flags, BoundsReport, DiagnosticsRecord, Recorder, RunSummary};
use crate::error::Result;
use crate::field::Field;
use crate::state::StateBundle;
use crate::stepper::Stepper;

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: RunConfig,
    pub records: Vec<DiagnosticsRecord>,
    pub summary: RunSummary,
    pub bounds: BoundsReport,
    /// Evenly spaced states, first and last included (empty when `output.snapshots = 0`).
    pub snapshots: Vec<StateBundle>,
    pub final_state: StateBundle,
    pub violations: Vec<String>,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Integrates `cfg` from its configured initial condition.
pub fn simulate(cfg: &RunConfig) -> Result<RunOutput> {
    let grid = cfg.build_grid()?;
    let n0 = cfg.initial_density(grid)?;
    simulate_from(cfg, n0)
}

/// Integrates `cfg` from the given initial density.
pub fn simulate_from(cfg: &RunConfig, n0: Field) -> Result<RunOutput> {
    let mut stepper = Stepper::from_config(cfg.model.clone(), cfg.step.clone(), cfg.elliptic.clone())?;
    let initial = stepper.initial_state(n0, 0.0)?;
    let mut recorder = Recorder::new(&initial, &cfg.model, cfg.step.face_mobility, cfg.output.stride);
    let t_end = cfg.step.t_end;
    let wanted = cfg.output.snapshots;
    let target = |k: usize| if wanted > 1 { t_end * k as f64 / (wanted - 1) as f64 } else { t_end };
    let mut snapshots = Vec::new();
    if wanted > 1 {
        snapshots.push(initial.clone());
    }
    let final_state = stepper.integrate(initial, |ev| {
        recorder.observe(ev);
        if wanted > 0 && snapshots.len() < wanted && ev.next.t >= target(snapshots.len()) * (1.0 - 1e-12) {
            snapshots.push(ev.next.clone());
        }
        Ok(())
    })?;
    if wanted > 0 && snapshots.len() < wanted {
        snapshots.push(final_state.clone());
    }
    let (records, summary, monitor) = recorder.finish();
    let bounds = monitor.report();
    let mut violations: Vec<String> = flags::describe(summary.flags).into_iter().map(|f| format!("monitor: {f}")).collect();
    violations.extend(bounds.violations.iter().cloned());
    Ok(RunOutput {
        config: cfg.clone(),
        records,
        summary,
        bounds,
        snapshots,
        final_state,
        violations,
    })
}

#[derive(Serialize)]
struct RunFileSummary<'a> {
    diagnostics_schema: u32,
    passed: bool,
    violations: &'a [String],
    summary: &'a RunSummary,
    bounds: &'a BoundsReport,
    final_time: f64,
}

/// Writes `diagnostics.csv`, `summary.json` and the snapshots into `dir`.
pub fn write_run(dir: &Path, out: &RunOutput) -> Result<()> {
    io::ensure_dir(dir)?;
    io::write_diagnostics(&dir.join(io::DIAGNOSTICS_FILE), &out.records)?;
    let snap_dir = dir.join(io::SNAPSHOT_DIR);
    for (k, s) in out.snapshots.iter().enumerate() {
        io::write_snapshot(&snap_dir, k, s, &out.config.model)?;
    }
    io::write_json(
        &dir.join(io::SUMMARY_FILE),
        &RunFileSummary {
            diagnostics_schema: crate::diagnostics::SCHEMA_VERSION,
            passed: out.passed(),
            violations: &out.violations,
            summary: &out.summary,
            bounds: &out.bounds,
            final_time: out.final_state.t,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::InitialCondition;

    fn small() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.grid.cells = vec![32];
        cfg.step.t_end = 2e-3;
        cfg
    }

    #[test]
    fn constant_data_gives_identical_records() {
        let mut cfg = small();
        cfg.initial.condition = InitialCondition::Constant { value: 0.4 };
        let out = simulate(&cfg).unwrap();
        assert!(out.passed());
        let first = &out.records[0];
        for r in &out.records[1..] {
            assert_eq!(r.mass, first.mass);
            assert_eq!(r.energy, first.energy);
            assert_eq!(r.min_n, first.min_n);
            assert_eq!(r.max_w, first.max_w);
        }
    }

    #[test]
    fn snapshots_span_the_run() {
        let mut cfg = small();
        cfg.output.snapshots = 3;
        let out = simulate(&cfg).unwrap();
        assert_eq!(out.snapshots.len(), 3);
        assert_eq!(out.snapshots[0].t, 0.0);
        assert!(out.snapshots[1].t >= 1e-3 - 1e-15);
        assert_eq!(out.snapshots[2].t, out.final_state.t);
    }

    #[test]
    fn stride_thins_records_but_keeps_the_last() {
        let mut cfg = small();
        cfg.output.stride = 1000;
        let out = simulate(&cfg).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[1].t, out.final_state.t);
    }
}
