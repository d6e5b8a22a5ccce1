//! Spectral Galerkin solution vs finite-volume solution on the same interval.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::io;
use super::run::simulate;
use crate::error::{Error, Result};
use crate::field::Norm;
use crate::galerkin::{galerkin_energy_residual, GalerkinRecord, GalerkinSolver};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareMeasurement {
    pub modes: usize,
    pub cells: usize,
    pub fv_steps: usize,
    pub galerkin_steps: usize,
    /// `‖n_fv(T) - n_spectral(T)‖_{L2} / ‖n_fv(T)‖_{L2}` at the cell centres.
    pub relative_l2: f64,
    pub max_abs_galerkin_energy_residual: f64,
    pub galerkin_mass_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub measurement: CompareMeasurement,
    /// Same comparison with both step sizes halved.
    pub halved: Option<CompareMeasurement>,
    /// `|d_halved - d| / d`.
    pub halving_change: Option<f64>,
    pub tolerance: f64,
    pub violations: Vec<String>,
}

impl CompareReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs both discretizations to `step.t_end` and measures their distance.
pub fn compare_once(cfg: &RunConfig) -> Result<(CompareMeasurement, Vec<GalerkinRecord>)> {
    let grid = cfg.build_grid()?;
    if grid.dim() != 1 {
        return Err(Error::Config("galerkin comparison is one-dimensional".into()));
    }
    let fv = simulate(cfg)?;
    let solver = GalerkinSolver::new(grid.extent(0), cfg.model.clone(), cfg.galerkin.clone())?;
    cfg.initial.sample(grid)?;
    let eval = cfg.initial.condition.evaluator([grid.extent(0), grid.extent(1)], 1);
    let start = solver.initial_state(|x| eval([x, 0.0]), 0.0)?;
    let mut records = vec![solver.record(&start)];
    let mut steps = 0;
    let end = solver.integrate(start, cfg.step.t_end, |s, _| {
        steps += 1;
        records.push(solver.record(s));
        Ok(())
    })?;
    let spectral = solver.basis().reconstruct(&end.c, grid)?;
    let diff = fv.final_state.n.zip_map(&spectral, |a, b| a - b);
    let scale = fv.final_state.n.norm(Norm::L2);
    let relative_l2 = if scale > 0.0 { diff.norm(Norm::L2) / scale } else { diff.norm(Norm::L2) };
    let residual = galerkin_energy_residual(&records);
    let m0 = records[0].mass;
    let measurement = CompareMeasurement {
        modes: cfg.galerkin.modes,
        cells: grid.cells(0),
        fv_steps: fv.summary.steps,
        galerkin_steps: steps,
        relative_l2,
        max_abs_galerkin_energy_residual: residual.iter().fold(0.0f64, |m, r| m.max(r.abs())),
        galerkin_mass_drift: records.iter().fold(0.0f64, |m, r| m.max((r.mass - m0).abs())),
    };
    Ok((measurement, records))
}

pub fn galerkin_compare(cfg: &RunConfig, out: Option<&Path>) -> Result<CompareReport> {
    if !(cfg.model.eps_mobility > 0.0) {
        return Err(Error::InvalidParams("galerkin comparison needs model.eps_mobility > 0".into()));
    }
    let (measurement, records) = compare_once(cfg)?;
    let (halved, halving_change) = if cfg.compare.check_dt_halving {
        let mut h = cfg.clone();
        h.step.cfl_safety *= 0.5;
        h.step.dt_init *= 0.5;
        h.galerkin.cfl_safety *= 0.5;
        h.galerkin.dt = h.galerkin.dt.map(|dt| 0.5 * dt);
        let (m, _) = compare_once(&h)?;
        let change = (m.relative_l2 - measurement.relative_l2).abs() / measurement.relative_l2;
        (Some(m), Some(change))
    } else {
        (None, None)
    };
    let mut violations = Vec::new();
    if !(measurement.relative_l2 <= cfg.compare.tolerance) {
        violations.push(format!(
            "relative L2 distance {:.3e} exceeds {:.1e}",
            measurement.relative_l2, cfg.compare.tolerance
        ));
    }
    let report = CompareReport { measurement, halved, halving_change, tolerance: cfg.compare.tolerance, violations };
    if let Some(dir) = out {
        io::ensure_dir(dir)?;
        io::write_galerkin_records(&dir.join("galerkin.csv"), &records)?;
        io::write_json(&dir.join("galerkin_compare.json"), &report)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::InitialCondition;

    #[test]
    fn constant_data_agree_exactly() {
        let mut cfg = RunConfig::default();
        cfg.model.eps_mobility = 1e-3;
        cfg.grid.cells = vec![32];
        cfg.galerkin.modes = 8;
        cfg.step.t_end = 1e-3;
        cfg.initial.condition = InitialCondition::Constant { value: 0.5 };
        let r = galerkin_compare(&cfg, None).unwrap();
        assert!(r.measurement.relative_l2 < 1e-13, "{}", r.measurement.relative_l2);
    }

    #[test]
    fn degenerate_mobility_rejected() {
        assert!(galerkin_compare(&RunConfig::default(), None).is_err());
    }
}
