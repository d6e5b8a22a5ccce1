//! Parameter sweeps toward the `sigma -> 0` and `gamma -> infinity` limits.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::parallel::thread_pool;
use super::run::{simulate_from, write_run, RunOutput};
use crate::diagnostics::{dirichlet_form, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::field::{l2_distance, Field, Norm};
use crate::numeric::loglog_slope;

/// Terminal measurements of one sweep member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMember {
    pub value: f64,
    pub steps: usize,
    pub terminal: DiagnosticsRecord,
    /// `‖n(T) - n_ref(T)‖_{L2}` for sigma sweeps.
    pub distance_to_reference: Option<f64>,
    /// `‖(sigma/delta) mu(T)‖_{L2}`.
    pub scaled_mu_l2: f64,
    /// `‖∇_h w(T) - ∇_h n(T)‖_{L2}`.
    pub gradient_gap_l2: f64,
    /// `max(0, max w(T) - 1)`.
    pub excess_above_one: f64,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameter: String,
    pub values: Vec<f64>,
    pub reference: Option<SweepMember>,
    pub members: Vec<SweepMember>,
    /// `‖n_i(T) - n_j(T)‖_{L2}` between members.
    pub pairwise_distances: Vec<Vec<f64>>,
    /// Ratios of consecutive entries of the monitored series (distance to the reference
    /// for sigma, complementarity residual for gamma).
    pub successive_ratios: Vec<f64>,
    /// Least-squares slope of the monitored series against the parameter in log-log scale.
    pub fitted_slope: Option<f64>,
    pub violations: Vec<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn member(value: f64, out: &RunOutput, reference: Option<&Field>) -> SweepMember {
    let st = &out.final_state;
    let p = &out.config.model;
    let scaled_mu_l2 = p.sigma / p.delta * st.mu.norm(Norm::L2);
    let gap = st.w.zip_map(&st.n, |a, b| a - b);
    SweepMember {
        value,
        steps: out.summary.steps,
        terminal: out.records.last().expect("at least the initial record").clone(),
        distance_to_reference: reference.map(|r| l2_distance(&st.n, r)),
        scaled_mu_l2,
        gradient_gap_l2: dirichlet_form(&gap).sqrt(),
        excess_above_one: (st.w.max() - 1.0).max(0.0),
        violations: out.violations.clone(),
    }
}

/// `‖a_i - a_j‖_{L2}` for all pairs.
pub fn pairwise_distances(fields: &[&Field]) -> Vec<Vec<f64>> {
    fields
        .iter()
        .map(|a| fields.iter().map(|b| l2_distance(a, b)).collect())
        .collect()
}

fn strictly_monotone(values: &[f64], decreasing: bool) -> bool {
    values.windows(2).all(|w| if decreasing { w[1] < w[0] } else { w[1] > w[0] })
}

fn run_members(base: &RunConfig, configs: Vec<RunConfig>, labels: &[String], out: Option<&Path>) -> Result<Vec<RunOutput>> {
    let grid = base.build_grid()?;
    let n0 = base.initial_density(grid)?;
    let pool = thread_pool()?;
    pool.install(|| {
        configs
            .par_iter()
            .zip(labels.par_iter())
            .map(|(cfg, label)| {
                let run = simulate_from(cfg, n0.clone()).map_err(|e| member_error(label, e))?;
                if let Some(dir) = out {
                    write_run(&dir.join("members").join(label), &run)?;
                }
                Ok(run)
            })
            .collect()
    })
}

fn member_error(label: &str, e: Error) -> Error {
    Error::Config(format!("sweep member {label} failed: {e}"))
}

fn member_violations(members: &[SweepMember], name: &str) -> Vec<String> {
    members
        .iter()
        .flat_map(|m| m.violations.iter().map(move |v| format!("{name} = {}: {v}", m.value)))
        .collect()
}

fn ratios(series: &[f64]) -> Vec<f64> {
    series.windows(2).map(|w| w[0] / w[1]).collect()
}

/// Runs every `sigma` of `base.sweep.sigmas` plus the `sigma = 0` reference from the same
/// initial data and compares terminal densities.
///
/// The reference always uses the `ch` formulation, the only one defined at `sigma = 0`.
pub fn sweep_sigma(base: &RunConfig, out: Option<&Path>) -> Result<SweepReport> {
    let sigmas = base.sweep.sigmas.clone();
    if sigmas.is_empty() || !sigmas.iter().all(|s| *s > 0.0) || !strictly_monotone(&sigmas, true) {
        return Err(Error::Config(format!("sweep.sigmas must be positive and strictly decreasing, got {sigmas:?}")));
    }
    let mut configs = Vec::new();
    let mut labels = Vec::new();
    let mut reference_cfg = base.clone();
    reference_cfg.model.sigma = 0.0;
    reference_cfg.step.formulation = "ch".into();
    configs.push(reference_cfg);
    labels.push("sigma_ref".to_string());
    for (k, &s) in sigmas.iter().enumerate() {
        let mut c = base.clone();
        c.model.sigma = s;
        configs.push(c);
        labels.push(format!("sigma_{k}"));
    }
    let runs = run_members(base, configs, &labels, out)?;
    let reference_n = &runs[0].final_state.n;
    let reference = member(0.0, &runs[0], None);
    let members: Vec<SweepMember> = sigmas
        .iter()
        .zip(&runs[1..])
        .map(|(&s, r)| member(s, r, Some(reference_n)))
        .collect();
    let finals: Vec<&Field> = runs[1..].iter().map(|r| &r.final_state.n).collect();
    let dist: Vec<f64> = members.iter().map(|m| m.distance_to_reference.unwrap_or(f64::NAN)).collect();
    let scaled: Vec<f64> = members.iter().map(|m| m.scaled_mu_l2).collect();

    let mut violations = member_violations(std::slice::from_ref(&reference), "sigma");
    violations.extend(member_violations(&members, "sigma"));
    if !strictly_monotone(&dist, true) {
        violations.push(format!("distance to the sigma = 0 run is not strictly decreasing: {dist:?}"));
    }
    if !strictly_monotone(&scaled, true) {
        violations.push(format!("‖(sigma/delta) mu‖ is not strictly decreasing: {scaled:?}"));
    }
    let report = SweepReport {
        parameter: "sigma".into(),
        values: sigmas.clone(),
        reference: Some(reference),
        pairwise_distances: pairwise_distances(&finals),
        successive_ratios: ratios(&dist),
        fitted_slope: loglog_slope(&sigmas, &dist),
        members,
        violations,
    };
    if let Some(dir) = out {
        super::io::write_json(&dir.join("sweep.json"), &report)?;
    }
    Ok(report)
}

/// Runs every `gamma` of `base.sweep.gammas` from the same initial data.
pub fn sweep_gamma(base: &RunConfig, out: Option<&Path>) -> Result<SweepReport> {
    let gammas = base.sweep.gammas.clone();
    if gammas.is_empty() || !gammas.iter().all(|g| *g > 1.0) || !strictly_monotone(&gammas, false) {
        return Err(Error::Config(format!("sweep.gammas must exceed 1 and be strictly increasing, got {gammas:?}")));
    }
    let labels: Vec<String> = (0..gammas.len()).map(|k| format!("gamma_{k}")).collect();
    let configs: Vec<RunConfig> = gammas
        .iter()
        .map(|&g| {
            let mut c = base.clone();
            c.model.gamma = g;
            c
        })
        .collect();
    let runs = run_members(base, configs, &labels, out)?;
    let members: Vec<SweepMember> = gammas.iter().zip(&runs).map(|(&g, r)| member(g, r, None)).collect();
    let finals: Vec<&Field> = runs.iter().map(|r| &r.final_state.n).collect();
    let comp: Vec<f64> = members.iter().map(|m| m.terminal.complementarity).collect();
    let excess: Vec<f64> = members.iter().map(|m| m.excess_above_one).collect();

    let mut violations = member_violations(&members, "gamma");
    if !strictly_monotone(&comp, true) {
        violations.push(format!("complementarity residual is not strictly decreasing: {comp:?}"));
    }
    if excess.windows(2).any(|w| w[1] > w[0] + 1e-12) {
        violations.push(format!("max w - 1 is not decreasing: {excess:?}"));
    }
    let report = SweepReport {
        parameter: "gamma".into(),
        values: gammas.clone(),
        reference: None,
        pairwise_distances: pairwise_distances(&finals),
        successive_ratios: ratios(&comp),
        fitted_slope: loglog_slope(&gammas, &comp),
        members,
        violations,
    };
    if let Some(dir) = out {
        super::io::write_json(&dir.join("sweep.json"), &report)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn identical_members_are_at_zero_distance() {
        let g = Grid::new_1d(1.0, 8).unwrap();
        let a = Field::from_fn(g, |x| x[0]);
        let b = a.clone();
        let c = Field::constant(g, 0.5);
        let d = pairwise_distances(&[&a, &b, &c]);
        assert_eq!(d[0][1], 0.0);
        assert_eq!(d[0][2], d[2][0]);
        assert!(d[1][2] > 0.0);
    }

    #[test]
    fn parameter_lists_must_be_monotone() {
        let mut cfg = RunConfig::default();
        cfg.sweep.sigmas = vec![1e-2, 1e-1];
        assert!(sweep_sigma(&cfg, None).is_err());
        cfg.sweep.gammas = vec![5.0, 5.0];
        assert!(sweep_gamma(&cfg, None).is_err());
        cfg.sweep.gammas = vec![0.5];
        assert!(sweep_gamma(&cfg, None).is_err());
    }

    #[test]
    fn single_gamma_has_no_ratios() {
        let mut cfg = RunConfig::default();
        cfg.grid.cells = vec![16];
        cfg.step.t_end = 1e-3;
        cfg.sweep.gammas = vec![3.0];
        let r = sweep_gamma(&cfg, None).unwrap();
        assert!(r.successive_ratios.is_empty());
        assert!(r.fitted_slope.is_none());
        assert!(r.passed(), "{:?}", r.violations);
    }
}
