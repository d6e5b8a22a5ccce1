//! Cahn-Hilliard form vs Keller-Segel form on two resolutions.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::parallel::thread_pool;
use crate::elliptic::{compute_mu, mu_from_pressure, mu_consistency_tolerance};
use crate::error::{Error, Result};
use crate::field::{l2_distance, linf_distance};
use crate::state::StateBundle;
use crate::stepper::Stepper;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceLevel {
    pub cells: usize,
    pub steps: usize,
    /// `‖n_ks(T) - n_ch(T)‖∞`.
    pub linf_terminal: f64,
    /// `max_t ‖n_ks(t) - n_ch(t)‖∞`.
    pub linf_max: f64,
    pub l2_terminal: f64,
    /// Largest excess of `|mu - (w^gamma - delta Δ_h w)|` over its expected bound, over
    /// both trajectories and all steps (nonpositive when consistent).
    pub mu_mismatch_excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub levels: Vec<EquivalenceLevel>,
    /// Coarse over fine terminal L∞ difference.
    pub ratio_terminal: Option<f64>,
    pub ratio_max: Option<f64>,
    pub min_ratio: f64,
    pub violations: Vec<String>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Differences below this are treated as identical trajectories.
const IDENTICAL: f64 = 1e-13;

fn mu_excess(state: &StateBundle, cfg: &RunConfig) -> f64 {
    let direct = compute_mu(&state.n, &state.w, &cfg.model);
    let alt = mu_from_pressure(&state.w, &cfg.model);
    linf_distance(&direct, &alt) - mu_consistency_tolerance(&state.w, &cfg.model, &cfg.elliptic)
}

/// Advances both formulations with a common step `min(dt_ch, dt_ks)`.
pub fn compare_level(cfg: &RunConfig, cells: usize) -> Result<EquivalenceLevel> {
    let grid = cfg.grid.with_cells(cells).build()?;
    let n0 = cfg.initial_density(grid)?;
    let mut ch_cfg = cfg.step.clone();
    ch_cfg.formulation = "ch".into();
    let mut ks_cfg = cfg.step.clone();
    ks_cfg.formulation = "ks".into();
    let mut ch = Stepper::from_config(cfg.model.clone(), ch_cfg, cfg.elliptic.clone())?;
    let mut ks = Stepper::from_config(cfg.model.clone(), ks_cfg, cfg.elliptic.clone())?;
    let mut a = ch.initial_state(n0.clone(), 0.0)?;
    let mut b = ks.initial_state(n0, 0.0)?;
    let t_end = cfg.step.t_end;
    let mut steps = 0;
    let mut linf_max = linf_distance(&a.n, &b.n);
    let mut mu_mismatch_excess = mu_excess(&a, cfg).max(mu_excess(&b, cfg));
    while a.t < t_end * (1.0 - 1e-14) {
        if steps >= cfg.step.max_steps {
            return Err(Error::Config(format!("max_steps = {} reached before t_end", cfg.step.max_steps)));
        }
        let wrap = |e: Error, t: f64| Error::Solver { step: steps, t, source: Box::new(e) };
        let dt = ch
            .next_dt(&a)
            .and_then(|x| ks.next_dt(&b).map(|y| x.min(y)))
            .map_err(|e| wrap(e, a.t))?
            .min(t_end - a.t);
        a = ch.step(&a, dt).map_err(|e| wrap(e, a.t))?;
        b = ks.step(&b, dt).map_err(|e| wrap(e, b.t))?;
        steps += 1;
        linf_max = linf_max.max(linf_distance(&a.n, &b.n));
        mu_mismatch_excess = mu_mismatch_excess.max(mu_excess(&a, cfg)).max(mu_excess(&b, cfg));
    }
    Ok(EquivalenceLevel {
        cells,
        steps,
        linf_terminal: linf_distance(&a.n, &b.n),
        linf_max,
        l2_terminal: l2_distance(&a.n, &b.n),
        mu_mismatch_excess,
    })
}

fn ratio(coarse: f64, fine: f64) -> Option<f64> {
    (coarse > IDENTICAL || fine > IDENTICAL).then(|| coarse / fine)
}

pub fn equivalence_check(cfg: &RunConfig, out: Option<&Path>) -> Result<EquivalenceReport> {
    if !(cfg.model.sigma > 0.0) {
        return Err(Error::InvalidParams("the equivalence check needs sigma > 0".into()));
    }
    let [coarse, fine] = cfg.equivalence.cells;
    if fine <= coarse {
        return Err(Error::Config(format!("equivalence.cells must be increasing, got {:?}", cfg.equivalence.cells)));
    }
    let levels: Vec<EquivalenceLevel> =
        thread_pool()?.install(|| [coarse, fine].par_iter().map(|&n| compare_level(cfg, n)).collect::<Result<_>>())?;
    let ratio_terminal = ratio(levels[0].linf_terminal, levels[1].linf_terminal);
    let ratio_max = ratio(levels[0].linf_max, levels[1].linf_max);
    let mut violations = Vec::new();
    for l in &levels {
        if l.mu_mismatch_excess > 0.0 {
            violations.push(format!(
                "N = {}: the two evaluations of mu disagree beyond tolerance by {:.3e}",
                l.cells, l.mu_mismatch_excess
            ));
        }
    }
    if let Some(r) = ratio_terminal {
        if !(r >= cfg.equivalence.min_ratio) {
            violations.push(format!(
                "refinement ratio of the L∞ difference is {r:.4}, below {}",
                cfg.equivalence.min_ratio
            ));
        }
    }
    let report = EquivalenceReport {
        levels,
        ratio_terminal,
        ratio_max,
        min_ratio: cfg.equivalence.min_ratio,
        violations,
    };
    if let Some(dir) = out {
        super::io::ensure_dir(dir)?;
        super::io::write_json(&dir.join("equivalence.json"), &report)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::InitialCondition;

    #[test]
    fn constant_data_gives_identical_trajectories() {
        let mut cfg = RunConfig::default();
        cfg.initial.condition = InitialCondition::Constant { value: 0.6 };
        cfg.equivalence.cells = [16, 32];
        cfg.step.t_end = 1e-3;
        let r = equivalence_check(&cfg, None).unwrap();
        assert!(r.levels.iter().all(|l| l.linf_max == 0.0));
        assert!(r.ratio_terminal.is_none());
        assert!(r.passed(), "{:?}", r.violations);
    }

    #[test]
    fn relaxation_is_required() {
        let mut cfg = RunConfig::default();
        cfg.model.sigma = 0.0;
        assert!(equivalence_check(&cfg, None).is_err());
    }
}
