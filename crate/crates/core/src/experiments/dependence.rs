//! Twin runs from nearby initial data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::diagnostics::continuous_dependence;
use crate::error::{Error, Result};
use crate::field::{l2_distance, Field};
use crate::stepper::Stepper;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependenceReport {
    pub delta0: f64,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub max_distance: f64,
    pub terminal_distance: f64,
    /// Allowed growth factor of the distance over the run.
    pub growth_limit: f64,
    pub passed: bool,
}

/// Runs `cfg` from `n0` and from `n0 + delta0 * e`, where `e` is a unit-L2 cosine mode, in
/// lockstep with a common step size, and records the L2 distance at every step.
pub fn twin_run(cfg: &RunConfig, delta0: f64, growth_limit: f64) -> Result<DependenceReport> {
    if !cfg.model.growth.is_zero() {
        return Err(Error::InvalidParams("continuous dependence is measured without growth".into()));
    }
    if !(delta0 > 0.0) {
        return Err(Error::InvalidParams("the initial distance must be positive".into()));
    }
    let grid = cfg.build_grid()?;
    let n0 = cfg.initial_density(grid)?;
    let (lx, ly) = (grid.extent(0), grid.extent(1));
    let dim = grid.dim();
    let shape = Field::from_fn(grid, |x| {
        let mut v = (2.0 * PI * x[0] / lx).cos();
        if dim == 2 {
            v *= (2.0 * PI * x[1] / ly).cos();
        }
        v
    });
    let scale = delta0 / shape.norm(crate::Norm::L2);
    let n1 = n0.zip_map(&shape, |a, e| a + scale * e);
    let mut sa = Stepper::from_config(cfg.model.clone(), cfg.step.clone(), cfg.elliptic.clone())?;
    let mut sb = Stepper::from_config(cfg.model.clone(), cfg.step.clone(), cfg.elliptic.clone())?;
    let mut a = sa.initial_state(n0, 0.0)?;
    let mut b = sb.initial_state(n1, 0.0)?;
    let measured0 = l2_distance(&a.n, &b.n);
    let mut times = vec![0.0];
    let mut traj_a = vec![a.n.clone()];
    let mut traj_b = vec![b.n.clone()];
    let t_end = cfg.step.t_end;
    let stride = cfg.output.stride;
    let mut step = 0;
    while a.t < t_end * (1.0 - 1e-14) {
        let wrap = |e: Error, t: f64| Error::Solver { step, t, source: Box::new(e) };
        let dt = sa
            .next_dt(&a)
            .and_then(|x| sb.next_dt(&b).map(|y| x.min(y)))
            .map_err(|e| wrap(e, a.t))?
            .min(t_end - a.t);
        a = sa.step(&a, dt).map_err(|e| wrap(e, a.t))?;
        b = sb.step(&b, dt).map_err(|e| wrap(e, b.t))?;
        step += 1;
        if step % stride == 0 || a.t >= t_end * (1.0 - 1e-14) {
            times.push(a.t);
            traj_a.push(a.n.clone());
            traj_b.push(b.n.clone());
        }
    }
    let distances = continuous_dependence(&traj_a, &traj_b);
    let terminal_distance = *distances.last().expect("initial entry present");
    let max_distance = distances.iter().fold(0.0f64, |m, d| m.max(*d));
    Ok(DependenceReport {
        delta0: measured0,
        times,
        distances,
        max_distance,
        terminal_distance,
        growth_limit,
        passed: terminal_distance <= growth_limit * measured0,
    })
}
