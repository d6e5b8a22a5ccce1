//! Explicit time integration of the density equation.
//!
//! One step: evaluate `dn/dt` with the selected [`Formulation`], advance `n` by forward
//! Euler, then re-solve the elliptic constraint for `w` and rebuild `mu` and `p`.

mod ch;
mod formulation;
mod ks;
mod mobility;

use serde::{Deserialize, Serialize};

pub use ch::CahnHilliardForm;
pub use formulation::{Formulation, FormulationFactory, FormulationRegistry};
pub use ks::KellerSegelForm;
pub use mobility::{mobility, FaceMobility};

use crate::elliptic::{compute_mu, pressure, solve_w_from, EllipticConfig};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::numeric::positive_power_derivative;
use crate::params::ModelParams;
use crate::state::StateBundle;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepConfig {
    /// Registered formulation name (`ch` or `ks` by default).
    pub formulation: String,
    /// First and largest step. With `adaptive = false` every step uses exactly this value.
    pub dt_init: f64,
    pub adaptive: bool,
    pub cfl_safety: f64,
    pub dt_min: f64,
    pub t_end: f64,
    /// Count cells that went negative after each step (values are never clipped).
    pub positivity_clip_report: bool,
    pub face_mobility: FaceMobility,
    pub max_steps: usize,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            formulation: "ch".into(),
            dt_init: 1e-2,
            adaptive: true,
            cfl_safety: 0.4,
            dt_min: 1e-14,
            t_end: 0.1,
            positivity_clip_report: true,
            face_mobility: FaceMobility::Upwind,
            max_steps: 100_000_000,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_init > 0.0 && self.t_end > 0.0) {
            return Err(Error::InvalidParams("dt_init and t_end must be positive".into()));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "cfl_safety {} must lie in (0, 1]",
                self.cfl_safety
            )));
        }
        if !(self.dt_min > 0.0) {
            return Err(Error::InvalidParams("dt_min must be positive".into()));
        }
        Ok(())
    }
}

/// Information handed to an observer after each accepted step.
pub struct StepEvent<'a> {
    pub index: usize,
    pub dt: f64,
    pub prev: &'a StateBundle,
    pub next: &'a StateBundle,
    /// Cells with `n < 0` after the step, when `positivity_clip_report` is on.
    pub negative_cells: Option<usize>,
}

/// Bundles a formulation with the parameters it advances.
#[derive(Debug)]
pub struct Stepper {
    formulation: Box<dyn Formulation>,
    params: ModelParams,
    step_cfg: StepConfig,
    elliptic_cfg: EllipticConfig,
    rate: Vec<f64>,
}

impl Stepper {
    pub fn new(
        formulation: Box<dyn Formulation>,
        params: ModelParams,
        step_cfg: StepConfig,
        elliptic_cfg: EllipticConfig,
    ) -> Result<Self> {
        formulation.check(&params)?;
        step_cfg.validate()?;
        elliptic_cfg.validate()?;
        Ok(Self {
            formulation,
            params,
            step_cfg,
            elliptic_cfg,
            rate: Vec::new(),
        })
    }

    /// Looks the formulation up by `step_cfg.formulation` in the built-in registry.
    pub fn from_config(params: ModelParams, step_cfg: StepConfig, elliptic_cfg: EllipticConfig) -> Result<Self> {
        let formulation = FormulationRegistry::with_builtin().create(&step_cfg.formulation)?;
        Self::new(formulation, params, step_cfg, elliptic_cfg)
    }

    pub fn formulation(&self) -> &dyn Formulation {
        self.formulation.as_ref()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn step_config(&self) -> &StepConfig {
        &self.step_cfg
    }

    pub fn elliptic_config(&self) -> &EllipticConfig {
        &self.elliptic_cfg
    }

    /// Completes `n0` into a consistent state at time `t`.
    pub fn initial_state(&self, n0: Field, t: f64) -> Result<StateBundle> {
        assemble_state(n0, None, t, &self.params, &self.elliptic_cfg)
    }

    pub fn stable_dt(&self, state: &StateBundle) -> f64 {
        stable_dt(state, &self.params, &self.step_cfg, self.formulation.as_ref())
    }

    /// Forward-Euler step of length `dt` followed by the elliptic re-solve.
    pub fn step(&mut self, state: &StateBundle, dt: f64) -> Result<StateBundle> {
        self.rate.resize(state.n.len(), 0.0);
        self.formulation
            .rate(state, &self.params, self.step_cfg.face_mobility, &mut self.rate);
        let mut n = state.n.clone();
        for (v, r) in n.values_mut().iter_mut().zip(&self.rate) {
            *v += dt * r;
        }
        if !n.is_finite() {
            return Err(Error::NonFinite("density update"));
        }
        assemble_state(n, Some(&state.w), state.t + dt, &self.params, &self.elliptic_cfg)
    }

    /// Step size for the next step from `state`, before clamping to `t_end`.
    pub fn next_dt(&self, state: &StateBundle) -> Result<f64> {
        if !self.step_cfg.adaptive {
            return Ok(self.step_cfg.dt_init);
        }
        let dt = self.stable_dt(state).min(self.step_cfg.dt_init);
        if dt < self.step_cfg.dt_min {
            return Err(Error::DtUnderflow {
                dt,
                dt_min: self.step_cfg.dt_min,
            });
        }
        Ok(dt)
    }

    /// Advances `state` to `t_end`, calling `observer` after every step.
    pub fn integrate<F>(&mut self, mut state: StateBundle, mut observer: F) -> Result<StateBundle>
    where
        F: FnMut(&StepEvent<'_>) -> Result<()>,
    {
        let t_end = self.step_cfg.t_end;
        let mut index = 0;
        while state.t < t_end * (1.0 - 1e-14) {
            if index >= self.step_cfg.max_steps {
                return Err(Error::Solver {
                    step: index,
                    t: state.t,
                    source: Box::new(Error::InvalidParams(format!(
                        "max_steps = {} reached before t_end",
                        self.step_cfg.max_steps
                    ))),
                });
            }
            let wrap = |e: Error, t: f64| Error::Solver {
                step: index,
                t,
                source: Box::new(e),
            };
            let dt = self.next_dt(&state).map_err(|e| wrap(e, state.t))?;
            let dt = dt.min(t_end - state.t);
            let next = self.step(&state, dt).map_err(|e| wrap(e, state.t))?;
            let negative_cells = self
                .step_cfg
                .positivity_clip_report
                .then(|| next.n.values().iter().filter(|v| **v < 0.0).count());
            observer(&StepEvent {
                index,
                dt,
                prev: &state,
                next: &next,
                negative_cells,
            })?;
            state = next;
            index += 1;
        }
        Ok(state)
    }
}

/// Builds `(w, mu, p)` for the density `n`, warm-starting the elliptic solve at `guess`.
pub fn assemble_state(
    n: Field,
    guess: Option<&Field>,
    t: f64,
    params: &ModelParams,
    cfg: &EllipticConfig,
) -> Result<StateBundle> {
    let sol = solve_w_from(&n, guess, params, cfg).map_err(Error::elliptic)?;
    let mu = compute_mu(&n, &sol.w, params);
    let p = pressure(&sol.w, params);
    let state = StateBundle {
        t,
        n,
        w: sol.w,
        mu,
        p,
        elliptic_residual: sol.residual,
    };
    if !state.is_finite() {
        return Err(Error::NonFinite("state assembly"));
    }
    Ok(state)
}

/// Explicit step-size bound.
///
/// The diffusive bound linearizes the system at the current maxima: a Neumann mode with
/// `-Δ_h` eigenvalue `k` decays at rate `B k (delta k + g) / (1 + sigma (k + g/delta))`
/// where `g = gamma w^(gamma-1)`. This is `~ B delta k / sigma` for `sigma > 0` and
/// `~ B delta k^2` for `sigma = 0`. The result is further capped by the formulation's
/// positivity restriction and by `1 / (2 max|G|)`.
pub fn stable_dt(state: &StateBundle, params: &ModelParams, cfg: &StepConfig, formulation: &dyn Formulation) -> f64 {
    let grid = state.n.grid();
    let k = grid.laplacian_spectral_radius();
    let eps = params.eps_mobility;
    let b_max = state
        .n
        .values()
        .iter()
        .fold(0.0_f64, |m, &v| m.max(mobility(v, eps)))
        .max(eps);
    let g = positive_power_derivative(state.w.max(), params.gamma);
    let lambda = b_max * k * (params.delta * k + g) / (1.0 + params.sigma * (k + g / params.delta));
    let mut dt = if lambda > 0.0 {
        cfg.cfl_safety * 2.0 / lambda
    } else {
        f64::INFINITY
    };
    dt = dt.min(cfg.cfl_safety * formulation.positivity_dt(state, params));
    if !params.growth.is_zero() {
        let g_max = state
            .mu
            .values()
            .iter()
            .fold(0.0_f64, |m, &v| m.max(params.growth.eval(v).abs()));
        if g_max > 0.0 {
            dt = dt.min(0.5 / g_max);
        }
    }
    dt
}

/// One Cahn-Hilliard-form step of length `dt`.
pub fn ch_step(
    state: &StateBundle,
    dt: f64,
    params: &ModelParams,
    step_cfg: &StepConfig,
    elliptic_cfg: &EllipticConfig,
) -> Result<StateBundle> {
    Stepper::new(Box::new(CahnHilliardForm), params.clone(), step_cfg.clone(), elliptic_cfg.clone())?.step(state, dt)
}

/// One Keller-Segel-form step of length `dt`.
pub fn ks_step(
    state: &StateBundle,
    dt: f64,
    params: &ModelParams,
    step_cfg: &StepConfig,
    elliptic_cfg: &EllipticConfig,
) -> Result<StateBundle> {
    Stepper::new(Box::new(KellerSegelForm), params.clone(), step_cfg.clone(), elliptic_cfg.clone())?.step(state, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{linf_distance, quadrature};
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn params() -> ModelParams {
        ModelParams::new(1.0, 1.0, 4.0).unwrap()
    }

    fn stepper(name: &str, p: ModelParams) -> Stepper {
        let cfg = StepConfig {
            formulation: name.into(),
            ..Default::default()
        };
        Stepper::from_config(p, cfg, EllipticConfig::default()).unwrap()
    }

    fn bump(n: usize) -> Field {
        Field::from_fn(Grid::new_1d(1.0, n).unwrap(), |x| 0.5 + 0.3 * (PI * x[0]).cos())
    }

    #[test]
    fn uniform_state_is_a_fixed_point() {
        for name in ["ch", "ks"] {
            let mut s = stepper(name, params());
            let st = s.initial_state(Field::constant(Grid::new_1d(1.0, 32).unwrap(), 0.6), 0.0).unwrap();
            let next = s.step(&st, s.stable_dt(&st)).unwrap();
            assert_eq!(next.n, st.n, "{name}");
        }
    }

    #[test]
    fn uniform_state_dt_is_finite_diffusive_bound() {
        let s = stepper("ch", params());
        let st = s.initial_state(Field::constant(Grid::new_1d(1.0, 32).unwrap(), 0.6), 0.0).unwrap();
        let dt = s.stable_dt(&st);
        assert!(dt.is_finite() && dt > 0.0);
        let st2 = s
            .initial_state(Field::constant(Grid::new_1d(1.0, 64).unwrap(), 0.6), 0.0)
            .unwrap();
        let ratio = dt / s.stable_dt(&st2);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn ks_rejects_degenerate_configuration() {
        let p = ModelParams::new(0.0, 1.0, 3.0).unwrap();
        let cfg = StepConfig {
            formulation: "ks".into(),
            ..Default::default()
        };
        assert!(Stepper::from_config(p, cfg, EllipticConfig::default()).is_err());
    }

    #[test]
    fn flux_form_conserves_mass() {
        for name in ["ch", "ks"] {
            let mut s = stepper(name, params());
            let mut st = s.initial_state(bump(64), 0.0).unwrap();
            let m0 = quadrature(&st.n);
            for _ in 0..100 {
                let dt = s.stable_dt(&st);
                st = s.step(&st, dt).unwrap();
            }
            let drift = ((quadrature(&st.n) - m0) / m0).abs();
            assert!(drift <= 1e-12, "{name}: drift {drift}");
        }
    }

    #[test]
    fn first_order_in_time() {
        // self-consistency over a fixed horizon: gap(dt) = |n_dt(T) - n_{dt/2}(T)| ~ C dt
        let mut s = stepper("ch", params());
        let st = s.initial_state(bump(64), 0.0).unwrap();
        let horizon = 2e-4;
        let mut run = |dt: f64| {
            let mut cur = st.clone();
            for _ in 0..(horizon / dt).round() as usize {
                cur = s.step(&cur, dt).unwrap();
            }
            cur.n
        };
        let (a, b, c) = (run(1e-5), run(5e-6), run(2.5e-6));
        let g1 = linf_distance(&a, &b);
        let g2 = linf_distance(&b, &c);
        assert!(g1 <= 1e-5, "{g1}");
        let ratio = g1 / g2;
        assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn integrate_lands_on_t_end() {
        let cfg = StepConfig {
            t_end: 1e-3,
            ..Default::default()
        };
        let mut s = Stepper::from_config(params(), cfg, EllipticConfig::default()).unwrap();
        let st = s.initial_state(bump(32), 0.0).unwrap();
        let mut steps = 0;
        let end = s
            .integrate(st, |ev| {
                steps += 1;
                assert_eq!(ev.negative_cells, Some(0));
                Ok(())
            })
            .unwrap();
        assert!((end.t - 1e-3).abs() < 1e-15);
        assert!(steps > 1);
    }

    #[test]
    fn dt_underflow_is_reported() {
        let cfg = StepConfig {
            dt_min: 1.0,
            ..Default::default()
        };
        let mut s = Stepper::from_config(params(), cfg, EllipticConfig::default()).unwrap();
        let st = s.initial_state(bump(32), 0.0).unwrap();
        match s.integrate(st, |_| Ok(())) {
            Err(Error::Solver { source, .. }) => {
                assert!(matches!(*source, Error::DtUnderflow { .. }))
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
