//! Discrete Neumann Laplacian and the nonlinear elliptic constraint
//! `-sigma Δw + (sigma/delta) max(0,w)^gamma + w = n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::linalg::{conjugate_gradient, solve_tridiagonal};
use crate::numeric::{max_abs, positive_power, positive_power_derivative};
use crate::params::ModelParams;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearSolver {
    /// Thomas algorithm in 1D, conjugate gradients in 2D.
    #[default]
    Auto,
    ConjugateGradient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EllipticConfig {
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Initial Newton step length; halved on every failed line-search trial.
    pub damping: f64,
    pub linear_tol: f64,
    pub linear_solver: LinearSolver,
}

impl Default for EllipticConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            newton_max_iter: 50,
            damping: 1.0,
            linear_tol: 1e-12,
            linear_solver: LinearSolver::Auto,
        }
    }
}

impl EllipticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0 && self.linear_tol > 0.0) {
            return Err(Error::InvalidParams("elliptic tolerances must be positive".into()));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidParams("newton_max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "damping {} must lie in (0, 1]",
                self.damping
            )));
        }
        Ok(())
    }
}

/// Writes `-Δ_h f` into `out` (reflected ghost cells, so boundary faces carry no flux).
pub fn neg_laplacian_into(grid: &Grid, f: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    grid.for_each_face(|l, r, inv_h| {
        let flux = (f[r] - f[l]) * inv_h * inv_h;
        out[l] -= flux;
        out[r] += flux;
    });
}

/// Five-point (2D) or three-point (1D) Neumann Laplacian.
pub fn neumann_laplacian(f: &Field) -> Field {
    let mut out = vec![0.0; f.len()];
    neg_laplacian_into(f.grid(), f.values(), &mut out);
    out.iter_mut().for_each(|v| *v = -*v);
    Field::from_values(*f.grid(), out)
}

/// `max(0, w)^gamma` cellwise.
pub fn pressure(w: &Field, params: &ModelParams) -> Field {
    w.map(|v| positive_power(v, params.gamma))
}

#[derive(Clone, Debug)]
pub struct EllipticSolution {
    pub w: Field,
    pub residual: f64,
    pub iterations: usize,
}

/// Solves for `w` given `n`, starting from a pointwise upper bound of the root.
pub fn solve_w(n: &Field, params: &ModelParams, cfg: &EllipticConfig) -> Result<EllipticSolution> {
    solve_w_from(n, None, params, cfg)
}

/// As [`solve_w`], warm-started from `guess` when given.
pub fn solve_w_from(
    n: &Field,
    guess: Option<&Field>,
    params: &ModelParams,
    cfg: &EllipticConfig,
) -> Result<EllipticSolution> {
    if params.is_degenerate_ch() {
        return Ok(EllipticSolution {
            w: n.clone(),
            residual: 0.0,
            iterations: 0,
        });
    }
    let grid = *n.grid();
    let mut solver = NewtonSolver::new(grid, params, cfg);
    let mut w = match guess {
        Some(g) => g.values().to_vec(),
        None => initial_guess(n.values(), params),
    };
    let (residual, iterations) = solver.solve(n.values(), &mut w)?;
    Ok(EllipticSolution {
        w: Field::from_values(grid, w),
        residual,
        iterations,
    })
}

/// The scalar root of `w + (sigma/delta) w^gamma = n` is bounded by both `n` and
/// `(delta n / sigma)^(1/gamma)`; starting above the root keeps Newton monotone.
fn initial_guess(n: &[f64], params: &ModelParams) -> Vec<f64> {
    let ratio = params.delta / params.sigma;
    n.iter()
        .map(|&v| {
            if v > 0.0 {
                v.min((ratio * v).powf(1.0 / params.gamma))
            } else {
                v
            }
        })
        .collect()
}

struct NewtonSolver<'a> {
    grid: Grid,
    params: &'a ModelParams,
    cfg: &'a EllipticConfig,
    lap: Vec<f64>,
    residual: Vec<f64>,
    trial: Vec<f64>,
}

impl<'a> NewtonSolver<'a> {
    fn new(grid: Grid, params: &'a ModelParams, cfg: &'a EllipticConfig) -> Self {
        let len = grid.len();
        Self {
            grid,
            params,
            cfg,
            lap: vec![0.0; len],
            residual: vec![0.0; len],
            trial: vec![0.0; len],
        }
    }

    /// Writes F(w) into `self.residual` and returns its max norm.
    fn eval_residual(&mut self, n: &[f64], w: &[f64]) -> f64 {
        let sigma = self.params.sigma;
        let coupling = sigma / self.params.delta;
        let gamma = self.params.gamma;
        neg_laplacian_into(&self.grid, w, &mut self.lap);
        for i in 0..w.len() {
            self.residual[i] = sigma * self.lap[i] + coupling * positive_power(w[i], gamma) + w[i] - n[i];
        }
        max_abs(&self.residual)
    }

    fn solve(&mut self, n: &[f64], w: &mut [f64]) -> Result<(f64, usize)> {
        let mut res = self.eval_residual(n, w);
        if !res.is_finite() {
            return Err(Error::NonFinite("elliptic residual"));
        }
        for iter in 0..self.cfg.newton_max_iter {
            if res <= self.cfg.newton_tol {
                return Ok((res, iter));
            }
            let step = self.newton_direction(w)?;
            let mut lambda = self.cfg.damping;
            let mut accepted = false;
            for _ in 0..40 {
                for i in 0..w.len() {
                    self.trial[i] = w[i] + lambda * step[i];
                }
                let trial = std::mem::take(&mut self.trial);
                let trial_res = self.eval_residual(n, &trial);
                self.trial = trial;
                if trial_res.is_finite() && trial_res <= (1.0 - 1e-4 * lambda) * res {
                    w.copy_from_slice(&self.trial);
                    res = trial_res;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        // leave self.residual consistent with w before reporting
        res = self.eval_residual(n, w);
        if res <= self.cfg.newton_tol {
            Ok((res, self.cfg.newton_max_iter))
        } else {
            Err(Error::NonConvergence {
                iterations: self.cfg.newton_max_iter,
                residual: res,
            })
        }
    }

    /// Solves `J s = -F` with `J = sigma(-Δ_h) + diag((sigma/delta) P'(w) + 1)`.
    fn newton_direction(&mut self, w: &[f64]) -> Result<Vec<f64>> {
        let sigma = self.params.sigma;
        let coupling = sigma / self.params.delta;
        let gamma = self.params.gamma;
        let reaction: Vec<f64> = w
            .iter()
            .map(|&v| coupling * positive_power_derivative(v, gamma) + 1.0)
            .collect();
        let rhs: Vec<f64> = self.residual.iter().map(|r| -r).collect();
        let use_direct = self.grid.dim() == 1 && self.cfg.linear_solver == LinearSolver::Auto;
        if use_direct {
            let len = w.len();
            let k = sigma / self.grid.spacing(0).powi(2);
            let mut lower = vec![-k; len];
            let mut upper = vec![-k; len];
            let mut diag: Vec<f64> = reaction.iter().map(|r| r + 2.0 * k).collect();
            lower[0] = 0.0;
            upper[len - 1] = 0.0;
            diag[0] -= k;
            diag[len - 1] -= k;
            return solve_tridiagonal(&lower, &diag, &upper, &rhs);
        }
        let grid = self.grid;
        let mut precond = reaction.clone();
        grid.for_each_face(|l, r, inv_h| {
            let k = sigma * inv_h * inv_h;
            precond[l] += k;
            precond[r] += k;
        });
        let mut x = vec![0.0; w.len()];
        conjugate_gradient(
            |v, out| {
                neg_laplacian_into(&grid, v, out);
                for i in 0..v.len() {
                    out[i] = sigma * out[i] + reaction[i] * v[i];
                }
            },
            &precond,
            &rhs,
            &mut x,
            self.cfg.linear_tol,
            10 * w.len() + 100,
        )?;
        Ok(x)
    }
}

/// Chemical potential. For `sigma > 0`, `mu = (delta/sigma)(n - w)`; for `sigma = 0`,
/// `mu = max(0,n)^gamma - delta Δ_h n`.
pub fn compute_mu(n: &Field, w: &Field, params: &ModelParams) -> Field {
    if params.is_degenerate_ch() {
        mu_from_pressure(n, params)
    } else {
        let ratio = params.delta / params.sigma;
        n.zip_map(w, |a, b| ratio * (a - b))
    }
}

/// The alternative evaluation `max(0,w)^gamma - delta Δ_h w`.
pub fn mu_from_pressure(w: &Field, params: &ModelParams) -> Field {
    let mut lap = vec![0.0; w.len()];
    neg_laplacian_into(w.grid(), w.values(), &mut lap);
    let values = w
        .values()
        .iter()
        .zip(&lap)
        .map(|(&v, &l)| positive_power(v, params.gamma) + params.delta * l)
        .collect();
    Field::from_values(*w.grid(), values)
}

/// Agreement to expect between [`compute_mu`] and [`mu_from_pressure`]: the two differ by
/// exactly `(delta/sigma)` times the elliptic residual, plus rounding in `Δ_h w`.
pub fn mu_consistency_tolerance(w: &Field, params: &ModelParams, cfg: &EllipticConfig) -> f64 {
    let rounding = 64.0 * f64::EPSILON * params.delta * w.grid().laplacian_spectral_radius() * (1.0 + w.norm(crate::field::Norm::Linf));
    if params.is_degenerate_ch() {
        rounding
    } else {
        params.delta / params.sigma * cfg.newton_tol + rounding
    }
}
