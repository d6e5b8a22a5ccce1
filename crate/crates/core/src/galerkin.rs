//! Spectral Galerkin scheme on an interval in the Neumann cosine eigenbasis.
//!
//! Coefficients are indexed from 0: mode `j` has `lambda_j = (j pi / L)^2` and
//! `phi_0 = 1/sqrt(L)`, `phi_j = sqrt(2/L) cos(j pi x / L)`. Nonlinear integrals use the
//! midpoint rule on `oversample * modes` nodes, which integrates products of two basis
//! functions exactly.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::numeric::{compensated_sum, positive_power, positive_power_derivative};
use crate::params::ModelParams;
use crate::stepper::mobility;

/// Gauss-Legendre nodes and weights on [-1, 1], used by [`project_initial`].
const GAUSS5: [(f64, f64); 5] = [
    (-0.906_179_845_938_663_99, 0.236_926_885_056_189_09),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.906_179_845_938_663_99, 0.236_926_885_056_189_09),
];

#[derive(Clone, Debug)]
pub struct SpectralBasis {
    length: f64,
    modes: usize,
    nodes: Vec<f64>,
    weight: f64,
    lambda: Vec<f64>,
    /// `phi[j * q + k] = phi_j(x_k)`.
    phi: Vec<f64>,
    dphi: Vec<f64>,
}

impl SpectralBasis {
    pub fn new(length: f64, modes: usize, oversample: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("interval length must be positive, got {length}")));
        }
        if modes == 0 {
            return Err(Error::InvalidGrid("at least one mode is required".into()));
        }
        if oversample < 2 {
            return Err(Error::InvalidGrid(format!("oversample must be at least 2, got {oversample}")));
        }
        let q = oversample * modes;
        let weight = length / q as f64;
        let nodes: Vec<f64> = (0..q).map(|k| (k as f64 + 0.5) * weight).collect();
        let lambda: Vec<f64> = (0..modes).map(|j| (j as f64 * PI / length).powi(2)).collect();
        let mut phi = Vec::with_capacity(modes * q);
        let mut dphi = Vec::with_capacity(modes * q);
        for j in 0..modes {
            for &x in &nodes {
                phi.push(basis_value(length, j, x));
                dphi.push(basis_derivative(length, j, x));
            }
        }
        Ok(Self { length, modes, nodes, weight, lambda, phi, dphi })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_weight(&self) -> f64 {
        self.weight
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn phi(&self, j: usize) -> &[f64] {
        let q = self.nodes.len();
        &self.phi[j * q..(j + 1) * q]
    }

    pub fn dphi(&self, j: usize) -> &[f64] {
        let q = self.nodes.len();
        &self.dphi[j * q..(j + 1) * q]
    }

    /// `Σ_j a_j phi_j` at the quadrature nodes.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        self.combine(coeffs, &self.phi)
    }

    /// `Σ_j a_j phi_j'` at the quadrature nodes.
    pub fn synthesize_derivative(&self, coeffs: &[f64]) -> Vec<f64> {
        self.combine(coeffs, &self.dphi)
    }

    fn combine(&self, coeffs: &[f64], table: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.modes, "coefficient vector has wrong length");
        let q = self.nodes.len();
        let mut out = vec![0.0; q];
        for (j, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(&table[j * q..(j + 1) * q]) {
                *o += a * v;
            }
        }
        out
    }

    /// `(f, phi_j)` for nodal values `f`, by the node rule.
    pub fn project_nodal(&self, values: &[f64]) -> Vec<f64> {
        (0..self.modes).map(|j| self.integrate_against(values, self.phi(j))).collect()
    }

    fn integrate_against(&self, values: &[f64], table: &[f64]) -> f64 {
        self.weight * compensated_sum(values.iter().zip(table).map(|(a, b)| a * b))
    }

    /// `∫ f` for nodal values `f`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weight * compensated_sum(values.iter().copied())
    }

    /// `Σ_j a_j phi_j(x)` at an arbitrary point.
    pub fn evaluate(&self, coeffs: &[f64], x: f64) -> f64 {
        coeffs.iter().enumerate().map(|(j, a)| a * basis_value(self.length, j, x)).sum()
    }

    /// Samples the expansion at the cell centres of a 1D grid spanning the same interval.
    pub fn reconstruct(&self, coeffs: &[f64], grid: Grid) -> Result<Field> {
        if grid.dim() != 1 || (grid.extent(0) - self.length).abs() > 1e-12 * self.length {
            return Err(Error::InvalidGrid(format!(
                "reconstruction needs a 1D grid of length {}",
                self.length
            )));
        }
        Ok(Field::from_fn(grid, |x| self.evaluate(coeffs, x[0])))
    }
}

fn basis_value(length: f64, j: usize, x: f64) -> f64 {
    if j == 0 {
        1.0 / length.sqrt()
    } else {
        (2.0 / length).sqrt() * (j as f64 * PI * x / length).cos()
    }
}

fn basis_derivative(length: f64, j: usize, x: f64) -> f64 {
    if j == 0 {
        0.0
    } else {
        let k = j as f64 * PI / length;
        -(2.0 / length).sqrt() * k * (k * x).sin()
    }
}

/// `c_j = (n0, phi_j)` by composite five-point Gauss-Legendre on the node cells.
pub fn project_initial(n0: impl Fn(f64) -> f64, basis: &SpectralBasis) -> Vec<f64> {
    let half = 0.5 * basis.weight;
    let mut terms: Vec<Vec<f64>> = vec![Vec::with_capacity(5 * basis.nodes.len()); basis.modes];
    for &centre in &basis.nodes {
        for (xi, wi) in GAUSS5 {
            let x = centre + half * xi;
            let f = half * wi * n0(x);
            for (j, t) in terms.iter_mut().enumerate() {
                t.push(f * basis_value(basis.length, j, x));
            }
        }
    }
    terms.into_iter().map(compensated_sum).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    #[default]
    Euler,
    Rk2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GalerkinConfig {
    pub modes: usize,
    pub oversample: usize,
    pub scheme: TimeScheme,
    /// Fixed step; `None` selects the step from [`GalerkinSolver::stable_dt`].
    pub dt: Option<f64>,
    pub cfl_safety: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// `w` may dip this far below zero at a node before the root is rejected.
    pub admissibility_tol: f64,
}

impl Default for GalerkinConfig {
    fn default() -> Self {
        Self {
            modes: 32,
            oversample: 4,
            scheme: TimeScheme::Euler,
            dt: None,
            cfl_safety: 0.4,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            admissibility_tol: 1e-8,
        }
    }
}

impl GalerkinConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.modes == 0 {
            return bad("galerkin.modes must be positive".into());
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return bad(format!("galerkin.dt must be positive, got {dt}"));
            }
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!("galerkin.cfl_safety must lie in (0, 1], got {}", self.cfl_safety));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return bad("galerkin newton settings must be positive".into());
        }
        if !(self.admissibility_tol >= 0.0) {
            return bad("galerkin.admissibility_tol must be nonnegative".into());
        }
        Ok(())
    }
}

/// Coefficients of `n`, `mu` and `w = n - (sigma/delta) mu`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinState {
    pub t: f64,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub q: Vec<f64>,
}

impl GalerkinState {
    /// `∫ n = c_0 sqrt(L)`.
    pub fn mass(&self, basis: &SpectralBasis) -> f64 {
        self.c[0] * basis.length.sqrt()
    }
}

fn w_coefficients(c: &[f64], d: &[f64], params: &ModelParams) -> Vec<f64> {
    let r = params.sigma / params.delta;
    c.iter().zip(d).map(|(c, d)| c - r * d).collect()
}

/// Solves `d_j (1 + sigma lambda_j) = delta lambda_j c_j + ∫ max(0,w)^gamma phi_j` with
/// `w = Σ (c_i - (sigma/delta) d_i) phi_i`.
///
/// For `sigma > 0` the system is the gradient of a strictly convex function of `d`, so
/// Newton with backtracking on that function finds its only root.
pub fn solve_d(
    c: &[f64],
    guess: Option<&[f64]>,
    basis: &SpectralBasis,
    params: &ModelParams,
    cfg: &GalerkinConfig,
) -> Result<Vec<f64>> {
    let m = basis.modes;
    assert_eq!(c.len(), m, "coefficient vector has wrong length");
    let (sigma, delta, gamma) = (params.sigma, params.delta, params.gamma);
    let lam = &basis.lambda;
    let d = if sigma == 0.0 {
        let p: Vec<f64> = basis.synthesize(c).iter().map(|&n| positive_power(n, gamma)).collect();
        let proj = basis.project_nodal(&p);
        (0..m).map(|j| delta * lam[j] * c[j] + proj[j]).collect()
    } else {
        newton_d(c, guess, basis, params, cfg)?
    };
    let w = basis.synthesize(&w_coefficients(c, &d, params));
    let min_w = w.iter().copied().fold(f64::INFINITY, f64::min);
    if min_w < -cfg.admissibility_tol {
        return Err(Error::NoAdmissibleRoot { min_w });
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("galerkin mu coefficients"));
    }
    Ok(d)
}

fn newton_d(
    c: &[f64],
    guess: Option<&[f64]>,
    basis: &SpectralBasis,
    params: &ModelParams,
    cfg: &GalerkinConfig,
) -> Result<Vec<f64>> {
    let m = basis.modes;
    let (sigma, delta, gamma) = (params.sigma, params.delta, params.gamma);
    let r = sigma / delta;
    let lam = &basis.lambda;
    let scale = 1.0 + c.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    // merit: Σ (1+sigma lambda) d^2/2 - delta lambda c d + (1/r) ∫ w_+^(gamma+1)/(gamma+1)
    let merit = |d: &[f64], w: &[f64]| {
        let quad: f64 = (0..m).map(|j| 0.5 * (1.0 + sigma * lam[j]) * d[j] * d[j] - delta * lam[j] * c[j] * d[j]).sum();
        let bulk: Vec<f64> = w.iter().map(|&v| positive_power(v, gamma + 1.0) / (gamma + 1.0)).collect();
        quad + basis.integrate(&bulk) / r
    };
    let residual = |d: &[f64], w: &[f64]| -> Vec<f64> {
        let p: Vec<f64> = w.iter().map(|&v| positive_power(v, gamma)).collect();
        let proj = basis.project_nodal(&p);
        (0..m).map(|j| d[j] * (1.0 + sigma * lam[j]) - delta * lam[j] * c[j] - proj[j]).collect()
    };
    let norm = |f: &[f64]| f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let w_of = |d: &[f64]| basis.synthesize(&w_coefficients(c, d, params));

    let mut d: Vec<f64> = match guess {
        Some(g) => g.to_vec(),
        None => vec![0.0; m],
    };
    let mut w = w_of(&d);
    let mut f = residual(&d, &w);
    let mut res = norm(&f);
    let mut phi = merit(&d, &w);
    let q = basis.nodes.len();
    for _ in 0..cfg.newton_max_iter {
        if res <= cfg.newton_tol * scale {
            return Ok(d);
        }
        let slope: Vec<f64> = w.iter().map(|&v| r * positive_power_derivative(v, gamma)).collect();
        let mut jac = DMatrix::<f64>::zeros(m, m);
        for a in 0..m {
            let pa = basis.phi(a);
            for b in a..m {
                let pb = basis.phi(b);
                let mut s = 0.0;
                for k in 0..q {
                    s += slope[k] * pa[k] * pb[k];
                }
                let v = basis.weight * s;
                jac[(a, b)] = v;
                jac[(b, a)] = v;
            }
            jac[(a, a)] += 1.0 + sigma * lam[a];
        }
        let chol = jac
            .cholesky()
            .ok_or_else(|| Error::LinearSolve("galerkin jacobian is not positive definite".into()))?;
        let step = chol.solve(&DVector::from_column_slice(&f));
        let descent: f64 = f.iter().zip(step.iter()).map(|(a, b)| a * b).sum();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = d.iter().zip(step.iter()).map(|(x, s)| x - alpha * s).collect();
            let tw = w_of(&trial);
            let tphi = merit(&trial, &tw);
            let tf = residual(&trial, &tw);
            let tres = norm(&tf);
            if tphi <= phi - 1e-4 * alpha * descent || tres <= (1.0 - 1e-4 * alpha) * res {
                d = trial;
                w = tw;
                f = tf;
                res = tres;
                phi = tphi;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res <= cfg.newton_tol * scale {
        Ok(d)
    } else {
        Err(Error::NonConvergence { iterations: cfg.newton_max_iter, residual: res })
    }
}

/// Integrals at a Galerkin state needed by the energy identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinRecord {
    pub t: f64,
    pub mass: f64,
    pub c0: f64,
    /// `E = (delta/2) Σ lambda q^2 + ∫ w_+^(gamma+1)/(gamma+1) + (sigma/2delta) Σ d^2`.
    pub energy: f64,
    /// `∫ B_eps(n) |mu_x|^2`.
    pub dissipation: f64,
    /// `∫ n mu G(mu)`.
    pub source: f64,
    pub min_n: f64,
    pub min_w: f64,
}

/// Time-stepper for the coefficient ODE
/// `c_j' = -∫ B_eps(n) mu_x phi_j' + ∫ n G(mu) phi_j`.
#[derive(Clone, Debug)]
pub struct GalerkinSolver {
    basis: SpectralBasis,
    params: ModelParams,
    cfg: GalerkinConfig,
}

impl GalerkinSolver {
    pub fn new(length: f64, params: ModelParams, cfg: GalerkinConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        if !(params.eps_mobility > 0.0) {
            return Err(Error::InvalidParams("the galerkin scheme needs a regularized mobility (eps > 0)".into()));
        }
        let basis = SpectralBasis::new(length, cfg.modes, cfg.oversample)?;
        Ok(Self { basis, params, cfg })
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn config(&self) -> &GalerkinConfig {
        &self.cfg
    }

    pub fn state_from_coefficients(&self, c: Vec<f64>, guess: Option<&[f64]>, t: f64) -> Result<GalerkinState> {
        let d = solve_d(&c, guess, &self.basis, &self.params, &self.cfg)?;
        let q = w_coefficients(&c, &d, &self.params);
        Ok(GalerkinState { t, c, d, q })
    }

    pub fn initial_state(&self, n0: impl Fn(f64) -> f64, t: f64) -> Result<GalerkinState> {
        self.state_from_coefficients(project_initial(n0, &self.basis), None, t)
    }

    /// Right-hand side of the coefficient ODE.
    pub fn rate(&self, state: &GalerkinState) -> Vec<f64> {
        let b = &self.basis;
        let n = b.synthesize(&state.c);
        let mux = b.synthesize_derivative(&state.d);
        let eps = self.params.eps_mobility;
        let flux: Vec<f64> = n.iter().zip(&mux).map(|(&n, &m)| mobility(n, eps) * m).collect();
        let growth: Option<Vec<f64>> = (!self.params.growth.is_zero()).then(|| {
            let mu = b.synthesize(&state.d);
            n.iter().zip(&mu).map(|(&n, &m)| n * self.params.growth.eval(m)).collect()
        });
        (0..b.modes)
            .map(|j| {
                let transport = if j == 0 { 0.0 } else { -b.integrate_against(&flux, b.dphi(j)) };
                let source = growth.as_ref().map_or(0.0, |g| b.integrate_against(g, b.phi(j)));
                transport + source
            })
            .collect()
    }

    pub fn record(&self, state: &GalerkinState) -> GalerkinRecord {
        let b = &self.basis;
        let p = &self.params;
        let n = b.synthesize(&state.c);
        let w = b.synthesize(&state.q);
        let mu = b.synthesize(&state.d);
        let mux = b.synthesize_derivative(&state.d);
        let surface = 0.5 * p.delta * compensated_sum(b.lambda.iter().zip(&state.q).map(|(l, q)| l * q * q));
        let bulk: Vec<f64> = w.iter().map(|&v| positive_power(v, p.gamma + 1.0) / (p.gamma + 1.0)).collect();
        let relax = 0.5 * p.sigma / p.delta * compensated_sum(state.d.iter().map(|d| d * d));
        let diss: Vec<f64> = n.iter().zip(&mux).map(|(&n, &m)| mobility(n, p.eps_mobility) * m * m).collect();
        let source = if p.growth.is_zero() {
            0.0
        } else {
            let s: Vec<f64> = n.iter().zip(&mu).map(|(&n, &m)| n * m * p.growth.eval(m)).collect();
            b.integrate(&s)
        };
        GalerkinRecord {
            t: state.t,
            mass: state.mass(b),
            c0: state.c[0],
            energy: surface + b.integrate(&bulk) + relax,
            dissipation: b.integrate(&diss),
            source,
            min_n: n.iter().copied().fold(f64::INFINITY, f64::min),
            min_w: w.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Step bound from the linearized decay rate of the top mode, times `cfl_safety`.
    pub fn stable_dt(&self, state: &GalerkinState) -> f64 {
        let p = &self.params;
        let b = &self.basis;
        let n = b.synthesize(&state.c);
        let w = b.synthesize(&state.q);
        let bmax = n.iter().fold(0.0f64, |a, &v| a.max(mobility(v, p.eps_mobility)));
        let wmax = w.iter().fold(0.0f64, |a, &v| a.max(v));
        let g = p.gamma * positive_power(wmax, p.gamma - 1.0);
        let k = b.lambda[b.modes - 1];
        let rate = bmax * k * (p.delta * k + g) / (1.0 + p.sigma * (k + g / p.delta));
        let mut dt = if rate > 0.0 { 2.0 / rate } else { f64::INFINITY };
        let sup_g = p.growth.sup_abs();
        if sup_g > 0.0 {
            dt = dt.min(0.5 / sup_g);
        }
        self.cfg.cfl_safety * dt
    }

    pub fn step(&self, state: &GalerkinState, dt: f64) -> Result<GalerkinState> {
        let k1 = self.rate(state);
        let advance = |k: &[f64], h: f64| -> Vec<f64> { state.c.iter().zip(k).map(|(c, k)| c + h * k).collect() };
        let c = match self.cfg.scheme {
            TimeScheme::Euler => advance(&k1, dt),
            TimeScheme::Rk2 => {
                let mid = self.state_from_coefficients(advance(&k1, dt), Some(&state.d), state.t + dt)?;
                let k2 = self.rate(&mid);
                let avg: Vec<f64> = k1.iter().zip(&k2).map(|(a, b)| 0.5 * (a + b)).collect();
                advance(&avg, dt)
            }
        };
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("galerkin coefficients"));
        }
        self.state_from_coefficients(c, Some(&state.d), state.t + dt)
    }

    /// Advances to `t_end`, calling `observer` after every step; the last step is shortened
    /// to land on `t_end`.
    pub fn integrate<F>(&self, mut state: GalerkinState, t_end: f64, mut observer: F) -> Result<GalerkinState>
    where
        F: FnMut(&GalerkinState, f64) -> Result<()>,
    {
        let mut index = 0;
        let eps_t = 1e-12 * t_end.abs().max(1.0);
        while state.t < t_end - eps_t {
            let dt = self.cfg.dt.unwrap_or_else(|| self.stable_dt(&state)).min(t_end - state.t);
            let next = self.step(&state, dt).map_err(|e| Error::Solver {
                step: index,
                t: state.t,
                source: Box::new(e),
            })?;
            index += 1;
            state = next;
            observer(&state, dt)?;
        }
        Ok(state)
    }
}

/// `r_k = (E_{k+1} - E_k)/dt_k + D_k - S_k` along consecutive records.
pub fn galerkin_energy_residual(records: &[GalerkinRecord]) -> Vec<f64> {
    records
        .windows(2)
        .map(|w| {
            let dt = w[1].t - w[0].t;
            (w[1].energy - w[0].energy) / dt + w[0].dissipation - w[0].source
        })
        .collect()
}
