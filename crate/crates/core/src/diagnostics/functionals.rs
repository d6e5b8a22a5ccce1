//! Integral functionals of a state: energy, entropy, dissipation rates and sources.
//!
//! Gradients live on faces: `|∇f|^2` integrates as `Σ_faces vol (Δf / h)^2`, which is
//! the quadratic form of `-Δ_h`. With that choice `∂E/∂w_i = vol (w^gamma - delta Δ_h w)_i`
//! and the semi-discrete energy identity holds without spatial error.

use crate::elliptic::neg_laplacian_into;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::numeric::{compensated_sum, positive_power};
use crate::params::ModelParams;
use crate::state::StateBundle;
use crate::stepper::FaceMobility;

/// Densities below this are treated as zero by [`entropy`]; below `-NEGATIVE_TOLERANCE`
/// the density is rejected.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// `Σ_faces vol (Δf/h)^2`.
pub fn dirichlet_form(f: &Field) -> f64 {
    let v = f.values();
    let mut terms = Vec::with_capacity(2 * v.len());
    f.grid().for_each_face(|l, r, inv_h| {
        let d = (v[r] - v[l]) * inv_h;
        terms.push(d * d);
    });
    f.grid().cell_volume() * compensated_sum(terms)
}

/// `∫ max(0,w)^(gamma+1) / (gamma+1)`.
pub fn pressure_energy(w: &Field, gamma: f64) -> f64 {
    w.grid().cell_volume() * compensated_sum(w.values().iter().map(|&v| positive_power(v, gamma + 1.0) / (gamma + 1.0)))
}

/// `E = ∫ w^(gamma+1)/(gamma+1) + (delta/2)|∇w|^2 + (sigma/delta)|mu|^2/2`.
pub fn energy(state: &StateBundle, params: &ModelParams) -> f64 {
    let bulk = pressure_energy(&state.w, params.gamma);
    let surface = 0.5 * params.delta * dirichlet_form(&state.w);
    let relax = if params.is_degenerate_ch() {
        0.0
    } else {
        let vol = state.mu.grid().cell_volume();
        0.5 * params.sigma / params.delta * vol * compensated_sum(state.mu.values().iter().map(|m| m * m))
    };
    bulk + surface + relax
}

/// `Φ = ∫ n log n` with `0 log 0 = 0`.
pub fn entropy(n: &Field) -> Result<f64> {
    let min = n.min();
    if min < -NEGATIVE_TOLERANCE {
        return Err(Error::NegativeDensity { min });
    }
    Ok(entropy_of_positive_part(n))
}

/// `∫ n_+ log n_+`, defined for any field.
pub fn entropy_of_positive_part(n: &Field) -> f64 {
    n.grid().cell_volume() * compensated_sum(n.values().iter().map(|&v| xlogx(v)))
}

#[inline]
fn xlogx(v: f64) -> f64 {
    if v > 0.0 {
        v * v.ln()
    } else {
        0.0
    }
}

/// `D = ∫ B(n)|∇mu|^2`, with the face mobility the scheme uses.
pub fn dissipation(state: &StateBundle, params: &ModelParams, face: FaceMobility) -> f64 {
    let n = state.n.values();
    let mu = state.mu.values();
    let eps = params.eps_mobility;
    let mut terms = Vec::with_capacity(2 * n.len());
    state.n.grid().for_each_face(|l, r, inv_h| {
        let dmu = mu[r] - mu[l];
        terms.push(face.face_value(n[l], n[r], dmu, eps) * dmu * dmu * inv_h * inv_h);
    });
    state.n.grid().cell_volume() * compensated_sum(terms)
}

/// `S = ∫ n mu G(mu)`.
pub fn growth_source(state: &StateBundle, params: &ModelParams) -> f64 {
    if params.growth.is_zero() {
        return 0.0;
    }
    let vol = state.n.grid().cell_volume();
    vol * compensated_sum(
        state
            .n
            .values()
            .iter()
            .zip(state.mu.values())
            .map(|(&n, &mu)| n * mu * params.growth.eval(mu)),
    )
}

/// Entropy dissipation bracket
/// `∫ delta|Δw|^2 + (sigma/delta)|∇mu|^2 + gamma w^(gamma-1)|∇w|^2`.
///
/// The last term is taken as `Σ_faces vol Δ(w^gamma) Δw / h^2`, which is nonnegative by
/// monotonicity and makes the bracket equal to `Σ_faces vol Δmu Δn / h^2`.
pub fn entropy_dissipation(state: &StateBundle, params: &ModelParams) -> f64 {
    let grid = state.w.grid();
    let w = state.w.values();
    let mut lap = vec![0.0; w.len()];
    neg_laplacian_into(grid, w, &mut lap);
    let vol = grid.cell_volume();
    let curvature = params.delta * vol * compensated_sum(lap.iter().map(|v| v * v));
    let viscous = if params.is_degenerate_ch() {
        0.0
    } else {
        params.sigma / params.delta * dirichlet_form(&state.mu)
    };
    let p = state.p.values();
    let mut terms = Vec::with_capacity(2 * w.len());
    grid.for_each_face(|l, r, inv_h| {
        terms.push((p[r] - p[l]) * (w[r] - w[l]) * inv_h * inv_h);
    });
    curvature + viscous + vol * compensated_sum(terms)
}

/// `∫ n G(mu) (log n + 1)` with the `n log n -> 0` convention at `n = 0`.
pub fn entropy_source(state: &StateBundle, params: &ModelParams) -> f64 {
    if params.growth.is_zero() {
        return 0.0;
    }
    let vol = state.n.grid().cell_volume();
    vol * compensated_sum(state.n.values().iter().zip(state.mu.values()).map(|(&n, &mu)| {
        if n > 0.0 {
            n * params.growth.eval(mu) * (n.ln() + 1.0)
        } else {
            0.0
        }
    }))
}

/// `∫ |p (w - 1)|`.
pub fn complementarity_residual(state: &StateBundle) -> f64 {
    let vol = state.w.grid().cell_volume();
    vol * compensated_sum(
        state
            .p
            .values()
            .iter()
            .zip(state.w.values())
            .map(|(p, w)| (p * (w - 1.0)).abs()),
    )
}

/// `‖∇p‖_{L1}` with face differences (ℓ1 over components in 2D).
pub fn pressure_gradient_l1(p: &Field) -> f64 {
    let v = p.values();
    let mut terms = Vec::with_capacity(2 * v.len());
    p.grid().for_each_face(|l, r, inv_h| terms.push((v[r] - v[l]).abs() * inv_h));
    p.grid().cell_volume() * compensated_sum(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::{E, PI};

    fn constant_state(g: Grid, n: f64, w: f64, mu: f64, gamma: f64) -> StateBundle {
        StateBundle {
            t: 0.0,
            n: Field::constant(g, n),
            w: Field::constant(g, w),
            mu: Field::constant(g, mu),
            p: Field::constant(g, positive_power(w, gamma)),
            elliptic_residual: 0.0,
        }
    }

    #[test]
    fn energy_of_constant_fields() {
        let p = ModelParams::new(1.0, 1.0, 2.0).unwrap();
        let st = constant_state(Grid::new_1d(1.0, 16).unwrap(), 2.0, 1.0, 1.0, 2.0);
        assert!((energy(&st, &p) - 5.0 / 6.0).abs() < 1e-15);
        let zero = constant_state(Grid::new_1d(1.0, 16).unwrap(), 0.0, 0.0, 0.0, 2.0);
        assert_eq!(energy(&zero, &p), 0.0);
    }

    #[test]
    fn energy_matches_high_order_quadrature() {
        // fields sampled from smooth profiles vs a composite Gauss-Legendre oracle of the
        // continuous functional
        let (sigma, delta, gamma) = (0.7, 0.4, 3.0);
        let p = ModelParams::new(sigma, delta, gamma).unwrap();
        let wf = |x: f64| 0.5 + 0.3 * (PI * x).cos();
        let dwf = |x: f64| -0.3 * PI * (PI * x).sin();
        let muf = |x: f64| 0.2 + 0.1 * (2.0 * PI * x).cos();
        let g = Grid::new_1d(1.0, 16384).unwrap();
        let w = Field::from_fn(g, |x| wf(x[0]));
        let mu = Field::from_fn(g, |x| muf(x[0]));
        let st = StateBundle {
            t: 0.0,
            n: w.clone(),
            p: w.map(|v| positive_power(v, gamma)),
            w,
            mu,
            elliptic_residual: 0.0,
        };
        let nodes = [
            (-0.906_179_845_938_664, 0.236_926_885_056_189),
            (-0.538_469_310_105_683, 0.478_628_670_499_366),
            (0.0, 0.568_888_888_888_889),
            (0.538_469_310_105_683, 0.478_628_670_499_366),
            (0.906_179_845_938_664, 0.236_926_885_056_189),
        ];
        let panels = 200;
        let mut oracle = 0.0;
        for k in 0..panels {
            let a = k as f64 / panels as f64;
            let half = 0.5 / panels as f64;
            for (xi, wi) in nodes {
                let x = a + half * (1.0 + xi);
                let integrand = wf(x).powf(gamma + 1.0) / (gamma + 1.0)
                    + 0.5 * delta * dwf(x).powi(2)
                    + 0.5 * sigma / delta * muf(x).powi(2);
                oracle += half * wi * integrand;
            }
        }
        let rel = (energy(&st, &p) - oracle).abs() / oracle;
        assert!(rel < 1e-8, "relative error {rel}");
    }

    #[test]
    fn entropy_values() {
        let g = Grid::new_1d(1.0, 10).unwrap();
        assert_eq!(entropy(&Field::constant(g, 1.0)).unwrap(), 0.0);
        assert!((entropy(&Field::constant(g, E)).unwrap() - E).abs() < 1e-14);
        assert_eq!(entropy(&Field::zeros(g)).unwrap(), 0.0);
        assert!(matches!(
            entropy(&Field::constant(g, -1e-6)),
            Err(Error::NegativeDensity { .. })
        ));
    }

    #[test]
    fn entropy_of_bump_matches_summation_oracle() {
        let g = Grid::new_2d(1.0, 2.0, 30, 40).unwrap();
        let n = Field::from_fn(g, |x| 0.1 + (-(x[0] - 0.5).powi(2) * 20.0 - (x[1] - 1.0).powi(2) * 5.0).exp());
        let mut oracle = 0.0;
        for &v in n.values().iter().rev() {
            oracle += v * v.ln() * g.cell_volume();
        }
        assert!((entropy(&n).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn complementarity_examples() {
        let g = Grid::new_1d(1.0, 8).unwrap();
        assert_eq!(complementarity_residual(&constant_state(g, 2.0, 1.0, 1.0, 2.0)), 0.0);
        assert_eq!(complementarity_residual(&constant_state(g, 0.0, 0.0, 0.0, 2.0)), 0.0);
        let half = constant_state(g, 0.75, 0.5, 0.25, 2.0);
        assert!((complementarity_residual(&half) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn dissipation_vanishes_for_constant_mu() {
        let p = ModelParams::default();
        let g = Grid::new_1d(1.0, 8).unwrap();
        let st = constant_state(g, 0.5, 0.4, 0.1, 4.0);
        assert_eq!(dissipation(&st, &p, FaceMobility::Upwind), 0.0);
        assert_eq!(entropy_dissipation(&st, &p), 0.0);
    }
}
