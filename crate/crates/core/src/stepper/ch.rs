//! Cahn-Hilliard form: `dn/dt = div(B(n) ∇mu) + n G(mu)`.

use super::formulation::Formulation;
use super::mobility::FaceMobility;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::state::StateBundle;

/// Conservative finite volumes with face flux `B_face (mu_R - mu_L) / h`.
///
/// Also covers `sigma = 0`, where `mu = max(0,n)^gamma - delta Δ_h n`.
#[derive(Debug, Default, Clone, Copy)]
pub struct CahnHilliardForm;

impl Formulation for CahnHilliardForm {
    fn name(&self) -> &'static str {
        "ch"
    }

    fn check(&self, params: &ModelParams) -> Result<()> {
        params.validate().map_err(|e| Error::InvalidParams(format!("ch: {e}")))
    }

    fn rate(&self, state: &StateBundle, params: &ModelParams, face: FaceMobility, out: &mut [f64]) {
        let n = state.n.values();
        let mu = state.mu.values();
        let eps = params.eps_mobility;
        out.iter_mut().for_each(|v| *v = 0.0);
        state.n.grid().for_each_face(|l, r, inv_h| {
            let dmu = mu[r] - mu[l];
            let flux = face.face_value(n[l], n[r], dmu, eps) * dmu * inv_h * inv_h;
            out[l] += flux;
            out[r] -= flux;
        });
        if !params.growth.is_zero() {
            for i in 0..out.len() {
                out[i] += n[i] * params.growth.eval(mu[i]);
            }
        }
    }

    /// `dt <= h^2 / (2 dim max|Δmu|)`; with `B(n) <= n` no cell can lose more than it holds.
    fn positivity_dt(&self, state: &StateBundle, params: &ModelParams) -> f64 {
        let _ = params;
        let mu = state.mu.values();
        let grid = state.n.grid();
        let mut worst = 0.0_f64;
        grid.for_each_face(|l, r, inv_h| {
            worst = worst.max((mu[r] - mu[l]).abs() * inv_h * inv_h);
        });
        if worst == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (2.0 * grid.dim() as f64 * worst)
        }
    }
}
