//! Keller-Segel form:
//! `dn/dt = (delta/2sigma) Δ(n^2) - (delta/sigma) div(n ∇w) + n G((delta/sigma)(n - w))`.

use super::formulation::Formulation;
use super::mobility::FaceMobility;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::state::StateBundle;

/// Porous-medium flux on `n^2` plus an upwinded chemotactic flux `n ∇w`.
#[derive(Debug, Default, Clone, Copy)]
pub struct KellerSegelForm;

impl Formulation for KellerSegelForm {
    fn name(&self) -> &'static str {
        "ks"
    }

    fn check(&self, params: &ModelParams) -> Result<()> {
        params.validate()?;
        if params.is_degenerate_ch() {
            return Err(Error::InvalidParams(
                "ks: the Keller-Segel form needs sigma > 0".into(),
            ));
        }
        if params.eps_mobility != 0.0 {
            return Err(Error::InvalidParams(
                "ks: only the degenerate mobility B(n) = n has a Keller-Segel form".into(),
            ));
        }
        Ok(())
    }

    fn rate(&self, state: &StateBundle, params: &ModelParams, face: FaceMobility, out: &mut [f64]) {
        let n = state.n.values();
        let w = state.w.values();
        let ratio = params.delta / params.sigma;
        out.iter_mut().for_each(|v| *v = 0.0);
        state.n.grid().for_each_face(|l, r, inv_h| {
            let dw = w[r] - w[l];
            // chemotaxis moves mass up the w-gradient, so the source cell is the lower one
            let n_face = face.face_value(n[l], n[r], -dw, 0.0);
            let porous = 0.5 * ratio * (n[r] * n[r] - n[l] * n[l]);
            let flux_to_right = (ratio * n_face * dw - porous) * inv_h * inv_h;
            out[l] -= flux_to_right;
            out[r] += flux_to_right;
        });
        if !params.growth.is_zero() {
            for i in 0..out.len() {
                out[i] += n[i] * params.growth.eval(ratio * (n[i] - w[i]));
            }
        }
    }

    /// Per cell, the outflow over a face is at most
    /// `(delta/sigma) n_i (n_i / 2 + |Δw|) / h^2`.
    fn positivity_dt(&self, state: &StateBundle, params: &ModelParams) -> f64 {
        let n = state.n.values();
        let w = state.w.values();
        let ratio = params.delta / params.sigma;
        let mut rate = vec![0.0; n.len()];
        state.n.grid().for_each_face(|l, r, inv_h| {
            let k = ratio * inv_h * inv_h;
            let dw = (w[r] - w[l]).abs();
            rate[l] += k * (0.5 * n[l].max(0.0) + dw);
            rate[r] += k * (0.5 * n[r].max(0.0) + dw);
        });
        let worst = rate.iter().copied().fold(0.0_f64, f64::max);
        if worst == 0.0 {
            f64::INFINITY
        } else {
            1.0 / worst
        }
    }
}
