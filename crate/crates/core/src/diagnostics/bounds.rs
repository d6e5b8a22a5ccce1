//! Uniform-in-time bound monitors and the twin-run continuous-dependence series.

use serde::{Deserialize, Serialize};

use super::record::{tolerance, DiagnosticsRecord};
use crate::field::{l2_distance, Field};

/// Running time-maxima and time-integrals.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundsMonitor {
    pub records: usize,
    pub sup_n_inf: f64,
    pub sup_p_inf: f64,
    /// Largest `‖w^gamma‖∞ - ‖n‖∞` seen at any record.
    pub max_transfer_excess: f64,
    pub cumulative_dissipation: f64,
    pub sup_pressure_energy: f64,
    pub sup_grad_p_l1: f64,
    #[serde(skip)]
    pending_dissipation: Option<f64>,
}

impl BoundsMonitor {
    /// Folds in a record reached after a step of length `dt` (0 for the first record).
    pub fn observe(&mut self, rec: &DiagnosticsRecord, dt: f64) {
        if self.records == 0 {
            self.max_transfer_excess = f64::NEG_INFINITY;
        }
        if let Some(d) = self.pending_dissipation {
            self.cumulative_dissipation += d * dt;
        }
        self.pending_dissipation = Some(rec.dissipation);
        self.records += 1;
        self.sup_n_inf = self.sup_n_inf.max(rec.n_inf());
        self.sup_p_inf = self.sup_p_inf.max(rec.max_p);
        self.max_transfer_excess = self.max_transfer_excess.max(rec.max_p - rec.n_inf());
        self.sup_pressure_energy = self.sup_pressure_energy.max(rec.pressure_energy);
        self.sup_grad_p_l1 = self.sup_grad_p_l1.max(rec.grad_p_l1);
    }

    pub fn report(&self) -> BoundsReport {
        let mut violations = Vec::new();
        if self.max_transfer_excess > tolerance::BOUND_TRANSFER {
            violations.push(format!(
                "‖w^γ‖∞ exceeded ‖n‖∞ by {:.3e}",
                self.max_transfer_excess
            ));
        }
        if !self.cumulative_dissipation.is_finite() {
            violations.push("cumulative dissipation is not finite".into());
        }
        BoundsReport {
            sup_n_inf: self.sup_n_inf,
            sup_p_inf: self.sup_p_inf,
            max_transfer_excess: self.max_transfer_excess,
            cumulative_dissipation: self.cumulative_dissipation,
            sup_pressure_energy: self.sup_pressure_energy,
            sup_grad_p_l1: self.sup_grad_p_l1,
            violations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub sup_n_inf: f64,
    pub sup_p_inf: f64,
    pub max_transfer_excess: f64,
    /// `∫∫ B(n)|∇mu|^2`, left-endpoint rule in time.
    pub cumulative_dissipation: f64,
    pub sup_pressure_energy: f64,
    pub sup_grad_p_l1: f64,
    pub violations: Vec<String>,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Bound report over a record sequence taken at consecutive steps.
pub fn bounds_report(records: &[DiagnosticsRecord]) -> BoundsReport {
    let mut m = BoundsMonitor::default();
    let mut prev_t = records.first().map(|r| r.t).unwrap_or(0.0);
    for rec in records {
        m.observe(rec, rec.t - prev_t);
        prev_t = rec.t;
    }
    m.report()
}

/// `‖n_a(t_k) - n_b(t_k)‖_{L2}` along two trajectories sampled at the same times.
pub fn continuous_dependence(traj_a: &[Field], traj_b: &[Field]) -> Vec<f64> {
    assert_eq!(traj_a.len(), traj_b.len(), "trajectories must have equal length");
    traj_a.iter().zip(traj_b).map(|(a, b)| l2_distance(a, b)).collect()
}
