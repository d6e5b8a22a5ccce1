use serde::{Deserialize, Serialize};

use super::bounds::BoundsMonitor;
use super::functionals::*;
use crate::error::{Error, Result};
use crate::field::quadrature;
use crate::params::ModelParams;
use crate::state::StateBundle;
use crate::stepper::{FaceMobility, StepEvent};

/// Monitor tolerances.
pub mod tolerance {
    /// Allowed excess of `‖w^gamma‖∞` over `‖n‖∞`.
    pub const BOUND_TRANSFER: f64 = 1e-8;
    /// Allowed per-step energy increase when `G ≡ 0`.
    pub const ENERGY_INCREASE: f64 = 1e-8;
    /// Allowed undershoot of `w` below zero.
    pub const NEGATIVE_W: f64 = 1e-10;
    /// Relative slack on the exponential mass bound, on top of one rounding per step
    /// (`steps * f64::EPSILON`).
    pub const MASS_BOUND: f64 = 1e-12;
    /// Density floor below which the entropy identity is not evaluated.
    pub const DENSITY_FLOOR: f64 = 1e-10;
}

/// Bit flags raised by a record.
pub mod flags {
    pub const NEGATIVE_DENSITY: u32 = 1;
    pub const NEGATIVE_W: u32 = 1 << 1;
    pub const BOUND_TRANSFER: u32 = 1 << 2;
    pub const ENERGY_INCREASE: u32 = 1 << 3;
    pub const MASS_BOUND: u32 = 1 << 4;

    pub fn describe(bits: u32) -> Vec<&'static str> {
        let names = [
            (NEGATIVE_DENSITY, "negative density"),
            (NEGATIVE_W, "negative w"),
            (BOUND_TRANSFER, "pressure bound transfer"),
            (ENERGY_INCREASE, "energy increase"),
            (MASS_BOUND, "mass bound"),
        ];
        names
            .iter()
            .filter(|(bit, _)| bits & bit != 0)
            .map(|(_, name)| *name)
            .collect()
    }
}

/// Column order of the diagnostics CSV. Bump [`SCHEMA_VERSION`] when it changes.
pub const CSV_COLUMNS: [&str; 24] = [
    "t",
    "dt",
    "mass",
    "energy",
    "entropy",
    "dissipation",
    "growth_source",
    "entropy_dissipation",
    "entropy_source",
    "min_n",
    "max_n",
    "min_w",
    "max_w",
    "min_mu",
    "max_mu",
    "min_p",
    "max_p",
    "pressure_energy",
    "grad_p_l1",
    "complementarity",
    "elliptic_residual",
    "energy_residual",
    "entropy_residual",
    "flags",
];

pub const SCHEMA_VERSION: u32 = 1;

/// Per-step scalars. The residual columns refer to the step that produced this record
/// (zero for the initial record); `dt` is the length of that step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    pub energy: f64,
    pub entropy: f64,
    pub dissipation: f64,
    pub growth_source: f64,
    pub entropy_dissipation: f64,
    pub entropy_source: f64,
    pub min_n: f64,
    pub max_n: f64,
    pub min_w: f64,
    pub max_w: f64,
    pub min_mu: f64,
    pub max_mu: f64,
    pub min_p: f64,
    pub max_p: f64,
    pub pressure_energy: f64,
    pub grad_p_l1: f64,
    pub complementarity: f64,
    pub elliptic_residual: f64,
    pub energy_residual: f64,
    pub entropy_residual: f64,
    pub flags: u32,
}

impl DiagnosticsRecord {
    /// Evaluates every functional of `state`. Residuals and step-dependent flags are left
    /// at zero.
    pub fn from_state(state: &StateBundle, params: &ModelParams, face: FaceMobility) -> Self {
        let mut rec = Self {
            t: state.t,
            dt: 0.0,
            mass: quadrature(&state.n),
            energy: energy(state, params),
            entropy: entropy_of_positive_part(&state.n),
            dissipation: dissipation(state, params, face),
            growth_source: growth_source(state, params),
            entropy_dissipation: entropy_dissipation(state, params),
            entropy_source: entropy_source(state, params),
            min_n: state.n.min(),
            max_n: state.n.max(),
            min_w: state.w.min(),
            max_w: state.w.max(),
            min_mu: state.mu.min(),
            max_mu: state.mu.max(),
            min_p: state.p.min(),
            max_p: state.p.max(),
            pressure_energy: pressure_energy(&state.w, params.gamma),
            grad_p_l1: pressure_gradient_l1(&state.p),
            complementarity: complementarity_residual(state),
            elliptic_residual: state.elliptic_residual,
            energy_residual: 0.0,
            entropy_residual: 0.0,
            flags: 0,
        };
        rec.flags = rec.state_flags();
        rec
    }

    fn state_flags(&self) -> u32 {
        let mut bits = 0;
        if self.min_n < 0.0 {
            bits |= flags::NEGATIVE_DENSITY;
        }
        if self.min_w < -tolerance::NEGATIVE_W {
            bits |= flags::NEGATIVE_W;
        }
        if self.max_p > self.n_inf() + tolerance::BOUND_TRANSFER {
            bits |= flags::BOUND_TRANSFER;
        }
        bits
    }

    /// `‖n‖∞` from the recorded extrema.
    pub fn n_inf(&self) -> f64 {
        self.max_n.abs().max(self.min_n.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.csv_values().iter().all(|v| v.is_finite())
    }

    /// Values in [`CSV_COLUMNS`] order (flags as a float).
    pub fn csv_values(&self) -> [f64; 24] {
        [
            self.t,
            self.dt,
            self.mass,
            self.energy,
            self.entropy,
            self.dissipation,
            self.growth_source,
            self.entropy_dissipation,
            self.entropy_source,
            self.min_n,
            self.max_n,
            self.min_w,
            self.max_w,
            self.min_mu,
            self.max_mu,
            self.min_p,
            self.max_p,
            self.pressure_energy,
            self.grad_p_l1,
            self.complementarity,
            self.elliptic_residual,
            self.energy_residual,
            self.entropy_residual,
            self.flags as f64,
        ]
    }
}

/// `(E_next - E_prev)/dt + D_prev - S_prev` for one explicit step.
pub fn energy_residual_step(prev: &DiagnosticsRecord, next: &DiagnosticsRecord) -> f64 {
    (next.energy - prev.energy) / (next.t - prev.t) + prev.dissipation - prev.growth_source
}

/// `(Φ_next - Φ_prev)/dt + bracket_prev - source_prev` for one explicit step.
pub fn entropy_residual_step(prev: &DiagnosticsRecord, next: &DiagnosticsRecord) -> f64 {
    (next.entropy - prev.entropy) / (next.t - prev.t) + prev.entropy_dissipation - prev.entropy_source
}

/// Energy-identity residual for each consecutive pair of records. The records must come
/// from consecutive steps.
pub fn energy_identity_residual(records: &[DiagnosticsRecord]) -> Vec<f64> {
    records.windows(2).map(|w| energy_residual_step(&w[0], &w[1])).collect()
}

/// Entropy-identity residual series; requires a strictly positive density throughout.
pub fn entropy_identity_residual(records: &[DiagnosticsRecord]) -> Result<Vec<f64>> {
    if let Some(bad) = records.iter().find(|r| r.min_n <= tolerance::DENSITY_FLOOR) {
        return Err(Error::DegenerateDensity {
            min: bad.min_n,
            floor: tolerance::DENSITY_FLOOR,
        });
    }
    Ok(records.windows(2).map(|w| entropy_residual_step(&w[0], &w[1])).collect())
}

/// Observer that evaluates a record after every step, keeps every `stride`-th one and
/// tracks run-wide monitors over all steps.
#[derive(Clone, Debug)]
pub struct Recorder {
    params: ModelParams,
    face: FaceMobility,
    stride: usize,
    initial_mean_mass: f64,
    domain_measure: f64,
    prev: DiagnosticsRecord,
    records: Vec<DiagnosticsRecord>,
    monitor: BoundsMonitor,
    summary: RunSummary,
}

/// Extremes over every step of a run (including steps whose records were not kept).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    pub flags: u32,
    pub min_n: f64,
    pub min_w: f64,
    pub max_energy_increase: f64,
    pub max_abs_energy_residual: f64,
    pub max_abs_entropy_residual: f64,
    pub min_dissipation: f64,
    pub min_entropy_dissipation: f64,
    pub max_relative_mass_drift: f64,
    pub negative_cells: usize,
    pub max_elliptic_residual: f64,
    pub max_bound_transfer_excess: f64,
}

impl Recorder {
    pub fn new(initial: &StateBundle, params: &ModelParams, face: FaceMobility, stride: usize) -> Self {
        let first = DiagnosticsRecord::from_state(initial, params, face);
        let mut monitor = BoundsMonitor::default();
        monitor.observe(&first, 0.0);
        let summary = RunSummary {
            steps: 0,
            flags: first.flags,
            min_n: first.min_n,
            min_w: first.min_w,
            max_energy_increase: f64::NEG_INFINITY,
            max_abs_energy_residual: 0.0,
            max_abs_entropy_residual: 0.0,
            min_dissipation: first.dissipation,
            min_entropy_dissipation: first.entropy_dissipation,
            max_relative_mass_drift: 0.0,
            negative_cells: 0,
            max_elliptic_residual: first.elliptic_residual,
            max_bound_transfer_excess: first.max_p - first.n_inf(),
        };
        let measure = initial.n.grid().measure();
        Self {
            params: params.clone(),
            face,
            stride: stride.max(1),
            initial_mean_mass: first.mass / measure,
            domain_measure: measure,
            prev: first.clone(),
            records: vec![first],
            monitor,
            summary,
        }
    }

    /// Processes one step; returns the new record.
    pub fn observe(&mut self, ev: &StepEvent<'_>) -> &DiagnosticsRecord {
        let mut rec = DiagnosticsRecord::from_state(ev.next, &self.params, self.face);
        rec.dt = ev.dt;
        rec.energy_residual = energy_residual_step(&self.prev, &rec);
        rec.entropy_residual = entropy_residual_step(&self.prev, &rec);
        let increase = rec.energy - self.prev.energy;
        if self.params.growth.is_zero() && increase > tolerance::ENERGY_INCREASE {
            rec.flags |= flags::ENERGY_INCREASE;
        }
        let cap = self.initial_mean_mass * (rec.t * self.params.growth.sup_abs()).exp();
        let slack = tolerance::MASS_BOUND + (self.summary.steps + 1) as f64 * f64::EPSILON;
        if rec.mass / self.domain_measure > cap * (1.0 + slack) + f64::MIN_POSITIVE {
            rec.flags |= flags::MASS_BOUND;
        }

        let s = &mut self.summary;
        s.steps += 1;
        s.flags |= rec.flags;
        s.min_n = s.min_n.min(rec.min_n);
        s.min_w = s.min_w.min(rec.min_w);
        s.max_energy_increase = s.max_energy_increase.max(increase);
        s.max_abs_energy_residual = s.max_abs_energy_residual.max(rec.energy_residual.abs());
        s.max_abs_entropy_residual = s.max_abs_entropy_residual.max(rec.entropy_residual.abs());
        s.min_dissipation = s.min_dissipation.min(rec.dissipation);
        s.min_entropy_dissipation = s.min_entropy_dissipation.min(rec.entropy_dissipation);
        let m0 = self.initial_mean_mass * self.domain_measure;
        if m0 != 0.0 {
            s.max_relative_mass_drift = s.max_relative_mass_drift.max(((rec.mass - m0) / m0).abs());
        }
        s.negative_cells += ev.negative_cells.unwrap_or(0);
        s.max_elliptic_residual = s.max_elliptic_residual.max(rec.elliptic_residual);
        s.max_bound_transfer_excess = s.max_bound_transfer_excess.max(rec.max_p - rec.n_inf());

        self.monitor.observe(&rec, ev.dt);
        if s.steps.is_multiple_of(self.stride) {
            self.records.push(rec.clone());
        }
        self.prev = rec;
        &self.prev
    }

    /// Kept records, always ending with the latest one.
    pub fn finish(mut self) -> (Vec<DiagnosticsRecord>, RunSummary, BoundsMonitor) {
        if self.records.last().map(|r| r.t) != Some(self.prev.t) {
            self.records.push(self.prev.clone());
        }
        (self.records, self.summary, self.monitor)
    }

    pub fn summary(&self) -> &RunSummary {
        &self.summary
    }

    pub fn last(&self) -> &DiagnosticsRecord {
        &self.prev
    }
}
