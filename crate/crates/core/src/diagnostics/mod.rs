//! Energy, entropy, identity residuals and bound monitors.

mod bounds;
mod functionals;
mod record;

pub use bounds::{bounds_report, continuous_dependence, BoundsMonitor, BoundsReport};
pub use functionals::{
    complementarity_residual, dirichlet_form, dissipation, energy, entropy, entropy_dissipation,
    entropy_of_positive_part, entropy_source, growth_source, pressure_energy, pressure_gradient_l1,
    NEGATIVE_TOLERANCE,
};
pub use record::{
    energy_identity_residual, energy_residual_step, entropy_identity_residual, entropy_residual_step, flags,
    tolerance, DiagnosticsRecord, Recorder, RunSummary, CSV_COLUMNS, SCHEMA_VERSION,
};
