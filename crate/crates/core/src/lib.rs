//! Structure-preserving solvers for the relaxed degenerate Cahn-Hilliard system and its
//! equivalent generalized Keller-Segel form.

pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod experiments;
pub mod field;
pub mod galerkin;
pub mod grid;
pub mod linalg;
pub mod numeric;
pub mod params;
pub mod state;
pub mod stepper;

pub use error::{Error, Result};
pub use field::{Field, Norm};
pub use grid::Grid;
pub use params::{GrowthLaw, ModelParams};
pub use state::StateBundle;
