//! Interchangeable spatial discretizations of the density equation.
//!
//! Every formulation produces `dn/dt` for a consistent [`StateBundle`]; the shared
//! [`Stepper`](super::Stepper) takes care of explicit time stepping and re-solving the
//! elliptic constraint. New formulations are added by registering a factory under a name.

use std::collections::BTreeMap;
use std::fmt::Debug;

use super::mobility::FaceMobility;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::state::StateBundle;

pub trait Formulation: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Rejects parameter sets the formulation cannot discretize.
    fn check(&self, params: &ModelParams) -> Result<()>;

    /// Writes the semi-discrete right-hand side `dn/dt` into `out`.
    fn rate(&self, state: &StateBundle, params: &ModelParams, face: FaceMobility, out: &mut [f64]);

    /// Largest explicit step for which the flux update keeps a nonnegative density
    /// nonnegative (growth excluded).
    fn positivity_dt(&self, state: &StateBundle, params: &ModelParams) -> f64;
}

pub type FormulationFactory = fn() -> Box<dyn Formulation>;

#[derive(Clone)]
pub struct FormulationRegistry {
    factories: BTreeMap<&'static str, FormulationFactory>,
}

impl FormulationRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Registry holding the Cahn-Hilliard (`ch`) and Keller-Segel (`ks`) forms.
    pub fn with_builtin() -> Self {
        let mut reg = Self::empty();
        reg.register("ch", || Box::new(super::ch::CahnHilliardForm));
        reg.register("ks", || Box::new(super::ks::KellerSegelForm));
        reg
    }

    pub fn register(&mut self, name: &'static str, factory: FormulationFactory) {
        self.factories.insert(name, factory);
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn Formulation>> {
        self.factories
            .get(name)
            .map(|f| f())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "formulation",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }
}

impl Default for FormulationRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}
