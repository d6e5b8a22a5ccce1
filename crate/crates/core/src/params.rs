//! Model parameters and the proliferation law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the relaxed system.
///
/// `sigma = 0` selects the degenerate Cahn-Hilliard configuration in which `w = n`.
/// `eps_mobility = 0` selects the degenerate mobility `B(n) = max(0, n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub sigma: f64,
    pub delta: f64,
    pub gamma: f64,
    pub eps_mobility: f64,
    pub growth: GrowthLaw,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            delta: 1.0,
            gamma: 4.0,
            eps_mobility: 0.0,
            growth: GrowthLaw::Zero,
        }
    }
}

impl ModelParams {
    pub fn new(sigma: f64, delta: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            sigma,
            delta,
            gamma,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_growth(mut self, growth: GrowthLaw) -> Self {
        self.growth = growth;
        self
    }

    pub fn with_mobility_eps(mut self, eps: f64) -> Self {
        self.eps_mobility = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParams(format!("gamma = {} must exceed 1", self.gamma)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParams(format!("delta = {} must be positive", self.delta)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParams(format!("sigma = {} must be nonnegative", self.sigma)));
        }
        if !(0.0..1.0).contains(&self.eps_mobility) {
            return Err(Error::InvalidParams(format!(
                "eps_mobility = {} must lie in [0, 1)",
                self.eps_mobility
            )));
        }
        self.growth.validate()
    }

    /// True in the `sigma = 0` configuration.
    pub fn is_degenerate_ch(&self) -> bool {
        self.sigma == 0.0
    }
}

/// Pressure-dependent proliferation rate `G(mu)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GrowthLaw {
    #[default]
    Zero,
    /// `G(mu) = g (mu_H - mu) (1 - (mu / mu_H)^2)` on `|mu| <= mu_H`, zero outside.
    Homeostatic { amplitude: f64, mu_h: f64 },
}

impl GrowthLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GrowthLaw::Zero => Ok(()),
            GrowthLaw::Homeostatic { amplitude, mu_h } => {
                if !(amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(Error::InvalidParams(format!(
                        "growth amplitude {amplitude} must be nonnegative"
                    )));
                }
                if !(mu_h > 0.0 && mu_h.is_finite()) {
                    return Err(Error::InvalidParams(format!(
                        "homeostatic pressure {mu_h} must be positive"
                    )));
                }
                Ok(())
            }
        }
    }

    #[inline]
    pub fn eval(&self, mu: f64) -> f64 {
        match *self {
            GrowthLaw::Zero => 0.0,
            GrowthLaw::Homeostatic { amplitude, mu_h } => {
                if mu.abs() > mu_h {
                    0.0
                } else {
                    let r = mu / mu_h;
                    amplitude * (mu_h - mu) * (1.0 - r * r)
                }
            }
        }
    }

    /// `sup |G|`. For the homeostatic law `G = (g / mu_H^2)(mu_H - mu)^2 (mu_H + mu)`
    /// peaks at `mu = -mu_H / 3` with value `32 g mu_H / 27`.
    pub fn sup_abs(&self) -> f64 {
        match *self {
            GrowthLaw::Zero => 0.0,
            GrowthLaw::Homeostatic { amplitude, mu_h } => 32.0 * amplitude * mu_h / 27.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sup_abs() == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ModelParams::new(1.0, 1.0, 4.0).is_ok());
        assert!(ModelParams::new(0.0, 1.0, 4.0).is_ok());
        assert!(ModelParams::new(1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.0, 2.0).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 2.0).is_err());
        let p = ModelParams::default().with_mobility_eps(1.0);
        assert!(p.validate().is_err());
        let p = ModelParams::default().with_growth(GrowthLaw::Homeostatic {
            amplitude: 1.0,
            mu_h: 0.0,
        });
        assert!(p.validate().is_err());
    }

    #[test]
    fn homeostatic_shape() {
        let g = GrowthLaw::Homeostatic {
            amplitude: 2.0,
            mu_h: 0.5,
        };
        assert_eq!(g.eval(0.5), 0.0);
        assert_eq!(g.eval(-0.5), 0.0);
        assert_eq!(g.eval(0.7), 0.0);
        assert!((g.eval(0.0) - 1.0).abs() < 1e-15);
        // continuity across the support edge
        assert!(g.eval(0.5 - 1e-9).abs() < 1e-8);
        assert!(g.eval(-0.5 + 1e-9).abs() < 1e-8);
    }

    #[test]
    fn sup_matches_dense_scan() {
        let g = GrowthLaw::Homeostatic {
            amplitude: 1.3,
            mu_h: 2.0,
        };
        let scan = (0..=200_000)
            .map(|k| -3.0 + 6.0 * k as f64 / 200_000.0)
            .map(|mu| g.eval(mu).abs())
            .fold(0.0_f64, f64::max);
        assert!((scan - g.sup_abs()).abs() < 1e-8);
        // (1 + |mu|) |G(mu)| bounded: compact support gives a finite sup
        let weighted = (0..=1000)
            .map(|k| -10.0 + 20.0 * k as f64 / 1000.0)
            .map(|mu| (1.0 + mu.abs()) * g.eval(mu).abs())
            .fold(0.0_f64, f64::max);
        assert!(weighted <= 3.0 * g.sup_abs());
    }

    #[test]
    fn deserializes_tagged() {
        let g: GrowthLaw = toml::from_str("kind = \"homeostatic\"\namplitude = 1.0\nmu_h = 2").unwrap();
        assert_eq!(
            g,
            GrowthLaw::Homeostatic {
                amplitude: 1.0,
                mu_h: 2.0
            }
        );
        let z: GrowthLaw = toml::from_str("kind = \"zero\"").unwrap();
        assert!(z.is_zero());
    }
}
