//! Run configuration: TOML sections, initial-condition generators and `key=value` overrides.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticConfig;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::galerkin::GalerkinConfig;
use crate::grid::Grid;
use crate::params::ModelParams;
use crate::stepper::StepConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// One entry per axis.
    pub cells: Vec<usize>,
    pub length: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { cells: vec![256], length: vec![1.0] }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        match (self.cells.as_slice(), self.length.as_slice()) {
            ([n], [l]) => Grid::new_1d(*l, *n),
            ([nx, ny], [lx, ly]) => Grid::new_2d(*lx, *ly, *nx, *ny),
            _ => Err(Error::Config(format!(
                "grid.cells and grid.length must both have 1 or 2 entries (got {} and {})",
                self.cells.len(),
                self.length.len()
            ))),
        }
    }

    pub fn with_cells(&self, cells: usize) -> Self {
        Self { cells: vec![cells; self.cells.len()], length: self.length.clone() }
    }
}

/// Named initial-density generators. Coordinates are scaled by the domain length, so a
/// frequency of 1 is one half-wave across the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Constant {
        value: f64,
    },
    /// `base + amplitude * Π_axis cos(frequency pi x / L)`.
    Cosine {
        base: f64,
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
    },
    /// Smoothed step from `high` (below `center`) to `low` along the first axis.
    Tanh {
        low: f64,
        high: f64,
        center: f64,
        width: f64,
    },
    /// `mean + amplitude * Σ a_k cos(k pi x / L) / Σ|a_k|`, `a_k` uniform in [-1, 1] for
    /// wavenumbers `1..=cutoff` on each axis.
    Random {
        mean: f64,
        amplitude: f64,
        cutoff: usize,
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Cosine { base: 0.5, amplitude: 0.4, frequency: 1.0 }
    }
}

impl InitialCondition {
    /// A pointwise evaluator on a domain with the given side lengths.
    pub fn evaluator(&self, extent: [f64; 2], dim: usize) -> Box<dyn Fn([f64; 2]) -> f64 + Send + Sync> {
        match *self {
            InitialCondition::Constant { value } => Box::new(move |_| value),
            InitialCondition::Cosine { base, amplitude, frequency } => Box::new(move |x| {
                let mut s = 1.0;
                for a in 0..dim {
                    s *= (frequency * PI * x[a] / extent[a]).cos();
                }
                base + amplitude * s
            }),
            InitialCondition::Tanh { low, high, center, width } => {
                Box::new(move |x| low + (high - low) * 0.5 * (1.0 - ((x[0] / extent[0] - center) / width).tanh()))
            }
            InitialCondition::Random { mean, amplitude, cutoff, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let ky = if dim == 2 { cutoff } else { 0 };
                let mut modes = Vec::new();
                for i in 0..=cutoff {
                    for j in 0..=ky {
                        if i + j > 0 {
                            modes.push((i as f64, j as f64, rng.gen_range(-1.0f64..=1.0)));
                        }
                    }
                }
                let total: f64 = modes.iter().map(|m| m.2.abs()).sum();
                let scale = if total > 0.0 { amplitude / total } else { 0.0 };
                Box::new(move |x| {
                    let s: f64 = modes
                        .iter()
                        .map(|&(i, j, a)| a * (i * PI * x[0] / extent[0]).cos() * (j * PI * x[1] / extent[1]).cos())
                        .sum();
                    mean + scale * s
                })
            }
        }
    }

    pub fn sample(&self, grid: Grid) -> Field {
        let f = self.evaluator([grid.extent(0), grid.extent(1)], grid.dim());
        Field::from_fn(grid, f)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        match *self {
            InitialCondition::Tanh { width, .. } if !(width > 0.0) => bad("initial.width must be positive"),
            InitialCondition::Random { cutoff: 0, .. } => bad("initial.cutoff must be at least 1"),
            _ => Ok(()),
        }
    }
}

// Unknown keys are rejected by the flattened generator.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialSpec {
    #[serde(flatten)]
    pub condition: InitialCondition,
    /// Accept data exceeding 1.
    pub allow_supercritical: bool,
}

impl InitialSpec {
    /// Samples the initial density and checks `0 <= n0 <= 1` (upper bound waived with
    /// `allow_supercritical`).
    pub fn sample(&self, grid: Grid) -> Result<Field> {
        self.condition.validate()?;
        let n0 = self.condition.sample(grid);
        let (lo, hi) = (n0.min(), n0.max());
        if !(lo >= 0.0) {
            return Err(Error::Config(format!("initial density has negative values (min {lo:.3e})")));
        }
        if hi > 1.0 && !self.allow_supercritical {
            return Err(Error::Config(format!(
                "initial density exceeds 1 (max {hi:.6}); set initial.allow_supercritical = true"
            )));
        }
        Ok(n0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Keep every `stride`-th step in the diagnostics CSV.
    pub stride: usize,
    /// Evenly spaced field snapshots including the initial and final state; 0 disables.
    pub snapshots: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { stride: 1, snapshots: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Strictly decreasing, positive. A `sigma = 0` reference run is added automatically.
    pub sigmas: Vec<f64>,
    /// Strictly increasing, each above 1.
    pub gammas: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { sigmas: vec![1e-1, 1e-2, 1e-3], gammas: vec![5.0, 20.0, 80.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivalenceConfig {
    /// Coarse and fine resolutions (cells per axis).
    pub cells: [usize; 2],
    /// Required ratio of coarse to fine L∞ difference.
    pub min_ratio: f64,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        Self { cells: [128, 256], min_ratio: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    /// Allowed relative L2 distance between the spectral and finite-volume densities.
    pub tolerance: f64,
    /// Repeat both runs with halved steps and report the change in distance.
    pub check_dt_halving: bool,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { tolerance: 1e-2, check_dt_halving: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub model: ModelParams,
    pub step: StepConfig,
    pub elliptic: EllipticConfig,
    pub initial: InitialSpec,
    pub output: OutputConfig,
    pub sweep: SweepConfig,
    pub equivalence: EquivalenceConfig,
    pub galerkin: GalerkinConfig,
    pub compare: CompareConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Parses `text`, applies `section.key=value` overrides to the table, then
    /// deserializes and validates.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.build()?;
        self.model.validate()?;
        self.step.validate()?;
        self.elliptic.validate()?;
        self.initial.condition.validate()?;
        self.galerkin.validate()?;
        if self.output.stride == 0 {
            return Err(Error::Config("output.stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid> {
        self.grid.build()
    }

    pub fn initial_density(&self, grid: Grid) -> Result<Field> {
        self.initial.sample(grid)
    }
}

/// Applies `a.b.c=value` to a TOML table. The value is parsed as a TOML literal when
/// possible and taken as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override `{spec}` has an empty key")));
    }
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let (last, path) = parts.split_last().expect("non-empty key");
    let mut cur = table;
    for part in path {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{part}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
