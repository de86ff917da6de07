//! Run configuration: defaults, JSON file, then `section.field=value` overrides.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use nhfp_core::dynamics::PropagateOptions;
use nhfp_core::{Boundary, DriveParams, Sublattice};

use crate::error::CliError;

/// Inclusive list of values, given explicitly or as an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range(Linspace),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl Grid {
    pub fn values(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Grid::Values(v) => v.clone(),
            Grid::Range(r) => match r.n {
                0 => Vec::new(),
                1 => vec![r.start],
                n => (0..n)
                    .map(|i| r.start + (r.stop - r.start) * i as f64 / (n - 1) as f64)
                    .collect(),
            },
        };
        if v.is_empty() {
            return Err(CliError::Validation(format!("{name}: grid is empty")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Validation(format!("{name}: grid has non-finite values")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandsConfig {
    pub n_k: usize,
    pub n_harmonics: usize,
}

impl Default for BandsConfig {
    fn default() -> Self {
        BandsConfig { n_k: 256, n_harmonics: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapscanConfig {
    pub omega: Grid,
    pub gamma0: Grid,
    pub n_k: usize,
    /// Fixed truncation; `null` applies the convergence rule.
    pub n_harmonics: Option<usize>,
    pub closed_tol: f64,
}

impl Default for GapscanConfig {
    fn default() -> Self {
        GapscanConfig {
            omega: Grid::Values(vec![1.1]),
            gamma0: Grid::Range(Linspace { start: 0.0, stop: 0.5, n: 51 }),
            n_k: 256,
            n_harmonics: None,
            closed_tol: nhfp_core::bands::GAP_CLOSED_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeConfig {
    pub n_cells: usize,
    /// Injected cell; `null` means the centre cell.
    pub input_cell: Option<usize>,
    pub n_cycles: usize,
    pub steps_per_cycle: usize,
    pub store_every: usize,
    pub boundary: Boundary,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        let d = PropagateOptions::default();
        LatticeConfig {
            n_cells: d.n_cells,
            input_cell: None,
            n_cycles: d.n_cycles,
            steps_per_cycle: d.steps_per_cycle,
            store_every: d.store_every,
            boundary: d.boundary,
        }
    }
}

impl LatticeConfig {
    pub fn options(&self) -> PropagateOptions {
        PropagateOptions {
            n_cells: self.n_cells,
            n_cycles: self.n_cycles,
            steps_per_cycle: self.steps_per_cycle,
            store_every: self.store_every,
            boundary: self.boundary,
        }
    }

    pub fn cell(&self) -> usize {
        self.input_cell.unwrap_or(self.n_cells / 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub inputs: Vec<Sublattice>,
    pub lattice: LatticeConfig,
    pub write_amplitudes: bool,
    pub spectrum: bool,
    pub n_k: usize,
    pub n_e: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            inputs: vec![Sublattice::A, Sublattice::B],
            lattice: LatticeConfig::default(),
            write_amplitudes: true,
            spectrum: false,
            n_k: 64,
            n_e: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub input: Sublattice,
    pub n_k: usize,
    pub n_e: usize,
    pub n_harmonics: usize,
    pub eta: f64,
    pub normalize: bool,
    pub analytic: bool,
    pub simulated: bool,
    pub lattice: LatticeConfig,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            input: Sublattice::A,
            n_k: 64,
            n_e: 64,
            n_harmonics: 40,
            eta: nhfp_core::floquet::spectral::DEFAULT_ETA,
            normalize: true,
            analytic: true,
            simulated: true,
            lattice: LatticeConfig {
                n_cells: 401,
                n_cycles: 20,
                ..LatticeConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub n_k: usize,
    pub n_harmonics: usize,
    pub monodromy_steps: usize,
    pub tolerance: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            n_k: 64,
            n_harmonics: 40,
            monodromy_steps: nhfp_core::oracle::DEFAULT_STEPS,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Express energies in um^-1 and times in um using the experimental `J0`.
    pub si: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: DriveParams,
    pub bands: BandsConfig,
    pub gapscan: GapscanConfig,
    pub evolve: EvolveConfig,
    pub spectrum: SpectrumConfig,
    pub check: CheckConfig,
    pub output: OutputConfig,
}

fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, key) in parts.iter().enumerate() {
        if key.is_empty() {
            return Err(CliError::Validation(format!("override `{path}`: empty key")));
        }
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::Validation(format!("override `{path}`: `{key}` is not inside a section")))?;
        if i + 1 == parts.len() {
            obj.insert((*key).to_string(), value);
            return Ok(());
        }
        cur = obj.entry((*key).to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Parse `section.field=value`; the value is read as JSON when possible, else as a string.
pub fn parse_override(s: &str) -> Result<(String, Value), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("override `{s}` is not of the form key=value")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn with_overrides(&self, overrides: &[(String, Value)]) -> Result<Self, CliError> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut v = serde_json::to_value(self).map_err(|e| CliError::Runtime(e.to_string()))?;
        for (k, val) in overrides {
            set_path(&mut v, k, val.clone())?;
        }
        serde_json::from_value(v).map_err(|e| CliError::Validation(format!("override: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model.validate()?;
        if self.bands.n_k < 2 {
            return Err(CliError::Validation("bands.n_k: k grid needs at least 2 points".into()));
        }
        self.gapscan.omega.values("gapscan.omega")?;
        self.gapscan.gamma0.values("gapscan.gamma0")?;
        if self.evolve.inputs.is_empty() {
            return Err(CliError::Validation("evolve.inputs: no input sublattice given".into()));
        }
        for (name, l) in [("evolve.lattice", &self.evolve.lattice), ("spectrum.lattice", &self.spectrum.lattice)] {
            if l.cell() >= l.n_cells {
                return Err(CliError::Validation(format!("{name}.input_cell: outside the lattice")));
            }
        }
        if !(self.spectrum.eta > 0.0) {
            return Err(CliError::Validation("spectrum.eta: must be positive".into()));
        }
        if !self.spectrum.analytic && !self.spectrum.simulated {
            return Err(CliError::Validation("spectrum: neither analytic nor simulated requested".into()));
        }
        if self.check.n_k < 2 || self.check.n_harmonics < 1 {
            return Err(CliError::Validation("check: n_k >= 2 and n_harmonics >= 1 required".into()));
        }
        Ok(())
    }
}
