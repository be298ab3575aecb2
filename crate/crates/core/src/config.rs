//! Experiment configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{Backend, GridSpec};
use crate::noise::DeviceModel;
use crate::spinchain::linspace;
use crate::vqe::VqeConfig;

/// Default device when neither the config nor the CLI names one.
pub const DEVICE_ENV: &str = "SPT_QCNN_DEVICE";

/// Built-in device names accepted in place of a path.
pub const IDEAL_DEVICE: &str = "ideal";
pub const TABLE_ONE_DEVICE: &str = "table-one";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinecutSpec {
    pub h1: f64,
    pub h2: (f64, f64),
    pub points: usize,
}

impl Default for LinecutSpec {
    fn default() -> Self {
        LinecutSpec { h1: 0.2, h2: (-1.6, 1.6), points: 17 }
    }
}

impl LinecutSpec {
    pub fn h2_values(&self) -> Vec<f64> {
        linspace(self.h2.0, self.h2.1, self.points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub linecut: LinecutSpec,
    /// 0 evaluates probabilities exactly.
    pub shots: u64,
    pub seed: u64,
    /// `"ideal"`, `"table-one"` or a device TOML path; unset falls back to
    /// `$SPT_QCNN_DEVICE`, then `"table-one"`.
    pub device: Option<String>,
    pub mitigation: bool,
    pub preselection: bool,
    pub output_dir: PathBuf,
    pub vqe: VqeConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid: GridSpec::default(),
            linecut: LinecutSpec::default(),
            shots: 0,
            seed: 0,
            device: None,
            mitigation: true,
            preselection: true,
            output_dir: PathBuf::from("out"),
            vqe: VqeConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let c: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.linecut.points < 5 {
            return Err(Error::Config(format!("linecut needs at least 5 points, got {}", self.linecut.points)));
        }
        if self.linecut.h2.0 >= self.linecut.h2.1 {
            return Err(Error::Config("linecut h2 range must be ordered low, high".into()));
        }
        if self.vqe.depth == 0 || self.vqe.max_restarts == 0 {
            return Err(Error::Config("vqe depth and max_restarts must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.vqe.accept_fidelity) {
            return Err(Error::Config(format!("vqe accept_fidelity {} outside [0, 1]", self.vqe.accept_fidelity)));
        }
        Ok(())
    }

    /// Device name after applying the environment fallback.
    pub fn device_name(&self) -> String {
        self.device
            .clone()
            .or_else(|| std::env::var(DEVICE_ENV).ok().filter(|s| !s.is_empty()))
            .unwrap_or_else(|| TABLE_ONE_DEVICE.into())
    }

    pub fn load_device(&self, n: usize) -> Result<DeviceModel> {
        let name = self.device_name();
        let d = match name.as_str() {
            IDEAL_DEVICE => DeviceModel::noiseless(n),
            TABLE_ONE_DEVICE => DeviceModel::table_one(),
            path => DeviceModel::load(Path::new(path)).map_err(|e| match e {
                Error::Config(_) => e,
                other => Error::Config(format!("device {path}: {other}")),
            })?,
        };
        if d.n_qubits() < n {
            return Err(Error::Config(format!("device {name} has {} qubits, need {n}", d.n_qubits())));
        }
        Ok(d)
    }

    pub fn backend(&self, n: usize) -> Result<Backend> {
        Ok(Backend::new(self.load_device(n)?, self.mitigation, self.preselection, self.shots, self.seed))
    }
}
