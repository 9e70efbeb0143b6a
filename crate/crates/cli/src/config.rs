use std::path::Path;

use serde::{Deserialize, Serialize};
use subkoba::distances::{CcConfig, KobayashiConfig};
use subkoba::flows::{ConnectConfig, StepConfig};
use subkoba::optim::SphereOptConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForstnericConfig {
    pub per_axis: usize,
    pub level: u32,
}

impl Default for ForstnericConfig {
    fn default() -> Self {
        Self { per_axis: 7, level: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyConfig {
    /// Threshold on `min ‖[x, jx]‖` for the no-complex-line check.
    pub complex_line_tol: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { complex_line_tol: 1e-8 }
    }
}

/// Everything tunable, as read from `--config` and overridden by flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tunables {
    pub optimizer: SphereOptConfig,
    pub flow: StepConfig,
    pub connect: ConnectConfig,
    pub kobayashi: KobayashiConfig,
    pub cc: CcConfig,
    pub forstneric: ForstnericConfig,
    pub classify: ClassifyConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Resolved configuration of one run; embedded in every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub fixtures: Vec<String>,
    pub arguments: serde_json::Value,
    pub output: Option<String>,
    pub format: Format,
    pub threads: Option<usize>,
    #[serde(flatten)]
    pub tunables: Tunables,
}

pub fn load_tunables(path: Option<&Path>) -> Result<Tunables, String> {
    let Some(path) = path else { return Ok(Tunables::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

impl Tunables {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("optimizer.tol", self.optimizer.tol),
            ("flow.tol", self.flow.tol),
            ("flow.initial_step", self.flow.initial_step),
            ("flow.escape_factor", self.flow.escape_factor),
            ("connect.endpoint_tol", self.connect.endpoint_tol),
            ("connect.fd_step", self.connect.fd_step),
            ("connect.step.tol", self.connect.step.tol),
            ("connect.step.initial_step", self.connect.step.initial_step),
            ("kobayashi.tol", self.kobayashi.tol),
            ("kobayashi.min_radius", self.kobayashi.min_radius),
            ("cc.endpoint_tol", self.cc.endpoint_tol),
            ("classify.complex_line_tol", self.classify.complex_line_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.optimizer.restarts == 0 {
            return Err("optimizer.restarts must be at least 1".into());
        }
        if !(self.kobayashi.max_radius > self.kobayashi.min_radius && self.kobayashi.max_radius < 1.0) {
            return Err("kobayashi radii must satisfy min_radius < max_radius < 1".into());
        }
        if self.cc.segments == 0 || self.cc.substeps == 0 || self.forstneric.per_axis == 0 {
            return Err("segment, substep and sample counts must be positive".into());
        }
        Ok(())
    }
}
