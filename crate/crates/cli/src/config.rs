//! Run configuration: a JSON file with one section per command, overridden
//! by command-line flags. The resolved section is embedded in every report.

use crate::CliError;
use kepler_euler::dynamics::IntegratorConfig;
use kepler_euler::lift::ClassifyThresholds;
use kepler_euler::suite::{Check, SuiteConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable naming the directory for output files.
pub const OUT_DIR_ENV: &str = "KEPLER_EULER_OUT_DIR";

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub verify: VerifyConfig,
    pub simulate: SimulateConfig,
    pub compare: CompareConfig,
    pub average_metric: AverageConfig,
    pub classify: ClassifyConfig,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub c: Option<f64>,
    /// Empty means every check.
    pub which: Vec<Check>,
    pub suite: SuiteConfig,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub c: Option<f64>,
    pub direct: bool,
    /// Bundle state `(x1, x2, alpha)`.
    pub state: Option<[f64; 3]>,
    pub q: Option<[f64; 2]>,
    pub p: Option<[f64; 2]>,
    pub tmax: f64,
    pub detect_period: bool,
    pub period_tolerance: f64,
    pub integrator: IntegratorConfig,
    pub output: PathBuf,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            c: None,
            direct: false,
            state: None,
            q: None,
            p: None,
            tmax: 10.0,
            detect_period: false,
            period_tolerance: 1e-6,
            integrator: IntegratorConfig::default(),
            output: PathBuf::from("trajectory.csv"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub c: Option<f64>,
    pub q: Option<[f64; 2]>,
    pub p: Option<[f64; 2]>,
    pub tmax: f64,
    pub integrator: IntegratorConfig,
    pub output: Option<PathBuf>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig { c: None, q: None, p: None, tmax: std::f64::consts::TAU, integrator: IntegratorConfig::default(), output: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AverageConfig {
    pub c: Option<f64>,
    pub samples: usize,
    pub nodes: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for AverageConfig {
    fn default() -> Self {
        let s = SuiteConfig::default();
        AverageConfig { c: None, samples: s.equivariance_samples, nodes: s.quadrature_nodes, seed: s.seed, output: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub c: Option<f64>,
    /// CSV trajectory with header `t,x1,x2,alpha`; when absent the Reeb flow
    /// plus `fiber_drift ∂α` is integrated from `state`.
    pub input: Option<PathBuf>,
    pub state: Option<[f64; 3]>,
    pub fiber_drift: f64,
    pub tmax: f64,
    pub max_step: f64,
    pub thresholds: ClassifyThresholds,
    pub output: Option<PathBuf>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            c: None,
            input: None,
            state: None,
            fiber_drift: 0.0,
            tmax: 1.0,
            max_step: 5e-4,
            thresholds: ClassifyThresholds::default(),
            output: None,
        }
    }
}

/// Required regime parameter.
pub fn require_c(c: Option<f64>) -> Result<f64, CliError> {
    match c {
        Some(c) if c.is_finite() => Ok(c),
        Some(c) => Err(CliError::Config(format!("regime c must be finite, got {c}"))),
        None => Err(CliError::Config("the regime c is required (--c or the config file)".into())),
    }
}

/// Resolves an output path against the output directory: the flag, then
/// the environment variable, then the working directory.
pub fn resolve_output(path: &Path, out_dir: Option<&Path>) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    let env_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match out_dir.map(Path::to_path_buf).or(env_dir) {
        Some(dir) => dir.join(path),
        None => path.to_path_buf(),
    }
}
