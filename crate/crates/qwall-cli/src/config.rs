//! Experiment configuration, one TOML file per run.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Root seed; `--seed` overrides it. Every task derives its own stream from it by label.
    #[serde(default)]
    pub seed: u64,
    pub model: ModelConfig,
    #[serde(default)]
    pub frame: FrameConfig,
    #[serde(default)]
    pub wall: WallConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub simulate: Option<SimulateConfig>,
    #[serde(default)]
    pub dd: Option<DdCompareConfig>,
    #[serde(default)]
    pub eternal: Option<EternalConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// One of the built-in model ids.
    #[serde(default)]
    pub id: Option<String>,
    /// Dense Hamiltonian file: `n`, then `n²` lines `row col re im`.
    #[serde(default)]
    pub hamiltonian_file: Option<PathBuf>,
    /// `[n_l, n_w, n_e]`, required with a Hamiltonian file.
    #[serde(default)]
    pub dims: Option<[usize; 3]>,
    /// Include the model's Lindblad extras (environment pumping).
    #[serde(default = "yes")]
    pub pumping: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameConfig {
    pub eta_reg: f64,
    pub restarts: usize,
    pub g_min: f64,
    pub max_iterations: usize,
    /// Rotate into the optimized frame before wall selection and simulation.
    pub optimize: bool,
    /// For a qubit logical factor, align its Bloch axes with the coupling (weakest on x).
    pub align_logical: bool,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self { eta_reg: 0.01, restarts: 8, g_min: 1e-10, max_iterations: 5000, optimize: false, align_logical: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveChoice {
    /// `Γ₂` when the OSD is nonzero, `Γ₁` otherwise.
    Auto,
    Gamma1,
    Gamma2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WallConfig {
    pub objective: ObjectiveChoice,
    /// Inverse temperature of the environment's thermal state.
    pub beta: f64,
    pub extra_restarts: usize,
    /// Fixed wall state `[[re, im], ...]` instead of optimizing.
    pub vector: Option<Vec<[f64; 2]>>,
    /// Random states to compare against the chosen one in `find-wall`.
    pub compare_random: usize,
}

impl Default for WallConfig {
    fn default() -> Self {
        Self { objective: ObjectiveChoice::Auto, beta: 0.01, extra_restarts: 3, vector: None, compare_random: 20 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    /// Logical state `[[re, im], ...]`; Haar-random from the root seed when absent.
    pub logical: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    None,
    Measurement,
    Dissipation,
    Driving,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::None => "none",
            SchemeKind::Measurement => "measurement",
            SchemeKind::Dissipation => "dissipation",
            SchemeKind::Driving => "driving",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub scheme: SchemeKind,
    /// Measurement frequencies, dissipation rates or drive strengths; ignored for `none`.
    #[serde(default)]
    pub gains: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveSource {
    /// The model's control Hamiltonian, else the wall projector difference.
    Model,
    Wall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub t_end: f64,
    pub points: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_drive")]
    pub drive: DriveSource,
    pub sweep: Vec<Sweep>,
}

fn default_threshold() -> f64 {
    0.97
}

fn default_drive() -> DriveSource {
    DriveSource::Model
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameChoice {
    Identity,
    Optimized,
}

impl FrameChoice {
    pub fn name(self) -> &'static str {
        match self {
            FrameChoice::Identity => "identity",
            FrameChoice::Optimized => "optimized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DdScheme {
    #[serde(rename = "universal")]
    Universal,
    #[serde(rename = "selective")]
    Selective,
    #[serde(rename = "wall-drive")]
    WallDrive,
    #[serde(rename = "universal+drive")]
    UniversalDrive,
    #[serde(rename = "selective+drive")]
    SelectiveDrive,
}

impl DdScheme {
    pub const ALL: [DdScheme; 5] =
        [DdScheme::Universal, DdScheme::Selective, DdScheme::WallDrive, DdScheme::UniversalDrive, DdScheme::SelectiveDrive];

    pub fn name(self) -> &'static str {
        match self {
            DdScheme::Universal => "universal",
            DdScheme::Selective => "selective",
            DdScheme::WallDrive => "wall-drive",
            DdScheme::UniversalDrive => "universal+drive",
            DdScheme::SelectiveDrive => "selective+drive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DdCompareConfig {
    pub t_end: f64,
    pub points: usize,
    /// Pulse cycles per unit time.
    pub f: f64,
    pub duty: f64,
    pub ideal: bool,
    /// Strength of the stand-alone wall drive.
    pub drive_kappa: f64,
    /// Strength of the drive combined with DD.
    pub combo_kappa: f64,
    pub frames: Vec<FrameChoice>,
    pub schemes: Vec<DdScheme>,
}

impl Default for DdCompareConfig {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            points: 201,
            f: 10.0,
            duty: 0.2,
            ideal: false,
            drive_kappa: 5.0 * std::f64::consts::PI,
            combo_kappa: 33.0,
            frames: vec![FrameChoice::Identity, FrameChoice::Optimized],
            schemes: DdScheme::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EternalConfig {
    pub kappas: Vec<f64>,
    /// Strength used for the index sets and the report; defaults to the largest swept value.
    pub report_kappa: Option<f64>,
    pub zero_tol: f64,
    pub swap_tol: f64,
    /// Simulate the purity at this many random times per `κ` and record its minimum.
    pub validate_times: usize,
    pub validate_horizon: f64,
}

impl Default for EternalConfig {
    fn default() -> Self {
        Self {
            kappas: vec![1.0, 3.0, 10.0, 30.0, 100.0],
            report_kappa: None,
            zero_tol: 1e-9,
            swap_tol: 1e-9,
            validate_times: 0,
            validate_horizon: 100.0,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads and validates; relative Hamiltonian paths resolve against the config's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(h) = &cfg.model.hamiltonian_file {
            if h.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.model.hamiltonian_file = Some(base.join(h));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match (&self.model.id, &self.model.hamiltonian_file) {
            (Some(_), Some(_)) => return Err(bad("give either model.id or model.hamiltonian_file, not both")),
            (None, None) => return Err(bad("model.id or model.hamiltonian_file is required")),
            (None, Some(p)) => {
                if self.model.dims.is_none() {
                    return Err(bad("model.dims is required with a Hamiltonian file"));
                }
                if !p.exists() {
                    return Err(bad(format!("Hamiltonian file {} does not exist", p.display())));
                }
            }
            (Some(_), None) => {}
        }
        let f = &self.frame;
        if !(f.eta_reg >= 0.0) || !(f.g_min > 0.0) || f.restarts == 0 || f.max_iterations == 0 {
            return Err(bad("frame: need eta_reg >= 0, g_min > 0, restarts >= 1, max_iterations >= 1"));
        }
        if !(self.wall.beta.is_finite() && self.wall.beta >= 0.0) {
            return Err(bad("wall.beta must be finite and >= 0"));
        }
        if let Some(s) = &self.simulate {
            grid_ok(s.t_end, s.points, "simulate")?;
            if s.sweep.is_empty() {
                return Err(bad("simulate.sweep is empty"));
            }
            for sw in &s.sweep {
                if sw.scheme != SchemeKind::None && sw.gains.is_empty() {
                    return Err(bad(format!("simulate: {} sweep has no gains", sw.scheme.name())));
                }
                if sw.gains.iter().any(|g| !g.is_finite() || *g < 0.0) {
                    return Err(bad(format!("simulate: {} gains must be finite and >= 0", sw.scheme.name())));
                }
            }
        }
        if let Some(d) = &self.dd {
            grid_ok(d.t_end, d.points, "dd")?;
            if d.frames.is_empty() || d.schemes.is_empty() {
                return Err(bad("dd: frames and schemes must be nonempty"));
            }
            if !(d.f > 0.0) || !(d.duty > 0.0 && d.duty < 1.0) {
                return Err(bad("dd: need f > 0 and 0 < duty < 1"));
            }
        }
        if let Some(e) = &self.eternal {
            if e.kappas.is_empty() || e.kappas.iter().any(|k| !k.is_finite() || *k < 0.0) {
                return Err(bad("eternal.kappas must be nonempty, finite and >= 0"));
            }
            if !(e.zero_tol > 0.0 && e.swap_tol > 0.0) {
                return Err(bad("eternal tolerances must be positive"));
            }
        }
        Ok(())
    }
}

fn grid_ok(t_end: f64, points: usize, what: &str) -> Result<(), ConfigError> {
    if !(t_end.is_finite() && t_end > 0.0) || points < 2 {
        return Err(bad(format!("{what}: need t_end > 0 and points >= 2")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
seed = 5

[model]
id = "ising3"

[frame]
optimize = true

[simulate]
t_end = 30.0
points = 601

[[simulate.sweep]]
scheme = "measurement"
gains = [1.0, 5.0]

[dd]
schemes = ["selective", "selective+drive"]

[eternal]
kappas = [1.0, 10.0]
"#;

    #[test]
    fn round_trip() {
        let c = Config::from_toml(FULL).unwrap();
        c.validate().unwrap();
        assert_eq!(Config::from_toml(&c.to_toml()).unwrap(), c);
        assert_eq!(c.dd.as_ref().unwrap().schemes, vec![DdScheme::Selective, DdScheme::SelectiveDrive]);
    }

    #[test]
    fn rejects_unknown_keys_and_missing_model() {
        assert!(Config::from_toml("[model]\nid = \"ising3\"\ncolour = 1\n").is_err());
        let c = Config::from_toml("[model]\npumping = false\n").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn rejects_empty_sweep() {
        let c = Config::from_toml("[model]\nid = \"ising3\"\n[simulate]\nt_end = 1.0\npoints = 3\nsweep = []\n").unwrap();
        assert!(c.validate().is_err());
    }
}
