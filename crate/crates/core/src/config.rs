//! Model registry configs, shared by the library and the CLI.
//!
//! Configs are TOML first, JSON accepted; the same structs deserialize from
//! both.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::model::{Family, WalkModel};

/// One cosine/sine term of `ln phi` on the torus:
/// `amp * cos(2 pi <k, x>)` or `amp * sin(2 pi <k, x>)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LogPhiTerm {
    pub amp: f64,
    pub k: Vec<i32>,
    #[serde(default = "default_phase")]
    pub phase: String,
}

fn default_phase() -> String {
    "cos".to_string()
}

/// A model registry entry. Which fields apply depends on the family:
///
/// * `zd-lattice` / `sublattice-orbit`: `d`, `stride`, `radius`
/// * `free-group-tree`: `stride`, `radius`
/// * `biased-z`: `p_right`, `radius`
/// * `torus-cover`: `d`, `logphi`, `dt`, `t_max`
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelConfig {
    pub family: String,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub stride: Option<u32>,
    #[serde(default)]
    pub p_right: Option<f64>,
    #[serde(default)]
    pub radius: Option<u32>,
    #[serde(default)]
    pub logphi: Option<Vec<LogPhiTerm>>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_max: Option<f64>,
}

impl ModelConfig {
    pub fn is_continuous(&self) -> bool {
        self.family == "torus-cover"
    }

    /// Resolves a discrete-walk config into a model.
    pub fn to_walk_model(&self) -> Result<WalkModel, CoreError> {
        match self.family.as_str() {
            "zd-lattice" => WalkModel::new(Family::LatticeZd {
                d: self.d.unwrap_or(1),
                stride: 1,
            }),
            "sublattice-orbit" => WalkModel::new(Family::LatticeZd {
                d: self.d.unwrap_or(1),
                stride: self.stride.unwrap_or(2),
            }),
            "free-group-tree" => WalkModel::new(Family::FreeGroupTree {
                stride: self.stride.unwrap_or(2),
            }),
            "biased-z" => WalkModel::new(Family::BiasedZ {
                p_right: self.p_right.unwrap_or(0.5),
            }),
            other => Err(CoreError::BadConfig(format!(
                "unknown discrete model family `{other}`"
            ))),
        }
    }
}

/// Loads a config value (any `Deserialize`) from a TOML or JSON file,
/// deciding by extension and falling back to trying both.
pub fn load_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CoreError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoreError::BadConfig(format!("{}: {e}", path.display())))?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "json" => serde_json::from_str(&text)
            .map_err(|e| CoreError::BadConfig(format!("{}: {e}", path.display()))),
        "toml" => toml::from_str(&text)
            .map_err(|e| CoreError::BadConfig(format!("{}: {e}", path.display()))),
        _ => toml::from_str(&text).or_else(|toml_err| {
            serde_json::from_str(&text).map_err(|json_err| {
                CoreError::BadConfig(format!(
                    "{}: not valid TOML ({toml_err}) nor JSON ({json_err})",
                    path.display()
                ))
            })
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip() {
        let text = r#"
            family = "sublattice-orbit"
            d = 2
            stride = 2
            radius = 12
        "#;
        let cfg: ModelConfig = toml::from_str(text).unwrap();
        let model = cfg.to_walk_model().unwrap();
        assert_eq!(model.family_name(), "sublattice-orbit");
    }

    #[test]
    fn json_torus_cover() {
        let text = r#"{
            "family": "torus-cover",
            "d": 2,
            "logphi": [{"amp": 0.3, "k": [1, 0]}],
            "dt": 1e-4
        }"#;
        let cfg: ModelConfig = serde_json::from_str(text).unwrap();
        assert!(cfg.is_continuous());
        assert_eq!(cfg.logphi.as_ref().unwrap()[0].phase, "cos");
    }

    #[test]
    fn unknown_family_is_an_error() {
        let cfg = ModelConfig {
            family: "heisenberg".into(),
            d: None,
            stride: None,
            p_right: None,
            radius: None,
            logphi: None,
            dt: None,
            t_max: None,
        };
        assert!(cfg.to_walk_model().is_err());
    }
}
