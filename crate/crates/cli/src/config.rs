//! Optional JSON config file and flag/file/default resolution.
//!
//! Precedence: command-line flags override config-file values, which
//! override built-in defaults. The resolved (effective) configuration is
//! echoed into every run document.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// Root of the optional `--config` JSON file. Every field is optional;
/// sections mirror the per-command parameter sets.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub generate: GenerateSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub calibrate: CalibrateSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub recommend: RecommendSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct GenerateSection {
    pub n_majority: Option<usize>,
    pub n_minority: Option<usize>,
    pub margin: Option<f64>,
    pub rotation: Option<f64>,
    pub noise: Option<f64>,
    pub kappa: Option<f64>,
    pub grid_steps: Option<usize>,
    pub max_family: Option<usize>,
    pub n_base: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct TrainSection {
    pub mode: Option<String>,
    pub loss: Option<String>,
    pub mu: Option<f64>,
    #[serde(default, deserialize_with = "opt_beta")]
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_outer: Option<usize>,
    pub eta: Option<f64>,
    pub t_inner: Option<usize>,
    pub backtracking: Option<bool>,
    pub grad_tol: Option<f64>,
    pub calibration: Option<String>,
    pub alpha_grid: Option<Vec<f64>>,
    pub split_ratio: Option<f64>,
    pub sample_adjust: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct CalibrateSection {
    pub loss: Option<String>,
    pub mu: Option<f64>,
    pub alpha_grid: Option<Vec<f64>>,
    pub split_ratio: Option<f64>,
    pub eta: Option<f64>,
    pub t_inner: Option<usize>,
    pub grad_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct VerifySection {
    pub tol: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub grid_resolution: Option<usize>,
    pub epsilon_family: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct RecommendSection {
    pub acceptability: Option<Vec<f64>>,
}

fn opt_beta<'de, D: serde::Deserializer<'de>>(de: D) -> Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    struct Wrap(#[serde(with = "dro_lab_beta")] f64);
    Option::<Wrap>::deserialize(de).map(|o| o.map(|w| w.0))
}

// re-export of the library's beta encoding for config parsing
mod dro_lab_beta {
    use serde::{Deserialize, Deserializer};

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) => super::parse_beta(&s).map_err(serde::de::Error::custom),
        }
    }
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config file {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config file {}", p.display()))
            }
        }
    }
}

/// Flag > file > default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Flag > file, no default.
pub fn pick_opt<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Parses a temperature; accepts `inf` for the hardmax limit.
pub fn parse_beta(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|_| format!("bad temperature '{other}'")),
    }
}

/// Parses a comma-separated list of reals; entries may be `inf`.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|tok| match tok.trim() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            t => t.parse::<f64>().map_err(|_| format!("bad number '{t}'")),
        })
        .collect()
}

/// Effective descent parameters, echoed into run documents.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveDescent {
    pub eta: f64,
    pub t_inner: usize,
    pub backtracking: bool,
    pub grad_tol: f64,
}

impl EffectiveDescent {
    pub fn to_core(&self) -> dro_lab::DescentConfig {
        dro_lab::DescentConfig {
            step_size: self.eta,
            max_steps: self.t_inner,
            backtracking: self.backtracking,
            grad_tol: self.grad_tol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_inf_beta_and_sections() {
        let text = r#"{
            "seed": 9,
            "train": {"beta": "inf", "loss": "hinge", "max_outer": 42},
            "verify": {"radii": [0.001, 0.01]}
        }"#;
        let cfg: FileConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert!(cfg.train.beta.unwrap().is_infinite());
        assert_eq!(cfg.train.max_outer, Some(42));
        assert_eq!(cfg.verify.radii.as_deref(), Some(&[0.001, 0.01][..]));
    }

    #[test]
    fn precedence_flag_over_file_over_default() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick::<i32>(None, None, 3), 3);
    }

    #[test]
    fn real_list_parsing() {
        assert_eq!(parse_real_list("1,2.5,-0.3").unwrap(), vec![1.0, 2.5, -0.3]);
        assert!(parse_real_list("1,x").is_err());
        assert!(parse_real_list("inf,0").unwrap()[0].is_infinite());
    }
}
