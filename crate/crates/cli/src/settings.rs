use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

/// Knobs shared by every subcommand. Each may also come from `--config`;
/// flags win over the file.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Settings {
    /// Named problem: scalar, min_coupling, max_coupling or quadrotor
    #[arg(long)]
    pub preset: Option<String>,
    /// Problem JSON file with A, U, V and theta
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub theta_list: Option<Vec<f64>>,
    /// Breadths below this are left out of the log fit
    #[arg(long)]
    pub fit_floor: Option<f64>,
    /// Drift of the scalar preset
    #[arg(long)]
    pub a: Option<f64>,
    /// Dimension of the coupling presets
    #[arg(long)]
    pub d: Option<usize>,
    /// Gravity of the quadrotor preset
    #[arg(long)]
    pub g: Option<f64>,
    /// Quadrotor column scales (thrust, roll, pitch, yaw)
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<f64>>,
    #[arg(long)]
    pub pitch: Option<usize>,
    #[arg(long)]
    pub max_pitch: Option<usize>,
    /// Random tasks per cell when re-checking certificates
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid points per axis of a neighborhood field
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Controller source for neighborhoods; defaults to the weakest corner
    #[arg(long, value_delimiter = ',')]
    pub source: Option<Vec<f64>>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to SUBOPTCOVER_JOBS, then all cores
    #[arg(long)]
    pub jobs: Option<usize>,
    /// JSON file supplying any of these settings
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        Settings { $($field: $top.$field.or($base.$field),)* config: None }
    };
}

impl Settings {
    /// Fills fields missing from `self` with those of the config file.
    pub fn resolve(self) -> Result<Settings, String> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let base = Settings::from_file(&path)?;
        let top = self;
        Ok(overlay!(base, top; preset, problem, alpha, theta, theta_list, fit_floor, a, d, g, scales,
            pitch, max_pitch, samples, seed, resolution, alphas, source, out, jobs))
    }

    fn from_file(path: &Path) -> Result<Settings, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("suboptcover-settings-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"alpha": 1.5, "theta": 10, "alphas": [1.1, 1.2]}"#).unwrap();
        let flags = Settings { alpha: Some(2.0), config: Some(path), ..Settings::default() };
        let s = flags.resolve().unwrap();
        assert_eq!(s.alpha, Some(2.0));
        assert_eq!(s.theta, Some(10.0));
        assert_eq!(s.alphas, Some(vec![1.1, 1.2]));
        assert_eq!(s.seed(), 0);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<Settings>(r#"{"alpah": 2}"#).is_err());
    }
}
