//! Flat `key = value` experiment configuration.
//!
//! Resolution order: built-in defaults, then the config file, then `--set`
//! overrides, then dedicated flags. Angles are degrees and SNRs are dB here;
//! everything is converted to radians / linear before reaching the engine.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use vlcnoma_core::analytic::FeedbackThresholds;
use vlcnoma_core::geometry::LedGeometry;
use vlcnoma_core::montecarlo::{McSettings, NoiseConfig};
use vlcnoma_core::rates::{db_to_linear, FeedbackMode, NomaConfig, OmaMode, Scenario};
use vlcnoma_core::stochastic::MobilityModel;

use crate::error::{CliError, CliResult};

/// Every recognised key with its default value.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("ell", "2"),
    ("phi_hpbw_deg", "60"),
    ("area_r", "1e-4"),
    ("fov_deg", "50"),
    ("d_min", "0"),
    ("d_max", "10"),
    ("max_deviation_deg", "25"),
    ("mean_angle_min_deg", "auto"),
    ("mean_angle_max_deg", "auto"),
    ("users", "20"),
    ("weak_rank", "1"),
    ("strong_rank", "10"),
    ("beta_weak", "0.984375"),
    ("beta_strong", "0.015625"),
    ("rate_weak", "2"),
    ("rate_strong", "10"),
    ("normalize_power", "false"),
    ("snr_db", "200"),
    ("c_dth", "0.1"),
    ("c_theta", "0.1"),
    ("d_th", "auto"),
    ("theta_th_deg", "auto"),
    ("sigma_d", "0.05"),
    ("sigma_phi_deg", "2.5"),
    ("mode", "auto"),
    ("oma_mode", "time-shared"),
    ("noisy_modes", "full-csi,mean-angle"),
    ("trials", "auto"),
    ("seed", "1"),
    ("workers", "auto"),
    ("snr_grid_db", "100:260:10"),
    ("deviation_grid_deg", "0:30:5"),
    ("c_dth_grid", "0.1,0.9"),
    ("c_theta_grid", "0.1,0.9"),
    ("angle_grid_points", "181"),
    ("cdf_points", "200"),
];

/// Resolved raw key/value pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self {
            values: DEFAULTS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = key.trim();
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.trim().to_string();
                Ok(())
            }
            None => Err(CliError::Config(format!("unknown key '{key}'"))),
        }
    }

    /// Applies a `KEY=VALUE` override.
    pub fn set_pair(&mut self, pair: &str) -> CliResult<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override '{pair}' is not KEY=VALUE")))?;
        self.set(k, v)
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> CliResult<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{origin}:{}: expected key = value", n + 1)))?;
            self.set(k, v)
                .map_err(|e| CliError::Config(format!("{origin}:{}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    /// SHA-256 over the canonical `key=value` lines, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.values {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn num(&self, key: &str) -> CliResult<f64> {
        let v = self.get(key);
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| CliError::Config(format!("{key} = '{v}' is not a finite number")))
    }

    fn int(&self, key: &str) -> CliResult<u64> {
        let v = self.get(key);
        v.parse::<u64>()
            .map_err(|_| CliError::Config(format!("{key} = '{v}' is not a non-negative integer")))
    }

    fn auto_num(&self, key: &str) -> CliResult<Option<f64>> {
        if self.get(key) == "auto" {
            Ok(None)
        } else {
            self.num(key).map(Some)
        }
    }

    fn flag(&self, key: &str) -> CliResult<bool> {
        match self.get(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            v => Err(CliError::Config(format!("{key} = '{v}' is not a boolean"))),
        }
    }

    /// Parses `start:stop:step` (inclusive) or a comma-separated list; must be
    /// non-empty and strictly increasing.
    pub fn grid(&self, key: &str) -> CliResult<Vec<f64>> {
        parse_grid(self.get(key)).map_err(|e| CliError::Config(format!("{key}: {e}")))
    }
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("'{s}' is not a finite number"))
    };
    let values: Vec<f64> = if text.is_empty() {
        Vec::new()
    } else if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err("range grid must be start:stop:step".into());
        }
        let (a, b, s) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if s <= 0.0 {
            return Err("range step must be positive".into());
        }
        let n = ((b - a) / s + 1e-9).floor();
        if n < 0.0 {
            Vec::new()
        } else {
            (0..=n as usize).map(|k| a + s * k as f64).collect()
        }
    } else {
        text.split(',').map(num).collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err("grid is empty".into());
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err("grid must be strictly increasing".into());
    }
    Ok(values)
}

/// Typed view of a resolved configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub raw: RawConfig,
    pub led: LedGeometry,
    pub users: usize,
    pub noma: NomaConfig,
    pub noise: NoiseConfig,
    pub oma_mode: OmaMode,
    pub mode: Option<FeedbackMode>,
    pub trials: Option<u64>,
    pub seed: u64,
    pub workers: Option<usize>,
    pub power_mismatch: Option<f64>,
    d_range: (f64, f64),
    mean_range: (Option<f64>, Option<f64>),
    deviation: f64,
    coefficients: (f64, f64),
    explicit_thresholds: (Option<f64>, Option<f64>),
}

impl Experiment {
    pub fn from_raw(raw: RawConfig) -> CliResult<Self> {
        let led = LedGeometry::new(
            raw.num("ell")?,
            raw.num("phi_hpbw_deg")?.to_radians(),
            raw.num("area_r")?,
            raw.num("fov_deg")?.to_radians(),
        )?;
        let mode = match raw.get("mode") {
            "auto" => None,
            m => Some(m.parse::<FeedbackMode>()?),
        };
        let oma_mode: OmaMode = raw.get("oma_mode").parse()?;
        let noise = NoiseConfig::new(raw.num("sigma_d")?, raw.num("sigma_phi_deg")?.to_radians())?;
        let trials = match raw.get("trials") {
            "auto" => None,
            _ => Some(raw.int("trials")?),
        };
        let workers = match raw.get("workers") {
            "auto" => None,
            _ => Some(raw.int("workers")? as usize),
        };
        let mut noma = NomaConfig {
            beta_weak: raw.num("beta_weak")?,
            beta_strong: raw.num("beta_strong")?,
            rate_weak: raw.num("rate_weak")?,
            rate_strong: raw.num("rate_strong")?,
            snr: db_to_linear(raw.num("snr_db")?),
            weak_rank: raw.int("weak_rank")? as usize,
            strong_rank: raw.int("strong_rank")? as usize,
            thresholds: FeedbackThresholds { d_th: 0.0, theta_th: 0.0 },
            feedback_mode: FeedbackMode::FullCsi,
        };
        let power_mismatch = noma.power_sum_mismatch();
        if power_mismatch.is_some() && raw.flag("normalize_power")? {
            noma = noma.normalized();
        }
        let exp = Self {
            led,
            users: raw.int("users")? as usize,
            noma,
            noise,
            oma_mode,
            mode,
            trials,
            seed: raw.int("seed")?,
            workers,
            power_mismatch,
            d_range: (raw.num("d_min")?, raw.num("d_max")?),
            mean_range: (
                raw.auto_num("mean_angle_min_deg")?,
                raw.auto_num("mean_angle_max_deg")?,
            ),
            deviation: raw.num("max_deviation_deg")?,
            coefficients: (raw.num("c_dth")?, raw.num("c_theta")?),
            explicit_thresholds: (raw.auto_num("d_th")?, raw.auto_num("theta_th_deg")?),
            raw,
        };
        // surface parameter errors before any work starts
        exp.scenario(exp.mode.unwrap_or(FeedbackMode::FullCsi))?;
        Ok(exp)
    }

    pub fn coefficients(&self) -> (f64, f64) {
        self.coefficients
    }

    pub fn max_deviation_deg(&self) -> f64 {
        self.deviation
    }

    /// Mobility model at a given deviation; an `auto` mean range spans
    /// `[dev, 180 - dev]`.
    pub fn model_at(&self, dev_deg: f64) -> CliResult<MobilityModel> {
        let lo = self.mean_range.0.unwrap_or(dev_deg);
        let hi = self.mean_range.1.unwrap_or(180.0 - dev_deg);
        Ok(MobilityModel::new(
            self.d_range.0,
            self.d_range.1,
            lo.to_radians(),
            hi.to_radians(),
            dev_deg.to_radians(),
        )?)
    }

    pub fn model(&self) -> CliResult<MobilityModel> {
        self.model_at(self.deviation)
    }

    /// Thresholds from explicit values where given, coefficients otherwise.
    pub fn thresholds(&self, model: &MobilityModel, c: (f64, f64)) -> CliResult<FeedbackThresholds> {
        let from_c = FeedbackThresholds::from_coefficients(c.0, c.1, model, &self.led)?;
        let d_th = self.explicit_thresholds.0.unwrap_or(from_c.d_th);
        let theta = self.explicit_thresholds.1.map(f64::to_radians).unwrap_or(from_c.theta_th);
        Ok(FeedbackThresholds::new(d_th, theta, model, &self.led)?)
    }

    pub fn scenario_with(&self, mode: FeedbackMode, dev_deg: f64, c: (f64, f64)) -> CliResult<Scenario> {
        let model = self.model_at(dev_deg)?;
        let thresholds = self.thresholds(&model, c)?;
        let noma = NomaConfig {
            thresholds,
            feedback_mode: mode,
            ..self.noma
        };
        Ok(Scenario::new(model, self.led, self.users, noma)?)
    }

    pub fn scenario(&self, mode: FeedbackMode) -> CliResult<Scenario> {
        self.scenario_with(mode, self.deviation, self.coefficients)
    }

    pub fn mode_or(&self, fallback: FeedbackMode) -> FeedbackMode {
        self.mode.unwrap_or(fallback)
    }

    pub fn noisy_modes(&self) -> CliResult<Vec<FeedbackMode>> {
        if let Some(m) = self.mode {
            return Ok(vec![m]);
        }
        self.raw
            .get("noisy_modes")
            .split(',')
            .map(|s| s.parse::<FeedbackMode>().map_err(CliError::from))
            .collect()
    }

    /// Settings for a run; `default_trials` applies when `trials = auto`.
    /// `min_trials` enforces the floor on estimate subcommands.
    pub fn settings(&self, default_trials: u64, min_trials: u64) -> CliResult<McSettings> {
        let trials = self.trials.unwrap_or(default_trials);
        if trials < min_trials {
            return Err(CliError::Config(format!(
                "trials = {trials} below the minimum of {min_trials} for this subcommand"
            )));
        }
        let mut s = McSettings::new(trials, self.seed);
        if let Some(w) = self.workers {
            if w == 0 {
                return Err(CliError::Config("workers must be positive".into()));
            }
            s = s.with_workers(w);
        }
        Ok(s)
    }

    pub fn grid(&self, key: &str) -> CliResult<Vec<f64>> {
        self.raw.grid(key)
    }

    pub fn count(&self, key: &str) -> CliResult<usize> {
        let n = self.raw.int(key)? as usize;
        if n < 2 {
            return Err(CliError::Config(format!("{key} must be at least 2")));
        }
        Ok(n)
    }
}
