//! SINR, rate thresholds, outage pairs and sum rates for two-user NOMA and
//! the time-division OMA baseline.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use crate::analytic::{
    cdf_strong_twobit_inst, cdf_strong_twobit_mean, cdf_sq_unordered, cdf_weak_twobit_inst,
    cdf_weak_twobit_mean, ordered_from_unordered, FeedbackThresholds,
};
use crate::error::{invalid, Result};
use crate::geometry::LedGeometry;
use crate::stochastic::{success_probability, MobilityModel, NonzeroCount};

/// Which information users report and how the pair is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeedbackMode {
    FullCsi,
    MeanAngle,
    DistanceOnly,
    TwoBitInstantaneous,
    TwoBitMean,
    OneBitDistance,
}

impl FeedbackMode {
    pub const ALL: [FeedbackMode; 6] = [
        FeedbackMode::FullCsi,
        FeedbackMode::MeanAngle,
        FeedbackMode::DistanceOnly,
        FeedbackMode::TwoBitInstantaneous,
        FeedbackMode::TwoBitMean,
        FeedbackMode::OneBitDistance,
    ];

    /// Group-based modes pick one random member from a weak and a strong set.
    pub fn is_group(self) -> bool {
        matches!(
            self,
            FeedbackMode::TwoBitInstantaneous | FeedbackMode::TwoBitMean | FeedbackMode::OneBitDistance
        )
    }

    pub fn has_analytic_law(self) -> bool {
        matches!(
            self,
            FeedbackMode::FullCsi | FeedbackMode::TwoBitInstantaneous | FeedbackMode::TwoBitMean
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            FeedbackMode::FullCsi => "full-csi",
            FeedbackMode::MeanAngle => "mean-angle",
            FeedbackMode::DistanceOnly => "distance-only",
            FeedbackMode::TwoBitInstantaneous => "two-bit-inst",
            FeedbackMode::TwoBitMean => "two-bit-mean",
            FeedbackMode::OneBitDistance => "one-bit-distance",
        }
    }
}

impl fmt::Display for FeedbackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeedbackMode {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        FeedbackMode::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| invalid(format!("unknown feedback mode '{s}'")))
    }
}

/// How the OMA outage threshold is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OmaMode {
    /// `(2^{2R} - 1) 2pi/e / gamma`.
    PaperLiteral,
    /// Each user holds the channel for `1/L` of the time, `L = 2`.
    #[default]
    TimeShared,
}

impl OmaMode {
    pub fn name(self) -> &'static str {
        match self {
            OmaMode::PaperLiteral => "paper-literal",
            OmaMode::TimeShared => "time-shared",
        }
    }
}

impl fmt::Display for OmaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OmaMode {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "paper-literal" | "literal" => Ok(OmaMode::PaperLiteral),
            "time-shared" => Ok(OmaMode::TimeShared),
            _ => Err(invalid(format!("unknown OMA mode '{s}'"))),
        }
    }
}

/// Number of OMA slots (one per scheduled user).
pub const OMA_SLOTS: u32 = 2;

/// Power split, rate targets, SNR and pairing rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NomaConfig {
    pub beta_weak: f64,
    pub beta_strong: f64,
    pub rate_weak: f64,
    pub rate_strong: f64,
    /// Linear electrical transmit SNR.
    pub snr: f64,
    pub weak_rank: usize,
    pub strong_rank: usize,
    pub thresholds: FeedbackThresholds,
    pub feedback_mode: FeedbackMode,
}

impl NomaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_weak > self.beta_strong && self.beta_strong > 0.0) {
            return Err(invalid("power coefficients must satisfy beta_weak > beta_strong > 0"));
        }
        if !(self.rate_weak > 0.0 && self.rate_strong > 0.0) {
            return Err(invalid("target rates must be positive"));
        }
        if !(self.snr > 0.0) {
            return Err(invalid("SNR must be positive"));
        }
        if !(self.weak_rank >= 1 && self.weak_rank < self.strong_rank) {
            return Err(invalid("ranks must satisfy 1 <= i < j"));
        }
        Ok(())
    }

    pub fn with_snr(&self, snr: f64) -> Self {
        Self { snr, ..*self }
    }

    pub fn with_mode(&self, feedback_mode: FeedbackMode) -> Self {
        Self { feedback_mode, ..*self }
    }

    /// `|beta_weak^2 + beta_strong^2 - 1|` when it exceeds `1e-6`.
    pub fn power_sum_mismatch(&self) -> Option<f64> {
        let gap = (self.beta_weak.powi(2) + self.beta_strong.powi(2) - 1.0).abs();
        (gap > 1e-6).then_some(gap)
    }

    /// Rescales the coefficients so that their squares sum to one.
    pub fn normalized(&self) -> Self {
        let s = (self.beta_weak.powi(2) + self.beta_strong.powi(2)).sqrt();
        Self {
            beta_weak: self.beta_weak / s,
            beta_strong: self.beta_strong / s,
            ..*self
        }
    }
}

/// Everything needed to evaluate one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub model: MobilityModel,
    pub led: LedGeometry,
    pub users: usize,
    pub noma: NomaConfig,
}

impl Scenario {
    pub fn new(model: MobilityModel, led: LedGeometry, users: usize, noma: NomaConfig) -> Result<Self> {
        noma.validate()?;
        if noma.strong_rank > users {
            return Err(invalid(format!(
                "strong rank {} exceeds the number of users {users}",
                noma.strong_rank
            )));
        }
        Ok(Self { model, led, users, noma })
    }

    pub fn with_noma(&self, noma: NomaConfig) -> Self {
        Self { noma, ..*self }
    }

    pub fn nonzero_count(&self) -> Result<NonzeroCount> {
        let p = success_probability(&self.model, &self.led)?;
        NonzeroCount::new(self.users, p, self.noma.strong_rank)
    }
}

pub fn achievable_rate(sinr: f64) -> f64 {
    0.5 * (1.0 + E / (2.0 * PI) * sinr).log2()
}

/// SINR of the message for `target` at a receiver with gain `h`, with the
/// messages of `stronger` users treated as interference.
pub fn sinr_cross(h: f64, betas: &[f64], target: usize, stronger: &[usize], snr: f64) -> f64 {
    let h2 = h * h;
    if h2 == 0.0 {
        return 0.0;
    }
    let interference: f64 = stronger.iter().map(|&k| betas[k].powi(2)).sum();
    h2 * betas[target].powi(2) / (h2 * interference + 1.0 / snr)
}

/// SINR of a user decoding its own message after SIC.
pub fn sinr_own(h: f64, betas: &[f64], index: usize, stronger: &[usize], snr: f64) -> f64 {
    sinr_cross(h, betas, index, stronger, snr)
}

/// SINR needed to support `rate`: `(2^{2R} - 1) 2pi/e`.
pub fn epsilon_threshold(rate: f64) -> f64 {
    (2f64.powf(2.0 * rate) - 1.0) * 2.0 * PI / E
}

/// Squared-gain outage thresholds of the weak and strong users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaThresholds {
    pub weak: f64,
    pub strong: f64,
    pub feasible: bool,
}

pub fn eta_thresholds(cfg: &NomaConfig) -> EtaThresholds {
    let eps_i = epsilon_threshold(cfg.rate_weak);
    let eps_j = epsilon_threshold(cfg.rate_strong);
    let (bi2, bj2) = (cfg.beta_weak.powi(2), cfg.beta_strong.powi(2));
    let denom = bi2 - bj2 * eps_i;
    if denom <= 0.0 {
        return EtaThresholds {
            weak: f64::INFINITY,
            strong: f64::INFINITY,
            feasible: false,
        };
    }
    let weak = eps_i / cfg.snr / denom;
    let strong = weak.max(eps_j / cfg.snr / bj2);
    EtaThresholds {
        weak,
        strong,
        feasible: true,
    }
}

/// Squared-gain threshold of a single user served alone in OMA.
pub fn oma_threshold(rate: f64, snr: f64, mode: OmaMode) -> f64 {
    let eff = match mode {
        OmaMode::PaperLiteral => rate,
        OmaMode::TimeShared => rate * OMA_SLOTS as f64,
    };
    epsilon_threshold(eff) / snr
}

/// Evaluates the scheduled weak and strong CDFs at the given squared-gain levels.
pub fn scheduled_cdfs(scenario: &Scenario, x_weak: f64, x_strong: f64) -> Result<(f64, f64)> {
    let cfg = &scenario.noma;
    let (m, l) = (&scenario.model, &scenario.led);
    let th = &cfg.thresholds;
    let cap = |x: f64| if x.is_finite() { Some(x) } else { None };
    match cfg.feedback_mode {
        FeedbackMode::FullCsi => {
            let nz = scenario.nonzero_count()?;
            let eval = |x: f64, k: usize| -> Result<f64> {
                match cap(x) {
                    None => Ok(1.0),
                    Some(x) => ordered_from_unordered(cdf_sq_unordered(x, m, l)?, k, &nz),
                }
            };
            Ok((eval(x_weak, cfg.weak_rank)?, eval(x_strong, cfg.strong_rank)?))
        }
        FeedbackMode::TwoBitInstantaneous => Ok((
            cap(x_weak).map_or(Ok(1.0), |x| cdf_weak_twobit_inst(x, th, m, l))?,
            cap(x_strong).map_or(Ok(1.0), |x| cdf_strong_twobit_inst(x, th, m, l))?,
        )),
        FeedbackMode::TwoBitMean => Ok((
            cap(x_weak).map_or(Ok(1.0), |x| cdf_weak_twobit_mean(x, th, m, l))?,
            cap(x_strong).map_or(Ok(1.0), |x| cdf_strong_twobit_mean(x, th, m, l))?,
        )),
        other => Err(invalid(format!("no closed-form law for feedback mode {other}"))),
    }
}

/// Analytic outage probabilities `(weak, strong)` of the NOMA pair.
pub fn outage_pair_analytic(scenario: &Scenario) -> Result<(f64, f64)> {
    let eta = eta_thresholds(&scenario.noma);
    if !eta.feasible {
        return Ok((1.0, 1.0));
    }
    scheduled_cdfs(scenario, eta.weak, eta.strong)
}

pub fn sum_rate_noma(p_out_weak: f64, p_out_strong: f64, cfg: &NomaConfig) -> f64 {
    (1.0 - p_out_weak) * cfg.rate_weak + (1.0 - p_out_strong) * cfg.rate_strong
}

/// Analytic OMA sum rate for the users selected by the configured mode.
pub fn sum_rate_oma(scenario: &Scenario, mode: OmaMode) -> Result<f64> {
    let cfg = &scenario.noma;
    let (fw, fs) = scheduled_cdfs(
        scenario,
        oma_threshold(cfg.rate_weak, cfg.snr, mode),
        oma_threshold(cfg.rate_strong, cfg.snr, mode),
    )?;
    Ok((1.0 - fw) * cfg.rate_weak + (1.0 - fs) * cfg.rate_strong)
}

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
