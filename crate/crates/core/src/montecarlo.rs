//! Trial-level simulation of user drops, feedback, scheduling and outage.
//!
//! Trial `t` draws from `stream_rng(seed, t)`: first the `K` users (three
//! uniforms each), then the feedback noise when enabled, then the group
//! picks. Trials run in parallel; every aggregate is built from integer
//! counts or from per-chunk vectors concatenated in trial order, so results
//! do not depend on the worker count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{dc_gain, mean_dc_gain, UserState};
use crate::rates::{
    epsilon_threshold, oma_threshold, sinr_cross, sinr_own, FeedbackMode, NomaConfig, OmaMode,
    Scenario,
};
use crate::stochastic::{sample_user, stream_rng, MobilityModel};

const CHUNK: u64 = 4096;

/// Gaussian perturbation of the reported distance and angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub sigma_d: f64,
    /// Standard deviation applied to both the instantaneous and the mean angle, radians.
    pub sigma_phi: f64,
    pub enabled: bool,
}

impl NoiseConfig {
    pub fn new(sigma_d: f64, sigma_phi: f64) -> Result<Self> {
        if !(sigma_d >= 0.0 && sigma_phi >= 0.0) {
            return Err(invalid("noise standard deviations must be non-negative"));
        }
        Ok(Self {
            sigma_d,
            sigma_phi,
            enabled: true,
        })
    }

    pub fn disabled() -> Self {
        Self {
            sigma_d: 0.0,
            sigma_phi: 0.0,
            enabled: false,
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::disabled()
    }
}

/// Observed copy of `user`: `d + e_d` (floored at zero), `phi + e_phi`, `mean + e_phi'`.
pub fn apply_noise<R: Rng + ?Sized>(user: &UserState, noise: &NoiseConfig, rng: &mut R) -> UserState {
    if !noise.enabled {
        return *user;
    }
    let mut draw = |sigma: f64| {
        if sigma > 0.0 {
            Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
        } else {
            0.0
        }
    };
    let dist = (user.dist + draw(noise.sigma_d)).max(0.0);
    let inst_angle = user.inst_angle + draw(noise.sigma_phi);
    let mean_angle = user.mean_angle + draw(noise.sigma_phi);
    UserState {
        dist,
        mean_angle,
        inst_angle,
    }
}

/// Result of one transmission period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub scheduled: bool,
    pub weak_user: Option<UserState>,
    pub strong_user: Option<UserState>,
    /// True DC gains of the selected users (zero when unscheduled).
    pub gain_weak: f64,
    pub gain_strong: f64,
    /// Users whose true gain is nonzero.
    pub nonzero_users: usize,
}

impl TrialOutcome {
    fn unscheduled(nonzero_users: usize) -> Self {
        Self {
            scheduled: false,
            weak_user: None,
            strong_user: None,
            gain_weak: 0.0,
            gain_strong: 0.0,
            nonzero_users,
        }
    }

    /// NOMA outage flags `(weak, strong)` from the true SINRs; `None` if unscheduled.
    pub fn outage(&self, cfg: &NomaConfig) -> Option<(bool, bool)> {
        if !self.scheduled {
            return None;
        }
        let betas = [cfg.beta_weak, cfg.beta_strong];
        let eps_i = epsilon_threshold(cfg.rate_weak);
        let eps_j = epsilon_threshold(cfg.rate_strong);
        let weak = sinr_cross(self.gain_weak, &betas, 0, &[1], cfg.snr) <= eps_i;
        let strong = sinr_cross(self.gain_strong, &betas, 0, &[1], cfg.snr) <= eps_i
            || sinr_own(self.gain_strong, &betas, 1, &[], cfg.snr) <= eps_j;
        Some((weak, strong))
    }

    /// OMA outage flags for the same pair served alone in turn.
    pub fn oma_outage(&self, cfg: &NomaConfig, mode: OmaMode) -> Option<(bool, bool)> {
        if !self.scheduled {
            return None;
        }
        Some((
            self.gain_weak.powi(2) <= oma_threshold(cfg.rate_weak, cfg.snr, mode),
            self.gain_strong.powi(2) <= oma_threshold(cfg.rate_strong, cfg.snr, mode),
        ))
    }
}

fn draw_users<R: Rng + ?Sized>(users: usize, model: &MobilityModel, rng: &mut R) -> Vec<UserState> {
    (0..users).map(|_| sample_user(model, rng)).collect()
}

fn observe<R: Rng + ?Sized>(users: &[UserState], noise: &NoiseConfig, rng: &mut R) -> Vec<UserState> {
    users.iter().map(|u| apply_noise(u, noise, rng)).collect()
}

/// One period of individual scheduling (full CSI, mean angle or distance ranking).
pub fn run_individual_trial<R: Rng + ?Sized>(
    scenario: &Scenario,
    noise: &NoiseConfig,
    rng: &mut R,
) -> TrialOutcome {
    let (cfg, led) = (&scenario.noma, &scenario.led);
    let users = draw_users(scenario.users, &scenario.model, rng);
    let gains: Vec<f64> = users.iter().map(|u| dc_gain(u, led)).collect();
    let nonzero = gains.iter().filter(|&&g| g > 0.0).count();
    let seen = observe(&users, noise, rng);
    let mut ranked: Vec<(f64, usize)> = match cfg.feedback_mode {
        FeedbackMode::FullCsi => seen.iter().map(|u| dc_gain(u, led)).enumerate().map(|(k, g)| (g, k)).collect(),
        FeedbackMode::MeanAngle => seen
            .iter()
            .map(|u| mean_dc_gain(u.dist, u.mean_angle, led))
            .enumerate()
            .map(|(k, g)| (g, k))
            .collect(),
        FeedbackMode::DistanceOnly => seen.iter().enumerate().map(|(k, u)| (-u.dist, k)).collect(),
        _ => return TrialOutcome::unscheduled(nonzero),
    };
    if cfg.feedback_mode != FeedbackMode::DistanceOnly {
        ranked.retain(|&(g, _)| g > 0.0);
    }
    let (i, j) = (cfg.weak_rank, cfg.strong_rank);
    // the transmitter only sees the reported metric, so it schedules whenever
    // that metric yields j candidates
    if ranked.len() < j {
        return TrialOutcome::unscheduled(nonzero);
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (wk, sk) = (ranked[i - 1].1, ranked[j - 1].1);
    TrialOutcome {
        scheduled: true,
        weak_user: Some(users[wk]),
        strong_user: Some(users[sk]),
        gain_weak: gains[wk],
        gain_strong: gains[sk],
        nonzero_users: nonzero,
    }
}

/// One period of group scheduling from one- or two-bit feedback.
pub fn run_group_trial<R: Rng + ?Sized>(scenario: &Scenario, noise: &NoiseConfig, rng: &mut R) -> TrialOutcome {
    let (cfg, led) = (&scenario.noma, &scenario.led);
    let th = &cfg.thresholds;
    let fov = led.theta_fov;
    let users = draw_users(scenario.users, &scenario.model, rng);
    let gains: Vec<f64> = users.iter().map(|u| dc_gain(u, led)).collect();
    let nonzero = gains.iter().filter(|&&g| g > 0.0).count();
    let seen = observe(&users, noise, rng);
    let mut weak = Vec::new();
    let mut strong = Vec::new();
    for (k, u) in seen.iter().enumerate() {
        let far = u.dist > th.d_th;
        let (is_weak, is_strong) = match cfg.feedback_mode {
            FeedbackMode::OneBitDistance => (far, !far),
            FeedbackMode::TwoBitInstantaneous | FeedbackMode::TwoBitMean => {
                let theta = if cfg.feedback_mode == FeedbackMode::TwoBitMean {
                    u.mean_incidence(led)
                } else {
                    u.incidence(led)
                }
                .abs();
                (
                    far && theta > th.theta_th && theta <= fov,
                    !far && theta <= th.theta_th,
                )
            }
            _ => return TrialOutcome::unscheduled(nonzero),
        };
        if is_weak {
            weak.push(k);
        } else if is_strong {
            strong.push(k);
        }
    }
    if weak.is_empty() || strong.is_empty() {
        return TrialOutcome::unscheduled(nonzero);
    }
    let wk = weak[rng.random_range(0..weak.len())];
    let sk = strong[rng.random_range(0..strong.len())];
    TrialOutcome {
        scheduled: true,
        weak_user: Some(users[wk]),
        strong_user: Some(users[sk]),
        gain_weak: gains[wk],
        gain_strong: gains[sk],
        nonzero_users: nonzero,
    }
}

/// Dispatches on the configured feedback mode.
pub fn run_trial<R: Rng + ?Sized>(scenario: &Scenario, noise: &NoiseConfig, rng: &mut R) -> TrialOutcome {
    if scenario.noma.feedback_mode.is_group() {
        run_group_trial(scenario, noise, rng)
    } else {
        run_individual_trial(scenario, noise, rng)
    }
}

/// Trial count, root seed and parallelism of one simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub trials: u64,
    pub seed: u64,
    /// `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub noise: NoiseConfig,
}

impl McSettings {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            workers: None,
            noise: NoiseConfig::disabled(),
        }
    }

    pub fn with_noise(self, noise: NoiseConfig) -> Self {
        Self { noise, ..self }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self {
            workers: Some(workers),
            ..self
        }
    }
}

/// Per-chunk state that can absorb the chunk that follows it.
pub trait Merge: Send {
    fn merge(&mut self, later: Self);
}

impl<T: Send> Merge for Vec<T> {
    fn merge(&mut self, later: Self) {
        self.extend(later);
    }
}

/// Runs `step` for every trial index with its own random stream and folds
/// the chunk accumulators in trial order.
pub fn run_trials<A, I, S>(settings: &McSettings, init: I, step: S) -> Result<A>
where
    A: Merge,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, &mut ChaCha8Rng) + Sync,
{
    if settings.trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    let chunks = settings.trials.div_ceil(CHUNK);
    let work = || -> A {
        let parts: Vec<A> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                let end = ((c + 1) * CHUNK).min(settings.trials);
                for t in c * CHUNK..end {
                    let mut rng = stream_rng(settings.seed, t);
                    step(&mut acc, &mut rng);
                }
                acc
            })
            .collect();
        let mut it = parts.into_iter();
        let mut total = it.next().unwrap_or_else(&init);
        for p in it {
            total.merge(p);
        }
        total
    };
    match settings.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| invalid(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct SuccessCounts {
    weak: u64,
    strong: u64,
    both: u64,
}

impl SuccessCounts {
    fn add(&mut self, outage: (bool, bool)) {
        let (w, s) = (!outage.0, !outage.1);
        self.weak += w as u64;
        self.strong += s as u64;
        self.both += (w && s) as u64;
    }

    fn merge(&mut self, o: &Self) {
        self.weak += o.weak;
        self.strong += o.strong;
        self.both += o.both;
    }
}

#[derive(Debug, Clone, Default)]
struct SweepCounts {
    trials: u64,
    scheduled: u64,
    noma: Vec<SuccessCounts>,
    oma: Vec<SuccessCounts>,
}

impl Merge for SweepCounts {
    fn merge(&mut self, later: Self) {
        self.trials += later.trials;
        self.scheduled += later.scheduled;
        for (a, b) in self.noma.iter_mut().zip(&later.noma) {
            a.merge(b);
        }
        for (a, b) in self.oma.iter_mut().zip(&later.oma) {
            a.merge(b);
        }
    }
}

/// Mean and standard error of a per-trial quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Monte Carlo estimates at one SNR, conditioned on a scheduled pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumRatePoint {
    pub snr: f64,
    pub noma: Estimate,
    pub oma: Estimate,
    pub outage_weak: f64,
    pub outage_strong: f64,
    pub scheduled_fraction: f64,
    pub scheduled_trials: u64,
}

fn rate_estimate(c: &SuccessCounts, n: u64, rw: f64, rs: f64) -> Estimate {
    let nf = n as f64;
    let mean = (c.weak as f64 * rw + c.strong as f64 * rs) / nf;
    let second = (c.weak as f64 * rw * rw + c.strong as f64 * rs * rs + 2.0 * c.both as f64 * rw * rs) / nf;
    let stderr = if n > 1 {
        ((second - mean * mean).max(0.0) * nf / (nf - 1.0) / nf).sqrt()
    } else {
        0.0
    };
    Estimate { mean, stderr }
}

/// NOMA and OMA sum rates over a grid of linear SNRs from one set of trials.
pub fn estimate_sum_rates(
    scenario: &Scenario,
    snrs: &[f64],
    oma_mode: OmaMode,
    settings: &McSettings,
) -> Result<Vec<SumRatePoint>> {
    if snrs.is_empty() {
        return Err(invalid("SNR grid is empty"));
    }
    let cfgs: Vec<NomaConfig> = snrs.iter().map(|&g| scenario.noma.with_snr(g)).collect();
    let counts = run_trials(
        settings,
        || SweepCounts {
            noma: vec![SuccessCounts::default(); snrs.len()],
            oma: vec![SuccessCounts::default(); snrs.len()],
            ..Default::default()
        },
        |acc, rng| {
            let out = run_trial(scenario, &settings.noise, rng);
            acc.trials += 1;
            if !out.scheduled {
                return;
            }
            acc.scheduled += 1;
            for (k, cfg) in cfgs.iter().enumerate() {
                acc.noma[k].add(out.outage(cfg).expect("scheduled"));
                acc.oma[k].add(out.oma_outage(cfg, oma_mode).expect("scheduled"));
            }
        },
    )?;
    if counts.scheduled == 0 {
        return Err(Error::Degenerate("no trial produced a scheduled pair".into()));
    }
    let n = counts.scheduled;
    let (rw, rs) = (scenario.noma.rate_weak, scenario.noma.rate_strong);
    Ok(snrs
        .iter()
        .enumerate()
        .map(|(k, &snr)| SumRatePoint {
            snr,
            noma: rate_estimate(&counts.noma[k], n, rw, rs),
            oma: rate_estimate(&counts.oma[k], n, rw, rs),
            outage_weak: 1.0 - counts.noma[k].weak as f64 / n as f64,
            outage_strong: 1.0 - counts.noma[k].strong as f64 / n as f64,
            scheduled_fraction: n as f64 / counts.trials as f64,
            scheduled_trials: n,
        })
        .collect())
}

/// Squared true gains of the selected weak and strong users over scheduled trials.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScheduledGains {
    pub weak: Vec<f64>,
    pub strong: Vec<f64>,
    pub trials: u64,
}

impl Merge for ScheduledGains {
    fn merge(&mut self, later: Self) {
        self.weak.extend(later.weak);
        self.strong.extend(later.strong);
        self.trials += later.trials;
    }
}

pub fn collect_scheduled_gains(scenario: &Scenario, settings: &McSettings) -> Result<ScheduledGains> {
    run_trials(settings, ScheduledGains::default, |acc, rng| {
        let out = run_trial(scenario, &settings.noise, rng);
        acc.trials += 1;
        if out.scheduled {
            acc.weak.push(out.gain_weak.powi(2));
            acc.strong.push(out.gain_strong.powi(2));
        }
    })
}

/// Squared gains of every user with a nonzero channel.
pub fn collect_nonzero_gains(scenario: &Scenario, settings: &McSettings) -> Result<Vec<f64>> {
    run_trials(settings, Vec::new, |acc, rng| {
        for _ in 0..scenario.users {
            let g = dc_gain(&sample_user(&scenario.model, rng), &scenario.led);
            if g > 0.0 {
                acc.push(g * g);
            }
        }
    })
}

/// Instantaneous vertical angles, one per trial.
pub fn collect_vertical_angles(model: &MobilityModel, settings: &McSettings) -> Result<Vec<f64>> {
    run_trials(settings, Vec::new, |acc, rng| {
        acc.push(sample_user(model, rng).inst_angle);
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Histogram(Vec<u64>);

impl Merge for Histogram {
    fn merge(&mut self, later: Self) {
        for (a, b) in self.0.iter_mut().zip(later.0) {
            *a += b;
        }
    }
}

/// Counts of trials with `K_nz = n` for `n = 0..=K`.
pub fn nonzero_count_histogram(scenario: &Scenario, settings: &McSettings) -> Result<Vec<u64>> {
    let k = scenario.users;
    let h = run_trials(
        settings,
        || Histogram(vec![0; k + 1]),
        |acc, rng| {
            let n = (0..k)
                .filter(|_| dc_gain(&sample_user(&scenario.model, rng), &scenario.led) > 0.0)
                .count();
            acc.0[n] += 1;
        },
    )?;
    Ok(h.0)
}
