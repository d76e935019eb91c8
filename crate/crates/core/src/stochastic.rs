//! User mobility model: sampling, the unconditional vertical-angle CDF, and
//! the distribution of the number of users with a nonzero channel.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::geometry::{LedGeometry, UserState};
use crate::numerics::{integrate_1d, QuadratureSpec};

/// Uniform distance / mean-angle / deviation model (all angles in radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityModel {
    pub d_min: f64,
    pub d_max: f64,
    pub mean_angle_min: f64,
    pub mean_angle_max: f64,
    pub max_deviation: f64,
}

impl MobilityModel {
    pub fn new(
        d_min: f64,
        d_max: f64,
        mean_angle_min: f64,
        mean_angle_max: f64,
        max_deviation: f64,
    ) -> Result<Self> {
        if !(d_min >= 0.0 && d_max >= d_min && d_max.is_finite()) {
            return Err(invalid(format!(
                "distance range [{d_min}, {d_max}] must satisfy 0 <= d_min <= d_max"
            )));
        }
        if !(mean_angle_max >= mean_angle_min) {
            return Err(invalid("mean_angle_min must not exceed mean_angle_max"));
        }
        if !(max_deviation >= 0.0) {
            return Err(invalid("max_deviation must be non-negative"));
        }
        let tol = 1e-12;
        if mean_angle_min - max_deviation < -tol || mean_angle_max + max_deviation > PI + tol {
            return Err(invalid(
                "instantaneous vertical angle must stay within [0, pi]",
            ));
        }
        Ok(Self {
            d_min,
            d_max,
            mean_angle_min,
            mean_angle_max,
            max_deviation,
        })
    }

    /// Mean angle uniform on `[dev, pi - dev]`, so the instantaneous angle spans `[0, pi]`.
    pub fn full_span(d_min: f64, d_max: f64, max_deviation: f64) -> Result<Self> {
        Self::new(d_min, d_max, max_deviation, PI - max_deviation, max_deviation)
    }

    pub fn delta_d(&self) -> f64 {
        self.d_max - self.d_min
    }

    pub fn delta_mean(&self) -> f64 {
        self.mean_angle_max - self.mean_angle_min
    }

    /// Abscissae where the vertical-angle CDF changes branch.
    pub fn angle_kinks(&self) -> [f64; 4] {
        let dev = self.max_deviation;
        [
            self.mean_angle_min - dev,
            self.mean_angle_min + dev,
            self.mean_angle_max - dev,
            self.mean_angle_max + dev,
        ]
    }

    pub fn cdf_vertical_angle(&self, x: f64) -> f64 {
        cdf_vertical_angle(x, self)
    }

    /// CDF of the mean vertical angle.
    pub fn cdf_mean_angle(&self, x: f64) -> f64 {
        uniform_cdf(x, self.mean_angle_min, self.mean_angle_max)
    }

    /// CDF of the instantaneous angle given its mean.
    pub fn cdf_given_mean(&self, x: f64, mean_angle: f64) -> f64 {
        uniform_cdf(x, mean_angle - self.max_deviation, mean_angle + self.max_deviation)
    }
}

/// CDF of `U[lo, hi]`, a unit step at `lo` when the interval is degenerate.
pub(crate) fn uniform_cdf(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        0.0
    } else if x >= hi {
        1.0
    } else {
        (x - lo) / (hi - lo)
    }
}

/// Draws `d`, then the mean angle, then the deviation, in that order.
pub fn sample_user<R: Rng + ?Sized>(model: &MobilityModel, rng: &mut R) -> UserState {
    let u_d: f64 = rng.random();
    let u_mean: f64 = rng.random();
    let u_dev: f64 = rng.random();
    let dist = model.d_min + u_d * model.delta_d();
    let mean_angle = model.mean_angle_min + u_mean * model.delta_mean();
    let inst_angle = mean_angle + (2.0 * u_dev - 1.0) * model.max_deviation;
    UserState {
        dist,
        mean_angle,
        inst_angle,
    }
}

/// Independent random stream number `stream` derived from a root seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Unconditional CDF of the instantaneous vertical angle.
///
/// Piecewise: quadratic ramps of width `2 dev` at both ends joined by either
/// the uniform CDF of the mean (`dev <= span/2`) or a linear section centred
/// on the midpoint of the mean range (`dev > span/2`).
pub fn cdf_vertical_angle(x: f64, model: &MobilityModel) -> f64 {
    let dev = model.max_deviation;
    let (lo, hi) = (model.mean_angle_min, model.mean_angle_max);
    let span = model.delta_mean();
    if dev == 0.0 {
        return uniform_cdf(x, lo, hi);
    }
    if span == 0.0 {
        return uniform_cdf(x, lo - dev, lo + dev);
    }
    if x >= hi + dev {
        return 1.0;
    }
    if x < lo - dev {
        return 0.0;
    }
    let zeta_min = (lo + dev).min(hi - dev);
    let zeta_max = (lo + dev).max(hi - dev);
    let value = if x <= zeta_min {
        (x + dev - lo).powi(2) / (4.0 * dev * span)
    } else if x >= zeta_max {
        1.0 - (hi - x + dev).powi(2) / (4.0 * dev * span)
    } else if lo + dev <= hi - dev {
        (x - lo) / span
    } else {
        (x + dev - 0.5 * (lo + hi)) / (2.0 * dev)
    };
    value.clamp(0.0, 1.0)
}

/// `F(c + y) - F(c - y)` with `c = pi - atan(ell / r)`: the probability that
/// the incidence angle at distance `r` satisfies `|theta| <= y`.
pub fn delta_f_phi(r: f64, y: f64, model: &MobilityModel, led: &LedGeometry) -> f64 {
    let c = PI - led.ell.atan2(r);
    (cdf_vertical_angle(c + y, model) - cdf_vertical_angle(c - y, model)).max(0.0)
}

/// Distance at which `pi - atan(ell / r)` equals `angle`, if any.
pub fn distance_for_center(angle: f64, ell: f64) -> Option<f64> {
    let t = PI - angle;
    if t > 0.0 && t <= FRAC_PI_2 {
        Some((ell / t.tan()).max(0.0))
    } else {
        None
    }
}

/// Distances where `pi - atan(ell/r) +/- offset` crosses a kink of the angle CDF.
pub fn center_kink_distances(offsets: &[f64], model: &MobilityModel, led: &LedGeometry) -> Vec<f64> {
    let mut out = Vec::new();
    for &kink in &model.angle_kinks() {
        for &off in offsets {
            for c in [kink - off, kink + off] {
                if let Some(r) = distance_for_center(c, led.ell) {
                    out.push(r);
                }
            }
        }
    }
    out
}

/// Probability that a user's incidence angle lies inside the field of view.
pub fn success_probability(model: &MobilityModel, led: &LedGeometry) -> Result<f64> {
    let fov = led.theta_fov;
    if model.delta_d() == 0.0 {
        return Ok(delta_f_phi(model.d_min, fov, model, led));
    }
    let spec = QuadratureSpec::default().with_breakpoints(center_kink_distances(&[fov], model, led));
    let integral = integrate_1d(
        |r| delta_f_phi(r, fov, model, led),
        model.d_min,
        model.d_max,
        &spec,
    )?;
    Ok((integral / model.delta_d()).clamp(0.0, 1.0))
}

/// Binomial law of the number of users with a nonzero channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonzeroCount {
    pub total_users: usize,
    pub success_prob: f64,
    /// Minimum nonzero users for NOMA to start.
    pub k_min: usize,
}

impl NonzeroCount {
    pub fn new(total_users: usize, success_prob: f64, k_min: usize) -> Result<Self> {
        if total_users == 0 {
            return Err(invalid("at least one user is required"));
        }
        if !(0.0..=1.0).contains(&success_prob) {
            return Err(invalid(format!("success probability {success_prob} outside [0,1]")));
        }
        if k_min > total_users {
            return Err(invalid(format!("k_min {k_min} exceeds K = {total_users}")));
        }
        Ok(Self {
            total_users,
            success_prob,
            k_min,
        })
    }

    /// `Pr(K_nz >= k_min)`.
    pub fn tail_mass(&self) -> f64 {
        (self.k_min..=self.total_users)
            .map(|k| binomial_pmf(self.total_users, k, self.success_prob))
            .sum()
    }
}

pub(crate) fn ln_choose(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

pub(crate) fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}

/// Binomial PMF of the nonzero-user count.
pub fn pmf_nonzero_count(k: usize, nz: &NonzeroCount) -> f64 {
    binomial_pmf(nz.total_users, k, nz.success_prob)
}

/// PMF of the nonzero-user count conditioned on `K_nz >= k_min`.
pub fn pmf_nonzero_count_truncated(k: usize, nz: &NonzeroCount) -> Result<f64> {
    let tail = nz.tail_mass();
    if tail <= 0.0 {
        return Err(Error::Degenerate(format!(
            "Pr(K_nz >= {}) is zero",
            nz.k_min
        )));
    }
    if k < nz.k_min {
        return Ok(0.0);
    }
    Ok(pmf_nonzero_count(k, nz) / tail)
}
