//! Conditional CDFs of the nonzero squared channel gain: unordered and
//! ordered full-CSI laws, and the weak/strong laws under two-bit feedback
//! built from either the instantaneous or the mean vertical angle.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{invalid, Error, Result};
use crate::geometry::{channel_constant, ChannelConstant, LedGeometry};
use crate::numerics::{integrate_1d, integrate_2d_nested, InnerSupport, QuadratureSpec};
use crate::stochastic::{
    binomial_pmf, center_kink_distances, delta_f_phi, distance_for_center,
    pmf_nonzero_count_truncated, MobilityModel, NonzeroCount,
};

/// Distance and incidence-angle thresholds of the two-bit feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackThresholds {
    pub d_th: f64,
    pub theta_th: f64,
}

impl FeedbackThresholds {
    pub fn new(d_th: f64, theta_th: f64, model: &MobilityModel, led: &LedGeometry) -> Result<Self> {
        if !(d_th >= model.d_min && d_th <= model.d_max) {
            return Err(invalid(format!(
                "d_th = {d_th} outside [{}, {}]",
                model.d_min, model.d_max
            )));
        }
        if !(theta_th >= 0.0 && theta_th <= led.theta_fov) {
            return Err(invalid(format!(
                "theta_th = {theta_th} outside [0, {}]",
                led.theta_fov
            )));
        }
        Ok(Self { d_th, theta_th })
    }

    /// `d_th = d_min + c_d (d_max - d_min)`, `theta_th = c_theta * fov`.
    pub fn from_coefficients(
        c_d: f64,
        c_theta: f64,
        model: &MobilityModel,
        led: &LedGeometry,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&c_d) || !(0.0..=1.0).contains(&c_theta) {
            return Err(invalid("threshold coefficients must lie in [0, 1]"));
        }
        Self::new(
            model.d_min + c_d * model.delta_d(),
            c_theta * led.theta_fov,
            model,
            led,
        )
    }
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn u_clamp(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}

/// `acos(2 min(x upsilon(y), 1) - 1) / 2`: the incidence half-angle at
/// which the squared gain at distance `y` equals `x`.
fn level_angle(x: f64, y: f64, cc: &ChannelConstant) -> f64 {
    // acos(2t - 1)/2 == acos(sqrt t), without the cancellation near t = 0
    (x * cc.upsilon(y)).clamp(0.0, 1.0).sqrt().acos()
}

/// `min(level_angle, z)`.
pub fn psi(x: f64, y: f64, z: f64, led: &LedGeometry) -> f64 {
    level_angle(x, y, &channel_constant(led)).min(z)
}

/// `max(level_angle, z)`.
pub fn omega(x: f64, y: f64, z: f64, led: &LedGeometry) -> f64 {
    level_angle(x, y, &channel_constant(led)).max(z)
}

/// `min(acos(2 x upsilon(y) - 1) / 2, z)` with the argument clamped to `[-1, 1]`.
pub fn cap_psi(x: f64, y: f64, z: f64, led: &LedGeometry) -> f64 {
    cap_psi_cc(x, y, z, &channel_constant(led))
}

fn cap_psi_cc(x: f64, y: f64, z: f64, cc: &ChannelConstant) -> f64 {
    (x * cc.upsilon(y)).clamp(0.0, 1.0).sqrt().acos().min(z)
}

/// Critical distance for the instantaneous-feedback weak user, in `[d_th, d_max]`.
/// Beyond it every in-FOV gain can fall below `x`.
pub fn d_star_inst(x: f64, th: &FeedbackThresholds, model: &MobilityModel, led: &LedGeometry) -> f64 {
    if x <= 0.0 {
        return model.d_max;
    }
    let cc = channel_constant(led);
    let level = led.theta_fov.cos().powi(2) / x;
    u_clamp(cc.distance_at_upsilon(level), th.d_th, model.d_max)
}

/// Distance beyond which `x >= 1/upsilon(r)`, clamped to `[lo, hi]`.
pub fn d_star_mean(x: f64, lo: f64, hi: f64, led: &LedGeometry) -> f64 {
    if x <= 0.0 {
        return hi;
    }
    u_clamp(channel_constant(led).distance_at_upsilon(1.0 / x), lo, hi)
}

fn level_breakpoints(x: f64, fov: f64, cc: &ChannelConstant) -> Vec<f64> {
    if x <= 0.0 {
        return Vec::new();
    }
    vec![
        cc.distance_at_upsilon(1.0 / x),
        cc.distance_at_upsilon(fov.cos().powi(2) / x),
    ]
}

/// `1 - int dF(r, psi(x, r, z)) / int dF(r, z)` over `[lo, hi]`.
fn cdf_full_csi_window(
    x: f64,
    z: f64,
    lo: f64,
    hi: f64,
    model: &MobilityModel,
    led: &LedGeometry,
) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(invalid(format!("squared gain must be non-negative, got {x}")));
    }
    let cc = channel_constant(led);
    let base = center_kink_distances(&[z], model, led);
    let denom_spec = spec().with_breakpoints(base.clone());
    let denom = if hi > lo {
        integrate_1d(|r| delta_f_phi(r, z, model, led), lo, hi, &denom_spec)?
    } else {
        delta_f_phi(lo, z, model, led)
    };
    if denom <= 0.0 {
        return Err(Error::Degenerate(
            "no user can have a nonzero channel in this window".into(),
        ));
    }
    let ang = |r: f64| level_angle(x, r, &cc).min(z);
    let numer = if hi > lo {
        let mut bps = base;
        bps.extend(level_breakpoints(x, z, &cc));
        integrate_1d(|r| delta_f_phi(r, ang(r), model, led), lo, hi, &spec().with_breakpoints(bps))?
    } else {
        delta_f_phi(lo, ang(lo), model, led)
    };
    Ok((1.0 - numer / denom).clamp(0.0, 1.0))
}

/// CDF of the squared gain of a randomly chosen user with a nonzero channel.
pub fn cdf_sq_unordered(x: f64, model: &MobilityModel, led: &LedGeometry) -> Result<f64> {
    cdf_full_csi_window(x, led.theta_fov, model.d_min, model.d_max, model, led)
}

/// Rank-`k` (ascending) order statistic among the nonzero users, averaged
/// over `K_nz` conditioned on `K_nz >= k_min`.
pub fn cdf_sq_ordered(
    x: f64,
    k: usize,
    nz: &NonzeroCount,
    model: &MobilityModel,
    led: &LedGeometry,
) -> Result<f64> {
    if k == 0 || k > nz.k_min.max(1) {
        return Err(invalid(format!("rank {k} must satisfy 1 <= k <= k_min = {}", nz.k_min)));
    }
    let f = cdf_sq_unordered(x, model, led)?;
    ordered_from_unordered(f, k, nz)
}

/// Order-statistic mixture for a known unordered CDF value `f`.
pub fn ordered_from_unordered(f: f64, k: usize, nz: &NonzeroCount) -> Result<f64> {
    let mut total = 0.0;
    for n in nz.k_min.max(k)..=nz.total_users {
        let w = pmf_nonzero_count_truncated(n, nz)?;
        if w == 0.0 {
            continue;
        }
        let tail: f64 = (k..=n).map(|l| binomial_pmf(n, l, f)).sum();
        total += w * tail;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Weak user chosen from the instantaneous-angle weak set.
pub fn cdf_weak_twobit_inst(
    x: f64,
    th: &FeedbackThresholds,
    model: &MobilityModel,
    led: &LedGeometry,
) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(invalid(format!("squared gain must be non-negative, got {x}")));
    }
    let fov = led.theta_fov;
    let cc = channel_constant(led);
    let band = |r: f64, y: f64| delta_f_phi(r, fov, model, led) - delta_f_phi(r, y, model, led);
    let base = center_kink_distances(&[fov, th.theta_th], model, led);
    let denom = integrate_1d(
        |r| band(r, th.theta_th),
        th.d_th,
        model.d_max,
        &spec().with_breakpoints(base.clone()),
    )?;
    if denom <= 0.0 {
        return Err(Error::Degenerate("weak set is empty almost surely".into()));
    }
    let lo = d_star_inst(x, th, model, led);
    // omega capped at the FOV so the integrand vanishes below the critical distance
    let w = |r: f64| level_angle(x, r, &cc).max(th.theta_th).min(fov);
    let mut bps = base;
    bps.extend(level_breakpoints(x, fov, &cc));
    bps.extend(level_breakpoints(x, th.theta_th, &cc));
    let numer = integrate_1d(|r| band(r, w(r)), lo, model.d_max, &spec().with_breakpoints(bps))?;
    Ok((numer / denom).clamp(0.0, 1.0))
}

/// Strong user chosen from the instantaneous-angle strong set.
pub fn cdf_strong_twobit_inst(
    x: f64,
    th: &FeedbackThresholds,
    model: &MobilityModel,
    led: &LedGeometry,
) -> Result<f64> {
    cdf_full_csi_window(x, th.theta_th, model.d_min, th.d_th, model, led)
}

/// Mean-angle intervals giving `theta_th < |mean incidence| <= fov` at distance `r`.
pub fn mean_support(r: f64, th: &FeedbackThresholds, model: &MobilityModel, led: &LedGeometry) -> Vec<(f64, f64)> {
    let alpha = |off: f64| PI - led.ell.atan2(r) + off;
    let (lo, hi) = (model.mean_angle_min, model.mean_angle_max);
    let fov = led.theta_fov;
    [
        (lo.max(alpha(-fov)), hi.min(alpha(-th.theta_th))),
        (lo.max(alpha(th.theta_th)), hi.min(alpha(fov))),
    ]
    .into_iter()
    .filter(|(a, b)| a < b)
    .collect()
}

/// Mean-angle interval giving `|mean incidence| <= theta_th` at distance `r`.
pub fn strong_mean_support(r: f64, th: &FeedbackThresholds, model: &MobilityModel, led: &LedGeometry) -> Option<(f64, f64)> {
    let c = PI - led.ell.atan2(r);
    let a = model.mean_angle_min.max(c - th.theta_th);
    let b = model.mean_angle_max.min(c + th.theta_th);
    (a < b).then_some((a, b))
}

/// Distance where `atan(ell / r) = t`, with `0` for `t >= pi/2` and `+inf` for `t <= 0`.
fn distance_at_elevation(t: f64, ell: f64) -> f64 {
    if t >= FRAC_PI_2 {
        0.0
    } else if t <= 0.0 {
        f64::INFINITY
    } else {
        ell / t.tan()
    }
}

/// `int_y^z F_mean(pi - atan(ell/r) + x) dr` in closed form.
pub fn closed_integral_i(x: f64, y: f64, z: f64, model: &MobilityModel, led: &LedGeometry) -> f64 {
    if y > z {
        return -closed_integral_i(x, z, y, model, led);
    }
    let ell = led.ell;
    let (lo, hi) = (model.mean_angle_min, model.mean_angle_max);
    let span = model.delta_mean();
    let u = |v: f64| u_clamp(v, y, z);
    if span == 0.0 {
        return z - u(distance_at_elevation(PI + x - lo, ell));
    }
    let g = |r: f64| {
        ((PI + x - lo) * r - 0.5 * ell * (ell * ell + r * r).ln() - r * ell.atan2(r)) / span
    };
    let dg = |a: f64, b: f64| g(b) - g(a);
    let r_min = distance_at_elevation(PI + x - lo, ell);
    let r_max = distance_at_elevation(PI + x - hi, ell);
    let xi_min = (hi - PI).min(lo - FRAC_PI_2);
    let xi_max = (hi - PI).max(lo - FRAC_PI_2);
    if x < lo - PI {
        0.0
    } else if x < xi_min {
        dg(u(r_min), z)
    } else if x >= lo - FRAC_PI_2 && x < hi - PI {
        dg(y, z)
    } else if x >= hi - PI && x < lo - FRAC_PI_2 {
        dg(u(r_min), u(r_max)) + z - u(r_max)
    } else if x >= xi_max && x < hi - FRAC_PI_2 {
        dg(y, u(r_max)) + z - u(r_max)
    } else {
        z - y
    }
}

/// `int_x^{d_max} (dF_mean(r, fov) - dF_mean(r, theta_th)) dr`.
pub fn aux_a(x: f64, th: &FeedbackThresholds, model: &MobilityModel, led: &LedGeometry) -> f64 {
    let z = model.d_max;
    if x >= z {
        return 0.0;
    }
    let i = |off: f64| closed_integral_i(off, x, z, model, led);
    let fov = led.theta_fov;
    (i(fov) - i(-fov) - i(th.theta_th) + i(-th.theta_th)).max(0.0)
}

/// `int_x^{d_th} dF_mean(r, theta_th) dr`.
pub fn aux_b(x: f64, th: &FeedbackThresholds, model: &MobilityModel, led: &LedGeometry) -> f64 {
    let z = th.d_th;
    if x >= z {
        return 0.0;
    }
    let i = |off: f64| closed_integral_i(off, x, z, model, led);
    (i(th.theta_th) - i(-th.theta_th)).max(0.0)
}

/// `1 - (F(c + w | mean) - F(c - w | mean))` for the conditional uniform law.
fn outside_prob_given_mean(r: f64, mean: f64, w: f64, model: &MobilityModel, led: &LedGeometry) -> f64 {
    let c = PI - led.ell.atan2(r);
    1.0 - (model.cdf_given_mean(c + w, mean) - model.cdf_given_mean(c - w, mean))
}

fn inner_kinks(r: f64, w: f64, model: &MobilityModel, led: &LedGeometry) -> Vec<f64> {
    let c = PI - led.ell.atan2(r);
    let dev = model.max_deviation;
    vec![c - w - dev, c - w + dev, c + w - dev, c + w + dev]
}

fn mean_support_kinks(offsets: &[f64], model: &MobilityModel, led: &LedGeometry) -> Vec<f64> {
    let mut out = Vec::new();
    for b in [model.mean_angle_min, model.mean_angle_max] {
        for &off in offsets {
            for c in [b - off, b + off] {
                if let Some(r) = distance_for_center(c, led.ell) {
                    out.push(r);
                }
            }
        }
    }
    out
}

/// Weak user chosen from the mean-angle weak set. Has an atom at zero.
pub fn cdf_weak_twobit_mean(
    x: f64,
    th: &FeedbackThresholds,
    model: &MobilityModel,
    led: &LedGeometry,
) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(invalid(format!("squared gain must be non-negative, got {x}")));
    }
    if model.delta_mean() <= 0.0 {
        return Err(invalid("mean-angle feedback laws need a nondegenerate mean-angle range"));
    }
    let a_th = aux_a(th.d_th, th, model, led);
    if a_th <= 0.0 {
        return Err(Error::Degenerate("mean-angle weak set is empty almost surely".into()));
    }
    let fov = led.theta_fov;
    let cc = channel_constant(led);
    let ds = d_star_mean(x, th.d_th, model.d_max, led);
    let head = aux_a(ds, th, model, led) / a_th;
    if ds <= th.d_th {
        return Ok(head.clamp(0.0, 1.0));
    }
    let mut bps = mean_support_kinks(&[fov, th.theta_th], model, led);
    bps.extend(level_breakpoints(x, fov, &cc));
    let double = integrate_2d_nested(
        |r, mean| outside_prob_given_mean(r, mean, cap_psi_cc(x, r, fov, &cc), model, led),
        (th.d_th, ds),
        |r| InnerSupport {
            intervals: mean_support(r, th, model, led),
            breakpoints: inner_kinks(r, cap_psi_cc(x, r, fov, &cc), model, led),
        },
        &spec().with_breakpoints(bps),
    )?;
    Ok((head + double / (model.delta_mean() * a_th)).clamp(0.0, 1.0))
}

/// Strong user chosen from the mean-angle strong set. Has an atom at zero.
pub fn cdf_strong_twobit_mean(
    x: f64,
    th: &FeedbackThresholds,
    model: &MobilityModel,
    led: &LedGeometry,
) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(invalid(format!("squared gain must be non-negative, got {x}")));
    }
    if model.delta_mean() <= 0.0 {
        return Err(invalid("mean-angle feedback laws need a nondegenerate mean-angle range"));
    }
    let b_min = aux_b(model.d_min, th, model, led);
    if b_min <= 0.0 {
        return Err(Error::Degenerate("mean-angle strong set is empty almost surely".into()));
    }
    let fov = led.theta_fov;
    let cc = channel_constant(led);
    let ds = d_star_mean(x, model.d_min, th.d_th, led);
    let head = aux_b(ds, th, model, led) / b_min;
    if ds <= model.d_min {
        return Ok(head.clamp(0.0, 1.0));
    }
    let mut bps = mean_support_kinks(&[th.theta_th], model, led);
    bps.extend(level_breakpoints(x, fov, &cc));
    let double = integrate_2d_nested(
        |r, mean| outside_prob_given_mean(r, mean, cap_psi_cc(x, r, fov, &cc), model, led),
        (model.d_min, ds),
        |r| InnerSupport {
            intervals: strong_mean_support(r, th, model, led).into_iter().collect(),
            breakpoints: inner_kinks(r, cap_psi_cc(x, r, fov, &cc), model, led),
        },
        &spec().with_breakpoints(bps),
    )?;
    Ok((head + double / (model.delta_mean() * b_min)).clamp(0.0, 1.0))
}
