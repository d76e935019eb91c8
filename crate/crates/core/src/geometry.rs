//! Line-of-sight optical geometry for a single downward-facing LED and a
//! tilted photodetector.
//!
//! Angles are radians throughout. The LED points straight down, so the
//! irradiance angle at horizontal distance `d` satisfies
//! `cos(irr) = ell / sqrt(ell^2 + d^2)`, and the squared DC gain factors as
//! `h^2 = cos^2(theta) / upsilon(d)` inside the field of view.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{invalid, Result};

/// Fixture parameters of the LED and photodetector pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedGeometry {
    /// Vertical distance between the LED and the user plane, meters.
    pub ell: f64,
    /// Half-power beamwidth of the LED, radians.
    pub phi_hpbw: f64,
    /// Lambertian order derived from `phi_hpbw`.
    pub lambertian_m: f64,
    /// Photodetector area, square meters.
    pub area_r: f64,
    /// Half-angle of the photodetector field of view, radians.
    pub theta_fov: f64,
}

impl LedGeometry {
    pub fn new(ell: f64, phi_hpbw: f64, area_r: f64, theta_fov: f64) -> Result<Self> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(invalid(format!("LED height must be positive, got {ell}")));
        }
        if !(area_r > 0.0 && area_r.is_finite()) {
            return Err(invalid(format!("detector area must be positive, got {area_r}")));
        }
        if !(theta_fov > 0.0 && theta_fov <= FRAC_PI_2) {
            return Err(invalid(format!(
                "FOV half-angle must lie in (0, pi/2], got {theta_fov}"
            )));
        }
        let lambertian_m = lambertian_order(phi_hpbw)?;
        Ok(Self {
            ell,
            phi_hpbw,
            lambertian_m,
            area_r,
            theta_fov,
        })
    }

    /// Same fixture with a different field of view.
    pub fn with_fov(&self, theta_fov: f64) -> Result<Self> {
        Self::new(self.ell, self.phi_hpbw, self.area_r, theta_fov)
    }
}

/// One sampled user: horizontal distance, mean and instantaneous vertical angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserState {
    pub dist: f64,
    pub mean_angle: f64,
    pub inst_angle: f64,
}

impl UserState {
    pub fn new(dist: f64, mean_angle: f64, inst_angle: f64) -> Self {
        Self {
            dist,
            mean_angle,
            inst_angle,
        }
    }

    /// Incidence angle of the instantaneous orientation.
    pub fn incidence(&self, led: &LedGeometry) -> f64 {
        incidence_angle(self.dist, self.inst_angle, led.ell)
    }

    /// Incidence angle implied by the mean orientation.
    pub fn mean_incidence(&self, led: &LedGeometry) -> f64 {
        incidence_angle(self.dist, self.mean_angle, led.ell)
    }
}

/// Lambertian order `m = -1 / log2(cos(phi_hpbw))`.
pub fn lambertian_order(phi_hpbw: f64) -> Result<f64> {
    if !(phi_hpbw > 0.0 && phi_hpbw < FRAC_PI_2) {
        return Err(invalid(format!(
            "half-power beamwidth must lie in (0, pi/2), got {phi_hpbw}"
        )));
    }
    Ok(-1.0 / phi_hpbw.cos().log2())
}

/// Incidence angle `pi - atan(ell/d) - phi`; may be negative.
pub fn incidence_angle(d: f64, phi: f64, ell: f64) -> f64 {
    PI - ell.atan2(d) - phi
}

/// Irradiance angle for a downward-pointing LED.
pub fn irradiance_angle(d: f64, ell: f64) -> f64 {
    d.atan2(ell)
}

fn path_factor(d: f64, led: &LedGeometry) -> f64 {
    let m = led.lambertian_m;
    let r2 = led.ell * led.ell + d * d;
    (m + 1.0) * led.area_r / (2.0 * PI * r2) * irradiance_angle(d, led.ell).cos().powf(m)
}

/// DC channel gain of the line-of-sight link, zero outside the field of view.
pub fn dc_gain(user: &UserState, led: &LedGeometry) -> f64 {
    let theta = user.incidence(led);
    if theta.abs() > led.theta_fov {
        return 0.0;
    }
    (path_factor(user.dist, led) * theta.cos()).max(0.0)
}

/// Average DC gain obtained by substituting the mean vertical angle.
pub fn mean_dc_gain(d: f64, mean_angle: f64, led: &LedGeometry) -> f64 {
    let beta = led.ell.atan2(d) + mean_angle;
    if (PI - beta).abs() > led.theta_fov {
        return 0.0;
    }
    path_factor(d, led) * beta.cos().abs()
}

/// Normalisation constant `h_c` with `upsilon(x) = (ell^2 + x^2)^(m+2) / h_c^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConstant {
    pub h_c: f64,
    ell: f64,
    exponent: f64,
}

impl ChannelConstant {
    pub fn upsilon(&self, x: f64) -> f64 {
        (self.ell * self.ell + x * x).powf(self.exponent) / (self.h_c * self.h_c)
    }

    /// Largest squared gain reachable at distance `x` (normal incidence).
    pub fn peak_sq_gain(&self, x: f64) -> f64 {
        1.0 / self.upsilon(x)
    }

    /// Distance at which `upsilon` equals `level`, i.e. the solution of
    /// `(ell^2 + r^2)^(m+2) = h_c^2 level`, with the radicand clamped at zero.
    ///
    /// Returns `+inf` for an infinite level.
    pub fn distance_at_upsilon(&self, level: f64) -> f64 {
        if level.is_infinite() {
            return f64::INFINITY;
        }
        let base = (self.h_c * self.h_c * level).powf(1.0 / self.exponent);
        (base - self.ell * self.ell).max(0.0).sqrt()
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }
}

pub fn channel_constant(led: &LedGeometry) -> ChannelConstant {
    let m = led.lambertian_m;
    ChannelConstant {
        h_c: (m + 1.0) * led.area_r * led.ell.powf(m) / (2.0 * PI),
        ell: led.ell,
        exponent: m + 2.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    fn fixture(theta_fov_deg: f64) -> LedGeometry {
        LedGeometry::new(2.0, deg(60.0), 1e-4, deg(theta_fov_deg)).unwrap()
    }

    #[test]
    fn lambertian_order_values() {
        assert!((lambertian_order(deg(60.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((lambertian_order(deg(45.0)).unwrap() - 2.0).abs() < 1e-12);
        // -1/log2(cos 30deg) = -1/log2(sqrt(3)/2) = 2/(2 - log2 3)
        let expected = 4.818841679306418;
        assert!((lambertian_order(deg(30.0)).unwrap() - expected).abs() < 1e-12);
        assert!(lambertian_order(0.0).is_err());
        assert!(lambertian_order(deg(90.0)).is_err());
    }

    #[test]
    fn incidence_angle_limits() {
        assert!((incidence_angle(1e9, deg(90.0), 2.0) - deg(90.0)).abs() < 1e-8);
        assert!((incidence_angle(2.0, deg(90.0), 2.0) - deg(45.0)).abs() < 1e-12);
        assert!(incidence_angle(0.0, deg(90.0), 2.0).abs() < 1e-12);
        assert!(incidence_angle(0.0, deg(170.0), 2.0) < 0.0);
    }

    #[test]
    fn irradiance_angle_values() {
        assert_eq!(irradiance_angle(0.0, 2.0), 0.0);
        assert!((irradiance_angle(2.0, 2.0) - deg(45.0)).abs() < 1e-12);
        // acos(2/sqrt(104))
        assert!((irradiance_angle(10.0, 2.0) - 1.373400766945016).abs() < 1e-12);
    }

    #[test]
    fn gain_directly_below() {
        let led = fixture(60.0);
        let user = UserState::new(0.0, deg(90.0), deg(90.0));
        let expected = 2e-4 / (8.0 * PI);
        assert!((dc_gain(&user, &led) - expected).abs() < 1e-18);
        assert!((expected - 7.957747154594767e-6).abs() < 1e-18);
    }

    #[test]
    fn gain_zero_outside_fov() {
        let led = fixture(60.0);
        let user = UserState::new(3.0, deg(20.0), deg(20.0));
        assert!(user.incidence(&led).abs() > led.theta_fov);
        assert_eq!(dc_gain(&user, &led), 0.0);
    }

    #[test]
    fn mean_gain_value() {
        let led = fixture(60.0);
        // theta_bar = 180 - 45 - 120 = 15 deg; cos(irr) = 1/sqrt(2)
        let expected = 2e-4 / (2.0 * PI * 8.0) * (0.5f64).sqrt() * deg(15.0).cos();
        assert!((mean_dc_gain(2.0, deg(120.0), &led) - expected).abs() < 1e-18);
        assert!((expected - 2.717621192517446e-6).abs() < 1e-17);
        assert_eq!(mean_dc_gain(2.0, deg(30.0), &led), 0.0);
    }

    #[test]
    fn channel_constant_values() {
        let led = fixture(60.0);
        let cc = channel_constant(&led);
        assert!((cc.h_c - 6.366197723675813e-5).abs() < 1e-18);
        let lhs = cc.upsilon(0.0) * cc.h_c * cc.h_c;
        assert!((lhs - 2f64.powi(6)).abs() < 1e-9);
    }

    #[test]
    fn distance_at_upsilon_inverts() {
        let led = fixture(60.0);
        let cc = channel_constant(&led);
        for &r in &[0.3, 1.0, 4.5, 9.9] {
            let back = cc.distance_at_upsilon(cc.upsilon(r));
            assert!((back - r).abs() < 1e-9, "{back} vs {r}");
        }
        assert_eq!(cc.distance_at_upsilon(0.0), 0.0);
    }
}
