//! Ackermann motion model for a rear-driven vehicle with an offset sensor.
//!
//! The state that is propagated is the pose of the *sensor*, not of the
//! axle: the sensor sits `sensor_fwd` ahead and `sensor_left` left of the
//! rear-axle center, and those offsets appear directly in the kinematics.
//! The encoder measures wheel speed at a rear wheel, which differs from the
//! axle-center speed while turning; `effective_velocity` removes that bias.

use crate::error::{Error, Result};
use crate::geometry::Pose2D;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::FRAC_PI_2;

/// Vehicle geometry, in meters.
#[derive(Debug, Clone, Copy)]
pub struct VehicleParams {
    /// Wheelbase: rear to front axle.
    pub wheelbase: f64,
    /// Lateral offset of the encoder wheel from the rear-axle center.
    pub wheel_offset: f64,
    /// Sensor offset forward of the rear-axle center.
    pub sensor_fwd: f64,
    /// Sensor offset left of the rear-axle center.
    pub sensor_left: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            wheelbase: 2.75,
            wheel_offset: 0.74,
            sensor_fwd: 3.25,
            sensor_left: 0.5,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.wheelbase > 0.0 && self.wheelbase.is_finite()) {
            return Err(Error::Config {
                field: "vehicle.wheelbase".into(),
                reason: format!("must be positive, got {}", self.wheelbase),
            });
        }
        if !(self.wheel_offset >= 0.0 && self.wheel_offset.is_finite()) {
            return Err(Error::Config {
                field: "vehicle.wheel_offset".into(),
                reason: format!("must be nonnegative, got {}", self.wheel_offset),
            });
        }
        if !self.sensor_fwd.is_finite() || !self.sensor_left.is_finite() {
            return Err(Error::Config {
                field: "vehicle.sensor_fwd/sensor_left".into(),
                reason: "sensor offsets must be finite".into(),
            });
        }
        Ok(())
    }
}

/// One control input: encoder velocity (m/s) and steering angle (rad).
/// The steering angle must stay short of a quarter turn so its tangent is
/// finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Control {
    pub velocity: f64,
    pub steering: f64,
}

impl Control {
    pub fn new(velocity: f64, steering: f64) -> Self {
        assert!(velocity.is_finite(), "Control: non-finite velocity {velocity}");
        assert!(
            steering.is_finite() && steering.abs() < FRAC_PI_2,
            "Control: steering {steering} outside (-pi/2, pi/2)"
        );
        Self { velocity, steering }
    }
}

/// Gaussian control noise: standard deviations plus a correlation that
/// couples the velocity and steering deviates.
#[derive(Debug, Clone, Copy)]
pub struct ControlNoise {
    pub velocity_std: f64,
    pub steering_std: f64,
    pub corr: f64,
}

impl Default for ControlNoise {
    fn default() -> Self {
        Self {
            velocity_std: 0.12,
            steering_std: 0.015,
            corr: 0.0,
        }
    }
}

impl ControlNoise {
    pub const NONE: ControlNoise = ControlNoise {
        velocity_std: 0.0,
        steering_std: 0.0,
        corr: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.velocity_std >= 0.0 && self.velocity_std.is_finite()) {
            return Err(Error::InvalidCovariance(format!(
                "velocity_std must be nonnegative, got {}",
                self.velocity_std
            )));
        }
        if !(self.steering_std >= 0.0 && self.steering_std.is_finite()) {
            return Err(Error::InvalidCovariance(format!(
                "steering_std must be nonnegative, got {}",
                self.steering_std
            )));
        }
        if !(self.corr.abs() <= 1.0) {
            return Err(Error::InvalidCovariance(format!(
                "correlation must lie in [-1, 1], got {}",
                self.corr
            )));
        }
        Ok(())
    }
}

/// Axle-center velocity from the encoder reading.
///
/// `v_c = v_e / (1 - tan(steering) * wheel_offset / wheelbase)`. Fails when
/// the instantaneous turn center passes through the encoder wheel and the
/// denominator vanishes.
pub fn effective_velocity(control: Control, params: &VehicleParams) -> Result<f64> {
    let denom = 1.0 - control.steering.tan() * params.wheel_offset / params.wheelbase;
    if denom.abs() < 1e-6 || !denom.is_finite() {
        return Err(Error::SingularKinematics { denom });
    }
    Ok(control.velocity / denom)
}

/// One explicit Euler step of the sensor-pose kinematics over `dt` seconds.
pub fn propagate(pose: Pose2D, control: Control, dt: f64, params: &VehicleParams) -> Result<Pose2D> {
    let vc = effective_velocity(control, params)?;
    let t = control.steering.tan();
    let (s, c) = pose.phi.sin_cos();
    let il = 1.0 / params.wheelbase;
    let a = params.sensor_fwd;
    let b = params.sensor_left;
    Ok(Pose2D::new(
        pose.x + dt * vc * (c - il * (a * s + b * c) * t),
        pose.y + dt * vc * (s + il * (a * c - b * s) * t),
        pose.phi + dt * vc * il * t,
    ))
}

/// Perturb a control with a zero-mean Gaussian draw.
///
/// Correlation is applied through the Cholesky factor of the covariance:
/// the steering deviate mixes the velocity deviate with weight `corr`.
pub fn sample_control<R: Rng>(control: Control, noise: &ControlNoise, rng: &mut R) -> Result<Control> {
    noise.validate()?;
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    let dv = noise.velocity_std * z1;
    let ds = noise.steering_std * (noise.corr * z1 + (1.0 - noise.corr * noise.corr).sqrt() * z2);
    Ok(Control {
        velocity: control.velocity + dv,
        steering: control.steering + ds,
    })
}
