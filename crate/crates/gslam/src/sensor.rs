//! Range-bearing sensor model.
//!
//! Measurements are taken from the sensor pose produced by the motion
//! model, so no extra lever-arm correction happens here. Bearings use the
//! full-quadrant `atan2`, which keeps targets behind the sensor
//! distinguishable from targets in front of it.

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, to_world_frame, Point2D, Pose2D};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

/// One sensor return: distance and bearing in the sensor frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeBearing {
    pub d: f64,
    pub theta: f64,
}

impl RangeBearing {
    /// Bearing is wrapped into `(-pi, pi]`; distance must be nonnegative.
    pub fn new(d: f64, theta: f64) -> Self {
        assert!(d.is_finite() && d >= 0.0, "RangeBearing: bad distance {d}");
        Self {
            d,
            theta: normalize_angle(theta),
        }
    }
}

/// Geometry of the scanning sensor.
#[derive(Debug, Clone, Copy)]
pub struct SensorSpec {
    /// Number of beams per scan.
    pub beams: usize,
    /// Angular field of view, centered on the sensor's forward axis.
    pub fov: f64,
    /// Ranges at or above this value mean "no return".
    pub max_range: f64,
}

impl Default for SensorSpec {
    fn default() -> Self {
        Self {
            beams: 361,
            fov: PI,
            max_range: 80.0,
        }
    }
}

impl SensorSpec {
    /// Bearing of beam `i` in the sensor frame; beam 0 is the right edge of
    /// the field of view, the last beam the left edge.
    pub fn beam_angle(&self, i: usize) -> f64 {
        debug_assert!(i < self.beams);
        -0.5 * self.fov + self.fov * i as f64 / (self.beams - 1) as f64
    }

    pub fn is_return(&self, range: f64) -> bool {
        range.is_finite() && range > 0.0 && range < self.max_range
    }

    pub fn validate(&self) -> Result<()> {
        if self.beams < 2 {
            return Err(Error::Config {
                field: "sensor.beams".into(),
                reason: format!("need at least 2 beams, got {}", self.beams),
            });
        }
        if !(self.fov > 0.0 && self.fov <= 2.0 * PI) {
            return Err(Error::Config {
                field: "sensor.fov".into(),
                reason: format!("field of view must lie in (0, 2*pi], got {}", self.fov),
            });
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(Error::Config {
                field: "sensor.max_range".into(),
                reason: format!("max range must be positive, got {}", self.max_range),
            });
        }
        Ok(())
    }
}

/// One full scan: `ranges[i]` was measured along `spec.beam_angle(i)`.
/// Values at or above max range mean the beam saw nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserScan {
    pub t: f64,
    pub ranges: Vec<f64>,
}

impl LaserScan {
    pub fn new(t: f64, ranges: Vec<f64>) -> Self {
        Self { t, ranges }
    }

    /// Beams that actually hit something, as `(beam index, measurement)`.
    pub fn returns<'a>(
        &'a self,
        spec: &'a SensorSpec,
    ) -> impl Iterator<Item = (usize, RangeBearing)> + 'a {
        self.ranges
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, r)| spec.is_return(r))
            .map(|(i, r)| (i, RangeBearing::new(r, spec.beam_angle(i))))
    }
}

/// Zero-mean Gaussian noise on a range-bearing measurement: the covariance
/// is `[[range_std^2, c], [c, bearing_std^2]]` with
/// `c = corr * range_std * bearing_std`.
#[derive(Debug, Clone, Copy)]
pub struct SensorNoise {
    pub range_std: f64,
    pub bearing_std: f64,
    pub corr: f64,
}

impl Default for SensorNoise {
    fn default() -> Self {
        Self {
            range_std: 0.15,
            bearing_std: 0.015,
            corr: 0.0,
        }
    }
}

impl SensorNoise {
    /// Accepts any valid covariance, including degenerate ones (zero
    /// standard deviations, |corr| = 1). Good enough for sampling.
    pub fn validate_for_sampling(&self) -> Result<()> {
        if !(self.range_std >= 0.0 && self.range_std.is_finite()) {
            return Err(Error::InvalidCovariance(format!(
                "range_std must be nonnegative, got {}",
                self.range_std
            )));
        }
        if !(self.bearing_std >= 0.0 && self.bearing_std.is_finite()) {
            return Err(Error::InvalidCovariance(format!(
                "bearing_std must be nonnegative, got {}",
                self.bearing_std
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

    /// Requires a strictly positive-definite covariance so the density
    /// exists.
    pub fn validate(&self) -> Result<()> {
        self.validate_for_sampling()?;
        if self.range_std == 0.0 || self.bearing_std == 0.0 || self.corr.abs() == 1.0 {
            return Err(Error::SingularCovariance);
        }
        Ok(())
    }
}

/// Precomputed bivariate Gaussian density over `(range, bearing)` residuals.
///
/// Built once per beam so the per-point evaluations inside a map update
/// skip the covariance checks.
#[derive(Debug, Clone, Copy)]
pub struct ResidualDensity {
    inv_sd: f64,
    inv_st: f64,
    rho: f64,
    inv_one_m: f64,
    norm: f64,
}

impl ResidualDensity {
    pub fn new(noise: &SensorNoise) -> Result<Self> {
        noise.validate()?;
        let one_m = 1.0 - noise.corr * noise.corr;
        Ok(Self {
            inv_sd: 1.0 / noise.range_std,
            inv_st: 1.0 / noise.bearing_std,
            rho: noise.corr,
            inv_one_m: 1.0 / one_m,
            norm: 1.0 / (2.0 * PI * noise.range_std * noise.bearing_std * one_m.sqrt()),
        })
    }

    /// Density at a residual whose bearing component is already wrapped.
    pub fn eval(&self, zd: f64, zt: f64) -> f64 {
        let a = zd * self.inv_sd;
        let b = zt * self.inv_st;
        let q = (a * a - 2.0 * self.rho * a * b + b * b) * self.inv_one_m;
        self.norm * (-0.5 * q).exp()
    }

    /// The density's maximum, reached at zero residual.
    pub fn peak(&self) -> f64 {
        self.norm
    }
}

/// Range and bearing from `pose` to a world point.
///
/// Fails when the point coincides with the sensor origin, where the bearing
/// is undefined.
pub fn predict_measurement(pose: Pose2D, point: Point2D) -> Result<RangeBearing> {
    let dx = point.x - pose.x;
    let dy = point.y - pose.y;
    let range = dx.hypot(dy);
    if range < 1e-9 {
        return Err(Error::DegenerateGeometry(range));
    }
    Ok(RangeBearing::new(range, dy.atan2(dx) - pose.phi))
}

/// World point at measurement `z` from `pose`. Inverse of
/// [`predict_measurement`] for positive range.
pub fn inverse_measurement(pose: Pose2D, z: RangeBearing) -> Point2D {
    to_world_frame(
        pose,
        Point2D::new(z.d * z.theta.cos(), z.d * z.theta.sin()),
    )
}

/// Bivariate Gaussian density of the residual `observed - predicted`, with
/// the bearing residual wrapped into `(-pi, pi]`.
pub fn likelihood(observed: RangeBearing, predicted: RangeBearing, noise: &SensorNoise) -> Result<f64> {
    let dz = ResidualDensity::new(noise)?;
    Ok(dz.eval(observed.d - predicted.d, normalize_angle(observed.theta - predicted.theta)))
}

/// Draw a noisy copy of measurement `z`; the distance is clamped to stay
/// nonnegative.
///
/// Correlation is applied through the Cholesky factor of the covariance:
/// the bearing deviate mixes the range deviate with weight `corr`.
pub fn sample_measurement<R: Rng>(z: RangeBearing, noise: &SensorNoise, rng: &mut R) -> Result<RangeBearing> {
    noise.validate_for_sampling()?;
    let (dd, dt) = noise_pair(noise, rng);
    Ok(RangeBearing::new((z.d + dd).max(0.0), z.theta + dt))
}

/// One correlated (range, bearing) deviate pair from the noise
/// covariance, Cholesky order: bearing mixes the range deviate with
/// weight `corr`. Callers validate the noise themselves.
pub fn noise_pair<R: Rng>(noise: &SensorNoise, rng: &mut R) -> (f64, f64) {
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    let dd = noise.range_std * z1;
    let dt = noise.bearing_std * (noise.corr * z1 + (1.0 - noise.corr * noise.corr).sqrt() * z2);
    (dd, dt)
}
