//! Run configuration: every knob a run needs, loadable from a flat
//! key/value text file.
//!
//! Grammar: one `key = value` assignment per line, dotted section names,
//! `#` starts a comment, blank lines are skipped. Absent keys keep their
//! defaults; unknown keys are errors, so a typo cannot silently fall back
//! to a default.

use crate::error::{Error, Result};
use crate::filter::{FilterConfig, Models};
use crate::geometry::Pose2D;
use crate::map::{GateConfig, InterpConfig};
use crate::motion::{ControlNoise, VehicleParams};
use crate::sensor::{SensorNoise, SensorSpec};
use std::path::Path;

/// Everything a simulation or SLAM run reads: model parameters, filter
/// knobs, and the sim/world options.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub vehicle: VehicleParams,
    pub spec: SensorSpec,
    pub control_noise: ControlNoise,
    pub sensor_noise: SensorNoise,
    pub filter: FilterConfig,
    pub interp: InterpConfig,
    pub gate: GateConfig,
    /// Bundled world name: "default" or "toy".
    pub world: String,
    /// Seed for the simulator (the filter seed lives in `filter.seed`).
    pub sim_seed: u64,
    /// Multiplies every simulator noise standard deviation.
    pub noise_scale: f64,
    /// Scan cadence in steps.
    pub scan_every: usize,
    /// Position-fix cadence in steps.
    pub gps_every: usize,
    /// Cell size for grid runs and density export, meters.
    pub grid_resolution: f64,
    /// Start pose of the run.
    pub start: Pose2D,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            vehicle: VehicleParams::default(),
            spec: SensorSpec::default(),
            control_noise: ControlNoise::default(),
            sensor_noise: SensorNoise::default(),
            filter: FilterConfig::default(),
            interp: InterpConfig::default(),
            gate: GateConfig::default(),
            world: "default".into(),
            sim_seed: 1,
            noise_scale: 1.0,
            scan_every: 1,
            gps_every: 5,
            grid_resolution: 0.5,
            start: Pose2D::new(0.0, 0.0, 0.0),
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value.trim().parse().map_err(|_| Error::Config {
        field: key.into(),
        reason: format!("expected a number, got `{}`", value.trim()),
    })
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.trim().parse().map_err(|_| Error::Config {
        field: key.into(),
        reason: format!("expected a nonnegative integer, got `{}`", value.trim()),
    })
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value.trim().parse().map_err(|_| Error::Config {
        field: key.into(),
        reason: format!("expected a nonnegative integer, got `{}`", value.trim()),
    })
}

impl RunConfig {
    /// The model bundle the filter consumes.
    pub fn models(&self) -> Models {
        Models {
            vehicle: self.vehicle,
            spec: self.spec,
            sensor_noise: self.sensor_noise,
            control_noise: self.control_noise,
            gate: self.gate,
            interp: self.interp,
        }
    }

    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "vehicle.wheelbase" => self.vehicle.wheelbase = parse_f64(key, value)?,
            "vehicle.wheel_offset" => self.vehicle.wheel_offset = parse_f64(key, value)?,
            "vehicle.sensor_fwd" => self.vehicle.sensor_fwd = parse_f64(key, value)?,
            "vehicle.sensor_left" => self.vehicle.sensor_left = parse_f64(key, value)?,
            "sensor.beams" => self.spec.beams = parse_usize(key, value)?,
            "sensor.fov" => self.spec.fov = parse_f64(key, value)?,
            "sensor.max_range" => self.spec.max_range = parse_f64(key, value)?,
            "control_noise.velocity_std" => self.control_noise.velocity_std = parse_f64(key, value)?,
            "control_noise.steering_std" => self.control_noise.steering_std = parse_f64(key, value)?,
            "control_noise.corr" => self.control_noise.corr = parse_f64(key, value)?,
            "sensor_noise.range_std" => self.sensor_noise.range_std = parse_f64(key, value)?,
            "sensor_noise.bearing_std" => self.sensor_noise.bearing_std = parse_f64(key, value)?,
            "sensor_noise.corr" => self.sensor_noise.corr = parse_f64(key, value)?,
            "filter.particles" => self.filter.particles = parse_usize(key, value)?,
            "filter.gen_points" => self.filter.gen_points = parse_usize(key, value)?,
            "filter.p_thr_rel" => self.filter.p_thr_rel = parse_f64(key, value)?,
            "filter.ess_threshold" => self.filter.ess_threshold = parse_f64(key, value)?,
            "filter.beam_stride" => self.filter.beam_stride = parse_usize(key, value)?,
            "filter.seed" => self.filter.seed = parse_u64(key, value)?,
            "interp.neighbors" => self.interp.neighbors = parse_usize(key, value)?,
            "interp.radius" => self.interp.radius = parse_f64(key, value)?,
            "gate.n_sigma" => self.gate.n_sigma = parse_f64(key, value)?,
            "gate.floor_ratio" => self.gate.floor_ratio = parse_f64(key, value)?,
            "world.name" => self.world = value.trim().to_string(),
            "world.seed" => self.sim_seed = parse_u64(key, value)?,
            "world.noise_scale" => self.noise_scale = parse_f64(key, value)?,
            "world.scan_every" => self.scan_every = parse_usize(key, value)?,
            "world.gps_every" => self.gps_every = parse_usize(key, value)?,
            "grid.resolution" => self.grid_resolution = parse_f64(key, value)?,
            "start.x" => self.start.x = parse_f64(key, value)?,
            "start.y" => self.start.y = parse_f64(key, value)?,
            "start.phi" => self.start.phi = parse_f64(key, value)?,
            _ => {
                return Err(Error::Config {
                    field: key.into(),
                    reason: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    /// Cross-field validation; every failure names its dotted key.
    pub fn validate(&self) -> Result<()> {
        self.vehicle.validate()?;
        self.spec.validate()?;
        self.control_noise.validate()?;
        self.sensor_noise.validate_for_sampling()?;
        self.filter.validate()?;
        if !(self.interp.neighbors >= 1) {
            return Err(Error::Config {
                field: "interp.neighbors".into(),
                reason: "need at least one neighbor".into(),
            });
        }
        if !(self.interp.radius > 0.0 && self.interp.radius.is_finite()) {
            return Err(Error::Config {
                field: "interp.radius".into(),
                reason: format!("radius must be positive, got {}", self.interp.radius),
            });
        }
        if !(self.gate.n_sigma > 0.0 && self.gate.n_sigma.is_finite()) {
            return Err(Error::Config {
                field: "gate.n_sigma".into(),
                reason: format!("gate width must be positive, got {}", self.gate.n_sigma),
            });
        }
        if !(self.gate.floor_ratio >= 0.0 && self.gate.floor_ratio < 1.0) {
            return Err(Error::Config {
                field: "gate.floor_ratio".into(),
                reason: format!("floor ratio must lie in [0, 1), got {}", self.gate.floor_ratio),
            });
        }
        if self.world != "default" && self.world != "toy" {
            return Err(Error::Config {
                field: "world.name".into(),
                reason: format!("unknown world `{}` (bundled: default, toy)", self.world),
            });
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::Config {
                field: "world.noise_scale".into(),
                reason: format!("noise scale must be nonnegative, got {}", self.noise_scale),
            });
        }
        if self.scan_every < 1 {
            return Err(Error::Config {
                field: "world.scan_every".into(),
                reason: "cadence must be at least 1".into(),
            });
        }
        if self.gps_every < 1 {
            return Err(Error::Config {
                field: "world.gps_every".into(),
                reason: "cadence must be at least 1".into(),
            });
        }
        if !(self.grid_resolution > 0.0 && self.grid_resolution.is_finite()) {
            return Err(Error::Config {
                field: "grid.resolution".into(),
                reason: format!("resolution must be positive, got {}", self.grid_resolution),
            });
        }
        if !(self.start.x.is_finite() && self.start.y.is_finite() && self.start.phi.is_finite()) {
            return Err(Error::Config {
                field: "start.x".into(),
                reason: "start pose must be finite".into(),
            });
        }
        Ok(())
    }
}

/// Parse configuration text. `origin` names the source in errors.
pub fn parse_config(text: &str, origin: &Path) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: lineno + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            });
        };
        cfg.set(key.trim(), value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Load and validate a configuration file.
pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path)
}
