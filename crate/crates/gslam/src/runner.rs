//! Log replay: walks the record stream, turning each control interval
//! plus the scan that closes it into one filter step.
//!
//! A control record opens an interval; the next scan or control record
//! closes it. Scans sharing a timestamp with the following control are
//! processed first, so the pose being weighed is the pose at scan time.
//! Position fixes are collected for scoring only and never reach the
//! filter.

use crate::error::{Error, Result};
use crate::filter::{FilterConfig, Models, ObservationMap, ParticleFilter, StepSummary};
use crate::geometry::{Point2D, Pose2D};
use crate::grid::{GridParams, OccGrid};
use crate::logio::{LogRecord, Payload};
use crate::map::ScatterMap;
use crate::motion::{propagate, Control, VehicleParams};
use crate::sensor::LaserScan;
use std::time::Instant;

/// Everything a finished (or diverged) replay leaves behind.
#[derive(Debug)]
pub struct RunResult<M> {
    pub filter: ParticleFilter<M>,
    /// Best-particle pose at the end of each executed step.
    pub estimate: Vec<(f64, Pose2D)>,
    /// Position fixes found in the log, for scoring.
    pub fixes: Vec<(f64, Point2D)>,
    /// Wall time of each executed step, milliseconds.
    pub step_ms: Vec<f64>,
    /// Index of the step at which every particle died, if any; the
    /// estimate then covers exactly the steps before it.
    pub diverged_at_step: Option<usize>,
}

impl<M: ObservationMap> RunResult<M> {
    pub fn steps(&self) -> usize {
        self.estimate.len()
    }
}

/// Drive `filter` over the records, invoking `on_step` after every
/// successful step. Divergence of the whole particle set ends the run
/// early and is reported in the result rather than as an error; anything
/// else (bad geometry, invalid noise) aborts.
pub fn replay<M: ObservationMap>(
    records: &[LogRecord],
    mut filter: ParticleFilter<M>,
    mut on_step: impl FnMut(&ParticleFilter<M>, &StepSummary),
) -> Result<RunResult<M>> {
    let mut held: Option<(f64, Control)> = None;
    let mut stamps: Vec<f64> = Vec::new();
    let mut fixes = Vec::new();
    let mut step_ms = Vec::new();
    let mut diverged_at_step = None;

    'walk: for rec in records {
        let mut run_step = |u: Control,
                            dt: f64,
                            scan: Option<&LaserScan>,
                            filter: &mut ParticleFilter<M>|
         -> Result<bool> {
            let begin = Instant::now();
            match filter.step(u, dt, scan) {
                Ok(summary) => {
                    step_ms.push(begin.elapsed().as_secs_f64() * 1e3);
                    stamps.push(rec.t);
                    on_step(filter, &summary);
                    Ok(true)
                }
                Err(Error::AllParticlesDiverged { step }) => {
                    diverged_at_step = Some(step);
                    Ok(false)
                }
                Err(e) => Err(e),
            }
        };
        match &rec.payload {
            Payload::Gps { x, y } => fixes.push((rec.t, Point2D::new(*x, *y))),
            Payload::Scan { ranges } => {
                let scan = LaserScan::new(rec.t, ranges.clone());
                let (t0, u) = held.take().unwrap_or((rec.t, Control::new(0.0, 0.0)));
                if !run_step(u, rec.t - t0, Some(&scan), &mut filter)? {
                    break 'walk;
                }
            }
            Payload::Control { velocity, steering } => {
                let u_next = Control::new(*velocity, *steering);
                if let Some((t0, u)) = held.take() {
                    if rec.t > t0 && !run_step(u, rec.t - t0, None, &mut filter)? {
                        break 'walk;
                    }
                }
                held = Some((rec.t, u_next));
            }
        }
    }

    let trajectory = filter.best_trajectory();
    debug_assert_eq!(trajectory.len(), stamps.len() + 1);
    let estimate = stamps
        .iter()
        .copied()
        .zip(trajectory[1..].iter().copied())
        .collect();
    Ok(RunResult {
        filter,
        estimate,
        fixes,
        step_ms,
        diverged_at_step,
    })
}

/// Replay with a scattered-point map per particle.
pub fn run_scatter(
    records: &[LogRecord],
    start: Pose2D,
    models: Models,
    cfg: FilterConfig,
) -> Result<RunResult<ScatterMap>> {
    let map = ScatterMap::new(models.interp.radius);
    let filter = ParticleFilter::new(start, map, cfg, models)?;
    replay(records, filter, |_, _| {})
}

/// Replay with an occupancy grid per particle.
pub fn run_grid(
    records: &[LogRecord],
    start: Pose2D,
    models: Models,
    cfg: FilterConfig,
    bounds: crate::geometry::Rect,
    resolution: f64,
) -> Result<RunResult<OccGrid>> {
    let map = OccGrid::new(bounds, resolution, GridParams::default());
    let filter = ParticleFilter::new(start, map, cfg, models)?;
    replay(records, filter, |_, _| {})
}

/// Integrate the logged (noisy) controls directly: the correction-free
/// baseline every filter run is compared against.
pub fn dead_reckoning(
    records: &[LogRecord],
    start: Pose2D,
    vehicle: &VehicleParams,
) -> Result<Vec<(f64, Pose2D)>> {
    let mut out = Vec::new();
    let mut pose = start;
    let mut held: Option<(f64, Control)> = None;
    for rec in records {
        if let Payload::Control { velocity, steering } = rec.payload {
            match held {
                None => out.push((rec.t, pose)),
                Some((t0, u)) => {
                    if rec.t > t0 {
                        pose = propagate(pose, u, rec.t - t0, vehicle)?;
                        out.push((rec.t, pose));
                    }
                }
            }
            held = Some((rec.t, Control::new(velocity, steering)));
        }
    }
    Ok(out)
}
