//! The trajectory posterior: a particle filter where each particle owns a
//! pose history and a private map.
//!
//! One step: propagate every particle through the noisy motion model, fold
//! the scan into its map (collecting the measurement evidence as the
//! importance weight), and resample with the residual systematic scheme
//! when the effective sample size degenerates.
//!
//! Every random draw comes from a substream keyed by (seed, purpose,
//! particle, step), so results do not depend on the order particles are
//! processed in: serial and particle-parallel execution agree bitwise.

use crate::error::{Error, Result};
use crate::geometry::Pose2D;
use crate::grid::OccGrid;
use crate::map::{GateConfig, InterpConfig, ScatterMap};
use crate::motion::{propagate, sample_control, Control, ControlNoise, VehicleParams};
use crate::rng::{substream, Purpose};
use crate::sensor::{LaserScan, SensorNoise, SensorSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Everything the filter needs to know about the vehicle and sensor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Models {
    pub vehicle: VehicleParams,
    pub spec: SensorSpec,
    pub sensor_noise: SensorNoise,
    pub control_noise: ControlNoise,
    pub gate: GateConfig,
    pub interp: InterpConfig,
}

/// Filter-level knobs.
#[derive(Debug, Clone, Copy)]
pub struct FilterConfig {
    /// Particle count N.
    pub particles: usize,
    /// Fresh map points drawn per processed beam.
    pub gen_points: usize,
    /// Relative pruning threshold, applied once per scan.
    pub p_thr_rel: f64,
    /// Resample when ESS falls below this fraction of N.
    pub ess_threshold: f64,
    /// Process every `beam_stride`-th beam of a scan.
    pub beam_stride: usize,
    pub seed: u64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            particles: 8,
            gen_points: 10,
            p_thr_rel: 0.05,
            ess_threshold: 0.5,
            beam_stride: 2,
            seed: 1,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles < 1 {
            return Err(Error::Config {
                field: "filter.particles".into(),
                reason: "need at least one particle".into(),
            });
        }
        if !(self.ess_threshold > 0.0 && self.ess_threshold <= 1.0) {
            return Err(Error::Config {
                field: "filter.ess_threshold".into(),
                reason: format!("must lie in (0, 1], got {}", self.ess_threshold),
            });
        }
        if self.beam_stride < 1 {
            return Err(Error::Config {
                field: "filter.beam_stride".into(),
                reason: "stride must be at least 1".into(),
            });
        }
        if !(self.p_thr_rel >= 0.0 && self.p_thr_rel < 1.0) {
            return Err(Error::Config {
                field: "filter.p_thr_rel".into(),
                reason: format!("must lie in [0, 1), got {}", self.p_thr_rel),
            });
        }
        Ok(())
    }
}

/// A map representation the filter can drive. Implementations fold one
/// scan into the map from the given pose and return the scan's log
/// evidence; the filter itself never looks inside the map.
pub trait ObservationMap: Clone + Send {
    fn observe(
        &mut self,
        pose: Pose2D,
        scan: &LaserScan,
        models: &Models,
        cfg: &FilterConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64>;
}

impl ObservationMap for ScatterMap {
    /// Fold a scan in three phases. First draw fresh points for every
    /// processed beam against the pre-scan map, so their priors come from
    /// yesterday's knowledge. Then run the per-beam Bayes updates (each
    /// beam's evidence is its weight contribution; the per-beam evidences
    /// multiply since beams are independent given the pose). Only then
    /// insert the drawn batches and prune. Keeping this scan's spawns out
    /// of this scan's scoring is what makes the weights informative: every
    /// particle's own spawns sit exactly at its measured ranges, so letting
    /// them join mid-scan would hand a mislocalized particle evidence it
    /// manufactured itself, beam by beam.
    fn observe(
        &mut self,
        pose: Pose2D,
        scan: &LaserScan,
        models: &Models,
        cfg: &FilterConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64> {
        let beams: Vec<_> = scan
            .returns(&models.spec)
            .filter(|(i, _)| i % cfg.beam_stride == 0)
            .map(|(_, z)| z)
            .collect();
        let mut batches = Vec::with_capacity(beams.len());
        if cfg.gen_points > 0 {
            for &z in &beams {
                batches.push(self.draw_points(pose, z, cfg.gen_points, &models.sensor_noise, &models.interp, rng)?);
            }
        }
        let mut log_evidence = 0.0;
        if !self.is_empty() {
            for &z in &beams {
                let marginal = self.beam_update(pose, z, &models.sensor_noise, &models.gate)?;
                log_evidence += marginal.ln();
            }
        }
        for batch in &batches {
            self.insert_drawn(batch);
        }
        if !self.is_empty() && !beams.is_empty() {
            self.prune(cfg.p_thr_rel);
        }
        Ok(log_evidence)
    }
}

impl ObservationMap for OccGrid {
    /// Score the scan against the current grid, then fold the scan in.
    fn observe(
        &mut self,
        pose: Pose2D,
        scan: &LaserScan,
        models: &Models,
        cfg: &FilterConfig,
        _rng: &mut ChaCha8Rng,
    ) -> Result<f64> {
        let log_l = self.log_likelihood(pose, scan, &models.spec, cfg.beam_stride);
        self.integrate(pose, scan, &models.spec, cfg.beam_stride);
        Ok(log_l)
    }
}

/// One trajectory-and-map hypothesis.
#[derive(Debug, Clone)]
pub struct Particle<M> {
    pub trajectory: Vec<Pose2D>,
    pub map: M,
    pub log_weight: f64,
}

impl<M> Particle<M> {
    pub fn new(start: Pose2D, map: M) -> Self {
        Self {
            trajectory: vec![start],
            map,
            log_weight: 0.0,
        }
    }

    pub fn pose(&self) -> Pose2D {
        *self.trajectory.last().expect("trajectory never empty")
    }
}

/// The particle set plus the step counter that keys its random substreams.
#[derive(Debug, Clone)]
pub struct ParticleFilter<M> {
    pub particles: Vec<Particle<M>>,
    pub cfg: FilterConfig,
    pub models: Models,
    step: u64,
    resample_count: usize,
}

/// What one step did, for logging and diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct StepSummary {
    pub ess: f64,
    pub resampled: bool,
}

impl<M: ObservationMap> ParticleFilter<M> {
    /// All particles start at `start` with weight 1/N and a clone of
    /// `empty_map`.
    pub fn new(start: Pose2D, empty_map: M, cfg: FilterConfig, models: Models) -> Result<Self> {
        cfg.validate()?;
        let particles = (0..cfg.particles)
            .map(|_| Particle::new(start, empty_map.clone()))
            .collect();
        Ok(Self {
            particles,
            cfg,
            models,
            step: 0,
            resample_count: 0,
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn resample_count(&self) -> usize {
        self.resample_count
    }

    /// Normalized linear-domain weights (log weights shifted by their max
    /// before exponentiation, so only a fully diverged set underflows).
    pub fn normalized_weights(&self) -> Vec<f64> {
        let max = self
            .particles
            .iter()
            .map(|p| p.log_weight)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return vec![0.0; self.particles.len()];
        }
        let mut w: Vec<f64> = self
            .particles
            .iter()
            .map(|p| (p.log_weight - max).exp())
            .collect();
        let sum: f64 = w.iter().sum();
        for v in w.iter_mut() {
            *v /= sum;
        }
        w
    }

    /// Advance the filter by one control interval, folding in a scan if
    /// one arrived at the end of it.
    ///
    /// Order per particle: motion proposal, then per-beam point generation
    /// and Bayes update (accumulating the evidence into the weight), then
    /// pruning. After all particles: weight normalization, and residual
    /// systematic resampling when the effective sample size drops below
    /// the configured fraction of N. A particle whose evidence underflows
    /// is dead (weight zero) but the step fails only when every particle
    /// dies.
    pub fn step(&mut self, u: Control, dt: f64, scan: Option<&LaserScan>) -> Result<StepSummary> {
        assert!(dt >= 0.0 && dt.is_finite(), "step: bad dt {dt}");
        let step = self.step;
        self.step += 1;

        for (i, p) in self.particles.iter_mut().enumerate() {
            if p.log_weight == f64::NEG_INFINITY {
                // dead until resampling replaces it; keep lengths aligned
                p.trajectory.push(p.pose());
                continue;
            }
            let mut rng = substream(self.cfg.seed, Purpose::Motion, i as u64, step);
            let noisy = sample_control(u, &self.models.control_noise, &mut rng)?;
            let next = propagate(p.pose(), noisy, dt, &self.models.vehicle)?;
            p.trajectory.push(next);

            if let Some(scan) = scan {
                let mut rng = substream(self.cfg.seed, Purpose::Spawn, i as u64, step);
                match p.map.observe(next, scan, &self.models, &self.cfg, &mut rng) {
                    Ok(log_evidence) => p.log_weight += log_evidence,
                    Err(Error::MarginalUnderflow(_)) | Err(Error::ZeroMass) => {
                        p.log_weight = f64::NEG_INFINITY;
                    }
                    Err(e) => return Err(e),
                }
            }
        }

        let weights = self.normalized_weights();
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::AllParticlesDiverged { step: step as usize });
        }

        let ess = effective_sample_size(&weights);
        let mut resampled = false;
        if scan.is_some() && ess < self.cfg.ess_threshold * self.particles.len() as f64 {
            let mut rng = substream(self.cfg.seed, Purpose::Resample, 0, step);
            let counts = rsr_resample(&weights, self.particles.len(), &mut rng);
            self.apply_resample(&counts);
            self.resample_count += 1;
            resampled = true;
        }
        Ok(StepSummary { ess, resampled })
    }

    /// Replace the particle set according to replication counts; weights
    /// reset to uniform.
    fn apply_resample(&mut self, counts: &[usize]) {
        let mut fresh = Vec::with_capacity(self.particles.len());
        for (i, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                let mut p = self.particles[i].clone();
                p.log_weight = 0.0;
                fresh.push(p);
            }
        }
        debug_assert_eq!(fresh.len(), self.particles.len());
        self.particles = fresh;
    }

    /// The max-weight particle; ties go to the lowest index.
    pub fn best_particle(&self) -> &Particle<M> {
        self.particles
            .iter()
            .reduce(|best, p| if p.log_weight > best.log_weight { p } else { best })
            .expect("particle set never empty")
    }

    /// Trajectory of the max-weight particle.
    pub fn best_trajectory(&self) -> &[Pose2D] {
        &self.best_particle().trajectory
    }

    /// Weight-averaged trajectory: positions averaged linearly, headings
    /// through their unit vectors.
    pub fn mean_trajectory(&self) -> Vec<Pose2D> {
        let w = self.normalized_weights();
        let len = self.particles[0].trajectory.len();
        (0..len)
            .map(|k| {
                let (mut x, mut y, mut sv, mut cv) = (0.0, 0.0, 0.0, 0.0);
                for (p, &wi) in self.particles.iter().zip(&w) {
                    let pose = p.trajectory[k];
                    x += wi * pose.x;
                    y += wi * pose.y;
                    sv += wi * pose.phi.sin();
                    cv += wi * pose.phi.cos();
                }
                Pose2D::new(x, y, sv.atan2(cv))
            })
            .collect()
    }
}

/// Append one proposal draw to a particle's trajectory.
pub fn predict<M, R: Rng>(
    p: &mut Particle<M>,
    u: Control,
    dt: f64,
    vehicle: &VehicleParams,
    noise: &ControlNoise,
    rng: &mut R,
) -> Result<()> {
    let noisy = sample_control(u, noise, rng)?;
    let next = propagate(p.pose(), noisy, dt, vehicle)?;
    p.trajectory.push(next);
    Ok(())
}

/// Fold a scan's per-beam evidences into a particle's weight in the log
/// domain. Rejects nonpositive evidence: that particle has diverged.
pub fn weigh<M>(p: &mut Particle<M>, beam_marginals: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for &z in beam_marginals {
        if !(z > 0.0) {
            return Err(Error::MarginalUnderflow(z));
        }
        sum += z.ln();
    }
    p.log_weight += sum;
    Ok(())
}

/// `1 / sum(w^2)` for normalized weights: N when uniform, 1 when one-hot.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().map(|w| w * w).sum();
    if s == 0.0 {
        0.0
    } else {
        1.0 / s
    }
}

/// Residual systematic resampling: replication counts for `n` draws from
/// normalized `weights`, driven by a single uniform draw from `[0, 1/n)`.
///
/// Computed through the cumulative form `f_i = ceil(n * (C_i - u))` with
/// `C_i` the weight prefix sums: count_i = f_i - f_{i-1}. Each count lands
/// in {floor(n*w_i), floor(n*w_i)+1} and the counts sum to exactly n.
pub fn rsr_resample<R: Rng>(weights: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    assert!(n >= 1, "rsr_resample: need at least one draw");
    assert!(!weights.is_empty(), "rsr_resample: empty weight vector");
    let nf = n as f64;
    let u: f64 = rng.random_range(0.0..1.0 / nf);
    let mut counts = vec![0usize; weights.len()];
    let mut cum = 0.0;
    let mut prev = 0usize;
    for (i, w) in weights.iter().enumerate() {
        debug_assert!(*w >= 0.0);
        cum += w;
        let f = if i + 1 == weights.len() {
            n // the final prefix sum is 1 by normalization
        } else {
            (nf * (cum - u)).ceil().clamp(0.0, nf) as usize
        };
        counts[i] = f - prev;
        prev = f;
    }
    counts
}
