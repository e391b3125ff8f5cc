//! The scattered-point probability map.
//!
//! The map is a set of weighted points in continuous space; the weights
//! form a probability distribution over where obstacles are. Each sensor
//! return updates the distribution by Bayes' rule,
//!
//! ```text
//! prob_k <- q_k * prob_k / Z,   Z = sum_j q_j * prob_j,
//! ```
//!
//! where `q_k` is the measurement likelihood at point k. Evaluating `q`
//! for every point on every beam would make the update quadratic in map
//! size, so points statistically incompatible with the beam (outside its
//! gate) receive the neutral likelihood `q_neutral`, defined as the
//! prior-weighted mean of the in-gate `q` values. Neutral scoring leaves
//! the relative masses of out-of-gate points unchanged, which permits a
//! key representation trick: masses are stored as `raw * scale` with one
//! shared `scale`, an update rewrites only the raw values inside the gate
//! plus the scalar, and the whole map never needs to be touched. With the
//! neutral choice the update also leaves total mass exactly normalized.

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Point2D, Pose2D, Rect};
use crate::grid2d::Grid2D;
use crate::sensor::{inverse_measurement, sample_measurement, RangeBearing, ResidualDensity, SensorNoise};
use rand::Rng;
use std::collections::HashMap;
use std::f64::consts::PI;

/// One map point: a location hypothesis and its probability mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapPoint {
    pub location: Point2D,
    pub prob: f64,
}

/// Gating of likelihood evaluation around a beam.
#[derive(Debug, Clone, Copy)]
pub struct GateConfig {
    /// Half-width of the gate in standard deviations, both axes.
    pub n_sigma: f64,
    /// In-gate likelihoods are floored at this fraction of their
    /// prior-weighted mean, keeping badly-fitting gated points alive.
    /// Zero disables the floor.
    pub floor_ratio: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            n_sigma: 3.0,
            floor_ratio: 1e-6,
        }
    }
}

/// Inverse-distance-weighted interpolation of priors for new points.
#[derive(Debug, Clone, Copy)]
pub struct InterpConfig {
    /// Number of nearest neighbors averaged.
    pub neighbors: usize,
    /// Neighborhood radius; past it a point contributes nothing.
    pub radius: f64,
}

impl Default for InterpConfig {
    fn default() -> Self {
        Self {
            neighbors: 8,
            radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Stored {
    loc: Point2D,
    raw: f64,
}

/// The scattered-point map. Point masses are materialized as
/// `raw * scale`; see the module docs for why.
///
/// Handles returned by queries are slot indices into insertion order;
/// pruning compacts slots but preserves their relative order.
#[derive(Debug, Clone)]
pub struct ScatterMap {
    points: Vec<Stored>,
    /// Cell coordinate -> slots of the points inside that cell.
    index: HashMap<(i32, i32), Vec<u32>>,
    cell: f64,
    /// Occupied-cell bounding box, kept exact by insert and prune.
    cell_min: (i32, i32),
    cell_max: (i32, i32),
    raw_total: f64,
    scale: f64,
}

impl ScatterMap {
    /// An empty map whose spatial index uses square cells of `cell` meters.
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "ScatterMap: bad cell size {cell}");
        Self {
            points: Vec::new(),
            index: HashMap::new(),
            cell,
            cell_min: (i32::MAX, i32::MAX),
            cell_max: (i32::MIN, i32::MIN),
            raw_total: 0.0,
            scale: 1.0,
        }
    }

    /// A map holding the given points, masses taken as-is (not normalized).
    pub fn from_points(cell: f64, pts: impl IntoIterator<Item = MapPoint>) -> Self {
        let mut m = Self::new(cell);
        for p in pts {
            m.insert(p.location, p.prob);
        }
        m
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sum of all point masses.
    pub fn total_mass(&self) -> f64 {
        if self.points.is_empty() {
            0.0
        } else {
            self.raw_total * self.scale
        }
    }

    pub fn point(&self, slot: usize) -> MapPoint {
        let s = &self.points[slot];
        MapPoint {
            location: s.loc,
            prob: s.raw * self.scale,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = MapPoint> + '_ {
        self.points.iter().map(|s| MapPoint {
            location: s.loc,
            prob: s.raw * self.scale,
        })
    }

    /// The highest-mass point; ties go to the earliest slot.
    pub fn max_point(&self) -> Option<MapPoint> {
        let slot = self.argmax()?;
        Some(self.point(slot))
    }

    fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in self.points.iter().enumerate() {
            match best {
                Some((_, raw)) if raw >= s.raw => {}
                _ => best = Some((i, s.raw)),
            }
        }
        best.map(|(i, _)| i)
    }

    fn cell_of(&self, loc: Point2D) -> (i32, i32) {
        (
            (loc.x / self.cell).floor() as i32,
            (loc.y / self.cell).floor() as i32,
        )
    }

    /// Add a point with the given mass; returns its slot.
    pub fn insert(&mut self, loc: Point2D, prob: f64) -> usize {
        assert!(prob >= 0.0 && prob.is_finite(), "ScatterMap::insert: bad mass {prob}");
        let slot = self.points.len();
        let raw = prob / self.scale;
        self.points.push(Stored { loc, raw });
        self.raw_total += raw;
        let c = self.cell_of(loc);
        self.index.entry(c).or_default().push(slot as u32);
        self.cell_min = (self.cell_min.0.min(c.0), self.cell_min.1.min(c.1));
        self.cell_max = (self.cell_max.0.max(c.0), self.cell_max.1.max(c.1));
        slot
    }

    /// Slots of all points inside the beam gate: range within
    /// `n_sigma * range_std` of `z.d` and bearing within
    /// `n_sigma * bearing_std` of `z.theta`. Ascending slot order.
    pub fn query_gate(
        &self,
        pose: Pose2D,
        z: RangeBearing,
        noise: &SensorNoise,
        gate: &GateConfig,
    ) -> Vec<usize> {
        let wd = gate.n_sigma * noise.range_std;
        let wt = gate.n_sigma * noise.bearing_std;
        let wt_eff = wt.min(PI);
        let lo = (z.d - wd).max(0.0);
        let hi = z.d + wd;
        let alpha = normalize_angle(pose.phi + z.theta);

        let mut out = Vec::new();
        self.for_cells_in_world_box(self.gate_bbox(pose, lo, hi, alpha, wt_eff), |slot, s| {
            let dx = s.loc.x - pose.x;
            let dy = s.loc.y - pose.y;
            let r = dx.hypot(dy);
            if (r - z.d).abs() > wd {
                return;
            }
            if wt_eff < PI && normalize_angle(dy.atan2(dx) - alpha).abs() > wt_eff {
                return;
            }
            out.push(slot);
        });
        out.sort_unstable();
        out
    }

    /// World-coordinate bounding box of the gate's annulus sector.
    fn gate_bbox(&self, pose: Pose2D, lo: f64, hi: f64, alpha: f64, wt: f64) -> (Point2D, Point2D) {
        if wt >= PI {
            return (
                Point2D::new(pose.x - hi, pose.y - hi),
                Point2D::new(pose.x + hi, pose.y + hi),
            );
        }
        let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
        let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut take = |x: f64, y: f64| {
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
        };
        for rho in [lo, hi] {
            for dl in [-wt, wt] {
                let (s, c) = (alpha + dl).sin_cos();
                take(pose.x + rho * c, pose.y + rho * s);
            }
        }
        // the arc bulges past its endpoints wherever a cardinal direction
        // falls inside the wedge
        for k in 0..4 {
            let ang = k as f64 * PI / 2.0;
            if normalize_angle(ang - alpha).abs() <= wt {
                let (s, c) = ang.sin_cos();
                take(pose.x + hi * c, pose.y + hi * s);
            }
        }
        if lo == 0.0 {
            take(pose.x, pose.y);
        }
        (Point2D::new(min_x, min_y), Point2D::new(max_x, max_y))
    }

    /// Run `f` over every stored point whose cell intersects the box,
    /// in ascending cell order. The box is clamped to occupied cells.
    fn for_cells_in_world_box(&self, (min, max): (Point2D, Point2D), mut f: impl FnMut(usize, &Stored)) {
        if self.points.is_empty() {
            return;
        }
        let c_lo = self.cell_of(min);
        let c_hi = self.cell_of(max);
        let x0 = c_lo.0.max(self.cell_min.0);
        let x1 = c_hi.0.min(self.cell_max.0);
        let y0 = c_lo.1.max(self.cell_min.1);
        let y1 = c_hi.1.min(self.cell_max.1);
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                if let Some(bucket) = self.index.get(&(cx, cy)) {
                    for &slot in bucket {
                        f(slot as usize, &self.points[slot as usize]);
                    }
                }
            }
        }
    }

    /// Bayes update of the map for one sensor return; returns the
    /// evidence `Z = sum_j q_j * prob_j`, the beam's contribution to the
    /// particle's importance weight.
    ///
    /// When nothing lies in the gate the observation is unexplained by the
    /// map: masses are left in place (renormalized) and the returned
    /// evidence is the density at the gate boundary, the largest value any
    /// out-of-gate point could have scored.
    pub fn beam_update(
        &mut self,
        pose: Pose2D,
        z: RangeBearing,
        noise: &SensorNoise,
        gate: &GateConfig,
    ) -> Result<f64> {
        if self.points.is_empty() {
            return Err(Error::EmptyMap);
        }
        let dz = ResidualDensity::new(noise)?;
        let gate_slots = self.query_gate(pose, z, noise, gate);
        let total_before = self.raw_total * self.scale;

        if gate_slots.is_empty() {
            let q_bound = dz.eval(gate.n_sigma * noise.range_std, gate.n_sigma * noise.bearing_std);
            let marginal = q_bound * total_before;
            if !(marginal >= 1e-300) {
                return Err(Error::MarginalUnderflow(marginal));
            }
            self.scale = 1.0 / self.raw_total;
            return Ok(marginal);
        }

        // likelihood of each gated point
        let mut q = Vec::with_capacity(gate_slots.len());
        let alpha = pose.phi + z.theta;
        let mut raw_gate = 0.0;
        let mut qraw_gate = 0.0;
        for &slot in &gate_slots {
            let s = &self.points[slot];
            let dx = s.loc.x - pose.x;
            let dy = s.loc.y - pose.y;
            let zd = z.d - dx.hypot(dy);
            let zt = normalize_angle(alpha - dy.atan2(dx));
            let qk = dz.eval(zd, zt);
            q.push(qk);
            raw_gate += s.raw;
            qraw_gate += qk * s.raw;
        }

        // floor at a fraction of the prior-weighted mean, then recompute
        // the mean over the floored values: that mean is the neutral
        // likelihood granted to every out-of-gate point
        if gate.floor_ratio > 0.0 && raw_gate > 0.0 {
            let q_floor = (qraw_gate / raw_gate) * gate.floor_ratio;
            qraw_gate = 0.0;
            for (qk, &slot) in q.iter_mut().zip(&gate_slots) {
                *qk = qk.max(q_floor);
                qraw_gate += *qk * self.points[slot].raw;
            }
        }

        let marginal = self.scale * qraw_gate * (self.raw_total / raw_gate);
        if !(marginal >= 1e-300) || !marginal.is_finite() {
            return Err(Error::MarginalUnderflow(marginal));
        }

        // posterior within the gate; out-of-gate masses keep their raw
        // values and are renormalized purely through the scale
        let factor = raw_gate / qraw_gate;
        let mut raw_gate_after = 0.0;
        for (qk, &slot) in q.iter().zip(&gate_slots) {
            let s = &mut self.points[slot];
            s.raw *= qk * factor;
            raw_gate_after += s.raw;
        }
        self.raw_total += raw_gate_after - raw_gate;
        self.scale = 1.0 / self.raw_total;
        Ok(marginal)
    }

    /// Draw `count` fresh points from the measurement's noise distribution
    /// without touching the map: each comes back with its interpolated
    /// prior `p̂` and the measurement density `q̂` at its own draw, ready
    /// for `insert_drawn`. Splitting the draw from the insertion lets a
    /// caller process a whole scan against the pre-scan map before any
    /// fresh point can influence a later beam's evidence.
    pub fn draw_points<R: Rng>(
        &self,
        pose: Pose2D,
        z: RangeBearing,
        count: usize,
        noise: &SensorNoise,
        interp: &InterpConfig,
        rng: &mut R,
    ) -> Result<Vec<(MapPoint, f64)>> {
        assert!(count >= 1, "draw_points: count must be at least 1");
        // a singular covariance makes every draw exact: flat q̂
        let dz = ResidualDensity::new(noise).ok();
        let mut fresh = Vec::with_capacity(count);
        for _ in 0..count {
            let zhat = sample_measurement(z, noise, rng)?;
            let location = inverse_measurement(pose, zhat);
            let prob = self.interpolate_prior(location, interp);
            let q = dz
                .as_ref()
                .map_or(1.0, |d| d.eval(zhat.d - z.d, normalize_angle(zhat.theta - z.theta)));
            fresh.push((MapPoint { location, prob }, q));
        }
        Ok(fresh)
    }

    /// Add a drawn batch with mass `q̂·p̂ / q̄` where `q̄` is the batch's
    /// prior-weighted mean q̂: the batch joins carrying exactly its total
    /// prior mass, internally reshaped toward the draws the measurement
    /// density rates highest. Degenerate batches (all-zero priors or
    /// densities) fall back to the bare priors.
    pub fn insert_drawn(&mut self, batch: &[(MapPoint, f64)]) {
        let prior_total: f64 = batch.iter().map(|(p, _)| p.prob).sum();
        let qp_total: f64 = batch.iter().map(|(p, q)| q * p.prob).sum();
        let norm = if prior_total > 0.0 && qp_total > 0.0 {
            qp_total / prior_total
        } else {
            1.0
        };
        for (p, q) in batch {
            self.insert(p.location, q * p.prob / norm);
        }
    }

    /// Draw `count` fresh points from the measurement's noise distribution
    /// and add them to the map (see `draw_points` and `insert_drawn`); the
    /// fresh points pass through the same Bayes multiplication as existing
    /// ones, with the batch mean as the normalizer. The drawn points are
    /// returned with their priors.
    pub fn generate_points<R: Rng>(
        &mut self,
        pose: Pose2D,
        z: RangeBearing,
        count: usize,
        noise: &SensorNoise,
        interp: &InterpConfig,
        rng: &mut R,
    ) -> Result<Vec<MapPoint>> {
        let batch = self.draw_points(pose, z, count, noise, interp, rng)?;
        self.insert_drawn(&batch);
        Ok(batch.into_iter().map(|(p, _)| p).collect())
    }

    /// Prior mass for a hypothetical point at `loc`: inverse-distance-
    /// weighted (power 2) mean of the nearest `interp.neighbors` masses
    /// within `interp.radius`. A point exactly at `loc` short-circuits to
    /// its own mass; an empty neighborhood falls back to `1/(len+1)`.
    pub fn interpolate_prior(&self, loc: Point2D, interp: &InterpConfig) -> f64 {
        let r2 = interp.radius * interp.radius;
        let mut near: Vec<(f64, usize)> = Vec::new();
        let bbox = (
            Point2D::new(loc.x - interp.radius, loc.y - interp.radius),
            Point2D::new(loc.x + interp.radius, loc.y + interp.radius),
        );
        let mut exact: Option<usize> = None;
        self.for_cells_in_world_box(bbox, |slot, s| {
            let d2 = (s.loc.x - loc.x).powi(2) + (s.loc.y - loc.y).powi(2);
            if d2 <= r2 {
                if d2 < 1e-24 {
                    match exact {
                        Some(e) if e <= slot => {}
                        _ => exact = Some(slot),
                    }
                }
                near.push((d2, slot));
            }
        });
        if let Some(slot) = exact {
            return self.points[slot].raw * self.scale;
        }
        if near.is_empty() {
            return 1.0 / (self.points.len() + 1) as f64;
        }
        near.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        near.truncate(interp.neighbors.max(1));
        let mut wsum = 0.0;
        let mut psum = 0.0;
        for &(d2, slot) in &near {
            let w = 1.0 / d2;
            wsum += w;
            psum += w * self.points[slot].raw * self.scale;
        }
        psum / wsum
    }

    /// Drop every point whose mass falls below `p_thr_rel / len` (the
    /// threshold is relative to uniform mass, so it tracks map growth),
    /// then renormalize. The final point is never dropped: if all fall
    /// below the threshold the heaviest one survives.
    pub fn prune(&mut self, p_thr_rel: f64) {
        assert!(p_thr_rel >= 0.0, "prune: negative threshold {p_thr_rel}");
        if self.points.is_empty() {
            return;
        }
        let raw_thr = p_thr_rel / self.points.len() as f64 / self.scale;
        let any_survivor = self.points.iter().any(|s| s.raw >= raw_thr);
        let keep_only = if any_survivor { None } else { self.argmax() };

        let old = std::mem::take(&mut self.points);
        self.index.clear();
        self.cell_min = (i32::MAX, i32::MAX);
        self.cell_max = (i32::MIN, i32::MIN);

        // rebuild, rescaling raw masses so their maximum is 1: repeated
        // beam updates inflate raw magnitudes and this is the one place
        // the whole map is touched anyway
        let raw_max = old
            .iter()
            .enumerate()
            .filter(|(i, s)| keep_only.map_or(s.raw >= raw_thr, |k| *i == k))
            .map(|(_, s)| s.raw)
            .fold(0.0f64, f64::max);
        let rescale = if raw_max > 0.0 { 1.0 / raw_max } else { 1.0 };

        self.raw_total = 0.0;
        for (i, s) in old.into_iter().enumerate() {
            let keep = keep_only.map_or(s.raw >= raw_thr, |k| i == k);
            if !keep {
                continue;
            }
            let slot = self.points.len();
            let raw = s.raw * rescale;
            self.points.push(Stored { loc: s.loc, raw });
            self.raw_total += raw;
            let c = self.cell_of(s.loc);
            self.index.entry(c).or_default().push(slot as u32);
            self.cell_min = (self.cell_min.0.min(c.0), self.cell_min.1.min(c.1));
            self.cell_max = (self.cell_max.0.max(c.0), self.cell_max.1.max(c.1));
        }
        self.scale = 1.0 / self.raw_total;
    }

    /// Scale masses so they sum to one.
    pub fn renormalize(&mut self) -> Result<()> {
        let total: f64 = self.points.iter().map(|s| s.raw).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::ZeroMass);
        }
        self.raw_total = total;
        self.scale = 1.0 / total;
        Ok(())
    }

    /// Accumulate point masses into cells of a fresh grid covering
    /// `bounds` at the given resolution. Mass outside the grid is dropped.
    pub fn export_density_grid(&self, resolution: f64, bounds: Rect) -> Grid2D {
        let cols = ((bounds.width() / resolution).ceil() as usize).max(1);
        let rows = ((bounds.height() / resolution).ceil() as usize).max(1);
        let mut grid = Grid2D::zeros(rows, cols, bounds.min.x, bounds.min.y, resolution);
        for p in self.points() {
            let (col, row) = grid.cell_of(p.location);
            if grid.in_bounds(col, row) {
                *grid.get_mut(col as usize, row as usize) += p.prob;
            }
        }
        grid
    }
}
