//! Log-odds occupancy grid, the baseline map the scattered-point method is
//! compared against. It plugs into the same particle filter: integrate
//! carves scans into the grid, and the endpoint likelihood scores a pose
//! the same way the point map's evidence does.

use crate::geometry::{Point2D, Pose2D, Rect};
use crate::grid2d::Grid2D;
use crate::sensor::{LaserScan, SensorSpec};

/// Update and scoring constants for the grid.
#[derive(Debug, Clone, Copy)]
pub struct GridParams {
    /// Log-odds increment for a cell a beam ended in.
    pub l_occ: f64,
    /// Log-odds increment for cells a beam passed through (negative).
    pub l_free: f64,
    /// Log-odds magnitude cap.
    pub clamp: f64,
    /// Endpoint-likelihood blend: `p_hit * occupancy + p_rand`.
    pub p_hit: f64,
    pub p_rand: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            l_occ: 0.85,
            l_free: -0.4,
            clamp: 10.0,
            p_hit: 0.9,
            p_rand: 0.1,
        }
    }
}

/// Occupancy grid over `bounds`: each cell holds the log odds of being
/// occupied, clamped to `[-clamp, clamp]`; 0 is "unknown".
#[derive(Debug, Clone)]
pub struct OccGrid {
    pub cells: Grid2D,
    pub params: GridParams,
}

impl OccGrid {
    pub fn new(bounds: Rect, resolution: f64, params: GridParams) -> Self {
        let cols = ((bounds.width() / resolution).ceil() as usize).max(1);
        let rows = ((bounds.height() / resolution).ceil() as usize).max(1);
        Self {
            cells: Grid2D::zeros(rows, cols, bounds.min.x, bounds.min.y, resolution),
            params,
        }
    }

    /// Occupancy probability of a cell; cells outside the grid are unknown
    /// (0.5).
    pub fn occupancy_at(&self, p: Point2D) -> f64 {
        let (col, row) = self.cells.cell_of(p);
        if self.cells.in_bounds(col, row) {
            let l = self.cells.get(col as usize, row as usize);
            1.0 / (1.0 + (-l).exp())
        } else {
            0.5
        }
    }

    /// The grid as occupancy probabilities, for the portable export.
    pub fn occupancy_grid(&self) -> Grid2D {
        let mut g = self.cells.clone();
        for v in g.values.iter_mut() {
            *v = 1.0 / (1.0 + (-*v).exp());
        }
        g
    }

    /// Fold every `stride`-th beam of a scan into the grid: traversed
    /// cells are freed, the endpoint cell of a returning beam is occupied.
    /// Beams that saw nothing free the full ray out to max range.
    pub fn integrate(&mut self, pose: Pose2D, scan: &LaserScan, spec: &SensorSpec, stride: usize) {
        let stride = stride.max(1);
        let from = Point2D::new(pose.x, pose.y);
        for i in (0..scan.ranges.len()).step_by(stride) {
            let r = scan.ranges[i];
            let (range, hit) = if spec.is_return(r) {
                (r, true)
            } else if r.is_finite() && r >= spec.max_range {
                (spec.max_range, false)
            } else {
                continue; // negative, zero or non-finite: not a beam
            };
            let ang = pose.phi + spec.beam_angle(i);
            let to = Point2D::new(from.x + range * ang.cos(), from.y + range * ang.sin());
            let cells = ray_cells(&self.cells, from, to);
            let last = cells.len() - 1;
            for (k, &(col, row)) in cells.iter().enumerate() {
                if !self.cells.in_bounds(col, row) {
                    continue;
                }
                let delta = if hit && k == last {
                    self.params.l_occ
                } else {
                    self.params.l_free
                };
                let v = self.cells.get_mut(col as usize, row as usize);
                *v = (*v + delta).clamp(-self.params.clamp, self.params.clamp);
            }
        }
    }

    /// Log likelihood of a scan given the grid: sum over every `stride`-th
    /// returning beam of `ln(p_hit * occupancy(endpoint) + p_rand)`.
    pub fn log_likelihood(&self, pose: Pose2D, scan: &LaserScan, spec: &SensorSpec, stride: usize) -> f64 {
        let stride = stride.max(1);
        let mut log_l = 0.0;
        for i in (0..scan.ranges.len()).step_by(stride) {
            let r = scan.ranges[i];
            if !spec.is_return(r) {
                continue;
            }
            let ang = pose.phi + spec.beam_angle(i);
            let end = Point2D::new(pose.x + r * ang.cos(), pose.y + r * ang.sin());
            log_l += (self.params.p_hit * self.occupancy_at(end) + self.params.p_rand).ln();
        }
        log_l
    }

    /// Linear-domain version of [`Self::log_likelihood`]; underflows to 0
    /// for long scans, so prefer the log form for weighting.
    pub fn likelihood(&self, pose: Pose2D, scan: &LaserScan, spec: &SensorSpec, stride: usize) -> f64 {
        self.log_likelihood(pose, scan, spec, stride).exp()
    }
}

/// Every cell the segment `from -> to` passes through, in traversal order,
/// on the infinite lattice of `grid` (entries may lie outside the grid).
///
/// Incremental traversal: step to whichever cell boundary (vertical or
/// horizontal) the ray crosses next.
fn ray_cells(grid: &Grid2D, from: Point2D, to: Point2D) -> Vec<(i64, i64)> {
    let (mut cx, mut cy) = grid.cell_of(from);
    let (ex, ey) = grid.cell_of(to);
    let mut cells = vec![(cx, cy)];
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    let step_x: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_y: i64 = if dy > 0.0 { 1 } else { -1 };
    // parametric distance to the first vertical / horizontal cell boundary,
    // and per-cell increments
    let next_boundary = |c: i64, step: i64| -> f64 {
        let edge = if step > 0 { c + 1 } else { c };
        edge as f64 * grid.resolution
    };
    let rel_x = from.x - grid.x0;
    let rel_y = from.y - grid.y0;
    let mut t_max_x = if dx == 0.0 {
        f64::INFINITY
    } else {
        (next_boundary(cx, step_x) - rel_x) / dx
    };
    let mut t_max_y = if dy == 0.0 {
        f64::INFINITY
    } else {
        (next_boundary(cy, step_y) - rel_y) / dy
    };
    let t_delta_x = if dx == 0.0 { f64::INFINITY } else { grid.resolution / dx.abs() };
    let t_delta_y = if dy == 0.0 { f64::INFINITY } else { grid.resolution / dy.abs() };

    // the end cell bounds the walk; the iteration cap covers degenerate
    // floating-point corner cases
    let cap = ((ex - cx).abs() + (ey - cy).abs() + 2) as usize;
    for _ in 0..cap {
        if cx == ex && cy == ey {
            break;
        }
        if t_max_x < t_max_y {
            t_max_x += t_delta_x;
            cx += step_x;
        } else {
            t_max_y += t_delta_y;
            cy += step_y;
        }
        cells.push((cx, cy));
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn bounds10() -> Rect {
        Rect::new(Point2D::new(0.0, 0.0), Point2D::new(10.0, 10.0))
    }

    /// Scan with a single forward beam of the given range; the spec's
    /// other two beams point sideways and see nothing.
    fn one_beam(range: f64) -> (LaserScan, SensorSpec) {
        let spec = SensorSpec {
            beams: 3,
            fov: PI,
            max_range: 50.0,
        };
        (LaserScan::new(0.0, vec![f64::INFINITY, range, f64::INFINITY]), spec)
    }

    #[test]
    fn single_forward_beam_frees_path_and_occupies_endpoint() {
        let mut g = OccGrid::new(bounds10(), 1.0, GridParams::default());
        let (scan, spec) = one_beam(2.0);
        g.integrate(Pose2D::new(0.5, 0.5, 0.0), &scan, &spec, 1);
        assert!((g.cells.get(0, 0) - (-0.4)).abs() < 1e-12);
        assert!((g.cells.get(1, 0) - (-0.4)).abs() < 1e-12);
        assert!((g.cells.get(2, 0) - 0.85).abs() < 1e-12);
        // nothing else touched
        let touched: usize = g.cells.values.iter().filter(|v| **v != 0.0).count();
        assert_eq!(touched, 3);
    }

    #[test]
    fn max_range_beam_only_frees() {
        let mut g = OccGrid::new(bounds10(), 1.0, GridParams::default());
        let (scan, spec) = one_beam(50.0); // at max range: no return
        g.integrate(Pose2D::new(0.5, 0.5, 0.0), &scan, &spec, 1);
        assert!(g.cells.values.iter().all(|&v| v <= 0.0), "no cell occupied");
        assert!((g.cells.get(9, 0) - (-0.4)).abs() < 1e-12, "freed to the border");
    }

    #[test]
    fn repeated_scans_saturate_at_the_clamp() {
        let mut g = OccGrid::new(bounds10(), 1.0, GridParams::default());
        let (scan, spec) = one_beam(2.0);
        for _ in 0..40 {
            g.integrate(Pose2D::new(0.5, 0.5, 0.0), &scan, &spec, 1);
        }
        assert_eq!(g.cells.get(2, 0), 10.0);
        assert_eq!(g.cells.get(0, 0), -10.0);
    }

    #[test]
    fn untouched_cells_stay_bitwise_identical() {
        let mut g = OccGrid::new(bounds10(), 0.5, GridParams::default());
        for v in g.cells.values.iter_mut() {
            *v = 0.123456789;
        }
        let before = g.cells.values.clone();
        let (scan, spec) = one_beam(3.0);
        g.integrate(Pose2D::new(0.25, 0.25, 0.3), &scan, &spec, 1);
        let changed: Vec<usize> = g
            .cells
            .values
            .iter()
            .zip(&before)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect();
        assert!(!changed.is_empty());
        // every unchanged cell is bit-identical by construction of the diff
        assert!(changed.len() < before.len());
    }

    #[test]
    fn traversal_matches_slab_intersection_oracle() {
        // a cell is crossed when the ray's parameter interval inside the
        // cell's x-slab and y-slab overlap with positive measure
        let g = Grid2D::zeros(40, 40, -10.0, -10.0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for case in 0..1000 {
            let from = Point2D::new(rng.random_range(-9.9..9.9), rng.random_range(-9.9..9.9));
            let to = Point2D::new(rng.random_range(-9.9..9.9), rng.random_range(-9.9..9.9));
            let mut got = ray_cells(&g, from, to);
            got.sort_unstable();
            got.dedup();

            let dx = to.x - from.x;
            let dy = to.y - from.y;
            let (cf, ct) = (g.cell_of(from), g.cell_of(to));
            let mut want = Vec::new();
            for cx in cf.0.min(ct.0)..=cf.0.max(ct.0) {
                for cy in cf.1.min(ct.1)..=cf.1.max(ct.1) {
                    let xs = g.x0 + cx as f64 * g.resolution;
                    let ys = g.y0 + cy as f64 * g.resolution;
                    let tx = slab_interval(from.x, dx, xs, xs + g.resolution);
                    let ty = slab_interval(from.y, dy, ys, ys + g.resolution);
                    let lo = tx.0.max(ty.0).max(0.0);
                    let hi = tx.1.min(ty.1).min(1.0);
                    if hi - lo > 1e-12 {
                        want.push((cx, cy));
                    }
                }
            }
            want.sort_unstable();
            assert_eq!(got, want, "case {case}: {from:?} -> {to:?}");
        }
    }

    fn slab_interval(p: f64, d: f64, lo: f64, hi: f64) -> (f64, f64) {
        if d == 0.0 {
            if p >= lo && p < hi {
                (f64::NEG_INFINITY, f64::INFINITY)
            } else {
                (f64::INFINITY, f64::NEG_INFINITY)
            }
        } else {
            let a = (lo - p) / d;
            let b = (hi - p) / d;
            (a.min(b), a.max(b))
        }
    }

    #[test]
    fn unexplored_grid_scores_the_uniform_floor() {
        let g = OccGrid::new(bounds10(), 1.0, GridParams::default());
        let (scan, spec) = one_beam(2.0);
        let l = g.likelihood(Pose2D::new(0.5, 0.5, 0.0), &scan, &spec, 1);
        // one return beam at occupancy 0.5: 0.9 * 0.5 + 0.1
        assert!((l - 0.55).abs() < 1e-12, "l={l}");
    }

    #[test]
    fn occupied_endpoints_outscore_free_endpoints() {
        let mut occupied = OccGrid::new(bounds10(), 1.0, GridParams::default());
        let mut freed = OccGrid::new(bounds10(), 1.0, GridParams::default());
        *occupied.cells.get_mut(2, 0) = 10.0;
        *freed.cells.get_mut(2, 0) = -10.0;
        let (scan, spec) = one_beam(2.0);
        let pose = Pose2D::new(0.5, 0.5, 0.0);
        let lo = occupied.likelihood(pose, &scan, &spec, 1);
        let lf = freed.likelihood(pose, &scan, &spec, 1);
        assert!(lo > lf);
        // hand evaluation at saturation
        let sat = 1.0 / (1.0 + (-10.0f64).exp());
        assert!((lo - (0.9 * sat + 0.1)).abs() < 1e-12);
        assert!((lf - (0.9 * (1.0 - sat) + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn known_cell_hand_computation() {
        let mut g = OccGrid::new(bounds10(), 1.0, GridParams::default());
        *g.cells.get_mut(2, 0) = 0.85;
        let (scan, spec) = one_beam(2.0);
        let occ = 1.0 / (1.0 + (-0.85f64).exp());
        let l = g.likelihood(Pose2D::new(0.5, 0.5, 0.0), &scan, &spec, 1);
        assert!((l - (0.9 * occ + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn touched_cell_count_never_shrinks() {
        let mut g = OccGrid::new(bounds10(), 0.5, GridParams::default());
        let spec = SensorSpec {
            beams: 21,
            fov: PI,
            max_range: 12.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let mut prev = 0usize;
        for _ in 0..30 {
            let pose = Pose2D::new(
                rng.random_range(1.0..9.0),
                rng.random_range(1.0..9.0),
                rng.random_range(-3.0..3.0),
            );
            let ranges: Vec<f64> = (0..21).map(|_| rng.random_range(0.5..13.0)).collect();
            g.integrate(pose, &LaserScan::new(0.0, ranges), &spec, 1);
            let touched = g.cells.values.iter().filter(|v| **v != 0.0).count();
            assert!(touched >= prev);
            prev = touched;
        }
        assert!(prev > 0);
    }

    #[test]
    fn occupancy_probabilities_round_trip_the_logit() {
        let mut g = OccGrid::new(bounds10(), 1.0, GridParams::default());
        *g.cells.get_mut(3, 4) = 2.0;
        *g.cells.get_mut(1, 1) = -1.5;
        let probs = g.occupancy_grid();
        assert!((probs.get(3, 4) - 1.0 / (1.0 + (-2.0f64).exp())).abs() < 1e-12);
        assert!((probs.get(1, 1) - 1.0 / (1.0 + 1.5f64.exp())).abs() < 1e-12);
        assert!((probs.get(0, 0) - 0.5).abs() < 1e-12);
        assert!((g.occupancy_at(Point2D::new(3.5, 4.5)) - probs.get(3, 4)).abs() < 1e-12);
        assert_eq!(g.occupancy_at(Point2D::new(-5.0, 0.0)), 0.5);
    }
}
