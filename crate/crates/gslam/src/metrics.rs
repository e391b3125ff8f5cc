//! Scoring and reporting: trajectory error against sparse position
//! fixes, how tightly map mass hugs the true obstacles, and per-step
//! wall time.

use crate::error::{Error, Result};
use crate::geometry::{Point2D, Pose2D};
use crate::grid2d::Grid2D;
use crate::map::ScatterMap;
use crate::world::World;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionError {
    pub mean_m: f64,
    pub rmse_m: f64,
}

/// Euclidean error of the estimate against reference positions, the
/// reference linearly interpolated at each estimate timestamp. Estimate
/// samples outside the reference's time span are ignored; if none
/// remain the spans do not overlap.
pub fn position_error(
    estimate: &[(f64, Pose2D)],
    reference: &[(f64, Point2D)],
) -> Result<PositionError> {
    assert!(
        reference.windows(2).all(|w| w[0].0 <= w[1].0),
        "position_error: reference not sorted by time"
    );
    if reference.is_empty() || estimate.is_empty() {
        return Err(Error::NoTimeOverlap);
    }
    let t_lo = reference[0].0;
    let t_hi = reference[reference.len() - 1].0;
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &(t, pose) in estimate {
        if t < t_lo || t > t_hi {
            continue;
        }
        let i = reference.partition_point(|&(rt, _)| rt <= t);
        let want = if i == 0 {
            reference[0].1
        } else if i == reference.len() {
            reference[i - 1].1
        } else {
            let (t0, p0) = reference[i - 1];
            let (t1, p1) = reference[i];
            let lam = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            Point2D::new(p0.x + lam * (p1.x - p0.x), p0.y + lam * (p1.y - p0.y))
        };
        let e = pose.position().distance(want);
        sum += e;
        sum_sq += e * e;
        n += 1;
    }
    if n == 0 {
        return Err(Error::NoTimeOverlap);
    }
    Ok(PositionError {
        mean_m: sum / n as f64,
        rmse_m: (sum_sq / n as f64).sqrt(),
    })
}

/// Fraction of the map's probability mass lying within `radius` of any
/// obstacle surface. An empty map concentrates nothing.
pub fn map_concentration(map: &ScatterMap, world: &World, radius: f64) -> f64 {
    assert!(world.obstacle_count() > 0, "map_concentration: empty world");
    assert!(radius >= 0.0, "map_concentration: negative radius");
    let mut total = 0.0;
    let mut near = 0.0;
    for p in map.points() {
        total += p.prob;
        if world.distance_to_obstacles(p.location) <= radius {
            near += p.prob;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        near / total
    }
}

/// Fraction of a grid's mass in cells whose center lies within `radius`
/// of any obstacle surface. The occupancy-grid analogue of
/// `map_concentration`; a zero grid concentrates nothing.
pub fn grid_concentration(grid: &Grid2D, world: &World, radius: f64) -> f64 {
    assert!(world.obstacle_count() > 0, "grid_concentration: empty world");
    assert!(radius >= 0.0, "grid_concentration: negative radius");
    let mut total = 0.0;
    let mut near = 0.0;
    for row in 0..grid.rows {
        for col in 0..grid.cols {
            let v = grid.get(col, row);
            total += v;
            if world.distance_to_obstacles(grid.center_of(col, row)) <= radius {
                near += v;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        near / total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingStats {
    pub mean_ms: f64,
    pub p95_ms: f64,
}

/// Mean and 95th percentile (nearest-rank) of per-step wall times, with
/// the first five steps dropped as warm-up.
pub fn step_timing(step_ms: &[f64]) -> TimingStats {
    assert!(step_ms.len() >= 10, "step_timing: need at least 10 steps");
    let body = &step_ms[5..];
    let mean = body.iter().sum::<f64>() / body.len() as f64;
    let mut sorted = body.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let rank = (0.95 * sorted.len() as f64).ceil() as usize;
    TimingStats {
        mean_ms: mean,
        p95_ms: sorted[rank.max(1) - 1],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares y = slope·x + intercept with the coefficient
/// of determination.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len(), "linear_fit: length mismatch");
    assert!(xs.len() >= 2, "linear_fit: need at least two samples");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    assert!(sxx > 0.0, "linear_fit: degenerate x values");
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r2 = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    LinearFit {
        slope,
        intercept,
        r2,
    }
}

/// One benchmark table row.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub n: usize,
    pub m: usize,
    pub mean_step_ms: f64,
    pub mean_err_m: f64,
    pub rmse_m: f64,
    pub concentration: f64,
}

pub const REPORT_HEADER: &str = "method,N,M,mean_step_ms,mean_err_m,rmse_m,concentration";

pub fn write_report(rows: &[ReportRow], path: &Path) -> Result<()> {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.method, r.n, r.m, r.mean_step_ms, r.mean_err_m, r.rmse_m, r.concentration
        )
        .unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<Vec<ReportRow>> {
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == REPORT_HEADER => {}
        other => {
            return Err(parse_err(
                1,
                format!("expected header {REPORT_HEADER:?}, got {:?}", other.map(|(_, h)| h)),
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split(',').collect();
        if cols.len() != 7 {
            return Err(parse_err(line, format!("expected 7 columns, got {}", cols.len())));
        }
        let num = |s: &str, name: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| parse_err(line, format!("{name}: not a number: {s:?}")))
        };
        rows.push(ReportRow {
            method: cols[0].to_string(),
            n: num(cols[1], "N")? as usize,
            m: num(cols[2], "M")? as usize,
            mean_step_ms: num(cols[3], "mean_step_ms")?,
            mean_err_m: num(cols[4], "mean_err_m")?,
            rmse_m: num(cols[5], "rmse_m")?,
            concentration: num(cols[6], "concentration")?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};
    use rand::Rng;

    fn stamped(points: &[(f64, f64, f64)]) -> Vec<(f64, Pose2D)> {
        points
            .iter()
            .map(|&(t, x, y)| (t, Pose2D::new(x, y, 0.0)))
            .collect()
    }

    fn refs(points: &[(f64, f64, f64)]) -> Vec<(f64, Point2D)> {
        points.iter().map(|&(t, x, y)| (t, Point2D::new(x, y))).collect()
    }

    #[test]
    fn exact_estimate_scores_zero() {
        let series = [(0.0, 1.0, 2.0), (1.0, 3.0, 4.0), (2.0, 5.0, 6.0)];
        let e = position_error(&stamped(&series), &refs(&series)).unwrap();
        assert_eq!(e.mean_m, 0.0);
        assert_eq!(e.rmse_m, 0.0);
    }

    #[test]
    fn constant_offset_scores_itself() {
        let truth = [(0.0, 0.0, 0.0), (1.0, 1.0, 0.0), (2.0, 2.0, 0.0)];
        let est: Vec<(f64, Pose2D)> = stamped(&truth)
            .iter()
            .map(|&(t, p)| (t, Pose2D::new(p.x, p.y + 1.0, 0.0)))
            .collect();
        let e = position_error(&est, &refs(&truth)).unwrap();
        assert!((e.mean_m - 1.0).abs() < 1e-12);
        assert!((e.rmse_m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_offsets_match_hand_arithmetic() {
        // errors {0, 1, 2} → mean 1, rmse sqrt(5/3)
        let truth = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (2.0, 0.0, 0.0)];
        let est = stamped(&[(0.0, 0.0, 0.0), (1.0, 1.0, 0.0), (2.0, 0.0, 2.0)]);
        let e = position_error(&est, &refs(&truth)).unwrap();
        assert!((e.mean_m - 1.0).abs() < 1e-12);
        assert!((e.rmse_m - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reference_is_interpolated_between_fixes() {
        let truth = [(0.0, 0.0, 0.0), (2.0, 2.0, 0.0)];
        let est = stamped(&[(1.0, 1.0, 1.0)]);
        let e = position_error(&est, &refs(&truth)).unwrap();
        assert!((e.mean_m - 1.0).abs() < 1e-12, "interpolated x should match");
    }

    #[test]
    fn disjoint_spans_error_out() {
        let truth = refs(&[(10.0, 0.0, 0.0), (11.0, 0.0, 0.0)]);
        let est = stamped(&[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)]);
        assert!(matches!(
            position_error(&est, &truth),
            Err(Error::NoTimeOverlap)
        ));
        assert!(matches!(
            position_error(&[], &truth),
            Err(Error::NoTimeOverlap)
        ));
    }

    #[test]
    fn rigid_translation_leaves_error_unchanged() {
        let mut rng = substream(80, Purpose::Resample, 0, 0);
        for _ in 0..20 {
            let n = rng.random_range(2..30);
            let truth: Vec<(f64, f64, f64)> = (0..n)
                .map(|k| (k as f64, rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
                .collect();
            let est: Vec<(f64, f64, f64)> = truth
                .iter()
                .map(|&(t, x, y)| (t, x + rng.random_range(-1.0..1.0), y + rng.random_range(-1.0..1.0)))
                .collect();
            let (dx, dy) = (7.25, -3.5);
            let shift = |s: &[(f64, f64, f64)]| -> Vec<(f64, f64, f64)> {
                s.iter().map(|&(t, x, y)| (t, x + dx, y + dy)).collect()
            };
            let a = position_error(&stamped(&est), &refs(&truth)).unwrap();
            let b = position_error(&stamped(&shift(&est)), &refs(&shift(&truth))).unwrap();
            assert!((a.mean_m - b.mean_m).abs() < 1e-9);
            assert!((a.rmse_m - b.rmse_m).abs() < 1e-9);
        }
    }

    fn map_of(points: &[(f64, f64, f64)]) -> ScatterMap {
        ScatterMap::from_points(
            1.0,
            points
                .iter()
                .map(|&(x, y, p)| crate::map::MapPoint {
                    location: Point2D::new(x, y),
                    prob: p,
                }),
        )
    }

    #[test]
    fn concentration_trivial_splits() {
        let w = crate::world::toy_world(); // wall at x=8, post at (4,4)
        let on = map_of(&[(8.0, 0.0, 0.5), (4.0, 4.4, 0.5)]);
        assert_eq!(map_concentration(&on, &w, 0.5), 1.0);
        let off = map_of(&[(0.0, 0.0, 1.0), (-2.0, -5.0, 1.0)]);
        assert_eq!(map_concentration(&off, &w, 0.5), 0.0);
        let half = map_of(&[(8.0, 0.0, 0.25), (0.0, 0.0, 0.25), (0.1, 0.0, 0.5)]);
        assert!((map_concentration(&half, &w, 0.5) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn grid_concentration_splits_by_cell_center() {
        let w = crate::world::toy_world(); // wall x=8 spans y in [-6, 6]
        let mut g = Grid2D::zeros(1, 2, 6.0, -1.0, 1.0);
        // centers: (6.5, -0.5) is 1.5 m off the wall, (7.5, -0.5) is 0.5 m
        *g.get_mut(0, 0) = 3.0;
        *g.get_mut(1, 0) = 1.0;
        assert!((grid_concentration(&g, &w, 0.5) - 0.25).abs() < 1e-12);
        assert_eq!(grid_concentration(&Grid2D::zeros(1, 2, 6.0, -1.0, 1.0), &w, 0.5), 0.0);
    }

    #[test]
    fn concentration_survives_renormalization() {
        let w = crate::world::toy_world();
        let mut m = map_of(&[(8.0, 0.2, 3.0), (1.0, 1.0, 1.0)]);
        let before = map_concentration(&m, &w, 0.5);
        m.renormalize().unwrap();
        let after = map_concentration(&m, &w, 0.5);
        assert!((before - after).abs() < 1e-12);
        assert!((before - 0.75).abs() < 1e-12);
    }

    #[test]
    fn timing_mean_and_warmup() {
        let trace: Vec<f64> = std::iter::repeat(1000.0)
            .take(5)
            .chain(std::iter::repeat(10.0).take(10))
            .collect();
        let stats = step_timing(&trace);
        assert!((stats.mean_ms - 10.0).abs() < 1e-12, "warm-up not excluded");
        assert_eq!(stats.p95_ms, 10.0);
    }

    #[test]
    fn p95_shrugs_off_one_outlier() {
        let mut trace = vec![10.0; 45];
        trace[44] = 5000.0;
        let stats = step_timing(&trace);
        assert_eq!(stats.p95_ms, 10.0);
        assert!(stats.mean_ms > 10.0);
    }

    #[test]
    fn fit_recovers_an_exact_line() {
        let xs = [2.0, 8.0, 30.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.5 * x + 1.25).collect();
        let fit = linear_fit(&xs, &ys);
        assert!((fit.slope - 3.5).abs() < 1e-12);
        assert!((fit.intercept - 1.25).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_sees_noise_as_poor_r2() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [5.0, -5.0, 5.0, -5.0];
        let fit = linear_fit(&xs, &ys);
        assert!(fit.r2 < 0.5, "r2 {}", fit.r2);
    }

    #[test]
    fn report_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        let rows = vec![
            ReportRow {
                method: "gslam".into(),
                n: 8,
                m: 10,
                mean_step_ms: 81.25,
                mean_err_m: 0.41,
                rmse_m: 0.5,
                concentration: 0.93,
            },
            ReportRow {
                method: "grid".into(),
                n: 8,
                m: 0,
                mean_step_ms: 12.0,
                mean_err_m: 1.1,
                rmse_m: 1.3,
                concentration: 0.4,
            },
        ];
        write_report(&rows, &path).unwrap();
        assert_eq!(read_report(&path).unwrap(), rows);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(REPORT_HEADER));
    }

    #[test]
    fn report_reader_names_bad_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        std::fs::write(&path, format!("{REPORT_HEADER}\ngslam,8,10,1,2,3\n")).unwrap();
        let err = read_report(&path).unwrap_err().to_string();
        assert!(err.contains(":2:") && err.contains("7 columns"), "got: {err}");
    }
}
