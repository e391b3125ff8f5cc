//! The `gslam` command line: simulate a bundled world into a sensor log,
//! replay a log through a filter, sweep a benchmark grid, and rasterize
//! point maps into portable density grids.
//!
//! Exit codes: 0 success, 2 usage error, 3 data or configuration error,
//! 4 divergence (every particle dead, or a benchmark with no usable row).
//!
//! Settings resolve in three layers: built-in defaults, then `--config`
//! file, then command-line flags (`--set key=value` first, named flags
//! last).

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::geometry::{Point2D, Pose2D, Rect};
use crate::logio::{
    read_log, read_points_csv, write_log, write_points_csv, write_trajectory_csv, LogRecord,
};
use crate::map::ScatterMap;
use crate::metrics::{
    self, grid_concentration, map_concentration, position_error, write_report, ReportRow,
};
use crate::runner::{run_grid, run_scatter};
use crate::world::{
    default_schedule, default_world, simulate, toy_schedule, toy_world, Schedule, SimOptions,
    World,
};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "gslam",
    version,
    about = "Particle-filter SLAM over scattered-point probability maps"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Simulate a bundled world into a sensor log
    Sim(SimArgs),
    /// Replay a log through the filter and write trajectory, map and metrics
    Run(RunArgs),
    /// Sweep particle and generation counts, one report row per cell
    Bench(BenchArgs),
    /// Rasterize a map-points CSV into a portable density grid
    ExportGrid(ExportGridArgs),
}

/// Layered settings shared by every subcommand.
#[derive(Args, Debug)]
struct Overrides {
    /// Configuration file of `key = value` lines
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override any configuration key, e.g. --set gate.n_sigma=2.5
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Overrides {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => crate::config::read_config(path)?,
            None => RunConfig::default(),
        };
        for pair in &self.set {
            let Some((key, value)) = pair.split_once('=') else {
                return Err(Error::Config {
                    field: pair.clone(),
                    reason: "expected key=value".into(),
                });
            };
            cfg.set(key.trim(), value)?;
        }
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct SimArgs {
    /// Bundled world (default | toy)
    #[arg(long)]
    world: Option<String>,
    /// Simulator seed
    #[arg(long)]
    seed: Option<u64>,
    /// Scales every simulated noise standard deviation; 0 gives an exact log
    #[arg(long)]
    noise_scale: Option<f64>,
    /// Steps between scans
    #[arg(long)]
    scan_every: Option<usize>,
    /// Steps between position fixes
    #[arg(long)]
    gps_every: Option<usize>,
    /// Output log path
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Method {
    Gslam,
    Grid,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Input sensor log
    #[arg(long, value_name = "FILE")]
    log: PathBuf,
    /// Output directory, created if missing
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Map representation to run
    #[arg(long, value_enum, default_value = "gslam")]
    method: Method,
    /// Particle count N
    #[arg(long)]
    particles: Option<usize>,
    /// Fresh map points drawn per processed beam M
    #[arg(long)]
    gen_points: Option<usize>,
    /// Filter seed
    #[arg(long)]
    seed: Option<u64>,
    /// Process every k-th beam of each scan
    #[arg(long)]
    beam_stride: Option<usize>,
    /// Cell size of grid maps and the exported density grid, meters
    #[arg(long)]
    grid_resolution: Option<f64>,
    /// World used for grid bounds and concentration scoring
    #[arg(long)]
    world: Option<String>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Particle counts N, comma separated
    #[arg(long, value_delimiter = ',', default_value = "2,8,30")]
    particles_list: Vec<usize>,
    /// Per-beam point counts M, comma separated
    #[arg(long, value_delimiter = ',', default_value = "10")]
    gen_points_list: Vec<usize>,
    /// Seeds, one full simulate-and-run repeat each; rows average over them
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    seeds: Vec<u64>,
    /// Bundled world (default | toy)
    #[arg(long)]
    world: Option<String>,
    /// Scales every simulated noise standard deviation
    #[arg(long)]
    noise_scale: Option<f64>,
    /// Append an occupancy-grid baseline row whose cell count matches the
    /// final point count of the last sweep cell
    #[arg(long)]
    grid_baseline: bool,
    /// Output report CSV
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug)]
struct ExportGridArgs {
    /// Input points CSV with header x,y,prob
    #[arg(long, value_name = "FILE")]
    points: PathBuf,
    /// Cell size, meters
    #[arg(long)]
    resolution: f64,
    /// Output grid file
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Grid extent x0,y0,x1,y1; default is a tight box around the points
    #[arg(long, allow_hyphen_values = true, value_name = "X0,Y0,X1,Y1")]
    bounds: Option<String>,
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here as non-error displays
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.cmd {
        Cmd::Sim(a) => cmd_sim(a),
        Cmd::Run(a) => cmd_run(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::ExportGrid(a) => cmd_export_grid(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}

fn bundled_world(name: &str) -> Result<(World, Schedule)> {
    match name {
        "default" => Ok((default_world(), default_schedule())),
        "toy" => Ok((toy_world(), toy_schedule())),
        other => Err(Error::Config {
            field: "world.name".into(),
            reason: format!("unknown world `{other}` (bundled: default, toy)"),
        }),
    }
}

fn simulate_with(cfg: &RunConfig, world: &World, schedule: &Schedule) -> Result<crate::world::SimRun> {
    let opts = SimOptions {
        scan_every: cfg.scan_every,
        gps_every: cfg.gps_every,
        noise_scale: cfg.noise_scale,
    };
    simulate(
        world,
        schedule,
        &opts,
        &cfg.vehicle,
        &cfg.spec,
        &cfg.control_noise,
        &cfg.sensor_noise,
        cfg.sim_seed,
    )
}

fn cmd_sim(a: &SimArgs) -> Result<i32> {
    let mut cfg = a.overrides.load()?;
    if let Some(w) = &a.world {
        cfg.set("world.name", w)?;
    }
    if let Some(s) = a.seed {
        cfg.set("world.seed", &s.to_string())?;
    }
    if let Some(v) = a.noise_scale {
        cfg.set("world.noise_scale", &v.to_string())?;
    }
    if let Some(v) = a.scan_every {
        cfg.set("world.scan_every", &v.to_string())?;
    }
    if let Some(v) = a.gps_every {
        cfg.set("world.gps_every", &v.to_string())?;
    }
    cfg.validate()?;
    let (world, schedule) = bundled_world(&cfg.world)?;
    let run = simulate_with(&cfg, &world, &schedule)?;
    write_log(&run.records, &a.out)?;
    println!(
        "wrote {} records over {} steps to {}",
        run.records.len(),
        schedule.steps(),
        a.out.display()
    );
    Ok(0)
}

/// Mean per-step wall time; short runs skip the warm-up trim.
fn mean_step_ms(step_ms: &[f64]) -> f64 {
    if step_ms.len() >= 10 {
        metrics::step_timing(step_ms).mean_ms
    } else if step_ms.is_empty() {
        f64::NAN
    } else {
        step_ms.iter().sum::<f64>() / step_ms.len() as f64
    }
}

/// Mean/RMSE against the log's position fixes, NaN when the log carries
/// none (error against an unknown reference is meaningless, not zero).
fn error_vs_fixes(estimate: &[(f64, Pose2D)], fixes: &[(f64, Point2D)]) -> (f64, f64) {
    match position_error(estimate, fixes) {
        Ok(e) => (e.mean_m, e.rmse_m),
        Err(_) => (f64::NAN, f64::NAN),
    }
}

fn cmd_run(a: &RunArgs) -> Result<i32> {
    let mut cfg = a.overrides.load()?;
    if let Some(v) = &a.world {
        cfg.set("world.name", v)?;
    }
    if let Some(v) = a.particles {
        cfg.set("filter.particles", &v.to_string())?;
    }
    if let Some(v) = a.gen_points {
        cfg.set("filter.gen_points", &v.to_string())?;
    }
    if let Some(v) = a.seed {
        cfg.set("filter.seed", &v.to_string())?;
    }
    if let Some(v) = a.beam_stride {
        cfg.set("filter.beam_stride", &v.to_string())?;
    }
    if let Some(v) = a.grid_resolution {
        cfg.set("grid.resolution", &v.to_string())?;
    }
    cfg.validate()?;
    let (world, _) = bundled_world(&cfg.world)?;
    let records = read_log(&a.log, cfg.spec.beams)?;
    std::fs::create_dir_all(&a.out_dir)?;

    let (estimate, fixes, step_ms, diverged, row) = match a.method {
        Method::Gslam => {
            let res = run_scatter(&records, cfg.start, cfg.models(), cfg.filter)?;
            let map = &res.filter.best_particle().map;
            write_points_csv(&map.points().collect::<Vec<_>>(), &a.out_dir.join("map_points.csv"))?;
            map.export_density_grid(cfg.grid_resolution, world.bounds)
                .write_to(&a.out_dir.join("density.grid"))?;
            let (mean_m, rmse_m) = error_vs_fixes(&res.estimate, &res.fixes);
            let row = ReportRow {
                method: "gslam".into(),
                n: cfg.filter.particles,
                m: cfg.filter.gen_points,
                mean_step_ms: mean_step_ms(&res.step_ms),
                mean_err_m: mean_m,
                rmse_m,
                concentration: map_concentration(map, &world, 0.5),
            };
            (res.estimate, res.fixes, res.step_ms, res.diverged_at_step, row)
        }
        Method::Grid => {
            let res = run_grid(
                &records,
                cfg.start,
                cfg.models(),
                cfg.filter,
                world.bounds,
                cfg.grid_resolution,
            )?;
            let grid = res.filter.best_particle().map.occupancy_grid();
            grid.write_to(&a.out_dir.join("density.grid"))?;
            let (mean_m, rmse_m) = error_vs_fixes(&res.estimate, &res.fixes);
            let row = ReportRow {
                method: "grid".into(),
                n: cfg.filter.particles,
                m: 0,
                mean_step_ms: mean_step_ms(&res.step_ms),
                mean_err_m: mean_m,
                rmse_m,
                concentration: grid_concentration(&grid, &world, 0.5),
            };
            (res.estimate, res.fixes, res.step_ms, res.diverged_at_step, row)
        }
    };

    write_trajectory_csv(&estimate, &a.out_dir.join("trajectory.csv"))?;
    write_report(std::slice::from_ref(&row), &a.out_dir.join("metrics.csv"))?;
    println!(
        "{} N={} M={}: {} steps, mean error {:.3} m, concentration {:.3} ({} fixes) -> {}",
        row.method,
        row.n,
        row.m,
        step_ms.len(),
        row.mean_err_m,
        row.concentration,
        fixes.len(),
        a.out_dir.display()
    );
    if let Some(step) = diverged {
        eprintln!(
            "divergence at step {step}; outputs cover the {} good steps before it",
            estimate.len()
        );
        return Ok(4);
    }
    Ok(0)
}

/// Per-cell aggregate over seeds.
#[derive(Default)]
struct CellAgg {
    runs: usize,
    mean_err: f64,
    rmse: f64,
    step_ms: f64,
    concentration: f64,
    points: f64,
}

impl CellAgg {
    fn add(&mut self, mean_err: f64, rmse: f64, step_ms: f64, concentration: f64, points: usize) {
        self.runs += 1;
        self.mean_err += mean_err;
        self.rmse += rmse;
        self.step_ms += step_ms;
        self.concentration += concentration;
        self.points += points as f64;
    }

    /// Mean final map size per run; NaN when every seed failed.
    fn mean_points(&self) -> f64 {
        self.points / self.runs as f64
    }

    fn row(&self, method: &str, n: usize, m: usize) -> ReportRow {
        let k = self.runs as f64;
        if self.runs == 0 {
            ReportRow {
                method: method.into(),
                n,
                m,
                mean_step_ms: f64::NAN,
                mean_err_m: f64::NAN,
                rmse_m: f64::NAN,
                concentration: f64::NAN,
            }
        } else {
            ReportRow {
                method: method.into(),
                n,
                m,
                mean_step_ms: self.step_ms / k,
                mean_err_m: self.mean_err / k,
                rmse_m: self.rmse / k,
                concentration: self.concentration / k,
            }
        }
    }
}

fn cmd_bench(a: &BenchArgs) -> Result<i32> {
    let mut cfg = a.overrides.load()?;
    if let Some(v) = &a.world {
        cfg.set("world.name", v)?;
    }
    if let Some(v) = a.noise_scale {
        cfg.set("world.noise_scale", &v.to_string())?;
    }
    cfg.validate()?;
    if a.particles_list.is_empty() || a.gen_points_list.is_empty() || a.seeds.is_empty() {
        return Err(Error::Config {
            field: "bench lists".into(),
            reason: "particles-list, gen-points-list and seeds must be non-empty".into(),
        });
    }
    let (world, schedule) = bundled_world(&cfg.world)?;

    // one simulated log per seed, shared by every sweep cell
    let mut logs: Vec<Vec<LogRecord>> = Vec::with_capacity(a.seeds.len());
    for &seed in &a.seeds {
        let mut c = cfg.clone();
        c.sim_seed = seed;
        logs.push(simulate_with(&c, &world, &schedule)?.records);
    }

    let mut rows = Vec::new();
    let mut last_cell_points = f64::NAN;
    for &n in &a.particles_list {
        for &m in &a.gen_points_list {
            let mut agg = CellAgg::default();
            for (&seed, records) in a.seeds.iter().zip(&logs) {
                let mut fc = cfg.filter;
                fc.particles = n;
                fc.gen_points = m;
                fc.seed = seed;
                match run_scatter(records, cfg.start, cfg.models(), fc) {
                    Ok(res) => {
                        if let Some(step) = res.diverged_at_step {
                            eprintln!(
                                "bench gslam N={n} M={m} seed={seed}: diverged at step {step}, scoring the prefix"
                            );
                        }
                        let (mean_m, rmse_m) = error_vs_fixes(&res.estimate, &res.fixes);
                        let map = &res.filter.best_particle().map;
                        agg.add(
                            mean_m,
                            rmse_m,
                            mean_step_ms(&res.step_ms),
                            map_concentration(map, &world, 0.5),
                            map.len(),
                        );
                    }
                    Err(e) => eprintln!("bench gslam N={n} M={m} seed={seed}: {e}"),
                }
            }
            last_cell_points = agg.mean_points();
            rows.push(agg.row("gslam", n, m));
            let r = rows.last().unwrap();
            println!(
                "gslam N={n} M={m}: mean error {:.3} m over {} of {} seeds",
                r.mean_err_m,
                agg.runs,
                a.seeds.len()
            );
        }
    }

    if a.grid_baseline {
        // cell count matches the last cell's final point count
        let n = *a.particles_list.last().unwrap();
        if last_cell_points.is_finite() && last_cell_points >= 1.0 {
            let area = world.bounds.width() * world.bounds.height();
            let resolution = (area / last_cell_points).sqrt();
            let mut agg = CellAgg::default();
            for (&seed, records) in a.seeds.iter().zip(&logs) {
                let mut fc = cfg.filter;
                fc.particles = n;
                fc.seed = seed;
                match run_grid(records, cfg.start, cfg.models(), fc, world.bounds, resolution) {
                    Ok(res) => {
                        if let Some(step) = res.diverged_at_step {
                            eprintln!(
                                "bench grid N={n} seed={seed}: diverged at step {step}, scoring the prefix"
                            );
                        }
                        let (mean_m, rmse_m) = error_vs_fixes(&res.estimate, &res.fixes);
                        let grid = res.filter.best_particle().map.occupancy_grid();
                        agg.add(
                            mean_m,
                            rmse_m,
                            mean_step_ms(&res.step_ms),
                            grid_concentration(&grid, &world, 0.5),
                            grid.values.len(),
                        );
                    }
                    Err(e) => eprintln!("bench grid N={n} seed={seed}: {e}"),
                }
            }
            rows.push(agg.row("grid", n, 0));
            println!(
                "grid N={n} at {resolution:.2} m cells: mean error {:.3} m",
                rows.last().unwrap().mean_err_m
            );
        } else {
            eprintln!("bench: skipping grid baseline, no surviving run to take a point budget from");
        }
    }

    write_report(&rows, &a.out)?;
    println!("wrote {} rows to {}", rows.len(), a.out.display());
    if rows.iter().all(|r| r.mean_err_m.is_nan()) {
        eprintln!("every cell failed");
        return Ok(4);
    }
    Ok(0)
}

fn cmd_export_grid(a: &ExportGridArgs) -> Result<i32> {
    if !(a.resolution > 0.0 && a.resolution.is_finite()) {
        return Err(Error::Config {
            field: "grid.resolution".into(),
            reason: format!("resolution must be positive, got {}", a.resolution),
        });
    }
    let points = read_points_csv(&a.points)?;
    if points.is_empty() {
        return Err(Error::Config {
            field: "points".into(),
            reason: format!("{} holds no points", a.points.display()),
        });
    }
    let total: f64 = points.iter().map(|p| p.prob).sum();
    let bounds = match a.bounds.as_deref() {
        Some(text) => {
            let mut vals = [0.0_f64; 4];
            let parts: Vec<&str> = text.split(',').collect();
            if parts.len() != 4 {
                return Err(Error::Config {
                    field: "bounds".into(),
                    reason: format!("expected x0,y0,x1,y1, got `{text}`"),
                });
            }
            for (slot, part) in vals.iter_mut().zip(&parts) {
                *slot = part.trim().parse().map_err(|_| Error::Config {
                    field: "bounds".into(),
                    reason: format!("not a number: `{part}`"),
                })?;
            }
            let [x0, y0, x1, y1] = vals;
            if !(x1 > x0 && y1 > y0 && vals.iter().all(|v| v.is_finite())) {
                return Err(Error::Config {
                    field: "bounds".into(),
                    reason: format!("box ({x0}, {y0})..({x1}, {y1}) is empty"),
                });
            }
            Rect::new(Point2D::new(x0, y0), Point2D::new(x1, y1))
        }
        None => {
            // tight box, padded so edge points land strictly inside
            let pad = a.resolution / 2.0;
            let (mut lo, mut hi) = (points[0].location, points[0].location);
            for p in &points {
                lo.x = lo.x.min(p.location.x);
                lo.y = lo.y.min(p.location.y);
                hi.x = hi.x.max(p.location.x);
                hi.y = hi.y.max(p.location.y);
            }
            Rect::new(
                Point2D::new(lo.x - pad, lo.y - pad),
                Point2D::new(hi.x + pad, hi.y + pad),
            )
        }
    };
    let map = ScatterMap::from_points(a.resolution, points);
    let grid = map.export_density_grid(a.resolution, bounds);
    let kept = grid.total();
    if (kept - total).abs() > 1e-9 * total.max(1.0) {
        return Err(Error::Config {
            field: "bounds".into(),
            reason: format!(
                "box drops mass {:.9} of {total:.9}; widen it to cover every point",
                total - kept
            ),
        });
    }
    grid.write_to(&a.out)?;
    println!(
        "wrote {}x{} cells at {} m holding mass {} to {}",
        grid.cols,
        grid.rows,
        grid.resolution,
        kept,
        a.out.display()
    );
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn run(args: &[&str]) -> i32 {
        main_with_args(std::iter::once("gslam").chain(args.iter().copied()))
    }

    #[test]
    fn help_and_usage_errors_exit_clean() {
        assert_eq!(run(&["--help"]), 0);
        assert_eq!(run(&["sim", "--help"]), 0);
        assert_eq!(run(&["frobnicate"]), 2);
        assert_eq!(run(&["sim"]), 2); // --out is required
        assert_eq!(run(&["run", "--log", "x", "--out-dir", "y", "--method", "odometry"]), 2);
    }

    #[test]
    fn missing_input_exits_with_data_error() {
        let dir = tmp();
        let none = dir.path().join("absent.log");
        let out = dir.path().join("out");
        assert_eq!(
            run(&["run", "--log", none.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]),
            3
        );
    }

    #[test]
    fn export_grid_conserves_mass_and_rejects_tight_bounds() {
        let dir = tmp();
        let points = dir.path().join("points.csv");
        std::fs::write(&points, "x,y,prob\n0,0,0.25\n3,4,0.75\n").unwrap();
        let out = dir.path().join("density.grid");
        assert_eq!(
            run(&[
                "export-grid",
                "--points",
                points.to_str().unwrap(),
                "--resolution",
                "0.5",
                "--out",
                out.to_str().unwrap(),
            ]),
            0
        );
        let grid = crate::grid2d::Grid2D::read_from(&out).unwrap();
        assert!((grid.total() - 1.0).abs() < 1e-12);

        // halving the resolution must not change the held mass
        assert_eq!(
            run(&[
                "export-grid",
                "--points",
                points.to_str().unwrap(),
                "--resolution",
                "0.25",
                "--out",
                out.to_str().unwrap(),
            ]),
            0
        );
        let finer = crate::grid2d::Grid2D::read_from(&out).unwrap();
        assert!((finer.total() - 1.0).abs() < 1e-12);

        // a box that cuts off (3, 4) must fail loudly, not drop mass
        assert_eq!(
            run(&[
                "export-grid",
                "--points",
                points.to_str().unwrap(),
                "--resolution",
                "0.5",
                "--out",
                out.to_str().unwrap(),
                "--bounds",
                "-1,-1,2,2",
            ]),
            3
        );
    }

    #[test]
    fn sim_is_deterministic_per_seed() {
        let dir = tmp();
        let a = dir.path().join("a.log");
        let b = dir.path().join("b.log");
        let c = dir.path().join("c.log");
        for (path, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
            assert_eq!(
                run(&[
                    "sim",
                    "--world",
                    "toy",
                    "--seed",
                    seed,
                    "--out",
                    path.to_str().unwrap(),
                ]),
                0
            );
        }
        let bytes_a = std::fs::read(&a).unwrap();
        assert_eq!(bytes_a, std::fs::read(&b).unwrap());
        assert_ne!(bytes_a, std::fs::read(&c).unwrap());
    }

    #[test]
    fn config_file_feeds_sim_and_flags_win() {
        let dir = tmp();
        let conf = dir.path().join("run.conf");
        std::fs::write(&conf, "world.name = toy\nworld.seed = 9\n").unwrap();
        let from_conf = dir.path().join("conf.log");
        let from_flag = dir.path().join("flag.log");
        assert_eq!(
            run(&["sim", "--config", conf.to_str().unwrap(), "--out", from_conf.to_str().unwrap()]),
            0
        );
        assert_eq!(
            run(&[
                "sim",
                "--config",
                conf.to_str().unwrap(),
                "--seed",
                "10",
                "--out",
                from_flag.to_str().unwrap(),
            ]),
            0
        );
        assert_ne!(std::fs::read(&from_conf).unwrap(), std::fs::read(&from_flag).unwrap());
        // and the flag result equals a pure-flag invocation with the same keys
        let pure = dir.path().join("pure.log");
        assert_eq!(
            run(&["sim", "--world", "toy", "--seed", "10", "--out", pure.to_str().unwrap()]),
            0
        );
        assert_eq!(std::fs::read(&from_flag).unwrap(), std::fs::read(&pure).unwrap());
    }

    #[test]
    fn run_on_toy_log_writes_all_artifacts() {
        let dir = tmp();
        let log = dir.path().join("toy.log");
        assert_eq!(
            run(&["sim", "--world", "toy", "--seed", "3", "--out", log.to_str().unwrap()]),
            0
        );
        let out = dir.path().join("out");
        assert_eq!(
            run(&[
                "run",
                "--log",
                log.to_str().unwrap(),
                "--out-dir",
                out.to_str().unwrap(),
                "--world",
                "toy",
                "--particles",
                "3",
                "--gen-points",
                "4",
            ]),
            0
        );
        let rows = crate::metrics::read_report(&out.join("metrics.csv")).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].method, "gslam");
        assert_eq!((rows[0].n, rows[0].m), (3, 4));
        assert!(rows[0].mean_err_m.is_finite());
        assert!(!read_points_csv(&out.join("map_points.csv")).unwrap().is_empty());
        let grid = crate::grid2d::Grid2D::read_from(&out.join("density.grid")).unwrap();
        assert!((grid.total() - 1.0).abs() < 1e-6, "map mass is normalized");
        let text = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
        assert!(text.lines().count() > 25, "one row per step plus header");
    }
}
