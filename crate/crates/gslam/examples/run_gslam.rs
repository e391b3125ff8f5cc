//! Full pipeline in memory: simulate the default loop, run the
//! scattered-point particle filter over the log, and compare the
//! recovered trajectory against ground truth and dead reckoning.
//!
//! ```bash
//! cargo run --example run_gslam
//! ```

use gslam::config::RunConfig;
use gslam::logio::write_points_csv;
use gslam::metrics::{map_concentration, position_error};
use gslam::runner::{dead_reckoning, run_scatter};
use gslam::world::{default_schedule, default_world, simulate, SimOptions};
use std::path::Path;

fn main() -> gslam::Result<()> {
    let cfg = RunConfig::default();
    let world = default_world();
    let schedule = default_schedule();
    let opts = SimOptions {
        scan_every: cfg.scan_every,
        gps_every: cfg.gps_every,
        noise_scale: cfg.noise_scale,
    };
    let seed = 7;
    let sim = simulate(
        &world,
        &schedule,
        &opts,
        &cfg.vehicle,
        &cfg.spec,
        &cfg.control_noise,
        &cfg.sensor_noise,
        seed,
    )?;
    // the truth stays on the simulator side; the filter sees only the log
    let truth: Vec<_> = sim.truth.iter().map(|&(t, p)| (t, p.position())).collect();

    let mut fc = cfg.filter;
    fc.seed = seed;
    let result = run_scatter(&sim.records, schedule.start, cfg.models(), fc)?;
    assert!(result.diverged_at_step.is_none());

    let filter_err = position_error(&result.estimate, &truth)?;
    let dr = dead_reckoning(&sim.records, schedule.start, &cfg.vehicle)?;
    let dr_err = position_error(&dr, &truth)?;

    let map = &result.filter.best_particle().map;
    println!(
        "N={} M={} over {} steps, {} resamples",
        fc.particles,
        fc.gen_points,
        result.steps(),
        result.filter.resample_count()
    );
    println!("dead reckoning error: mean {:.3} m, rmse {:.3} m", dr_err.mean_m, dr_err.rmse_m);
    println!("filter error:         mean {:.3} m, rmse {:.3} m", filter_err.mean_m, filter_err.rmse_m);
    println!(
        "map: {} points, {:.1}% of mass within 0.5 m of an obstacle",
        map.len(),
        100.0 * map_concentration(map, &world, 0.5)
    );

    let out = Path::new("target/example-out");
    std::fs::create_dir_all(out)?;
    write_points_csv(&map.points().collect::<Vec<_>>(), &out.join("map_points.csv"))?;
    println!("wrote {}", out.join("map_points.csv").display());
    Ok(())
}
