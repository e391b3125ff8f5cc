//! Round-trip the on-disk formats: write a sensor log and a config
//! file, read both back, and replay the log under the loaded config.
//!
//! ```bash
//! cargo run --example replay_log
//! ```

use gslam::config::read_config;
use gslam::logio::{read_log, write_log};
use gslam::metrics::position_error;
use gslam::runner::run_scatter;
use gslam::world::{simulate, toy_schedule, toy_world, SimOptions};
use std::path::Path;

fn main() -> gslam::Result<()> {
    let out = Path::new("target/example-out");
    std::fs::create_dir_all(out)?;

    let conf_path = out.join("replay.conf");
    std::fs::write(
        &conf_path,
        "# lighter filter for the small toy world\n\
         world.name = toy\n\
         filter.particles = 4\n\
         filter.gen_points = 6\n\
         filter.seed = 3\n",
    )?;
    let cfg = read_config(&conf_path)?;

    let world = toy_world();
    let schedule = toy_schedule();
    let opts = SimOptions {
        scan_every: cfg.scan_every,
        gps_every: cfg.gps_every,
        noise_scale: cfg.noise_scale,
    };
    let sim = simulate(
        &world,
        &schedule,
        &opts,
        &cfg.vehicle,
        &cfg.spec,
        &cfg.control_noise,
        &cfg.sensor_noise,
        cfg.sim_seed,
    )?;

    let log_path = out.join("replay.log");
    write_log(&sim.records, &log_path)?;
    let records = read_log(&log_path, cfg.spec.beams)?;
    assert_eq!(records, sim.records, "write then read is the identity");

    let result = run_scatter(&records, cfg.start, cfg.models(), cfg.filter)?;
    let truth: Vec<_> = sim.truth.iter().map(|&(t, p)| (t, p.position())).collect();
    let err = position_error(&result.estimate, &truth)?;
    println!(
        "replayed {} records with N={} M={}: mean error {:.3} m",
        records.len(),
        cfg.filter.particles,
        cfg.filter.gen_points,
        err.mean_m
    );
    Ok(())
}
