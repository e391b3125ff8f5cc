//! Scattered points versus an occupancy grid on the same log, with the
//! grid's cell count matched to the point map's final size.
//!
//! ```bash
//! cargo run --example grid_baseline
//! ```

use gslam::config::RunConfig;
use gslam::metrics::{grid_concentration, map_concentration, position_error};
use gslam::runner::{run_grid, run_scatter};
use gslam::world::{default_schedule, default_world, simulate, SimOptions};

fn main() -> gslam::Result<()> {
    let cfg = RunConfig::default();
    let world = default_world();
    let schedule = default_schedule();
    let opts = SimOptions {
        scan_every: 1,
        gps_every: 5,
        noise_scale: 1.0,
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
    let truth: Vec<_> = sim.truth.iter().map(|&(t, p)| (t, p.position())).collect();
    let mut fc = cfg.filter;
    fc.seed = seed;

    let scatter = run_scatter(&sim.records, schedule.start, cfg.models(), fc)?;
    let map = &scatter.filter.best_particle().map;
    let scatter_err = position_error(&scatter.estimate, &truth)?;

    // same budget: as many grid cells as the point map has points
    let area = world.bounds.width() * world.bounds.height();
    let resolution = (area / map.len() as f64).sqrt();
    let grid_run = run_grid(&sim.records, schedule.start, cfg.models(), fc, world.bounds, resolution)?;
    let grid = grid_run.filter.best_particle().map.occupancy_grid();
    let grid_err = position_error(&grid_run.estimate, &truth)?;

    println!("budget: {} points vs {} cells ({resolution:.2} m)", map.len(), grid.values.len());
    println!(
        "scatter: mean error {:.3} m, {:.1}% of mass within 0.5 m of an obstacle",
        scatter_err.mean_m,
        100.0 * map_concentration(map, &world, 0.5)
    );
    println!(
        "grid:    mean error {:.3} m, {:.1}% of occupancy within 0.5 m of an obstacle",
        grid_err.mean_m,
        100.0 * grid_concentration(&grid, &world, 0.5)
    );
    Ok(())
}
