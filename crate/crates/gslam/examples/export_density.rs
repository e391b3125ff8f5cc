//! Rasterize a scattered-point map into the portable density-grid
//! format at two resolutions; total mass is conserved at both.
//!
//! ```bash
//! cargo run --example export_density
//! ```

use gslam::config::RunConfig;
use gslam::runner::run_scatter;
use gslam::world::{default_schedule, default_world, simulate, SimOptions};
use std::path::Path;

fn main() -> gslam::Result<()> {
    let cfg = RunConfig::default();
    let world = default_world();
    let schedule = default_schedule();
    let opts = SimOptions {
        scan_every: 1,
        gps_every: 5,
        noise_scale: 1.0,
    };
    let sim = simulate(
        &world,
        &schedule,
        &opts,
        &cfg.vehicle,
        &cfg.spec,
        &cfg.control_noise,
        &cfg.sensor_noise,
        7,
    )?;
    let result = run_scatter(&sim.records, schedule.start, cfg.models(), cfg.filter)?;
    let map = &result.filter.best_particle().map;

    let out = Path::new("target/example-out");
    std::fs::create_dir_all(out)?;
    for resolution in [1.0, 0.25] {
        let grid = map.export_density_grid(resolution, world.bounds);
        let path = out.join(format!("density_{resolution}.grid"));
        grid.write_to(&path)?;
        println!(
            "{}x{} cells at {resolution} m, total mass {:.9} -> {}",
            grid.cols,
            grid.rows,
            grid.total(),
            path.display()
        );
    }
    println!("map holds {} points of total mass {:.9}", map.len(), map.total_mass());
    Ok(())
}
