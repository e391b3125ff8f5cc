//! Simulate the bundled two-lap loop and write the sensor log.
//!
//! ```bash
//! cargo run --example simulate_world
//! ```

use gslam::logio::{write_log, write_trajectory_csv};
use gslam::motion::{ControlNoise, VehicleParams};
use gslam::sensor::{SensorNoise, SensorSpec};
use gslam::world::{default_schedule, default_world, simulate, SimOptions};
use std::path::Path;

fn main() -> gslam::Result<()> {
    let world = default_world();
    let schedule = default_schedule();
    let opts = SimOptions {
        scan_every: 1,
        gps_every: 5,
        noise_scale: 1.0,
    };
    let run = simulate(
        &world,
        &schedule,
        &opts,
        &VehicleParams::default(),
        &SensorSpec::default(),
        &ControlNoise::default(),
        &SensorNoise::default(),
        7,
    )?;

    let out = Path::new("target/example-out");
    std::fs::create_dir_all(out)?;
    write_log(&run.records, &out.join("run.log"))?;
    write_trajectory_csv(&run.truth, &out.join("truth.csv"))?;

    let (t_end, end) = *run.truth.last().unwrap();
    println!(
        "{} obstacles, {} steps over {:.1} s, {} log records",
        world.obstacle_count(),
        schedule.steps(),
        t_end,
        run.records.len()
    );
    println!(
        "loop closure: ended {:.2} m from the start",
        end.position().distance(schedule.start.position())
    );
    println!("wrote {} and {}", out.join("run.log").display(), out.join("truth.csv").display());
    Ok(())
}
