//! Build a world and drive schedule by hand, then run the full
//! simulate-and-filter loop on it.
//!
//! ```bash
//! cargo run --example custom_world
//! ```

use gslam::config::RunConfig;
use gslam::geometry::{Point2D, Pose2D, Rect};
use gslam::metrics::position_error;
use gslam::motion::Control;
use gslam::runner::{dead_reckoning, run_scatter};
use gslam::world::{simulate, Circle, Leg, Schedule, Segment, SimOptions, World};

fn main() -> gslam::Result<()> {
    // a corridor with a kink and two drums to anchor the far end
    let world = World::new(
        vec![
            Segment { a: Point2D::new(-2.0, 4.0), b: Point2D::new(30.0, 4.0) },
            Segment { a: Point2D::new(-2.0, -4.0), b: Point2D::new(24.0, -4.0) },
            Segment { a: Point2D::new(24.0, -4.0), b: Point2D::new(30.0, -10.0) },
        ],
        vec![
            Circle { center: Point2D::new(14.0, 0.8), radius: 0.4 },
            Circle { center: Point2D::new(27.0, -2.0), radius: 0.4 },
        ],
        Rect::new(Point2D::new(-10.0, -20.0), Point2D::new(40.0, 10.0)),
    )?;

    // out and back: forward, a slow U-turn, forward again
    let schedule = Schedule {
        start: Pose2D::new(0.0, 0.0, 0.0),
        dt: 0.2,
        legs: vec![
            Leg { duration: 8.0, control: Control::new(1.5, 0.0) },
            Leg { duration: 4.0, control: Control::new(1.2, 0.6) },
            Leg { duration: 4.0, control: Control::new(1.2, 0.6) },
            Leg { duration: 8.0, control: Control::new(1.5, 0.0) },
        ],
    };

    let cfg = RunConfig::default();
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
        11,
    )?;
    let truth: Vec<_> = sim.truth.iter().map(|&(t, p)| (t, p.position())).collect();

    let result = run_scatter(&sim.records, schedule.start, cfg.models(), cfg.filter)?;
    let filter_err = position_error(&result.estimate, &truth)?;
    let dr = dead_reckoning(&sim.records, schedule.start, &cfg.vehicle)?;
    let dr_err = position_error(&dr, &truth)?;

    println!("{} steps through {} obstacles", result.steps(), world.obstacle_count());
    println!("dead reckoning: mean {:.3} m", dr_err.mean_m);
    println!("filter:         mean {:.3} m", filter_err.mean_m);
    Ok(())
}
