//! Sweep particle count N and per-beam generation count M over seeded
//! repeats of the default loop, one table row per cell.
//!
//! ```bash
//! cargo run --example bench_sweep
//! ```

use gslam::config::RunConfig;
use gslam::metrics::position_error;
use gslam::runner::run_scatter;
use gslam::world::{default_schedule, default_world, simulate, SimOptions};
use std::time::Instant;

fn main() -> gslam::Result<()> {
    let cfg = RunConfig::default();
    let world = default_world();
    let schedule = default_schedule();
    let opts = SimOptions {
        scan_every: 1,
        gps_every: 5,
        noise_scale: 1.0,
    };
    let seeds = [6, 7];

    let mut sims = Vec::new();
    for &seed in &seeds {
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
        sims.push((sim.records, truth));
    }

    println!("{:>4} {:>4} {:>12} {:>12} {:>10}", "N", "M", "mean err m", "rmse m", "ms/step");
    for n in [2, 8] {
        for m in [4, 10] {
            let (mut err, mut rmse, mut ms) = (0.0, 0.0, 0.0);
            for (&seed, (records, truth)) in seeds.iter().zip(&sims) {
                let mut fc = cfg.filter;
                fc.particles = n;
                fc.gen_points = m;
                fc.seed = seed;
                let begin = Instant::now();
                let res = run_scatter(records, schedule.start, cfg.models(), fc)?;
                ms += begin.elapsed().as_secs_f64() * 1e3 / res.steps() as f64;
                let e = position_error(&res.estimate, truth)?;
                err += e.mean_m;
                rmse += e.rmse_m;
            }
            let k = seeds.len() as f64;
            println!(
                "{n:>4} {m:>4} {:>12.3} {:>12.3} {:>10.1}",
                err / k,
                rmse / k,
                ms / k
            );
        }
    }
    Ok(())
}
