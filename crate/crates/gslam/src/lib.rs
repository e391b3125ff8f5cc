//! Particle-filter SLAM over scattered-point probability maps.

pub mod app;
pub mod config;
pub mod error;
pub mod filter;
pub mod geometry;
pub mod grid;
pub mod grid2d;
pub mod logio;
pub mod map;
pub mod metrics;
pub mod motion;
pub mod rng;
pub mod runner;
pub mod sensor;
pub mod world;

pub use error::{Error, Result};
