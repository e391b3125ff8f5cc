//! Planar poses, frames and angle arithmetic.
//!
//! Everything here is immutable after construction and freely shareable
//! across threads.

use std::f64::consts::PI;

/// Normalize an angle into the half-open interval `(-pi, pi]`.
///
/// The result is congruent to `a` modulo 2*pi. The half-open interval gives
/// pi a unique representation (`-pi` maps to `pi`).
///
/// Panics if `a` is not finite.
pub fn normalize_angle(a: f64) -> f64 {
    assert!(a.is_finite(), "normalize_angle: non-finite angle {a}");
    let r = a.rem_euclid(2.0 * PI); // [0, 2*pi)
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// A location in the world plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        assert!(x.is_finite() && y.is_finite(), "Point2D: non-finite ({x}, {y})");
        Self { x, y }
    }

    pub fn distance(&self, other: Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A planar robot pose: position plus heading against the global x-axis.
///
/// The heading is normalized into `(-pi, pi]` at construction, so long
/// trajectories cannot accumulate wrapping drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        assert!(x.is_finite() && y.is_finite(), "Pose2D: non-finite ({x}, {y})");
        Self {
            x,
            y,
            phi: normalize_angle(phi),
        }
    }

    pub fn position(&self) -> Point2D {
        Point2D::new(self.x, self.y)
    }
}

/// An axis-aligned rectangle, used for world bounds and grid extents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point2D,
    pub max: Point2D,
}

impl Rect {
    pub fn new(min: Point2D, max: Point2D) -> Self {
        assert!(
            max.x >= min.x && max.y >= min.y,
            "Rect: max ({}, {}) below min ({}, {})",
            max.x,
            max.y,
            min.x,
            min.y
        );
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Point2D) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Map a point given in the robot frame of `pose` into the world frame.
pub fn to_world_frame(pose: Pose2D, local: Point2D) -> Point2D {
    let (s, c) = pose.phi.sin_cos();
    Point2D::new(
        pose.x + c * local.x - s * local.y,
        pose.y + s * local.x + c * local.y,
    )
}

/// Map a world-frame point into the robot frame of `pose`.
///
/// Exact inverse of [`to_world_frame`].
pub fn to_robot_frame(pose: Pose2D, world: Point2D) -> Point2D {
    let (s, c) = pose.phi.sin_cos();
    let dx = world.x - pose.x;
    let dy = world.y - pose.y;
    Point2D::new(c * dx + s * dy, -s * dx + c * dy)
}
