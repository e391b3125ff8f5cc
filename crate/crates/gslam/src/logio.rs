//! The on-disk log format: line-delimited text, one record per line,
//!
//! ```text
//! t KIND field=value ...
//! ```
//!
//! Three kinds: `CONTROL v=.. omega=..`, `SCAN ranges=r0,r1,...`, and
//! `GPS x=.. y=..`. Floats are written in Rust's shortest round-trip
//! form, so write followed by read reproduces the records bit for bit
//! and rewriting the same records gives identical bytes. Decimal points
//! only, independent of the process locale.

use crate::error::{Error, Result};
use crate::geometry::{Point2D, Pose2D};
use crate::map::MapPoint;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// Measured rear-wheel velocity and steering angle.
    Control { velocity: f64, steering: f64 },
    /// One range per beam, in beam-index order; non-returns hold max_range.
    Scan { ranges: Vec<f64> },
    /// Position fix used for validation only, never fed to the filter.
    Gps { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub t: f64,
    pub payload: Payload,
}

impl LogRecord {
    pub fn control(t: f64, velocity: f64, steering: f64) -> Self {
        Self {
            t,
            payload: Payload::Control { velocity, steering },
        }
    }

    pub fn scan(t: f64, ranges: Vec<f64>) -> Self {
        Self {
            t,
            payload: Payload::Scan { ranges },
        }
    }

    pub fn gps(t: f64, x: f64, y: f64) -> Self {
        Self {
            t,
            payload: Payload::Gps { x, y },
        }
    }
}

/// Serialize records, one line each, in the given order.
pub fn write_log(records: &[LogRecord], path: &Path) -> Result<()> {
    let mut out = String::new();
    for r in records {
        match &r.payload {
            Payload::Control { velocity, steering } => {
                writeln!(out, "{} CONTROL v={} omega={}", r.t, velocity, steering)
            }
            Payload::Scan { ranges } => {
                write!(out, "{} SCAN ranges=", r.t).unwrap();
                for (i, v) in ranges.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write!(out, "{v}").unwrap();
                }
                writeln!(out)
            }
            Payload::Gps { x, y } => writeln!(out, "{} GPS x={} y={}", r.t, x, y),
        }
        .unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn parse_float(path: &Path, line: usize, name: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(path, line, format!("{name}: not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("{name}: not finite: {s:?}")));
    }
    Ok(v)
}

/// One `name=value` token per field, every field required, none repeated.
fn parse_fields<'a, const K: usize>(
    path: &Path,
    line: usize,
    names: [&str; K],
    tokens: impl Iterator<Item = &'a str>,
) -> Result<[f64; K]> {
    let mut out = [None; K];
    for tok in tokens {
        let (name, value) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(path, line, format!("expected name=value, got {tok:?}")))?;
        let slot = names
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| parse_err(path, line, format!("unknown field {name:?}")))?;
        if out[slot].is_some() {
            return Err(parse_err(path, line, format!("duplicate field {name:?}")));
        }
        out[slot] = Some(parse_float(path, line, name, value)?);
    }
    for (slot, name) in out.iter().zip(names) {
        if slot.is_none() {
            return Err(parse_err(path, line, format!("missing field {name:?}")));
        }
    }
    Ok(out.map(|v| v.unwrap()))
}

/// Parse a log file. `beams` is the configured beam count; every scan
/// line must carry exactly that many ranges. Timestamps may repeat
/// (several records can share an instant) but must never decrease.
/// Blank lines and lines starting with `#` are skipped.
pub fn read_log(path: &Path, beams: usize) -> Result<Vec<LogRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    let mut last_t = f64::NEG_INFINITY;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let t = parse_float(path, line, "t", tokens.next().unwrap())?;
        let kind = tokens
            .next()
            .ok_or_else(|| parse_err(path, line, "missing record kind"))?;
        let payload = match kind {
            "CONTROL" => {
                let [velocity, steering] = parse_fields(path, line, ["v", "omega"], tokens)?;
                Payload::Control { velocity, steering }
            }
            "GPS" => {
                let [x, y] = parse_fields(path, line, ["x", "y"], tokens)?;
                Payload::Gps { x, y }
            }
            "SCAN" => {
                let tok = tokens
                    .next()
                    .ok_or_else(|| parse_err(path, line, "missing field \"ranges\""))?;
                let list = tok.strip_prefix("ranges=").ok_or_else(|| {
                    parse_err(path, line, format!("expected ranges=..., got {tok:?}"))
                })?;
                if let Some(extra) = tokens.next() {
                    return Err(parse_err(path, line, format!("unexpected token {extra:?}")));
                }
                let mut ranges = Vec::with_capacity(beams);
                for part in list.split(',') {
                    ranges.push(parse_float(path, line, "ranges", part)?);
                }
                if ranges.len() != beams {
                    return Err(parse_err(
                        path,
                        line,
                        format!("scan has {} ranges, expected {beams}", ranges.len()),
                    ));
                }
                Payload::Scan { ranges }
            }
            other => {
                return Err(parse_err(path, line, format!("unknown record kind {other:?}")))
            }
        };
        if t < last_t {
            return Err(parse_err(
                path,
                line,
                format!("timestamp moves backwards: {t} after {last_t}"),
            ));
        }
        last_t = t;
        records.push(LogRecord { t, payload });
    }
    Ok(records)
}

/// Map points as CSV, header `x,y,prob`, shortest round-trip floats.
pub fn write_points_csv(points: &[MapPoint], path: &Path) -> Result<()> {
    let mut out = String::from("x,y,prob\n");
    for p in points {
        writeln!(out, "{},{},{}", p.location.x, p.location.y, p.prob).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read a points CSV written by `write_points_csv` (or by hand).
pub fn read_points_csv(path: &Path) -> Result<Vec<MapPoint>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "x,y,prob" => {}
        Some((_, header)) => {
            return Err(parse_err(path, 1, format!("expected header `x,y,prob`, got {header:?}")))
        }
        None => return Err(parse_err(path, 1, "empty file, expected header `x,y,prob`")),
    }
    let mut points = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split(',');
        let mut field = |name: &str| -> Result<f64> {
            let tok = parts
                .next()
                .ok_or_else(|| parse_err(path, line, format!("missing column {name:?}")))?;
            parse_float(path, line, name, tok.trim())
        };
        let x = field("x")?;
        let y = field("y")?;
        let prob = field("prob")?;
        if parts.next().is_some() {
            return Err(parse_err(path, line, "expected exactly three columns"));
        }
        if prob < 0.0 {
            return Err(parse_err(path, line, format!("negative mass {prob}")));
        }
        points.push(MapPoint {
            location: Point2D::new(x, y),
            prob,
        });
    }
    Ok(points)
}

/// Timestamped poses as CSV, header `t,x,y,phi`.
pub fn write_trajectory_csv(trajectory: &[(f64, Pose2D)], path: &Path) -> Result<()> {
    let mut out = String::from("t,x,y,phi\n");
    for (t, pose) in trajectory {
        writeln!(out, "{},{},{},{}", t, pose.x, pose.y, pose.phi).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}
