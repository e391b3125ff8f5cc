//! A dense 2-D grid of real values with world anchoring, and its portable
//! text form: a header line `rows cols x0 y0 resolution` followed by one
//! space-separated line per row, row 0 at `y0`, going up.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! write-then-read reproduces values exactly.

use crate::error::{Error, Result};
use crate::geometry::Point2D;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub rows: usize,
    pub cols: usize,
    /// World coordinates of the grid's lower-left corner.
    pub x0: f64,
    pub y0: f64,
    pub resolution: f64,
    /// Row-major values, `values[row * cols + col]`.
    pub values: Vec<f64>,
}

impl Grid2D {
    pub fn zeros(rows: usize, cols: usize, x0: f64, y0: f64, resolution: f64) -> Self {
        assert!(rows > 0 && cols > 0, "Grid2D: empty shape {rows}x{cols}");
        assert!(
            resolution > 0.0 && resolution.is_finite(),
            "Grid2D: bad resolution {resolution}"
        );
        Self {
            rows,
            cols,
            x0,
            y0,
            resolution,
            values: vec![0.0; rows * cols],
        }
    }

    /// Cell indices `(col, row)` for a world point, unbounded; negative or
    /// too-large indices mean the point lies outside the grid.
    pub fn cell_of(&self, p: Point2D) -> (i64, i64) {
        (
            ((p.x - self.x0) / self.resolution).floor() as i64,
            ((p.y - self.y0) / self.resolution).floor() as i64,
        )
    }

    pub fn in_bounds(&self, col: i64, row: i64) -> bool {
        col >= 0 && row >= 0 && (col as usize) < self.cols && (row as usize) < self.rows
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn get_mut(&mut self, col: usize, row: usize) -> &mut f64 {
        &mut self.values[row * self.cols + col]
    }

    /// World coordinates of a cell's center.
    pub fn center_of(&self, col: usize, row: usize) -> Point2D {
        Point2D::new(
            self.x0 + (col as f64 + 0.5) * self.resolution,
            self.y0 + (row as f64 + 0.5) * self.resolution,
        )
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "{} {} {} {} {}", self.rows, self.cols, self.x0, self.y0, self.resolution)?;
        for row in 0..self.rows {
            let mut line = String::new();
            for col in 0..self.cols {
                if col > 0 {
                    line.push(' ');
                }
                line.push_str(&format!("{}", self.get(col, row)));
            }
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Grid2D> {
        let parse_err = |line: usize, reason: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let r = BufReader::new(std::fs::File::open(path)?);
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing header".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(parse_err(1, format!("header needs 5 fields, got {}", fields.len())));
        }
        let rows: usize = fields[0]
            .parse()
            .map_err(|e| parse_err(1, format!("rows: {e}")))?;
        let cols: usize = fields[1]
            .parse()
            .map_err(|e| parse_err(1, format!("cols: {e}")))?;
        let x0: f64 = fields[2]
            .parse()
            .map_err(|e| parse_err(1, format!("x0: {e}")))?;
        let y0: f64 = fields[3]
            .parse()
            .map_err(|e| parse_err(1, format!("y0: {e}")))?;
        let resolution: f64 = fields[4]
            .parse()
            .map_err(|e| parse_err(1, format!("resolution: {e}")))?;
        if rows == 0 || cols == 0 || !(resolution > 0.0) {
            return Err(parse_err(1, format!("bad shape {rows}x{cols} at resolution {resolution}")));
        }
        let mut grid = Grid2D::zeros(rows, cols, x0, y0, resolution);
        for row in 0..rows {
            let lineno = row + 2;
            let line = lines
                .next()
                .ok_or_else(|| parse_err(lineno, format!("expected {rows} data rows, file ends at {row}")))??;
            let mut count = 0;
            for (col, tok) in line.split_whitespace().enumerate() {
                if col >= cols {
                    return Err(parse_err(lineno, format!("more than {cols} values in row")));
                }
                *grid.get_mut(col, row) = tok
                    .parse()
                    .map_err(|e| parse_err(lineno, format!("value {}: {e}", col + 1)))?;
                count += 1;
            }
            if count != cols {
                return Err(parse_err(lineno, format!("expected {cols} values, got {count}")));
            }
        }
        Ok(grid)
    }
}
