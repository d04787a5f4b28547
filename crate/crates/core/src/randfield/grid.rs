use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::Result;

/// Uniform grid `start, start + h, ..., end` with `n_points >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(start: f64, end: f64, n_points: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || end <= start {
            return domain(format!("grid needs finite start < end, got [{start}, {end}]"));
        }
        if n_points < 2 {
            return domain(format!("grid needs at least 2 points, got {n_points}"));
        }
        Ok(Self { start, end, n_points })
    }

    /// Grid on `[start, end]` with the given spacing; the spacing must divide the length.
    pub fn with_spacing(start: f64, end: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return domain(format!("spacing must be positive, got {spacing}"));
        }
        let cells = (end - start) / spacing;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return domain(format!(
                "spacing {spacing} does not divide [{start}, {end}]"
            ));
        }
        Self::new(start, end, rounded as usize + 1)
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.end
        } else {
            self.start + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Index of the grid point at the origin, if the origin is on the grid.
    pub fn zero_index(&self) -> Option<usize> {
        let h = self.spacing();
        let k = -self.start / h;
        let r = k.round();
        if r >= 0.0 && (r as usize) < self.n_points && (k - r).abs() <= 1e-9 * r.max(1.0) {
            Some(r as usize)
        } else {
            None
        }
    }
}
