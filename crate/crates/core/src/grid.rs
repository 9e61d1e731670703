use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform frequency axis, `point(i) = start + i * step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    start: f64,
    step: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::invalid("grid start must be finite"));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid(format!("grid step must be > 0, got {step}")));
        }
        if count < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 points, got {count}")));
        }
        Ok(Self { start, step, count })
    }

    /// Grid of `2 * half_points + 1` samples centered exactly on `center`.
    pub fn centered(center: f64, step: f64, half_points: usize) -> Result<Self> {
        Self::new(center - half_points as f64 * step, step, 2 * half_points + 1)
    }

    /// Grid covering `[lo, hi]` with spacing no larger than `max_step`.
    pub fn spanning(lo: f64, hi: f64, max_step: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::invalid("grid span must have hi > lo"));
        }
        let intervals = ((hi - lo) / max_step).ceil().max(1.0) as usize;
        Self::new(lo, (hi - lo) / intervals as f64, intervals + 1)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.start && f <= self.end()
    }

    /// Index of the sample nearest to `f`, if `f` lies on the grid.
    pub fn nearest_index(&self, f: f64) -> Option<usize> {
        if !self.contains(f) {
            return None;
        }
        let i = ((f - self.start) / self.step).round() as usize;
        Some(i.min(self.count - 1))
    }

    /// Same grid shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self { start: self.start + offset, ..*self }
    }
}
