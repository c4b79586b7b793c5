use serde::{Deserialize, Serialize};

use crate::error::{JcrError, Result};

/// Default number of grid points per axis.
pub const DEFAULT_RESOLUTION: usize = 401;

/// An evenly spaced, bounded scan axis.
///
/// Point `i` sits at `lo + i * step` with `step = (hi - lo) / (count - 1)`;
/// the last point is pinned to `hi` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    lo: f64,
    hi: f64,
    count: usize,
}

/// Parameter axis of a reduced-form region.
pub type ThetaGrid = Axis;
/// Observable axis of a reduced-form region.
pub type YGrid = Axis;

impl Axis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(JcrError::InvalidGrid(format!(
                "bounds must be finite, got [{lo}, {hi}]"
            )));
        }
        if lo >= hi {
            return Err(JcrError::InvalidGrid(format!("lo {lo} must be below hi {hi}")));
        }
        if count < 2 {
            return Err(JcrError::InvalidGrid(format!("count must be at least 2, got {count}")));
        }
        Ok(Self { lo, hi, count })
    }

    /// Window `center ± half_width` at the given resolution.
    pub fn centered(center: f64, half_width: f64, count: usize) -> Result<Self> {
        Self::new(center - half_width, center + half_width, count)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        debug_assert!(i < self.count);
        if i + 1 == self.count {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.lo && value <= self.hi
    }

    /// Index of the grid point nearest to `value`, or `None` outside `[lo, hi]`.
    pub fn nearest(&self, value: f64) -> Option<usize> {
        if !self.contains(value) {
            return None;
        }
        let idx = ((value - self.lo) / self.step()).round() as usize;
        Some(idx.min(self.count - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_bounds() {
        assert!(Axis::new(1.0, 1.0, 10).is_err());
        assert!(Axis::new(2.0, 1.0, 10).is_err());
        assert!(Axis::new(0.0, 1.0, 1).is_err());
        assert!(Axis::new(0.0, f64::INFINITY, 3).is_err());
    }

    #[test]
    fn points_are_strictly_increasing_and_pinned() {
        let g = Axis::new(-1.3, 2.7, 17).unwrap();
        let pts: Vec<f64> = g.points().collect();
        assert_eq!(pts[0], -1.3);
        assert_eq!(*pts.last().unwrap(), 2.7);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn nearest_snaps() {
        let g = Axis::new(0.0, 1.0, 11).unwrap();
        assert_eq!(g.nearest(0.26), Some(3));
        assert_eq!(g.nearest(1.0), Some(10));
        assert_eq!(g.nearest(1.01), None);
    }
}
