//! Region representations, scan grids, empirical quantiles and set
//! operations.

mod band;
mod grid;
mod grid_region;
mod interval;
pub mod quantile;

pub use band::{AnalyticRegion, BandRegion, ThetaStrip};
pub use grid::{Axis, ThetaGrid, YGrid, DEFAULT_RESOLUTION};
pub(crate) use grid_region::fmt_decimal;
pub use grid_region::GridRegion;
pub use interval::IntervalUnion;
pub use quantile::{empirical_quantile, floor_count};

/// Membership query shared by grid and analytic regions.
pub trait Region {
    fn region_contains(&self, theta: f64, y: f64) -> crate::Result<bool>;
}

impl Region for GridRegion {
    fn region_contains(&self, theta: f64, y: f64) -> crate::Result<bool> {
        self.contains(theta, y)
    }
}

impl Region for BandRegion {
    fn region_contains(&self, theta: f64, y: f64) -> crate::Result<bool> {
        Ok(self.contains(theta, y))
    }
}

impl Region for AnalyticRegion {
    fn region_contains(&self, theta: f64, y: f64) -> crate::Result<bool> {
        Ok(self.contains(theta, y))
    }
}
