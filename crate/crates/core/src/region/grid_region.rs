use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{JcrError, Result};
use crate::region::{Axis, IntervalUnion};

/// A rasterized region over `theta_grid × y_grid`.
///
/// The mask is stored row-major with θ as the outer index: cell `(i, j)` is
/// at `i * y_count + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRegion {
    theta_grid: Axis,
    y_grid: Axis,
    mask: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct Descriptor {
    theta_grid: Axis,
    y_grid: Axis,
    mask: String,
}

impl GridRegion {
    pub fn new(theta_grid: Axis, y_grid: Axis, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != theta_grid.count() * y_grid.count() {
            return Err(JcrError::InvalidGrid(format!(
                "mask has {} cells, grids need {}x{}",
                mask.len(),
                theta_grid.count(),
                y_grid.count()
            )));
        }
        Ok(Self {
            theta_grid,
            y_grid,
            mask,
        })
    }

    pub fn filled(theta_grid: Axis, y_grid: Axis, value: bool) -> Self {
        Self {
            theta_grid,
            y_grid,
            mask: vec![value; theta_grid.count() * y_grid.count()],
        }
    }

    /// Evaluates `inside(theta, y)` at every cell, in parallel over θ rows.
    pub fn from_fn<F>(theta_grid: Axis, y_grid: Axis, inside: F) -> Self
    where
        F: Fn(f64, f64) -> bool + Sync,
    {
        Self::from_rows(theta_grid, y_grid, |_, theta| {
            y_grid.points().map(|y| inside(theta, y)).collect()
        })
    }

    /// Builds each θ row with `row(i, theta)`, which must return one flag per
    /// y-grid point.
    pub fn from_rows<F>(theta_grid: Axis, y_grid: Axis, row: F) -> Self
    where
        F: Fn(usize, f64) -> Vec<bool> + Sync,
    {
        let ny = y_grid.count();
        let mask = (0..theta_grid.count())
            .into_par_iter()
            .flat_map_iter(|i| {
                let r = row(i, theta_grid.point(i));
                assert_eq!(r.len(), ny, "row {i} has wrong length");
                r
            })
            .collect();
        Self {
            theta_grid,
            y_grid,
            mask,
        }
    }

    /// Fallible variant of [`GridRegion::from_rows`]; the first error wins.
    pub fn try_from_rows<F>(theta_grid: Axis, y_grid: Axis, row: F) -> Result<Self>
    where
        F: Fn(usize, f64) -> Result<Vec<bool>> + Sync,
    {
        let ny = y_grid.count();
        let rows = (0..theta_grid.count())
            .into_par_iter()
            .map(|i| {
                let r = row(i, theta_grid.point(i))?;
                if r.len() != ny {
                    return Err(JcrError::InvalidGrid(format!("row {i} has {} cells, expected {ny}", r.len())));
                }
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            theta_grid,
            y_grid,
            mask: rows.concat(),
        })
    }

    /// Evaluates `inside(i, j, theta, y)` at every cell; errors abort.
    pub fn try_from_cells<F>(theta_grid: Axis, y_grid: Axis, inside: F) -> Result<Self>
    where
        F: Fn(usize, usize, f64, f64) -> Result<bool> + Sync,
    {
        Self::try_from_rows(theta_grid, y_grid, |i, theta| {
            y_grid.points().enumerate().map(|(j, y)| inside(i, j, theta, y)).collect()
        })
    }

    /// Evaluates `inside(i, j)` on cell indices, in parallel over rows.
    pub fn from_cells<F>(theta_grid: Axis, y_grid: Axis, inside: F) -> Self
    where
        F: Fn(usize, usize) -> bool + Sync,
    {
        Self::from_rows(theta_grid, y_grid, |i, _| (0..y_grid.count()).map(|j| inside(i, j)).collect())
    }

    pub fn theta_grid(&self) -> &Axis {
        &self.theta_grid
    }

    pub fn y_grid(&self) -> &Axis {
        &self.y_grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn cell(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.y_grid.count() + j]
    }

    pub fn count_inside(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.theta_grid == other.theta_grid && self.y_grid == other.y_grid
    }

    fn theta_index(&self, theta: f64) -> Result<usize> {
        self.theta_grid.nearest(theta).ok_or(JcrError::OutOfWindow {
            axis: "theta",
            value: theta,
            lo: self.theta_grid.lo(),
            hi: self.theta_grid.hi(),
        })
    }

    fn y_index(&self, y: f64) -> Result<usize> {
        self.y_grid.nearest(y).ok_or(JcrError::OutOfWindow {
            axis: "y",
            value: y,
            lo: self.y_grid.lo(),
            hi: self.y_grid.hi(),
        })
    }

    /// Membership of the cell nearest to `(theta, y)`.
    pub fn contains(&self, theta: f64, y: f64) -> Result<bool> {
        Ok(self.cell(self.theta_index(theta)?, self.y_index(y)?))
    }

    /// θ-section at the y row nearest to `y`.
    pub fn section_theta(&self, y: f64) -> Result<IntervalUnion> {
        Ok(self.section_theta_at(self.y_index(y)?))
    }

    /// y-section at the θ row nearest to `theta`.
    pub fn section_y(&self, theta: f64) -> Result<IntervalUnion> {
        Ok(self.section_y_at(self.theta_index(theta)?))
    }

    pub fn section_theta_at(&self, j: usize) -> IntervalUnion {
        let ny = self.y_grid.count();
        runs(&self.theta_grid, |i| self.mask[i * ny + j])
    }

    pub fn section_y_at(&self, i: usize) -> IntervalUnion {
        let ny = self.y_grid.count();
        let row = &self.mask[i * ny..(i + 1) * ny];
        runs(&self.y_grid, |j| row[j])
    }

    fn zip_with(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(JcrError::GridMismatch);
        }
        Ok(Self {
            theta_grid: self.theta_grid,
            y_grid: self.y_grid,
            mask: self.mask.iter().zip(&other.mask).map(|(&a, &b)| op(a, b)).collect(),
        })
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn complement(&self) -> Self {
        Self {
            theta_grid: self.theta_grid,
            y_grid: self.y_grid,
            mask: self.mask.iter().map(|&b| !b).collect(),
        }
    }

    /// CSV with header `theta,y,inside`, one row per cell, LF line endings.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.mask.len() * 24 + 16);
        out.push_str("theta,y,inside\n");
        let ys: Vec<String> = self.y_grid.points().map(fmt_decimal).collect();
        for (i, theta) in self.theta_grid.points().enumerate() {
            let t = fmt_decimal(theta);
            for (j, y) in ys.iter().enumerate() {
                let inside = u8::from(self.cell(i, j));
                let _ = writeln!(out, "{t},{y},{inside}");
            }
        }
        out
    }

    /// Parses the CSV layout written by [`GridRegion::to_csv_string`].
    ///
    /// Grid bounds are recovered from the first and last coordinates, so the
    /// reloaded axes equal the originals exactly.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| JcrError::Parse {
                row: 1,
                message: e.to_string(),
            })?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["theta", "y", "inside"] {
            return Err(JcrError::Parse {
                row: 1,
                message: "expected header theta,y,inside".into(),
            });
        }
        let mut cells = Vec::new();
        for (k, rec) in reader.records().enumerate() {
            let row = k + 2;
            let rec = rec.map_err(|e| JcrError::Parse {
                row,
                message: e.to_string(),
            })?;
            let field = |idx: usize| -> Result<f64> {
                rec.get(idx)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| JcrError::Parse {
                        row,
                        message: format!("column {idx} is not numeric"),
                    })
            };
            let inside = match rec.get(2).map(str::trim) {
                Some("1") => true,
                Some("0") => false,
                _ => {
                    return Err(JcrError::Parse {
                        row,
                        message: "inside must be 0 or 1".into(),
                    })
                }
            };
            cells.push((field(0)?, field(1)?, inside));
        }
        if cells.is_empty() {
            return Err(JcrError::Parse {
                row: 2,
                message: "no cells".into(),
            });
        }
        let first_theta = cells[0].0;
        let ny = cells.iter().take_while(|c| c.0 == first_theta).count();
        if ny < 2 || cells.len() % ny != 0 {
            return Err(JcrError::Parse {
                row: 2,
                message: "cells do not form a complete grid".into(),
            });
        }
        let nt = cells.len() / ny;
        let theta_grid = Axis::new(first_theta, cells[cells.len() - 1].0, nt)?;
        let y_grid = Axis::new(cells[0].1, cells[ny - 1].1, ny)?;
        Self::new(theta_grid, y_grid, cells.into_iter().map(|c| c.2).collect())
    }

    /// Compact JSON: both grids plus the row-major mask as a `0`/`1` string.
    pub fn to_json(&self) -> String {
        let desc = Descriptor {
            theta_grid: self.theta_grid,
            y_grid: self.y_grid,
            mask: self.mask.iter().map(|&b| if b { '1' } else { '0' }).collect(),
        };
        serde_json::to_string(&desc).expect("descriptor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let desc: Descriptor = serde_json::from_str(text)?;
        let theta_grid = Axis::new(desc.theta_grid.lo(), desc.theta_grid.hi(), desc.theta_grid.count())?;
        let y_grid = Axis::new(desc.y_grid.lo(), desc.y_grid.hi(), desc.y_grid.count())?;
        let mask = desc
            .mask
            .chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(JcrError::invalid(format!("mask character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(theta_grid, y_grid, mask)
    }
}

/// Merges maximal runs of true cells along an axis into closed intervals
/// whose endpoints are grid points.
fn runs(axis: &Axis, inside: impl Fn(usize) -> bool) -> IntervalUnion {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for k in 0..axis.count() {
        match (inside(k), start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push((axis.point(s), axis.point(k - 1)));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((axis.point(s), axis.hi()));
    }
    IntervalUnion::from_intervals(out)
}

/// Decimal text with nine significant digits.
pub(crate) fn fmt_decimal(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Shortest text that parses back to the same value.
    if x == 0.0 {
        "0".into()
    } else {
        x.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::BandRegion;

    fn grids() -> (Axis, Axis) {
        (Axis::new(-3.0, 3.0, 61).unwrap(), Axis::new(-4.0, 4.0, 81).unwrap())
    }

    #[test]
    fn full_and_empty_sections() {
        let (t, y) = grids();
        let full = GridRegion::filled(t, y, true);
        assert!(full.contains(0.3, 1.1).unwrap());
        assert_eq!(full.section_theta(0.0).unwrap().intervals(), &[(-3.0, 3.0)]);
        assert_eq!(full.section_y(0.0).unwrap().intervals(), &[(-4.0, 4.0)]);
        let empty = GridRegion::filled(t, y, false);
        assert!(empty.section_theta(1.0).unwrap().is_empty());
        assert!(empty.section_y(1.0).unwrap().is_empty());
    }

    #[test]
    fn out_of_window_is_an_error() {
        let (t, y) = grids();
        let r = GridRegion::filled(t, y, true);
        let err = r.contains(3.5, 0.0).unwrap_err();
        assert!(err.to_string().starts_with("out of window"));
        assert!(r.section_theta(-4.5).is_err());
    }

    #[test]
    fn band_sections_within_one_step() {
        let (t, y) = grids();
        let band = BandRegion::new(1.0, 0.0, -1.0, 1.0).unwrap();
        let r = GridRegion::from_fn(t, y, |a, b| band.contains(a, b));
        let s = r.section_theta(0.0).unwrap();
        assert_eq!(s.len(), 1);
        let (a, b) = s.intervals()[0];
        assert!((a + 1.0).abs() <= t.step() && (b - 1.0).abs() <= t.step());
    }

    #[test]
    fn set_algebra() {
        let (t, y) = grids();
        let a = GridRegion::from_fn(t, y, |p, q| p + q > 0.0);
        let b = GridRegion::from_fn(t, y, |p, q| p * q < 1.0);
        assert_eq!(a.intersect(&a).unwrap(), a);
        assert!(a.intersect(&GridRegion::filled(t, y, false)).unwrap().is_empty());
        let lhs = a.union(&b).unwrap().complement();
        let rhs = a.complement().intersect(&b.complement()).unwrap();
        assert_eq!(lhs, rhs);
        let other = GridRegion::filled(Axis::new(0.0, 1.0, 5).unwrap(), y, true);
        assert!(matches!(a.union(&other), Err(JcrError::GridMismatch)));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let (t, y) = grids();
        let r = GridRegion::from_fn(t, y, |p, q| (q - 0.7 * p).abs() < 1.3);
        let csv = r.to_csv_string();
        assert!(csv.starts_with("theta,y,inside\n-3,-4,0\n"));
        assert!(!csv.contains('\r'));
        let back = GridRegion::from_csv_str(&csv).unwrap();
        assert_eq!(back.mask(), r.mask());
        assert_eq!(GridRegion::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(fmt_decimal(0.1), "0.1");
        assert_eq!(fmt_decimal(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(fmt_decimal(-0.0), "0");
        assert_eq!(fmt_decimal(-2.0), "-2");
        assert_eq!(fmt_decimal(12345.678912345), "12345.678912345");
    }
}
