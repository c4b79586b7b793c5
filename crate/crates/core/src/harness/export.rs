use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{JcrError, Result};
use crate::region::{AnalyticRegion, GridRegion};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = JcrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(JcrError::Unknown {
                what: "export format",
                name: other.to_string(),
            }),
        }
    }
}

impl ExportFormat {
    /// Format implied by the file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ExportFormat::Json,
            _ => ExportFormat::Csv,
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| JcrError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| JcrError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| JcrError::io(path, e))
}

/// Grid metadata written next to a CSV export: `region.csv` gets
/// `region.grid.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("grid.json")
}

/// Writes the region; CSV exports also write the JSON descriptor alongside.
pub fn export_region(region: &GridRegion, path: &Path, format: ExportFormat) -> Result<()> {
    match format {
        ExportFormat::Csv => {
            write_text(path, &region.to_csv_string())?;
            write_text(&sidecar_path(path), &region.to_json())
        }
        ExportFormat::Json => write_text(path, &region.to_json()),
    }
}

pub fn load_region(path: &Path) -> Result<GridRegion> {
    let text = read_text(path)?;
    match ExportFormat::from_path(path) {
        ExportFormat::Csv => GridRegion::from_csv_str(&text),
        ExportFormat::Json => GridRegion::from_json(&text),
    }
}

/// Band parameters as JSON: the four band fields, or the strip endpoints.
pub fn analytic_json(region: &AnalyticRegion) -> String {
    match region {
        AnalyticRegion::Band(b) => serde_json::to_string(b),
        AnalyticRegion::Strip(s) => serde_json::to_string(s),
    }
    .expect("region serializes")
}

pub fn export_analytic(region: &AnalyticRegion, path: &Path) -> Result<()> {
    write_text(path, &analytic_json(region))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{Axis, BandRegion};

    #[test]
    fn round_trips_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let t = Axis::new(-1.0, 1.0, 7).unwrap();
        let y = Axis::new(0.0, 3.0, 5).unwrap();
        let r = GridRegion::from_fn(t, y, |a, b| b > a + 1.0);
        for name in ["r.csv", "r.json"] {
            let p = dir.path().join(name);
            export_region(&r, &p, ExportFormat::from_path(&p)).unwrap();
            assert_eq!(load_region(&p).unwrap().mask(), r.mask());
        }
        assert!(sidecar_path(&dir.path().join("r.csv")).exists());
    }

    #[test]
    fn band_json_has_four_fields() {
        let b = AnalyticRegion::Band(BandRegion::new(0.5, -1.0, f64::NEG_INFINITY, 2.0).unwrap());
        let v: serde_json::Value = serde_json::from_str(&analytic_json(&b)).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 4);
        assert_eq!(v["lower"], "-inf");
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = read_text(Path::new("/nonexistent/dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
    }
}
