use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{JcrError, Result};
use crate::region::{Axis, GridRegion, IntervalUnion};

/// `{(θ, y): lower ≤ y − slope·θ − intercept ≤ upper}`.
///
/// `lower`/`upper` may be infinite; JSON uses the strings `"inf"`/`"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRegion {
    pub slope: f64,
    pub intercept: f64,
    #[serde(with = "inf_sentinel")]
    pub lower: f64,
    #[serde(with = "inf_sentinel")]
    pub upper: f64,
}

impl BandRegion {
    pub fn new(slope: f64, intercept: f64, lower: f64, upper: f64) -> Result<Self> {
        if !slope.is_finite() || !intercept.is_finite() {
            return Err(JcrError::invalid("band slope and intercept must be finite"));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(JcrError::invalid(format!("band bounds [{lower}, {upper}] are not ordered")));
        }
        Ok(Self {
            slope,
            intercept,
            lower,
            upper,
        })
    }

    /// Offset of `y` from the band's center line at `theta`.
    pub fn residual(&self, theta: f64, y: f64) -> f64 {
        y - self.slope * theta - self.intercept
    }

    pub fn contains(&self, theta: f64, y: f64) -> bool {
        let r = self.residual(theta, y);
        r >= self.lower && r <= self.upper
    }

    /// Vertical width of the band, constant in θ.
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn section_y(&self, theta: f64) -> IntervalUnion {
        let c = self.slope * theta + self.intercept;
        IntervalUnion::single(c + self.lower, c + self.upper)
    }

    pub fn section_theta(&self, y: f64) -> IntervalUnion {
        if self.slope == 0.0 {
            let r = y - self.intercept;
            return if r >= self.lower && r <= self.upper {
                IntervalUnion::single(f64::NEG_INFINITY, f64::INFINITY)
            } else {
                IntervalUnion::empty()
            };
        }
        let a = (y - self.intercept - self.upper) / self.slope;
        let b = (y - self.intercept - self.lower) / self.slope;
        IntervalUnion::single(a.min(b), a.max(b))
    }

    /// Human-readable parameters for figure captions.
    pub fn describe(&self) -> String {
        format!(
            "slope={} intercept={} lower={} upper={} half_width={}",
            self.slope,
            self.intercept,
            self.lower,
            self.upper,
            0.5 * self.width()
        )
    }
}

/// A vertical strip `{(θ, y): lower ≤ θ ≤ upper}`: a pure confidence region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaStrip {
    #[serde(with = "inf_sentinel")]
    pub lower: f64,
    #[serde(with = "inf_sentinel")]
    pub upper: f64,
}

impl ThetaStrip {
    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.lower && theta <= self.upper
    }
}

/// Closed-form regions produced by the linear-model constructors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticRegion {
    Band(BandRegion),
    Strip(ThetaStrip),
}

impl AnalyticRegion {
    pub fn contains(&self, theta: f64, y: f64) -> bool {
        match self {
            AnalyticRegion::Band(b) => b.contains(theta, y),
            AnalyticRegion::Strip(s) => s.contains(theta),
        }
    }

    pub fn as_band(&self) -> Option<&BandRegion> {
        match self {
            AnalyticRegion::Band(b) => Some(b),
            AnalyticRegion::Strip(_) => None,
        }
    }

    pub fn as_strip(&self) -> Option<&ThetaStrip> {
        match self {
            AnalyticRegion::Strip(s) => Some(s),
            AnalyticRegion::Band(_) => None,
        }
    }

    pub fn rasterize(&self, theta_grid: Axis, y_grid: Axis) -> GridRegion {
        GridRegion::from_fn(theta_grid, y_grid, |t, y| self.contains(t, y))
    }

    pub fn describe(&self, df: Option<f64>) -> String {
        let body = match self {
            AnalyticRegion::Band(b) => b.describe(),
            AnalyticRegion::Strip(s) => format!(
                "theta_lower={} theta_upper={} half_width={}",
                s.lower,
                s.upper,
                0.5 * (s.upper - s.lower)
            ),
        };
        match df {
            Some(df) => format!("{body} df={df}"),
            None => body,
        }
    }
}

pub(crate) mod inf_sentinel {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("expected number, \"inf\" or \"-inf\", got {other:?}"))),
            },
        }
    }
}
