//! Applications: prediction by projecting a JCR, two-task miscoverage
//! control, and conversions between a JCR and its confidence and prediction
//! components.

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::normal_quantile;
use crate::error::{JcrError, Result};
use crate::harness::CoverageReport;
use crate::region::{Axis, BandRegion, GridRegion, IntervalUnion, ThetaStrip};
use crate::rng::{stream, Purpose};

/// `X₁ ~ N(θ, σ²)`, `X₂ ~ X₁ + N(θ, σ²)` with `θ ∈ [θ₁, θ₂]` and `x₁`
/// observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoStageModel {
    pub theta_window: (f64, f64),
    pub sigma: f64,
    pub x1: f64,
}

impl TwoStageModel {
    pub fn new(theta_window: (f64, f64), sigma: f64, x1: f64) -> Result<Self> {
        let (a, b) = theta_window;
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(JcrError::invalid(format!("theta window must satisfy θ₁ <= θ₂, got [{a}, {b}]")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(JcrError::invalid(format!("sigma must be positive, got {sigma}")));
        }
        if !x1.is_finite() {
            return Err(JcrError::invalid("x1 must be finite"));
        }
        Ok(Self { theta_window, sigma, x1 })
    }

    /// `{(θ, X₂): X₂ − x₁ − θ ∈ σ[q_{α/2}, q_{1−α/2}]}`.
    pub fn jcr(&self, alpha: f64) -> Result<BandRegion> {
        let (lo, hi) = two_sided(alpha)?;
        BandRegion::new(1.0, self.x1, self.sigma * lo, self.sigma * hi)
    }

    /// The three prediction intervals `T_α`, `T′` and the projection `T̃`.
    pub fn intervals(&self, alpha: f64) -> Result<ProjectionIntervals> {
        let (lo, hi) = two_sided(alpha)?;
        let s = self.sigma;
        let c = 2.0 * self.x1;
        Ok(ProjectionIntervals {
            t_alpha: (c - std::f64::consts::SQRT_2 * s * hi, c + std::f64::consts::SQRT_2 * s * hi),
            t_prime: (c - s * hi, c + s * hi),
            t_tilde: (self.x1 + self.theta_window.0 + s * lo, self.x1 + self.theta_window.1 + s * hi),
        })
    }
}

fn two_sided(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(JcrError::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok((normal_quantile(alpha / 2.0), normal_quantile(1.0 - alpha / 2.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionIntervals {
    pub t_alpha: (f64, f64),
    pub t_prime: (f64, f64),
    pub t_tilde: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionWidths {
    pub t_alpha: f64,
    pub t_prime: f64,
    pub t_tilde: f64,
}

/// Widths `2√2σq`, `2σq` and `2σq + (θ₂ − θ₁)` with `q = q_{1−α/2}`.
pub fn projection_widths(model: &TwoStageModel, alpha: f64) -> Result<ProjectionWidths> {
    let q = two_sided(alpha)?.1;
    let s = model.sigma;
    Ok(ProjectionWidths {
        t_alpha: 2.0 * std::f64::consts::SQRT_2 * s * q,
        t_prime: 2.0 * s * q,
        t_tilde: 2.0 * s * q + (model.theta_window.1 - model.theta_window.0),
    })
}

/// Union over θ-grid rows of the prediction sections.
pub fn project_prediction(jcr: &GridRegion) -> IntervalUnion {
    (0..jcr.theta_grid().count()).fold(IntervalUnion::empty(), |acc, i| acc.union(&jcr.section_y_at(i)))
}

/// Monte-Carlo coverage of `T_α`, `T′` and `T̃` at the true `θ`.
pub fn projection_coverage(
    theta_window: (f64, f64),
    sigma: f64,
    theta: f64,
    alpha: f64,
    trials: u64,
    seed: u64,
) -> Result<[CoverageReport; 3]> {
    TwoStageModel::new(theta_window, sigma, 0.0)?;
    two_sided(alpha)?;
    if trials == 0 {
        return Err(JcrError::invalid("trials must be at least 1"));
    }
    let digest = crate::harness::digest(&(
        "projection",
        theta_window,
        sigma,
        theta,
        alpha,
        trials,
        seed,
    ));
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, Purpose::Trial, t);
            let z1: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
            let z2: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
            let x1 = theta + sigma * z1;
            let x2 = x1 + theta + sigma * z2;
            let iv = TwoStageModel { theta_window, sigma, x1 }.intervals(alpha).expect("validated");
            let inside = |(a, b): (f64, f64)| (a <= x2 && x2 <= b) as u64;
            [inside(iv.t_alpha), inside(iv.t_prime), inside(iv.t_tilde)]
        })
        .reduce(|| [0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    let names = ["projection:t-alpha", "projection:t-prime", "projection:t-tilde"];
    let mut out = Vec::with_capacity(3);
    for (name, h) in names.iter().zip(hits) {
        out.push(CoverageReport::new(name, trials, h, alpha, seed, &digest)?);
    }
    Ok(out.try_into().expect("three reports"))
}

/// Regions of the two-task problem, all in `(θ, X₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultitaskRegions {
    pub x1: f64,
    pub alpha: f64,
    /// `x₁ ± q_{1−α/2}`.
    pub c: ThetaStrip,
    /// `2x₁ ± √2 q_{1−α/2}` as a θ-free band.
    pub t: BandRegion,
    /// `X₂ − 2θ ∈ √2[q_{α/2}, q_{1−α/2}]`.
    pub j: BandRegion,
    /// `X₂ − x₁ − θ ∈ [q_{α/2}, q_{1−α/2}]`.
    pub j_prime: BandRegion,
    /// The same four regions at level `α/2`.
    pub c_half: ThetaStrip,
    pub t_half: BandRegion,
    pub j_half: BandRegion,
    pub j_prime_half: BandRegion,
}

impl MultitaskRegions {
    /// `(θ, X₂) ∈ C_{α/2} × T_{α/2}`.
    pub fn in_product(&self, theta: f64, x2: f64) -> bool {
        self.c_half.contains(theta) && self.t_half.contains(theta, x2)
    }

    /// `(θ, X₂) ∈ J_{α/2} ∩ C_{α/2}`.
    pub fn in_j_cap_c(&self, theta: f64, x2: f64) -> bool {
        self.c_half.contains(theta) && self.j_half.contains(theta, x2)
    }

    /// `(θ, X₂) ∈ J′_{α/2} ∩ C_{α/2}`.
    pub fn in_j_prime_cap_c(&self, theta: f64, x2: f64) -> bool {
        self.c_half.contains(theta) && self.j_prime_half.contains(theta, x2)
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("regions serialize")
    }
}

pub fn multitask_regions(x1: f64, alpha: f64) -> Result<MultitaskRegions> {
    if !x1.is_finite() {
        return Err(JcrError::invalid("x1 must be finite"));
    }
    let at = |a: f64| -> Result<(ThetaStrip, BandRegion, BandRegion, BandRegion)> {
        let (lo, hi) = two_sided(a)?;
        let r2 = std::f64::consts::SQRT_2;
        Ok((
            ThetaStrip {
                lower: x1 - hi,
                upper: x1 + hi,
            },
            BandRegion::new(0.0, 2.0 * x1, -r2 * hi, r2 * hi)?,
            BandRegion::new(2.0, 0.0, r2 * lo, r2 * hi)?,
            BandRegion::new(1.0, x1, lo, hi)?,
        ))
    };
    let (c, t, j, j_prime) = at(alpha)?;
    let (c_half, t_half, j_half, j_prime_half) = at(alpha / 2.0)?;
    Ok(MultitaskRegions {
        x1,
        alpha,
        c,
        t,
        j,
        j_prime,
        c_half,
        t_half,
        j_half,
        j_prime_half,
    })
}

/// Coverage of `C_{α/2} × T_{α/2}`, `J_α`, `J_{α/2} ∩ C_{α/2}` and
/// `J′_{α/2} ∩ C_{α/2}` with `X₁ ~ N(θ, 1)`, `X₂ ~ X₁ + N(θ, 1)`.
pub fn multitask_coverage(theta: f64, alpha: f64, trials: u64, seed: u64) -> Result<[CoverageReport; 4]> {
    two_sided(alpha)?;
    if trials == 0 {
        return Err(JcrError::invalid("trials must be at least 1"));
    }
    let digest = crate::harness::digest(&("multitask", theta, alpha, trials, seed));
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, Purpose::Trial, t);
            let z1: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
            let z2: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
            let x1 = theta + z1;
            let x2 = x1 + theta + z2;
            let r = multitask_regions(x1, alpha).expect("validated");
            [
                r.in_product(theta, x2) as u64,
                r.j.contains(theta, x2) as u64,
                r.in_j_cap_c(theta, x2) as u64,
                r.in_j_prime_cap_c(theta, x2) as u64,
            ]
        })
        .reduce(|| [0; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
    let names = ["multitask:c-x-t", "multitask:j", "multitask:j-cap-c", "multitask:j-prime-cap-c"];
    let mut out = Vec::with_capacity(4);
    for (name, h) in names.iter().zip(hits) {
        out.push(CoverageReport::new(name, trials, h, alpha, seed, &digest)?);
    }
    Ok(out.try_into().expect("four reports"))
}

/// A JCR on a grid with its derived confidence and prediction maps.
#[derive(Debug, Clone, PartialEq)]
pub struct TrioRegion {
    jcr: GridRegion,
}

impl TrioRegion {
    pub fn new(jcr: GridRegion) -> Self {
        Self { jcr }
    }

    pub fn jcr(&self) -> &GridRegion {
        &self.jcr
    }

    /// `C(z)`: the θ-section at the unobserved value `z`.
    pub fn confidence(&self, z: f64) -> Result<IntervalUnion> {
        trio_confidence_from_jcr(&self.jcr, z)
    }

    /// `T(θ)`: the prediction section at `θ`.
    pub fn prediction(&self, theta: f64) -> Result<IntervalUnion> {
        trio_prediction_from_jcr(&self.jcr, theta)
    }
}

pub fn trio_confidence_from_jcr(jcr: &GridRegion, z: f64) -> Result<IntervalUnion> {
    jcr.section_theta(z)
}

pub fn trio_prediction_from_jcr(jcr: &GridRegion, theta: f64) -> Result<IntervalUnion> {
    jcr.section_y(theta)
}

/// `J̃ = {(θ, z): θ ∈ C(z)}` on the grids.
pub fn jcr_from_confidence<F>(theta_grid: Axis, y_grid: Axis, confidence: F) -> Result<GridRegion>
where
    F: Fn(f64) -> Result<IntervalUnion>,
{
    let sections = y_grid.points().map(&confidence).collect::<Result<Vec<_>>>()?;
    Ok(GridRegion::from_cells(theta_grid, y_grid, |i, j| sections[j].contains(theta_grid.point(i))))
}

/// `J̃ = {(θ, z): z ∈ T(θ)}` on the grids.
pub fn jcr_from_prediction<F>(theta_grid: Axis, y_grid: Axis, prediction: F) -> Result<GridRegion>
where
    F: Fn(f64) -> Result<IntervalUnion>,
{
    let sections = theta_grid.points().map(&prediction).collect::<Result<Vec<_>>>()?;
    Ok(GridRegion::from_cells(theta_grid, y_grid, |i, j| sections[i].contains(y_grid.point(j))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths_for_unit_sigma() {
        let m = TwoStageModel::new((-0.2, 0.2), 1.0, 0.3).unwrap();
        let w = projection_widths(&m, 0.1).unwrap();
        assert!((w.t_alpha - 4.652).abs() < 1e-3);
        assert!((w.t_prime - 3.290).abs() < 1e-3);
        assert!((w.t_tilde - 3.690).abs() < 1e-3);
        let iv = m.intervals(0.1).unwrap();
        assert!((iv.t_tilde.1 - iv.t_tilde.0 - w.t_tilde).abs() < 1e-12);
        let point = TwoStageModel::new((0.1, 0.1), 1.0, 0.3).unwrap();
        let w0 = projection_widths(&point, 0.1).unwrap();
        assert_eq!(w0.t_tilde, w0.t_prime);
    }

    #[test]
    fn projection_of_band_matches_closed_form() {
        let m = TwoStageModel::new((-0.2, 0.2), 1.0, 0.3).unwrap();
        let band = m.jcr(0.1).unwrap();
        let t = Axis::new(-0.2, 0.2, 401).unwrap();
        let y = Axis::new(-4.0, 5.0, 9001).unwrap();
        let proj = project_prediction(&GridRegion::from_fn(t, y, |a, b| band.contains(a, b)));
        let (lo, hi) = proj.hull().unwrap();
        let iv = m.intervals(0.1).unwrap();
        assert!((lo - iv.t_tilde.0).abs() <= y.step());
        assert!((hi - iv.t_tilde.1).abs() <= y.step());
        assert_eq!(proj.len(), 1);
        assert!(project_prediction(&GridRegion::filled(t, y, false)).is_empty());
        assert_eq!(project_prediction(&GridRegion::filled(t, y, true)).hull(), Some((-4.0, 5.0)));
    }

    #[test]
    fn multitask_structure() {
        let r = multitask_regions(0.4, 0.1).unwrap();
        assert_eq!(r.j.slope, 2.0);
        assert_eq!(r.j_prime.slope, 1.0);
        assert_eq!(r.t.slope, 0.0);
        let q = normal_quantile(0.95);
        assert!((r.j.width() - 2.0 * std::f64::consts::SQRT_2 * q).abs() < 1e-12);
        assert!(r.summary_json().contains("\"j_prime\""));
    }

    #[test]
    fn trio_round_trip_on_product_region() {
        let t = Axis::new(0.0, 1.0, 11).unwrap();
        let y = Axis::new(-1.0, 1.0, 21).unwrap();
        let j = GridRegion::from_fn(t, y, |a, _| (0.3..=0.6).contains(&a));
        let trio = TrioRegion::new(j.clone());
        assert_eq!(trio.confidence(0.5).unwrap(), trio.confidence(-0.5).unwrap());
        let back = jcr_from_confidence(t, y, |z| trio.confidence(z)).unwrap();
        assert_eq!(back, j);
        let back = jcr_from_prediction(t, y, |th| trio.prediction(th)).unwrap();
        assert_eq!(back, j);
    }
}
