use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dist;
use crate::error::{JcrError, Result};
use crate::linmod::RegressionData;
use crate::region::{AnalyticRegion, Axis, BandRegion, GridRegion, ThetaStrip};

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(JcrError::invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Weights `w_1..w_n` on the calibration outcomes and `w_te` on the test
/// outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub w: Vec<f64>,
    pub w_te: f64,
}

impl WeightVector {
    /// `w = X / ‖X‖²`, `w_te = 0`: the classical confidence interval.
    pub fn confidence(data: &RegressionData) -> Self {
        let x = data.x_column();
        let nx2: f64 = x.iter().map(|v| v * v).sum();
        Self {
            w: x.iter().map(|v| v / nx2).collect(),
            w_te: 0.0,
        }
    }

    /// `w = X / ‖X‖²`, `w_te = −(Σ w_i x_i) / x_te`: the classical
    /// prediction interval.
    pub fn prediction(data: &RegressionData) -> Self {
        let mut out = Self::confidence(data);
        let wx: f64 = out.w.iter().zip(data.x_column()).map(|(a, b)| a * b).sum();
        out.w_te = -wx / data.x_te()[0];
        out
    }

    /// `w = 0`, `w_te = 1`: the Gaussian pivotal band.
    pub fn gaussian_pivot(n: usize) -> Self {
        Self { w: vec![0.0; n], w_te: 1.0 }
    }
}

/// Region `{t_lo ≤ (s0 + w_te y − coef θ) / d ≤ t_hi}`.
fn t_region(s0: f64, coef: f64, w_te: f64, d: f64, t_lo: f64, t_hi: f64) -> Result<AnalyticRegion> {
    if w_te != 0.0 {
        let a = d * t_lo / w_te;
        let b = d * t_hi / w_te;
        Ok(AnalyticRegion::Band(BandRegion::new(coef / w_te, -s0 / w_te, a.min(b), a.max(b))?))
    } else if coef != 0.0 {
        let a = (s0 - d * t_hi) / coef;
        let b = (s0 - d * t_lo) / coef;
        Ok(AnalyticRegion::Strip(ThetaStrip {
            lower: a.min(b),
            upper: a.max(b),
        }))
    } else {
        Err(JcrError::invalid("weights give neither a θ nor a y_te term"))
    }
}

/// Student-t band from the Gaussian pivot with weights `w` (one feature).
pub fn weighted_t_band(data: &RegressionData, weights: &WeightVector, alpha: f64) -> Result<AnalyticRegion> {
    check_alpha(alpha)?;
    data.require_scalar()?;
    if weights.w.len() != data.n() {
        return Err(JcrError::invalid(format!("{} weights for {} observations", weights.w.len(), data.n())));
    }
    let sum_w2 = weights.w.iter().map(|w| w * w).sum::<f64>() + weights.w_te * weights.w_te;
    if sum_w2.is_nan() || sum_w2 <= 0.0 {
        return Err(JcrError::invalid("weights must not all be zero"));
    }
    let fit = data.ols()?;
    let x = data.x_column();
    let s0: f64 = weights.w.iter().zip(data.y().iter()).map(|(w, y)| w * y).sum();
    let coef = weights.w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() + weights.w_te * data.x_te()[0];
    let df = fit.df as f64;
    t_region(
        s0,
        coef,
        weights.w_te,
        fit.s() * sum_w2.sqrt(),
        dist::t_quantile(df, alpha / 2.0)?,
        dist::t_quantile(df, 1.0 - alpha / 2.0)?,
    )
}

/// `(y_te − x_te θ) / S ∈ [t_{α/2}, t_{1−α/2}]`.
pub fn gaussian_pivot_band(data: &RegressionData, alpha: f64) -> Result<BandRegion> {
    let r = weighted_t_band(data, &WeightVector::gaussian_pivot(data.n()), alpha)?;
    Ok(*r.as_band().expect("w_te = 1 gives a band"))
}

/// `{(θ, y_te): |y_te − x_teᵀθ| ≤ √F_{1,n−p}^{1−α} · S}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FPivotJcr {
    pub x_te: Vec<f64>,
    pub half_width: f64,
    pub df: usize,
}

impl FPivotJcr {
    /// Membership for a full parameter vector.
    pub fn contains(&self, theta: &[f64], y: f64) -> bool {
        let fit: f64 = self.x_te.iter().zip(theta).map(|(a, b)| a * b).sum();
        (y - fit).abs() <= self.half_width
    }

    /// The band in `(θ, y_te)` for one feature.
    pub fn band(&self) -> Result<BandRegion> {
        if self.x_te.len() != 1 {
            return Err(JcrError::invalid("F-pivot regions with p > 1 are membership predicates only"));
        }
        BandRegion::new(self.x_te[0], 0.0, -self.half_width, self.half_width)
    }
}

pub fn f_pivot_jcr(data: &RegressionData, alpha: f64) -> Result<FPivotJcr> {
    check_alpha(alpha)?;
    let fit = data.ols()?;
    let f = dist::f_quantile(1.0, fit.df as f64, 1.0 - alpha)?;
    Ok(FPivotJcr {
        x_te: data.x_te().iter().copied().collect(),
        half_width: f.sqrt() * fit.s(),
        df: fit.df,
    })
}

/// Band for `(γ = cᵀθ, y_te)` from `(wᵀY⁺ − γ) / (S‖w‖) ~ t_{n−p}` with
/// `w = (X⁺ᵀ)† c`.
pub fn one_param_highdim_jcr(data: &RegressionData, c: &[f64], alpha: f64) -> Result<AnalyticRegion> {
    check_alpha(alpha)?;
    if c.len() != data.p() {
        return Err(JcrError::invalid(format!("c has {} entries, design has p = {}", c.len(), data.p())));
    }
    let fit = data.ols()?;
    let xpt = data.x_plus().transpose();
    let c = DVector::from_column_slice(c);
    let w = xpt
        .clone()
        .pseudo_inverse(1e-12)
        .map_err(|e| JcrError::invalid(e.to_string()))?
        * &c;
    let back = &xpt * &w;
    if (back - &c).amax() > 1e-8 * c.amax().max(1.0) {
        return Err(JcrError::invalid("c is not in the row span of X⁺"));
    }
    let n = data.n();
    let s0: f64 = (0..n).map(|i| w[i] * data.y()[i]).sum();
    let df = fit.df as f64;
    t_region(
        s0,
        1.0,
        w[n],
        fit.s() * w.norm(),
        dist::t_quantile(df, alpha / 2.0)?,
        dist::t_quantile(df, 1.0 - alpha / 2.0)?,
    )
}

/// Weight `ω` of the test point in the normal-mean family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Omega {
    Finite(f64),
    /// The `|ω| → ∞` limit.
    Infinity,
}

impl std::str::FromStr for Omega {
    type Err = JcrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "+inf" | "-inf" | "infinity" => Ok(Omega::Infinity),
            other => other
                .parse::<f64>()
                .map(Omega::Finite)
                .map_err(|_| JcrError::invalid(format!("omega must be a number or inf, got {other:?}"))),
        }
    }
}

/// `y_te − (1 + n/ω)θ + Σy/ω ∈ √(1 + n/ω²) · [q_{α/2}, q_{1−α/2}]` for
/// `y_i, y_te ~ N(θ, 1)` iid.
pub fn normal_mean_omega_jcr(y: &[f64], omega: Omega, alpha: f64) -> Result<BandRegion> {
    check_alpha(alpha)?;
    if y.is_empty() {
        return Err(JcrError::EmptySample);
    }
    let n = y.len() as f64;
    let (lo, hi) = (dist::normal_quantile(alpha / 2.0), dist::normal_quantile(1.0 - alpha / 2.0));
    match omega {
        Omega::Infinity => BandRegion::new(1.0, 0.0, lo, hi),
        Omega::Finite(w) if w == 0.0 || !w.is_finite() => Err(JcrError::invalid(
            "omega = 0 is the pure confidence limit; use the weighted t-band with w_te = 0",
        )),
        Omega::Finite(w) => {
            let scale = (1.0 + n / (w * w)).sqrt();
            let sum: f64 = y.iter().sum();
            let slope = if w == -n { 0.0 } else { 1.0 + n / w };
            BandRegion::new(slope, -sum / w, scale * lo, scale * hi)
        }
    }
}

/// Product `C × T` of a level `1 − α/2` confidence interval and a level
/// `1 − α/2` prediction interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntersectionJcr {
    pub theta: (f64, f64),
    pub y: (f64, f64),
}

impl IntersectionJcr {
    pub fn contains(&self, theta: f64, y: f64) -> bool {
        theta >= self.theta.0 && theta <= self.theta.1 && y >= self.y.0 && y <= self.y.1
    }

    pub fn rasterize(&self, theta_grid: Axis, y_grid: Axis) -> GridRegion {
        GridRegion::from_fn(theta_grid, y_grid, |t, y| self.contains(t, y))
    }
}

/// `C = θ̂ + (S/‖X‖)·[t_{α/4}, t_{1−α/4}]`,
/// `T = x_te θ̂ ± S √(x_te²/‖X‖² + 1) √F_{1,n−1}^{1−α/2}`.
pub fn intersection_jcr(data: &RegressionData, alpha: f64) -> Result<IntersectionJcr> {
    check_alpha(alpha)?;
    data.require_scalar()?;
    let fit = data.ols()?;
    let df = fit.df as f64;
    let nx = data.x_column().iter().map(|v| v * v).sum::<f64>().sqrt();
    let th = fit.theta_hat[0];
    let s = fit.s();
    let x_te = data.x_te()[0];
    let c = (th + s / nx * dist::t_quantile(df, alpha / 4.0)?, th + s / nx * dist::t_quantile(df, 1.0 - alpha / 4.0)?);
    let half = s * (x_te * x_te / (nx * nx) + 1.0).sqrt() * dist::f_quantile(1.0, df, 1.0 - alpha / 2.0)?.sqrt();
    Ok(IntersectionJcr {
        theta: c,
        y: (x_te * th - half, x_te * th + half),
    })
}

/// Scan window `center ± 6·scale` on both axes around the OLS fit.
pub fn default_grids(data: &RegressionData, resolution: usize) -> Result<(Axis, Axis)> {
    data.require_scalar()?;
    let fit = data.ols()?;
    let nx = data.x_column().iter().map(|v| v * v).sum::<f64>().sqrt();
    let s = fit.s().max(1e-9);
    let se = s / nx;
    let th = fit.theta_hat[0];
    let x_te = data.x_te()[0];
    let theta_grid = Axis::centered(th, 6.0 * se, resolution)?;
    let y_half = 6.0 * s * (1.0 + x_te * x_te / (nx * nx)).sqrt() + x_te.abs() * 6.0 * se;
    let y_grid = Axis::centered(x_te * th, y_half, resolution)?;
    Ok((theta_grid, y_grid))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> RegressionData {
        let x = [0.2, 0.9, 0.4, 0.7, 0.1, 0.5, 0.8, 0.3];
        let y = [0.5, 1.2, 0.1, 0.9, -0.4, 0.6, 1.5, 0.2];
        RegressionData::univariate(&x, &y, 5.0, None).unwrap()
    }

    #[test]
    fn omega_limits() {
        let y: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = normal_mean_omega_jcr(&y, Omega::Finite(-100.0), 0.1).unwrap();
        assert_eq!(b.slope, 0.0);
        let q = dist::normal_quantile(0.95);
        assert!((b.width() - 2.0 * (1.0 + 0.01f64).sqrt() * q).abs() < 1e-12);
        let inf = normal_mean_omega_jcr(&y, Omega::Infinity, 0.1).unwrap();
        assert_eq!((inf.slope, inf.intercept), (1.0, 0.0));
        assert!((inf.upper - q).abs() < 1e-15);
        assert!(normal_mean_omega_jcr(&y, Omega::Finite(0.0), 0.1).is_err());
        let mut last = f64::INFINITY;
        for w in [0.5, 1.0, 10.0, 100.0, 1e4] {
            let b = normal_mean_omega_jcr(&y, Omega::Finite(w), 0.1).unwrap();
            assert!((b.width() - 2.0 * (1.0 + 100.0 / (w * w)).sqrt() * q).abs() < 1e-9);
            assert!(b.width() < last);
            last = b.width();
        }
        assert_eq!("inf".parse::<Omega>().unwrap(), Omega::Infinity);
    }

    #[test]
    fn f_band_widths() {
        let d = data();
        let wide = f_pivot_jcr(&d, 0.1).unwrap();
        let narrow = f_pivot_jcr(&d, 0.999).unwrap();
        assert!(narrow.half_width < wide.half_width);
        let b = wide.band().unwrap();
        assert_eq!(b.slope, 5.0);
        let exact = RegressionData::univariate(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0], 1.0, None).unwrap();
        assert!(f_pivot_jcr(&exact, 0.1).unwrap().half_width < 1e-12);
    }

    #[test]
    fn gaussian_pivot_is_t_band() {
        let d = data();
        let b = gaussian_pivot_band(&d, 0.1).unwrap();
        let s = d.ols().unwrap().s();
        let t = dist::t_quantile(7.0, 0.95).unwrap();
        assert_eq!(b.slope, 5.0);
        assert_eq!(b.intercept, 0.0);
        assert!((b.upper - s * t).abs() < 1e-12 && (b.lower + s * t).abs() < 1e-12);
    }

    #[test]
    fn highdim_reduces_to_weighted_band_for_one_feature() {
        let d = data();
        let hd = one_param_highdim_jcr(&d, &[1.0], 0.1).unwrap();
        let xp: Vec<f64> = d.x_plus().iter().copied().collect();
        let norm2: f64 = xp.iter().map(|v| v * v).sum();
        let w = WeightVector {
            w: xp[..d.n()].iter().map(|v| v / norm2).collect(),
            w_te: xp[d.n()] / norm2,
        };
        let wb = weighted_t_band(&d, &w, 0.1).unwrap();
        // The weighted band is in θ; for p = 1 and c = 1, γ = θ.
        let (a, b) = (hd.as_band().unwrap(), wb.as_band().unwrap());
        for (u, v) in [(a.slope, b.slope), (a.intercept, b.intercept), (a.lower, b.lower), (a.upper, b.upper)] {
            assert!((u - v).abs() < 1e-9 * v.abs().max(1.0), "{u} vs {v}");
        }
    }

    #[test]
    fn highdim_rejects_c_outside_row_span() {
        let rows = vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0], vec![4.0, 0.0]];
        let d = RegressionData::from_rows(&rows, &[1.0, 2.0, 3.0, 4.5], &[1.0, 0.0], None).unwrap();
        // Rank-deficient design fails before the span check.
        assert!(one_param_highdim_jcr(&d, &[0.0, 1.0], 0.1).is_err());
    }

    #[test]
    fn intersection_is_a_rectangle() {
        let d = data();
        let r = intersection_jcr(&d, 0.1).unwrap();
        let (t, y) = default_grids(&d, 101).unwrap();
        let g = r.rasterize(t, y);
        let first = g.section_theta_at(40);
        for j in 0..101 {
            let s = g.section_theta_at(j);
            assert!(s.is_empty() || s == first);
        }
    }
}
