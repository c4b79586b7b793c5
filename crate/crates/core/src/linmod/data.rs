use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{JcrError, Result};

/// Calibration design `X` (n × p), outcomes `Y`, a test input `x_te` and,
/// for evaluation only, the held-out test outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    x: DMatrix<f64>,
    y: DVector<f64>,
    x_te: DVector<f64>,
    y_te: Option<f64>,
}

/// Least-squares fit of `Y` on `X`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub theta_hat: Vec<f64>,
    /// Residual variance with `n − p` degrees of freedom.
    pub s2: f64,
    pub residuals: Vec<f64>,
    pub df: usize,
}

impl OlsFit {
    pub fn s(&self) -> f64 {
        self.s2.sqrt()
    }
}

fn all_finite<'a>(values: impl IntoIterator<Item = &'a f64>) -> bool {
    values.into_iter().all(|v| v.is_finite())
}

impl RegressionData {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, x_te: DVector<f64>, y_te: Option<f64>) -> Result<Self> {
        let (n, p) = x.shape();
        if n == 0 || p == 0 {
            return Err(JcrError::invalid("design matrix must have at least one row and one column"));
        }
        if y.len() != n {
            return Err(JcrError::invalid(format!("Y has {} entries, X has {n} rows", y.len())));
        }
        if x_te.len() != p {
            return Err(JcrError::invalid(format!("x_te has {} entries, X has {p} columns", x_te.len())));
        }
        if !(all_finite(x.iter()) && all_finite(y.iter()) && all_finite(x_te.iter()) && all_finite(y_te.iter())) {
            return Err(JcrError::invalid("regression data must be finite"));
        }
        Ok(Self { x, y, x_te, y_te })
    }

    /// One-feature design without intercept.
    pub fn univariate(x: &[f64], y: &[f64], x_te: f64, y_te: Option<f64>) -> Result<Self> {
        Self::new(
            DMatrix::from_column_slice(x.len(), 1, x),
            DVector::from_column_slice(y),
            DVector::from_element(1, x_te),
            y_te,
        )
    }

    /// Design from row vectors.
    pub fn from_rows(rows: &[Vec<f64>], y: &[f64], x_te: &[f64], y_te: Option<f64>) -> Result<Self> {
        let p = x_te.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(JcrError::invalid("all design rows must have the length of x_te"));
        }
        Self::new(
            DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]),
            DVector::from_column_slice(y),
            DVector::from_column_slice(x_te),
            y_te,
        )
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn x_te(&self) -> &DVector<f64> {
        &self.x_te
    }

    pub fn y_te(&self) -> Option<f64> {
        self.y_te
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }

    /// First column as a slice-like vector; the scalar-θ constructions use it.
    pub fn x_column(&self) -> Vec<f64> {
        self.x.column(0).iter().copied().collect()
    }

    /// `X⁺`: the design with `x_te` appended as the last row.
    pub fn x_plus(&self) -> DMatrix<f64> {
        let (n, p) = self.x.shape();
        DMatrix::from_fn(n + 1, p, |i, j| if i < n { self.x[(i, j)] } else { self.x_te[j] })
    }

    pub fn with_test(&self, x_te: DVector<f64>, y_te: Option<f64>) -> Result<Self> {
        Self::new(self.x.clone(), self.y.clone(), x_te, y_te)
    }

    pub(crate) fn require_scalar(&self) -> Result<()> {
        if self.p() == 1 {
            Ok(())
        } else {
            Err(JcrError::invalid(format!("this construction needs one feature, got p = {}", self.p())))
        }
    }

    /// Ordinary least squares via SVD, rejecting rank-deficient designs.
    pub fn ols(&self) -> Result<OlsFit> {
        let (n, p) = self.x.shape();
        if n <= p {
            return Err(JcrError::invalid(format!("least squares needs n > p, got n = {n}, p = {p}")));
        }
        let svd = self.x.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let tol = smax * 1e-12 * n.max(p) as f64;
        if smax == 0.0 || svd.singular_values.iter().any(|&s| s <= tol) {
            return Err(JcrError::RankDeficient);
        }
        let theta = svd.solve(&self.y, tol).map_err(|_| JcrError::RankDeficient)?;
        let resid = &self.y - &self.x * &theta;
        let df = n - p;
        Ok(OlsFit {
            theta_hat: theta.iter().copied().collect(),
            s2: resid.norm_squared() / df as f64,
            residuals: resid.iter().copied().collect(),
            df,
        })
    }
}

pub fn ols_fit(data: &RegressionData) -> Result<OlsFit> {
    data.ols()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intercept_only() {
        let d = RegressionData::univariate(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], 1.0, None).unwrap();
        let fit = d.ols().unwrap();
        assert!((fit.theta_hat[0] - 2.0).abs() < 1e-12);
        for (r, e) in fit.residuals.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((r - e).abs() < 1e-12);
        }
        assert!((fit.s2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_fits() {
        let d = RegressionData::univariate(&[1.0, 2.0], &[2.0, 4.0], 3.0, None).unwrap();
        let fit = d.ols().unwrap();
        assert!((fit.theta_hat[0] - 2.0).abs() < 1e-12);
        assert!(fit.s2 < 1e-24);
        let rows = vec![vec![1.0, 0.5], vec![1.0, -1.0], vec![1.0, 2.0], vec![1.0, 3.0]];
        let y: Vec<f64> = rows.iter().map(|r| 0.5 * r[0] - 2.0 * r[1]).collect();
        let d = RegressionData::from_rows(&rows, &y, &[1.0, 0.0], None).unwrap();
        let fit = d.ols().unwrap();
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn normal_equations_hold() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![1.0, i as f64, ((i * 7) % 5) as f64]).collect();
        let y: Vec<f64> = (0..12).map(|i| ((i * 13) % 11) as f64 - 3.0).collect();
        let d = RegressionData::from_rows(&rows, &y, &[1.0, 1.0, 1.0], None).unwrap();
        let fit = d.ols().unwrap();
        let r = DVector::from_vec(fit.residuals.clone());
        let xtr = d.x().transpose() * r;
        assert!(xtr.amax() < 1e-8 * d.x().amax() * d.y().amax());
    }

    #[test]
    fn rank_deficiency_is_rejected() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        let d = RegressionData::from_rows(&rows, &[1.0, 2.0, 3.5], &[1.0, 1.0], None).unwrap();
        assert!(matches!(d.ols(), Err(JcrError::RankDeficient)));
        assert!(RegressionData::univariate(&[1.0, 2.0], &[1.0], 0.0, None).is_err());
    }
}
