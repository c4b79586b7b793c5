use std::sync::Arc;

use crate::error::{JcrError, Result};
use crate::invariance::{GroupAction, GroupElement, GroupKind, InvariantFn, StatisticFn};
use crate::linmod::RegressionData;
use crate::region::quantile::{at_most, floor_count, order_statistic};
use crate::region::{Axis, GridRegion};

/// Number of sampled permutations used when none is given.
pub const DEFAULT_PERMUTATIONS: usize = 500;

/// Scalar map applied to residuals in the cyclic-shift construction.
pub type ResidualMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `{(θ, y_te): q_{α₁}(f(r_i)) ≤ f(y_te − x_te θ) ≤ q_{α₂}(f(r_i))}` with
/// `r_i = y_i − x_i θ`.
#[derive(Clone)]
pub struct CyclicShiftJcr {
    x: Vec<f64>,
    y: Vec<f64>,
    x_te: f64,
    lower_index: usize,
    upper_index: usize,
    f: ResidualMap,
}

impl std::fmt::Debug for CyclicShiftJcr {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("CyclicShiftJcr")
            .field("n", &self.x.len())
            .field("lower_index", &self.lower_index)
            .field("upper_index", &self.upper_index)
            .finish()
    }
}

impl CyclicShiftJcr {
    pub fn new(data: &RegressionData, alpha1: f64, alpha2: f64, f: Option<ResidualMap>) -> Result<Self> {
        data.require_scalar()?;
        if !(0.0..=1.0).contains(&alpha1) || !(0.0..=1.0).contains(&alpha2) {
            return Err(JcrError::invalid(format!("quantile levels must lie in [0, 1], got {alpha1} and {alpha2}")));
        }
        if alpha1 >= alpha2 {
            return Err(JcrError::invalid(format!("need alpha1 < alpha2, got {alpha1} >= {alpha2}")));
        }
        let n = data.n();
        Ok(Self {
            x: data.x_column(),
            y: data.y().iter().copied().collect(),
            x_te: data.x_te()[0],
            lower_index: floor_count(n, alpha1),
            upper_index: floor_count(n, alpha2),
            f: f.unwrap_or_else(|| Arc::new(|r| r)),
        })
    }

    /// Symmetric split `α₁ = α/2`, `α₂ = 1 − α/2`.
    pub fn symmetric(data: &RegressionData, alpha: f64) -> Result<Self> {
        Self::new(data, alpha / 2.0, 1.0 - alpha / 2.0, None)
    }

    /// The two residual quantiles at `θ`.
    pub fn bounds(&self, theta: f64) -> (f64, f64) {
        let mut v: Vec<f64> = self.x.iter().zip(&self.y).map(|(x, y)| (self.f)(y - x * theta)).collect();
        v.sort_by(f64::total_cmp);
        (order_statistic(&v, self.lower_index), order_statistic(&v, self.upper_index))
    }

    pub fn contains(&self, theta: f64, y: f64) -> bool {
        let (lo, hi) = self.bounds(theta);
        let s = (self.f)(y - self.x_te * theta);
        at_most(lo, s) && at_most(s, hi)
    }

    pub fn region(&self, theta_grid: Axis, y_grid: Axis) -> GridRegion {
        GridRegion::from_rows(theta_grid, y_grid, |_, theta| {
            let (lo, hi) = self.bounds(theta);
            y_grid
                .points()
                .map(|y| {
                    let s = (self.f)(y - self.x_te * theta);
                    at_most(lo, s) && at_most(s, hi)
                })
                .collect()
        })
    }
}

pub fn cyclic_shift_jcr(
    data: &RegressionData,
    alpha1: f64,
    alpha2: f64,
    f: Option<ResidualMap>,
    theta_grid: Axis,
    y_grid: Axis,
) -> Result<GridRegion> {
    Ok(CyclicShiftJcr::new(data, alpha1, alpha2, f)?.region(theta_grid, y_grid))
}

/// Maps a two-group membership design (rows `(1, 0)` or `(0, 1)`) to a
/// one-feature design in `γ = μ₁ − μ₂`, with the group-one indicator as the
/// feature.
pub fn two_sample_reduction(data: &RegressionData) -> Result<RegressionData> {
    let one_hot = |r: &[f64]| matches!(r, [a, b] if (*a == 1.0 && *b == 0.0) || (*a == 0.0 && *b == 1.0));
    if data.p() != 2 || !(0..data.n()).all(|i| one_hot(&data.row(i))) {
        return Err(JcrError::invalid(
            "permutation regions with p > 1 need a two-group membership design with rows (1, 0) or (0, 1)",
        ));
    }
    let x_te: Vec<f64> = data.x_te().iter().copied().collect();
    if !one_hot(&x_te) {
        return Err(JcrError::invalid("x_te must be (1, 0) or (0, 1) in the two-group design"));
    }
    let x: Vec<f64> = (0..data.n()).map(|i| data.x()[(i, 0)]).collect();
    let y: Vec<f64> = data.y().iter().copied().collect();
    RegressionData::univariate(&x, &y, x_te[0], data.y_te())
}

/// Permutation JCR with `m(I) = |Σ (x_i − x̄)(I_i − Ī)|` over `X⁺` and `K`
/// sampled permutations shared by every cell.
///
/// For each element, `m(gI)` is `|a + b·y_te − d·θ|`, so coefficients are
/// computed once and each cell costs `O(K)`.
#[derive(Debug, Clone)]
pub struct PermutationJcr {
    data: RegressionData,
    elements: Vec<GroupElement>,
    coefs: Vec<[f64; 3]>,
    threshold: usize,
    alpha: f64,
}

impl PermutationJcr {
    pub fn new(data: &RegressionData, alpha: f64, k: usize, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(JcrError::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if k < 1 {
            return Err(JcrError::invalid("the number of sampled transforms K must be at least 1"));
        }
        let data = if data.p() == 1 { data.clone() } else { two_sample_reduction(data)? };
        let n = data.n();
        let x_plus: Vec<f64> = data.x_plus().iter().copied().collect();
        let mean = x_plus.iter().sum::<f64>() / (n + 1) as f64;
        let c: Vec<f64> = x_plus.iter().map(|x| x - mean).collect();
        let elements = GroupAction::new(GroupKind::Permutation, n + 1, seed)?.sample_elements(k);
        let y = data.y();
        let coef = |perm: &[usize]| {
            let mut out = [0.0; 3];
            for (i, &pi) in perm.iter().enumerate() {
                if pi < n {
                    out[0] += c[i] * y[pi];
                } else {
                    out[1] += c[i];
                }
                out[2] += c[i] * x_plus[pi];
            }
            out
        };
        let identity: Vec<usize> = (0..=n).collect();
        let mut coefs = vec![coef(&identity)];
        for g in &elements {
            match g {
                GroupElement::Permutation(p) => coefs.push(coef(p)),
                _ => unreachable!("permutation group yields permutations"),
            }
        }
        Ok(Self {
            data,
            elements,
            coefs,
            threshold: floor_count(k + 1, alpha),
            alpha,
        })
    }

    /// The design the region is built on: the input, or its two-sample
    /// reduction.
    pub fn data(&self) -> &RegressionData {
        &self.data
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    fn stat(&self, idx: usize, theta: f64, y: f64) -> f64 {
        let [a, b, d] = self.coefs[idx];
        -(a + b * y - d * theta).abs()
    }

    pub fn contains(&self, theta: f64, y: f64) -> bool {
        if self.threshold == 0 {
            return true;
        }
        let observed = self.stat(0, theta, y);
        let mut hits = 0;
        for idx in 1..self.coefs.len() {
            if at_most(self.stat(idx, theta, y), observed) {
                hits += 1;
                if hits >= self.threshold {
                    return true;
                }
            }
        }
        false
    }

    pub fn region(&self, theta_grid: Axis, y_grid: Axis) -> GridRegion {
        GridRegion::from_fn(theta_grid, y_grid, |t, y| self.contains(t, y))
    }

    /// The equivalent generic configuration: invariant, statistic and the
    /// sampled elements.
    pub fn generic(&self) -> (InvariantFn, StatisticFn, Vec<GroupElement>, f64) {
        let x_plus: Vec<f64> = self.data.x_plus().iter().copied().collect();
        (
            InvariantFn::linear_residuals(x_plus.clone()),
            StatisticFn::abs_covariance(&x_plus).negated(),
            self.elements.clone(),
            self.alpha,
        )
    }
}

pub fn permutation_jcr(data: &RegressionData, alpha: f64, k: usize, seed: u64, theta_grid: Axis, y_grid: Axis) -> Result<GridRegion> {
    Ok(PermutationJcr::new(data, alpha, k, seed)?.region(theta_grid, y_grid))
}
