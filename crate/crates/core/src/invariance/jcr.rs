use std::sync::Arc;

use crate::error::{JcrError, Result};
use crate::invariance::{GroupAction, GroupElement, StatisticFn, DEFAULT_GROUP_BUDGET};
use crate::linmod::RegressionData;
use crate::pivots::ObservationRecord;
use crate::region::quantile::{floor_count, rank_accepts};
use crate::region::{Axis, GridRegion};

type VectorMap = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
type ScalarModel = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// `I(θ, z)`: a vector whose law is invariant under the group at the true θ.
#[derive(Clone)]
pub struct InvariantFn {
    f: VectorMap,
}

impl InvariantFn {
    pub fn new(f: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f) }
    }

    /// `I = Y⁺ − X⁺θ` for a one-feature design, with `z = Y⁺`.
    pub fn linear_residuals(x_plus: Vec<f64>) -> Self {
        Self::new(move |theta, z| z.iter().zip(&x_plus).map(|(y, x)| y - x * theta).collect())
    }

    pub fn eval(&self, theta: f64, z: &[f64]) -> Vec<f64> {
        (self.f)(theta, z)
    }
}

/// Separable model `y = f(θ, x) + ε` used by split and adequate-set
/// constructions.
#[derive(Clone)]
pub struct SeparableModel {
    f: ScalarModel,
}

impl SeparableModel {
    pub fn new(f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f) }
    }

    /// `f(θ, x) = θ · x[0]`.
    pub fn linear() -> Self {
        Self::new(|theta, x| theta * x[0])
    }

    pub fn predict(&self, theta: f64, x: &[f64]) -> f64 {
        (self.f)(theta, x)
    }

    /// Calibration residuals `y_i − f(θ, x_i)`.
    pub fn residuals(&self, theta: f64, calib: &RegressionData) -> Vec<f64> {
        (0..calib.n()).map(|i| calib.y()[i] - self.predict(theta, &calib.row(i))).collect()
    }
}

/// Rank rule over a fixed family of group elements: accept `I` when at least
/// `threshold` of the transformed statistics are at most `m(I)`.
#[derive(Debug, Clone)]
pub struct RankTest {
    elements: Vec<GroupElement>,
    stat: StatisticFn,
    threshold: usize,
}

impl RankTest {
    /// Full-orbit test: `threshold = ⌊|G|α⌋` over all elements, identity
    /// included.
    pub fn full_group(group: &GroupAction, stat: StatisticFn, alpha: f64, budget: u64) -> Result<Self> {
        check_alpha(alpha)?;
        let elements = group.enumerate(budget)?;
        let threshold = floor_count(elements.len(), alpha);
        Ok(Self {
            elements,
            stat,
            threshold,
        })
    }

    /// Sampled test: `threshold = ⌊(K+1)α⌋` over `K` iid elements.
    pub fn sampled(group: &GroupAction, stat: StatisticFn, alpha: f64, k: usize, seed: u64) -> Result<Self> {
        check_alpha(alpha)?;
        if k < 1 {
            return Err(JcrError::invalid("the number of sampled transforms K must be at least 1"));
        }
        let elements = GroupAction::new(group.kind(), group.dim(), seed)?.sample_elements(k);
        Ok(Self::from_elements(elements, stat, alpha))
    }

    pub fn from_elements(elements: Vec<GroupElement>, stat: StatisticFn, alpha: f64) -> Self {
        let threshold = floor_count(elements.len() + 1, alpha);
        Self {
            elements,
            stat,
            threshold,
        }
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn stat(&self) -> &StatisticFn {
        &self.stat
    }

    pub fn accepts(&self, i: &[f64]) -> bool {
        if self.threshold == 0 {
            return true;
        }
        let observed = self.stat.eval(i);
        let mut buf = vec![0.0; i.len()];
        let refs = self.elements.iter().map(|g| {
            g.apply_into(i, &mut buf);
            self.stat.eval(&buf)
        });
        rank_accepts(observed, refs, self.threshold)
    }

    /// Region over the grids for the invariant `inv` and observation `obs`.
    pub fn region(&self, inv: &InvariantFn, obs: &ObservationRecord, theta_grid: Axis, y_grid: Axis) -> Result<GridRegion> {
        let dim = self.elements.first().map(GroupElement::dim);
        GridRegion::try_from_cells(theta_grid, y_grid, |_, _, theta, y| {
            let i = inv.eval(theta, &obs.assemble(y));
            if let Some(d) = dim {
                if d != i.len() {
                    return Err(JcrError::invalid(format!("invariant has length {}, group acts on {d}", i.len())));
                }
            }
            Ok(self.accepts(&i))
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(JcrError::invalid(format!("alpha {alpha} outside [0, 1]")))
    }
}

/// Full-group construction: include cells where `m(I)` is at least the
/// `⌊|G|α⌋`-th smallest orbit value.
pub fn full_group_jcr(
    group: &GroupAction,
    inv: &InvariantFn,
    stat: &StatisticFn,
    alpha: f64,
    obs: &ObservationRecord,
    theta_grid: Axis,
    y_grid: Axis,
) -> Result<GridRegion> {
    RankTest::full_group(group, stat.clone(), alpha, DEFAULT_GROUP_BUDGET)?.region(inv, obs, theta_grid, y_grid)
}

/// Sampled-group construction with `K` iid elements shared by every cell.
#[allow(clippy::too_many_arguments)]
pub fn randomized_group_jcr(
    group: &GroupAction,
    inv: &InvariantFn,
    stat: &StatisticFn,
    alpha: f64,
    k: usize,
    obs: &ObservationRecord,
    theta_grid: Axis,
    y_grid: Axis,
    seed: u64,
) -> Result<GridRegion> {
    RankTest::sampled(group, stat.clone(), alpha, k, seed)?.region(inv, obs, theta_grid, y_grid)
}

/// Split construction: calibration data fixed, one region per test input,
/// with the same `K` sampled elements reused for every input.
#[allow(clippy::too_many_arguments)]
pub fn split_group_jcr(
    group: &GroupAction,
    model: &SeparableModel,
    stat: &StatisticFn,
    alpha: f64,
    calib: &RegressionData,
    test_inputs: &[Vec<f64>],
    theta_grid: Axis,
    y_grid: Axis,
    seed: u64,
    k: usize,
) -> Result<Vec<GridRegion>> {
    if calib.n() == 0 {
        return Err(JcrError::EmptySample);
    }
    if group.dim() != calib.n() + 1 {
        return Err(JcrError::invalid(format!("group acts on {} coordinates, data has n + 1 = {}", group.dim(), calib.n() + 1)));
    }
    let test = RankTest::sampled(group, stat.clone(), alpha, k, seed)?;
    let n = calib.n();
    test_inputs
        .iter()
        .map(|x_te| {
            Ok(GridRegion::from_rows(theta_grid, y_grid, |_, theta| {
                let mut v = model.residuals(theta, calib);
                v.push(0.0);
                let pred = model.predict(theta, x_te);
                y_grid
                    .points()
                    .map(|y| {
                        v[n] = y - pred;
                        test.accepts(&v)
                    })
                    .collect()
            }))
        })
        .collect()
}
