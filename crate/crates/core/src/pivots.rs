//! Pivotal, conditional-pivotal, test-statistic and randomized constructions.
//!
//! A pivot `L(θ, z)` has a known law whatever the data-generating
//! distribution; a conditional pivot has a known law given `V(θ, z) = v`.
//! Regions are scanned over a θ-grid and one free observable coordinate.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{ChiSquared, FisherF, StandardNormal, StudentT};

use crate::dist;
use crate::error::{JcrError, Result};
use crate::invariance::StatisticFn;
use crate::region::quantile::{at_most, floor_count, order_statistic, rank_accepts};
use crate::region::{empirical_quantile, Axis, GridRegion};
use crate::rng::{stream, Purpose};

/// Default number of conditional draws when quantiles are not analytic.
pub const DEFAULT_MC_SAMPLES: usize = 4000;

pub type Sampler = Arc<dyn Fn(&mut dyn RngCore) -> Vec<f64> + Send + Sync>;
pub type PivotFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
pub type LawGivenV = Arc<dyn Fn(&[f64]) -> Result<ReferenceDistribution> + Send + Sync>;

/// A named assignment of observed coordinates with exactly one free slot,
/// which the y-grid scans.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRecord {
    names: Vec<String>,
    values: Vec<Option<f64>>,
    free: usize,
}

impl ObservationRecord {
    pub fn new<S: Into<String>>(entries: impl IntoIterator<Item = (S, Option<f64>)>) -> Result<Self> {
        let (names, values): (Vec<String>, Vec<Option<f64>>) = entries.into_iter().map(|(k, v)| (k.into(), v)).unzip();
        let free: Vec<usize> = values.iter().enumerate().filter(|(_, v)| v.is_none()).map(|(i, _)| i).collect();
        if free.len() != 1 {
            return Err(JcrError::invalid(format!(
                "observation record needs exactly one free coordinate, got {}",
                free.len()
            )));
        }
        Ok(Self {
            names,
            values,
            free: free[0],
        })
    }

    /// Observed values followed by a free last coordinate.
    pub fn trailing_free(observed: &[f64]) -> Self {
        let mut values: Vec<Option<f64>> = observed.iter().copied().map(Some).collect();
        values.push(None);
        Self {
            names: (0..values.len()).map(|i| format!("z{}", i + 1)).collect(),
            free: values.len() - 1,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn free_name(&self) -> &str {
        &self.names[self.free]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).and_then(|i| self.values[i])
    }

    /// The full data point with the free coordinate set to `y`.
    pub fn assemble(&self, y: f64) -> Vec<f64> {
        self.values.iter().map(|v| v.unwrap_or(y)).collect()
    }
}

/// Law of a pivot, or of a conditional pivot given its conditioning value.
#[derive(Clone)]
pub enum ReferenceDistribution {
    StandardNormal { dim: usize },
    ScaledNormal { sigma: f64, dim: usize },
    StudentT { df: f64, dim: usize },
    F { df1: f64, df2: f64 },
    ChiSquare { df: f64 },
    /// Known only through a sampler.
    Empirical(Sampler),
    /// Uniform over finitely many equally likely atoms.
    FiniteUniform(Arc<Vec<Vec<f64>>>),
}

impl fmt::Debug for ReferenceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::StandardNormal { dim } => write!(f, "StandardNormal({dim})"),
            Self::ScaledNormal { sigma, dim } => write!(f, "ScaledNormal({sigma}, {dim})"),
            Self::StudentT { df, dim } => write!(f, "StudentT({df}, {dim})"),
            Self::F { df1, df2 } => write!(f, "F({df1}, {df2})"),
            Self::ChiSquare { df } => write!(f, "ChiSquare({df})"),
            Self::Empirical(_) => f.write_str("Empirical"),
            Self::FiniteUniform(a) => write!(f, "FiniteUniform({} atoms)", a.len()),
        }
    }
}

impl ReferenceDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::StandardNormal { dim } => *dim >= 1,
            Self::ScaledNormal { sigma, dim } => *sigma > 0.0 && sigma.is_finite() && *dim >= 1,
            Self::StudentT { df, dim } => *df >= 1.0 && *dim >= 1,
            Self::F { df1, df2 } => *df1 >= 1.0 && *df2 >= 1.0,
            Self::ChiSquare { df } => *df >= 1.0,
            Self::Empirical(_) => true,
            Self::FiniteUniform(atoms) => !atoms.is_empty(),
        };
        if ok {
            Ok(())
        } else {
            Err(JcrError::invalid(format!("invalid reference distribution {self:?}")))
        }
    }

    pub fn dimension(&self) -> Option<usize> {
        match self {
            Self::StandardNormal { dim } | Self::ScaledNormal { dim, .. } | Self::StudentT { dim, .. } => Some(*dim),
            Self::F { .. } | Self::ChiSquare { .. } => Some(1),
            Self::Empirical(_) => None,
            Self::FiniteUniform(atoms) => Some(atoms[0].len()),
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        match self {
            Self::StandardNormal { dim } => (0..*dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
            Self::ScaledNormal { sigma, dim } => (0..*dim).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect(),
            Self::StudentT { df, dim } => {
                let d = StudentT::new(*df).expect("validated degrees of freedom");
                (0..*dim).map(|_| rng.sample(d)).collect()
            }
            Self::F { df1, df2 } => vec![rng.sample(FisherF::new(*df1, *df2).expect("validated degrees of freedom"))],
            Self::ChiSquare { df } => vec![rng.sample(ChiSquared::new(*df).expect("validated degrees of freedom"))],
            Self::Empirical(sampler) => sampler(rng),
            Self::FiniteUniform(atoms) => atoms[rng.random_range(0..atoms.len())].clone(),
        }
    }

    /// Quantile of a one-dimensional analytic law.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        match self {
            Self::StandardNormal { dim: 1 } => Ok(dist::normal_quantile(p)),
            Self::ScaledNormal { sigma, dim: 1 } => Ok(sigma * dist::normal_quantile(p)),
            Self::StudentT { df, dim: 1 } => dist::t_quantile(*df, p),
            Self::F { df1, df2 } => dist::f_quantile(*df1, *df2, p),
            Self::ChiSquare { df } => dist::chi2_quantile(*df, p),
            other => Err(JcrError::MissingQuantile(format!("{other:?} has no analytic scalar quantile"))),
        }
    }

    fn cdf(&self, x: f64) -> Result<f64> {
        match self {
            Self::StandardNormal { dim: 1 } => Ok(dist::normal_cdf(x)),
            Self::ScaledNormal { sigma, dim: 1 } => Ok(dist::normal_cdf(x / sigma)),
            Self::StudentT { df, dim: 1 } => dist::t_cdf(*df, x),
            Self::F { df1, df2 } => dist::f_cdf(*df1, *df2, x),
            Self::ChiSquare { df } => dist::chi2_cdf(*df, x),
            other => Err(JcrError::MissingQuantile(format!("{other:?} has no analytic scalar CDF"))),
        }
    }

    pub fn is_analytic_scalar(&self) -> bool {
        self.quantile(0.5).is_ok()
    }
}

/// Reduction of a pivot value to the scalar that an acceptance set tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarMap {
    /// The first coordinate.
    Identity,
    SquaredNorm,
    Sum,
}

impl ScalarMap {
    pub fn apply(&self, v: &[f64]) -> f64 {
        match self {
            ScalarMap::Identity => v[0],
            ScalarMap::SquaredNorm => v.iter().map(|x| x * x).sum(),
            ScalarMap::Sum => v.iter().sum(),
        }
    }

    /// Analytic law of the reduced pivot, when one is known.
    fn reduce(&self, law: &ReferenceDistribution) -> Option<ReducedLaw> {
        use ReferenceDistribution as R;
        match (self, law) {
            (ScalarMap::Identity, R::StandardNormal { .. }) => Some(ReducedLaw::scaled(R::StandardNormal { dim: 1 }, 1.0)),
            (ScalarMap::Identity, R::ScaledNormal { sigma, .. }) => {
                Some(ReducedLaw::scaled(R::StandardNormal { dim: 1 }, *sigma))
            }
            (ScalarMap::Identity, R::StudentT { df, .. }) => Some(ReducedLaw::scaled(R::StudentT { df: *df, dim: 1 }, 1.0)),
            (ScalarMap::Identity, R::F { .. } | R::ChiSquare { .. }) => Some(ReducedLaw::scaled(law.clone(), 1.0)),
            (ScalarMap::SquaredNorm, R::StandardNormal { dim }) => {
                Some(ReducedLaw::scaled(R::ChiSquare { df: *dim as f64 }, 1.0))
            }
            (ScalarMap::SquaredNorm, R::ScaledNormal { sigma, dim }) => {
                Some(ReducedLaw::scaled(R::ChiSquare { df: *dim as f64 }, sigma * sigma))
            }
            (ScalarMap::Sum, R::StandardNormal { dim }) => {
                Some(ReducedLaw::scaled(R::StandardNormal { dim: 1 }, (*dim as f64).sqrt()))
            }
            (ScalarMap::Sum, R::ScaledNormal { sigma, dim }) => {
                Some(ReducedLaw::scaled(R::StandardNormal { dim: 1 }, sigma * (*dim as f64).sqrt()))
            }
            _ => None,
        }
    }
}

/// `scale · X` with `X` an analytic scalar law.
struct ReducedLaw {
    base: ReferenceDistribution,
    scale: f64,
}

impl ReducedLaw {
    fn scaled(base: ReferenceDistribution, scale: f64) -> Self {
        Self { base, scale }
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.scale * self.base.quantile(p)?)
    }

    fn cdf(&self, x: f64) -> Result<f64> {
        self.base.cdf(x / self.scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcceptanceKind {
    /// `lower ≤ reducer(L) ≤ upper`.
    Interval { lower: f64, upper: f64 },
    /// Between the `α/2` and `1 − α/2` quantiles of the reduced law.
    TwoSidedQuantile { alpha: f64 },
}

/// A set `S` of pivot values, tested through a scalar reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceSet {
    pub kind: AcceptanceKind,
    pub reducer: ScalarMap,
}

impl AcceptanceSet {
    pub fn interval(reducer: ScalarMap, lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(JcrError::invalid(format!("acceptance interval [{lower}, {upper}] is not ordered")));
        }
        Ok(Self {
            kind: AcceptanceKind::Interval { lower, upper },
            reducer,
        })
    }

    pub fn two_sided(reducer: ScalarMap, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            kind: AcceptanceKind::TwoSidedQuantile { alpha },
            reducer,
        })
    }

    /// The whole pivot space.
    pub fn full() -> Self {
        Self {
            kind: AcceptanceKind::Interval {
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            },
            reducer: ScalarMap::Identity,
        }
    }

    /// Closed bounds on the reduced pivot under `law`.
    pub fn bounds(&self, law: &ReferenceDistribution) -> Result<(f64, f64)> {
        match self.kind {
            AcceptanceKind::Interval { lower, upper } => Ok((lower, upper)),
            AcceptanceKind::TwoSidedQuantile { alpha } => {
                if let ReferenceDistribution::FiniteUniform(atoms) = law {
                    let mut vals: Vec<f64> = atoms.iter().map(|a| self.reducer.apply(a)).collect();
                    vals.sort_by(f64::total_cmp);
                    let k = vals.len();
                    let a = floor_count(k, alpha / 2.0);
                    return Ok((order_statistic(&vals, a), order_statistic(&vals, k + 1 - a)));
                }
                let reduced = self.reducer.reduce(law).ok_or_else(|| {
                    JcrError::MissingQuantile(format!("{law:?} under {:?} has no analytic quantiles", self.reducer))
                })?;
                Ok((reduced.quantile(alpha / 2.0)?, reduced.quantile(1.0 - alpha / 2.0)?))
            }
        }
    }

    /// Probability of the set under `law`.
    pub fn mass(&self, law: &ReferenceDistribution) -> Result<f64> {
        let (lo, hi) = self.bounds(law)?;
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            return Ok(1.0);
        }
        if let ReferenceDistribution::FiniteUniform(atoms) = law {
            let inside = atoms
                .iter()
                .filter(|a| {
                    let v = self.reducer.apply(a);
                    v >= lo && v <= hi
                })
                .count();
            return Ok(inside as f64 / atoms.len() as f64);
        }
        let reduced = self
            .reducer
            .reduce(law)
            .ok_or_else(|| JcrError::MissingQuantile(format!("{law:?} has no analytic CDF under {:?}", self.reducer)))?;
        Ok(reduced.cdf(hi)? - reduced.cdf(lo)?)
    }

    fn accepts(&self, bounds: (f64, f64), pivot_value: &[f64]) -> bool {
        let v = self.reducer.apply(pivot_value);
        v >= bounds.0 && v <= bounds.1
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(JcrError::invalid(format!("alpha {alpha} outside [0, 1]")))
    }
}

/// A pivot `L(θ, z)` with its known law.
#[derive(Clone)]
pub struct PivotSpec {
    pub evaluate: PivotFn,
    pub reference: ReferenceDistribution,
}

impl PivotSpec {
    pub fn new(evaluate: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static, reference: ReferenceDistribution) -> Result<Self> {
        reference.validate()?;
        Ok(Self {
            evaluate: Arc::new(evaluate),
            reference,
        })
    }
}

/// A conditional pivot: `L(θ, z)` has law `law_given_v(v)` given
/// `V(θ, z) = v`.
#[derive(Clone)]
pub struct ConditionalPivotSpec {
    pub pivot: PivotFn,
    pub conditioner: PivotFn,
    pub law_given_v: LawGivenV,
}

impl ConditionalPivotSpec {
    pub fn new(
        pivot: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        conditioner: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        law_given_v: impl Fn(&[f64]) -> Result<ReferenceDistribution> + Send + Sync + 'static,
    ) -> Self {
        Self {
            pivot: Arc::new(pivot),
            conditioner: Arc::new(conditioner),
            law_given_v: Arc::new(law_given_v),
        }
    }

    /// An unconditional pivot seen as a conditional one with a constant
    /// conditioner.
    pub fn unconditional(p: &PivotSpec) -> Self {
        let law = p.reference.clone();
        Self {
            pivot: p.evaluate.clone(),
            conditioner: Arc::new(|_, _| Vec::new()),
            law_given_v: Arc::new(move |_| Ok(law.clone())),
        }
    }

    fn at(&self, theta: f64, z: &[f64]) -> Result<(Vec<f64>, ReferenceDistribution)> {
        let law = (self.law_given_v)(&(self.conditioner)(theta, z))?;
        Ok(((self.pivot)(theta, z), law))
    }
}

/// Generalized structural model: given `v`, the pivot has the law of
/// `ψ(ε, v)` with `ε ~ eps_law`.
pub fn gsm_reference(
    psi: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    eps_law: ReferenceDistribution,
) -> Result<LawGivenV> {
    eps_law.validate()?;
    let psi = Arc::new(psi);
    Ok(Arc::new(move |v: &[f64]| {
        let psi = psi.clone();
        let eps = eps_law.clone();
        let v = v.to_vec();
        Ok(ReferenceDistribution::Empirical(Arc::new(move |rng: &mut dyn RngCore| {
            psi(&eps.sample(rng), &v)
        })))
    }))
}

/// Cells `(θ, y)` with `L(θ, assemble(y)) ∈ S`.
pub fn pivotal_jcr(pivot: &PivotSpec, accept: &AcceptanceSet, obs: &ObservationRecord, theta_grid: Axis, y_grid: Axis) -> Result<GridRegion> {
    let bounds = accept.bounds(&pivot.reference)?;
    Ok(GridRegion::from_fn(theta_grid, y_grid, |theta, y| {
        accept.accepts(bounds, &(pivot.evaluate)(theta, &obs.assemble(y)))
    }))
}

/// Cells with `L(θ, z) ∈ S(V(θ, z))`.
pub fn conditional_pivot_jcr<A>(
    cpivot: &ConditionalPivotSpec,
    accept_by_v: A,
    obs: &ObservationRecord,
    theta_grid: Axis,
    y_grid: Axis,
) -> Result<GridRegion>
where
    A: Fn(&[f64]) -> AcceptanceSet + Sync,
{
    GridRegion::try_from_cells(theta_grid, y_grid, |_, _, theta, y| {
        let z = obs.assemble(y);
        let v = (cpivot.conditioner)(theta, &z);
        let accept = accept_by_v(&v);
        let law = (cpivot.law_given_v)(&v)?;
        Ok(accept.accepts(accept.bounds(&law)?, &(cpivot.pivot)(theta, &z)))
    })
}

/// `q_α` of the pushforward `m(law)`: analytic when possible, exact for
/// finite laws, otherwise from `mc_samples` seeded draws.
fn stat_quantile(law: &ReferenceDistribution, stat: &StatisticFn, alpha: f64, mc_samples: usize, rng_for_cell: impl FnOnce() -> rand_chacha::ChaCha8Rng) -> Result<f64> {
    if alpha == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if stat.is_identity() && law.is_analytic_scalar() {
        return law.quantile(alpha);
    }
    if let ReferenceDistribution::FiniteUniform(atoms) = law {
        let vals: Vec<f64> = atoms.iter().map(|a| stat.eval(a)).collect();
        return empirical_quantile(&vals, alpha);
    }
    if mc_samples == 0 {
        return Err(JcrError::invalid("mc_samples must be at least 1 when quantiles are not analytic"));
    }
    let mut rng = rng_for_cell();
    let vals: Vec<f64> = (0..mc_samples).map(|_| stat.eval(&law.sample(&mut rng))).collect();
    empirical_quantile(&vals, alpha)
}

/// Cells with `m(L(θ, z)) ≥ q_α(m(Q_{V(θ, z)}))`.
#[allow(clippy::too_many_arguments)]
pub fn test_stat_jcr(
    cpivot: &ConditionalPivotSpec,
    stat: &StatisticFn,
    alpha: f64,
    obs: &ObservationRecord,
    theta_grid: Axis,
    y_grid: Axis,
    mc_samples: usize,
    seed: u64,
) -> Result<GridRegion> {
    check_alpha(alpha)?;
    let ny = y_grid.count();
    GridRegion::try_from_cells(theta_grid, y_grid, |i, j, theta, y| {
        let z = obs.assemble(y);
        let (l, law) = cpivot.at(theta, &z)?;
        let q = stat_quantile(&law, stat, alpha, mc_samples, || stream(seed, Purpose::Cell, (i * ny + j) as u64))?;
        Ok(at_most(q, stat.eval(&l)))
    })
}

/// Cells whose statistic ranks at least `⌊(K+1)α⌋` among `K` fresh
/// conditional draws (ties favor inclusion).
#[allow(clippy::too_many_arguments)]
pub fn randomized_jcr(
    cpivot: &ConditionalPivotSpec,
    stat: &StatisticFn,
    alpha: f64,
    k: usize,
    obs: &ObservationRecord,
    theta_grid: Axis,
    y_grid: Axis,
    seed: u64,
) -> Result<GridRegion> {
    check_alpha(alpha)?;
    if k < 1 {
        return Err(JcrError::invalid("the number of draws K must be at least 1"));
    }
    let threshold = floor_count(k + 1, alpha);
    let ny = y_grid.count();
    GridRegion::try_from_cells(theta_grid, y_grid, |i, j, theta, y| {
        let z = obs.assemble(y);
        let (l, law) = cpivot.at(theta, &z)?;
        let observed = stat.eval(&l);
        if threshold == 0 {
            return Ok(true);
        }
        let mut rng = stream(seed, Purpose::Cell, (i * ny + j) as u64);
        let draws: Vec<f64> = (0..k).map(|_| stat.eval(&law.sample(&mut rng))).collect();
        Ok(rank_accepts(observed, draws, threshold))
    })
}
