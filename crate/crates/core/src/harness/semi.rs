use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{JcrError, Result};
use crate::harness::{digest, CoverageReport, Method};
use crate::linmod::{
    gaussian_pivot_band, intersection_jcr, one_param_highdim_jcr, CyclicShiftJcr, PermutationJcr, RegressionData,
};
use crate::rng::{stream, Purpose};

/// Transforms per permutation region in semi-empirical runs.
pub const SEMI_PERMUTATIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiEmpiricalConfig {
    pub csv: PathBuf,
    pub outcome: String,
    pub features: Vec<String>,
    /// Rows used for the preliminary fit.
    pub prelim: usize,
    pub trials: u64,
    pub alpha: f64,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub k: usize,
    /// Subtract column means from outcome and features before fitting.
    pub center: bool,
    /// Feature index targeted by `one-param-highdim`.
    pub coefficient: usize,
}

impl SemiEmpiricalConfig {
    pub fn new(csv: impl Into<PathBuf>, outcome: &str, features: &[&str], prelim: usize, seed: u64) -> Self {
        Self {
            csv: csv.into(),
            outcome: outcome.to_string(),
            features: features.iter().map(|s| s.to_string()).collect(),
            prelim,
            trials: 1000,
            alpha: 0.05,
            methods: vec![Method::GaussianPivot, Method::CyclicShift, Method::Permutation],
            seed,
            k: SEMI_PERMUTATIONS,
            center: true,
            coefficient: 0,
        }
    }
}

/// Numeric table: selected feature rows and the outcome column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

/// Reads `outcome` and `features` from comma-separated text with a header.
pub fn parse_table(text: &str, outcome: &str, features: &[String]) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| JcrError::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| JcrError::Parse {
            row: 1,
            message: format!("missing column {name:?}"),
        })
    };
    let yi = column(outcome)?;
    let xi = features.iter().map(|f| column(f)).collect::<Result<Vec<_>>>()?;
    let mut table = Table { x: Vec::new(), y: Vec::new() };
    for (k, rec) in reader.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| JcrError::Parse {
            row,
            message: e.to_string(),
        })?;
        let cell = |idx: usize| -> Result<f64> {
            let raw = rec.get(idx).unwrap_or("");
            raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| JcrError::Parse {
                row,
                message: format!("column {:?} is not numeric: {raw:?}", &headers[idx]),
            })
        };
        table.y.push(cell(yi)?);
        table.x.push(xi.iter().map(|&i| cell(i)).collect::<Result<Vec<_>>>()?);
    }
    Ok(table)
}

pub fn load_table(path: &Path, outcome: &str, features: &[String]) -> Result<Table> {
    parse_table(&crate::harness::read_text(path)?, outcome, features)
}

impl Table {
    fn center(&mut self) {
        let n = self.y.len() as f64;
        let my = self.y.iter().sum::<f64>() / n;
        self.y.iter_mut().for_each(|v| *v -= my);
        for j in 0..self.x[0].len() {
            let m = self.x.iter().map(|r| r[j]).sum::<f64>() / n;
            self.x.iter_mut().for_each(|r| r[j] -= m);
        }
    }
}

/// Preliminary fit `θ̂⁰` and noise scale `S` with `S² = RSS / (n′ − p)`.
fn preliminary_fit(table: &Table, rows: &[usize]) -> Result<(Vec<f64>, f64)> {
    let p = table.x[0].len();
    let x = DMatrix::from_fn(rows.len(), p, |i, j| table.x[rows[i]][j]);
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| table.y[i]));
    let data = RegressionData::new(x, y, DVector::zeros(p), None)?;
    let fit = data.ols()?;
    Ok((fit.theta_hat.clone(), fit.s()))
}

fn check_method(method: Method, p: usize, coefficient: usize) -> Result<()> {
    match method {
        Method::GaussianPivot | Method::CyclicShift | Method::Permutation | Method::Intersection if p == 1 => Ok(()),
        Method::GaussianPivot | Method::CyclicShift | Method::Permutation | Method::Intersection => Err(
            JcrError::invalid(format!("{method} needs a single feature column; use one-param-highdim for p = {p}")),
        ),
        Method::OneParamHighdim if coefficient < p => Ok(()),
        Method::OneParamHighdim => Err(JcrError::invalid(format!("coefficient {coefficient} out of range for p = {p}"))),
        other => Err(JcrError::invalid(format!("{other} is not available in semi-empirical runs"))),
    }
}

#[allow(clippy::too_many_arguments)]
fn trial(
    cfg: &SemiEmpiricalConfig,
    table: &Table,
    pool: &[usize],
    theta0: &[f64],
    s: f64,
    rng: &mut dyn RngCore,
) -> Result<Vec<bool>> {
    let p = theta0.len();
    let pick = rng.random_range(0..pool.len());
    let test = pool[pick];
    let calib: Vec<usize> = pool.iter().copied().filter(|&i| i != test).collect();
    let noise = Normal::new(0.0, s).map_err(|e| JcrError::invalid(e.to_string()))?;
    let fit = |i: usize| table.x[i].iter().zip(theta0).map(|(a, b)| a * b).sum::<f64>();
    let y: Vec<f64> = calib.iter().map(|&i| fit(i) + noise.sample(rng)).collect();
    let y_te = fit(test) + noise.sample(rng);
    let x = DMatrix::from_fn(calib.len(), p, |i, j| table.x[calib[i]][j]);
    let data = RegressionData::new(x, DVector::from_vec(y), DVector::from_column_slice(&table.x[test]), Some(y_te))?;
    let alpha = cfg.alpha;
    cfg.methods
        .iter()
        .map(|m| {
            let theta = theta0[0];
            Ok(match m {
                Method::GaussianPivot => gaussian_pivot_band(&data, alpha)?.contains(theta, y_te),
                Method::CyclicShift => CyclicShiftJcr::symmetric(&data, alpha)?.contains(theta, y_te),
                Method::Permutation => PermutationJcr::new(&data, alpha, cfg.k, rng.next_u64())?.contains(theta, y_te),
                Method::Intersection => intersection_jcr(&data, alpha)?.contains(theta, y_te),
                Method::OneParamHighdim => {
                    let mut c = vec![0.0; p];
                    c[cfg.coefficient] = 1.0;
                    one_param_highdim_jcr(&data, &c, alpha)?.contains(theta0[cfg.coefficient], y_te)
                }
                _ => unreachable!("checked"),
            })
        })
        .collect()
}

/// Preliminary split, then per trial: hold out one pool point, simulate
/// outcomes from the preliminary fit with `N(0, S²)` noise, and check
/// whether each region covers `(θ̂⁰, y_te)`.
pub fn run_semi_empirical_table(cfg: &SemiEmpiricalConfig, mut table: Table) -> Result<Vec<CoverageReport>> {
    if cfg.trials == 0 {
        return Err(JcrError::invalid("trials must be at least 1"));
    }
    if table.x.first().is_none_or(Vec::is_empty) {
        return Err(JcrError::invalid("at least one feature column is required"));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(JcrError::invalid(format!("alpha must lie in (0, 1), got {}", cfg.alpha)));
    }
    if cfg.methods.is_empty() {
        return Err(JcrError::invalid("no methods requested"));
    }
    let rows = table.y.len();
    if cfg.prelim == 0 || cfg.prelim + 3 > rows {
        return Err(JcrError::invalid(format!(
            "preliminary split {} must leave at least 3 of {rows} rows",
            cfg.prelim
        )));
    }
    let p = table.x[0].len();
    for &m in &cfg.methods {
        check_method(m, p, cfg.coefficient)?;
    }
    if cfg.center {
        table.center();
    }
    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut stream(cfg.seed, Purpose::Split, 0));
    let (prelim, pool) = order.split_at(cfg.prelim);
    let (theta0, s) = preliminary_fit(&table, prelim)?;
    if pool.len() <= p + 1 {
        return Err(JcrError::invalid("too few rows remain after the preliminary split"));
    }
    let m = cfg.methods.len();
    let hits = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(cfg.seed, Purpose::Trial, t);
            trial(cfg, &table, pool, &theta0, s, &mut rng).map(|v| v.into_iter().map(u64::from).collect::<Vec<_>>())
        })
        .try_reduce(|| vec![0; m], |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()))?;
    let d = digest(cfg);
    cfg.methods
        .iter()
        .zip(hits)
        .map(|(method, h)| CoverageReport::new(method.name(), cfg.trials, h, cfg.alpha, cfg.seed, &d))
        .collect()
}

pub fn run_semi_empirical(cfg: &SemiEmpiricalConfig) -> Result<Vec<CoverageReport>> {
    let table = load_table(&cfg.csv, &cfg.outcome, &cfg.features)?;
    run_semi_empirical_table(cfg, table)
}
