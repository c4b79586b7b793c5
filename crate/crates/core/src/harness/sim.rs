use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apps;
use crate::error::{JcrError, Result};
use crate::harness::{digest, CoverageReport, NoiseSpec};
use crate::invariance::{GroupKind, RankTest, StatisticFn};
use crate::linmod::{
    gaussian_pivot_band, intersection_jcr, normal_mean_omega_jcr, CyclicShiftJcr, Omega, PermutationJcr,
    RegressionData, DEFAULT_PERMUTATIONS,
};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Intersection,
    GaussianPivot,
    CyclicShift,
    Permutation,
    OmegaFamily,
    Projection,
    Multitask,
    GroupJcr,
    OneParamHighdim,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Intersection,
        Method::GaussianPivot,
        Method::CyclicShift,
        Method::Permutation,
        Method::OmegaFamily,
        Method::Projection,
        Method::Multitask,
        Method::GroupJcr,
        Method::OneParamHighdim,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Intersection => "intersection",
            Method::GaussianPivot => "gaussian-pivot",
            Method::CyclicShift => "cyclic-shift",
            Method::Permutation => "permutation",
            Method::OmegaFamily => "omega-family",
            Method::Projection => "projection",
            Method::Multitask => "multitask",
            Method::GroupJcr => "group-jcr",
            Method::OneParamHighdim => "one-param-highdim",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = JcrError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let alias = match s.as_str() {
            "gaussian" | "pivot" => "gaussian-pivot",
            "cyclic" => "cyclic-shift",
            "omega" => "omega-family",
            "highdim" => "one-param-highdim",
            other => other,
        };
        Method::ALL
            .iter()
            .find(|m| m.name() == alias)
            .copied()
            .ok_or(JcrError::Unknown {
                what: "method",
                name: s.clone(),
            })
    }
}

/// `ω` stored as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaSetting {
    Finite(f64),
    Named(InfName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfName {
    #[serde(rename = "inf")]
    Inf,
}

impl From<Omega> for OmegaSetting {
    fn from(o: Omega) -> Self {
        match o {
            Omega::Finite(w) => OmegaSetting::Finite(w),
            Omega::Infinity => OmegaSetting::Named(InfName::Inf),
        }
    }
}

impl From<OmegaSetting> for Omega {
    fn from(o: OmegaSetting) -> Self {
        match o {
            OmegaSetting::Finite(w) => Omega::Finite(w),
            OmegaSetting::Named(_) => Omega::Infinity,
        }
    }
}

/// One coverage experiment. Field order fixes the digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub method: Method,
    pub noise: NoiseSpec,
    pub n: usize,
    pub alpha: f64,
    pub trials: u64,
    pub seed: u64,
    /// True parameter; `None` uses 1 for regression methods and 0 otherwise.
    pub theta: Option<f64>,
    pub x_te: f64,
    pub k: usize,
    /// `None` means `ω = −n`.
    pub omega: Option<OmegaSetting>,
    pub group: GroupKind,
    pub sigma: f64,
    pub theta_window: (f64, f64),
}

impl SimConfig {
    /// Regression design of the noise-robustness table: `n = 100`,
    /// `x_i ~ U[0, 1]` fixed, `x_te = 5`, `θ = 1`, `K = 500`.
    pub fn table1(method: Method, noise: NoiseSpec, alpha: f64, trials: u64, seed: u64) -> Self {
        Self {
            method,
            noise,
            n: 100,
            alpha,
            trials,
            seed,
            theta: None,
            x_te: 5.0,
            k: DEFAULT_PERMUTATIONS,
            omega: None,
            group: GroupKind::Permutation,
            sigma: 1.0,
            theta_window: (-0.2, 0.2),
        }
    }

    pub fn true_theta(&self) -> f64 {
        self.theta.unwrap_or(match self.method {
            Method::Projection | Method::Multitask | Method::OmegaFamily => 0.0,
            _ => 1.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.trials == 0 {
            return Err(JcrError::invalid("trials must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(JcrError::invalid(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if self.n < 2 {
            return Err(JcrError::invalid(format!("n must be at least 2, got {}", self.n)));
        }
        if self.k < 1 {
            return Err(JcrError::invalid("K must be at least 1"));
        }
        if self.method == Method::OneParamHighdim {
            return Err(JcrError::invalid(
                "one-param-highdim coverage runs through the semi-empirical protocol, not the synthetic design",
            ));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        digest(self)
    }
}

/// Fixed design `x_i ~ U[0, 1]`, shared by every trial.
pub fn design(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, Purpose::Design, 0);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Level at which the level `α` region degenerates: `α = 1` is passed to
/// the constructors as the largest level below 1 they accept.
fn level(alpha: f64) -> f64 {
    if alpha >= 1.0 {
        1.0 - f64::EPSILON
    } else {
        alpha
    }
}

fn regression_trial(cfg: &SimConfig, x: &[f64], rng: &mut dyn RngCore) -> Result<bool> {
    let theta = cfg.true_theta();
    let alpha = level(cfg.alpha);
    let n = x.len();
    let e = cfg.noise.sample(rng, n + 1);
    let y: Vec<f64> = x.iter().zip(&e).map(|(x, e)| x * theta + e).collect();
    let y_te = cfg.x_te * theta + e[n];
    let data = RegressionData::univariate(x, &y, cfg.x_te, Some(y_te))?;
    Ok(match cfg.method {
        Method::Intersection => intersection_jcr(&data, alpha)?.contains(theta, y_te),
        Method::GaussianPivot => gaussian_pivot_band(&data, alpha)?.contains(theta, y_te),
        Method::CyclicShift => CyclicShiftJcr::symmetric(&data, alpha)?.contains(theta, y_te),
        Method::Permutation => PermutationJcr::new(&data, alpha, cfg.k, rng.next_u64())?.contains(theta, y_te),
        Method::GroupJcr => {
            let x_plus: Vec<f64> = data.x_plus().iter().copied().collect();
            let group = crate::invariance::make_group(cfg.group, n + 1, 0)?;
            let test = RankTest::sampled(&group, StatisticFn::abs_covariance(&x_plus).negated(), alpha, cfg.k, rng.next_u64())?;
            let resid: Vec<f64> = y.iter().chain(std::iter::once(&y_te)).zip(&x_plus).map(|(y, x)| y - x * theta).collect();
            test.accepts(&resid)
        }
        _ => unreachable!("dispatched elsewhere"),
    })
}

fn omega_trial(cfg: &SimConfig, rng: &mut dyn RngCore) -> Result<bool> {
    let theta = cfg.true_theta();
    let e = cfg.noise.sample(rng, cfg.n + 1);
    let y: Vec<f64> = e[..cfg.n].iter().map(|e| theta + e).collect();
    let y_te = theta + e[cfg.n];
    let omega = cfg.omega.map(Omega::from).unwrap_or(Omega::Finite(-(cfg.n as f64)));
    Ok(normal_mean_omega_jcr(&y, omega, level(cfg.alpha))?.contains(theta, y_te))
}

/// Runs the experiment; projection and multitask yield three reports, every
/// other method one.
pub fn run_coverage_sim(cfg: &SimConfig) -> Result<Vec<CoverageReport>> {
    cfg.validate()?;
    match cfg.method {
        Method::Projection => {
            return Ok(apps::projection_coverage(cfg.theta_window, cfg.sigma, cfg.true_theta(), cfg.alpha, cfg.trials, cfg.seed)?.to_vec())
        }
        Method::Multitask => return Ok(apps::multitask_coverage(cfg.true_theta(), cfg.alpha, cfg.trials, cfg.seed)?.to_vec()),
        _ => {}
    }
    let x = design(cfg.n, cfg.seed);
    let hits = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(cfg.seed, Purpose::Trial, t);
            let hit = match cfg.method {
                Method::OmegaFamily => omega_trial(cfg, &mut rng)?,
                _ => regression_trial(cfg, &x, &mut rng)?,
            };
            Ok::<u64, JcrError>(hit as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(vec![CoverageReport::new(cfg.method.name(), cfg.trials, hits, cfg.alpha, cfg.seed, &cfg.digest())?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert!("bogus".parse::<Method>().is_err());
    }

    #[test]
    fn omega_setting_serializes_inf() {
        let s: OmegaSetting = Omega::Infinity.into();
        assert_eq!(serde_json::to_string(&s).unwrap(), "\"inf\"");
        let back: OmegaSetting = serde_json::from_str("-100.0").unwrap();
        assert_eq!(Omega::from(back), Omega::Finite(-100.0));
    }

    #[test]
    fn deterministic_and_thread_invariant() {
        let cfg = SimConfig::table1(Method::Permutation, NoiseSpec::standard_normal(), 0.1, 64, 11);
        let a = run_coverage_sim(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_coverage_sim(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn alpha_one_gives_no_coverage() {
        let cfg = SimConfig::table1(Method::GaussianPivot, NoiseSpec::standard_normal(), 1.0, 50, 2);
        assert_eq!(run_coverage_sim(&cfg).unwrap()[0].hits, 0);
        let cfg = SimConfig::table1(Method::CyclicShift, NoiseSpec::standard_normal(), 1.0, 200, 2);
        assert!(run_coverage_sim(&cfg).unwrap()[0].rate < 0.05);
    }
}
