use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_distr::{Cauchy, Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{JcrError, Result};
use crate::rng::{stream, Purpose};

/// Noise law for simulated residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseSpec {
    Normal { mean: f64, sd: f64 },
    /// `0.2·N(0,1) + 0.4·N(10,1) + 0.4·N(−10,1)`.
    Hetero,
    Cauchy { location: f64, scale: f64 },
    Uniform { lo: f64, hi: f64 },
}

/// Mixture weights and component means of [`NoiseSpec::Hetero`].
pub const HETERO_WEIGHTS: [f64; 3] = [0.2, 0.4, 0.4];
pub const HETERO_MEANS: [f64; 3] = [0.0, 10.0, -10.0];

impl NoiseSpec {
    pub fn standard_normal() -> Self {
        NoiseSpec::Normal { mean: 0.0, sd: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseSpec::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            NoiseSpec::Hetero => true,
            NoiseSpec::Cauchy { location, scale } => location.is_finite() && scale.is_finite() && scale > 0.0,
            NoiseSpec::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
        };
        if ok {
            Ok(())
        } else {
            Err(JcrError::invalid(format!("invalid noise parameters: {self}")))
        }
    }

    /// Mixture component index and draw.
    pub fn sample_hetero(rng: &mut dyn RngCore) -> (usize, f64) {
        let u: f64 = rng.random();
        let comp = if u < HETERO_WEIGHTS[0] {
            0
        } else if u < HETERO_WEIGHTS[0] + HETERO_WEIGHTS[1] {
            1
        } else {
            2
        };
        let z: f64 = rand_distr::StandardNormal.sample(rng);
        (comp, HETERO_MEANS[comp] + z)
    }

    pub fn sample(&self, rng: &mut dyn RngCore, n: usize) -> Vec<f64> {
        match *self {
            NoiseSpec::Normal { mean, sd } => {
                let d = Normal::new(mean, sd).expect("validated");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            NoiseSpec::Hetero => (0..n).map(|_| Self::sample_hetero(rng).1).collect(),
            NoiseSpec::Cauchy { location, scale } => {
                let d = Cauchy::new(location, scale).expect("validated");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            NoiseSpec::Uniform { lo, hi } => {
                let d = Uniform::new_inclusive(lo, hi).expect("validated");
                (0..n).map(|_| d.sample(rng)).collect()
            }
        }
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::Normal { mean, sd } => write!(f, "normal({mean},{sd})"),
            NoiseSpec::Hetero => write!(f, "hetero"),
            NoiseSpec::Cauchy { location, scale } => write!(f, "cauchy({location},{scale})"),
            NoiseSpec::Uniform { lo, hi } => write!(f, "uniform({lo},{hi})"),
        }
    }
}

/// Parses `normal`, `hetero`, `cauchy`, `uniform`, optionally with
/// parameters as in `normal(0,2)` or `uniform(-5,5)`.
impl FromStr for NoiseSpec {
    type Err = JcrError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = match s.find('(') {
            Some(open) if s.ends_with(')') => {
                let inner = &s[open + 1..s.len() - 1];
                let params = inner
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| JcrError::invalid(format!("bad noise parameters in {s:?}")))?;
                (&s[..open], Some(params))
            }
            _ => (s, None),
        };
        let two = |default: [f64; 2]| -> Result<[f64; 2]> {
            match &params {
                None => Ok(default),
                Some(p) if p.len() == 2 => Ok([p[0], p[1]]),
                Some(_) => Err(JcrError::invalid(format!("{name} takes two parameters"))),
            }
        };
        let spec = match name.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => {
                let [mean, sd] = two([0.0, 1.0])?;
                NoiseSpec::Normal { mean, sd }
            }
            "hetero" | "heteroskedastic" | "mixture" => {
                if params.is_some() {
                    return Err(JcrError::invalid("the heteroskedastic mixture takes no parameters"));
                }
                NoiseSpec::Hetero
            }
            "cauchy" => {
                let [location, scale] = two([0.0, 1.0])?;
                NoiseSpec::Cauchy { location, scale }
            }
            "uniform" => {
                let [lo, hi] = two([-5.0, 5.0])?;
                NoiseSpec::Uniform { lo, hi }
            }
            other => {
                return Err(JcrError::Unknown {
                    what: "noise",
                    name: other.to_string(),
                })
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `n` draws from `spec`, deterministic in `seed`.
pub fn gen_noise(spec: &NoiseSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(JcrError::invalid("noise length must be at least 1"));
    }
    let mut rng = stream(seed, Purpose::Noise, 0);
    Ok(spec.sample(&mut rng, n))
}
