//! Quantile functions of the reference laws, polished to near machine
//! precision.

use statrs::distribution::{Beta, ChiSquared, Continuous, ContinuousCDF, FisherSnedecor, Normal, StudentsT};

use crate::error::{JcrError, Result};

/// Newton refinement of an initial inverse-CDF guess, guarded by the
/// support bounds.
fn polish<D>(d: &D, p: f64, x0: f64, support: (f64, f64)) -> f64
where
    D: ContinuousCDF<f64, f64> + Continuous<f64, f64>,
{
    let mut x = x0;
    for _ in 0..50 {
        let err = d.cdf(x) - p;
        let dens = d.pdf(x);
        if dens.is_nan() || dens <= 0.0 || !dens.is_finite() {
            break;
        }
        let mut next = x - err / dens;
        if next <= support.0 {
            next = 0.5 * (x + support.0);
        }
        if next >= support.1 {
            next = 0.5 * (x + support.1);
        }
        let done = (next - x).abs() <= 1e-15 * x.abs().max(1e-300);
        x = next;
        if done {
            break;
        }
    }
    x
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(JcrError::invalid(format!("probability {p} outside [0, 1]")))
    }
}

fn quantile<D>(d: &D, p: f64, support: (f64, f64)) -> Result<f64>
where
    D: ContinuousCDF<f64, f64> + Continuous<f64, f64>,
{
    check_p(p)?;
    if p == 0.0 {
        return Ok(support.0);
    }
    if p == 1.0 {
        return Ok(support.1);
    }
    Ok(polish(d, p, d.inverse_cdf(p), support))
}

const REAL_LINE: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);
const HALF_LINE: (f64, f64) = (0.0, f64::INFINITY);

/// Standard normal quantile; `p = 0` and `p = 1` map to `∓∞`.
pub fn normal_quantile(p: f64) -> f64 {
    // The normal inverse CDF is already accurate to a few ulps, while the
    // normal CDF is not; Newton polishing would make it worse.
    let p = p.clamp(0.0, 1.0);
    match p {
        0.0 => f64::NEG_INFINITY,
        1.0 => f64::INFINITY,
        _ => Normal::standard().inverse_cdf(p),
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

pub fn normal_pdf(x: f64) -> f64 {
    Normal::standard().pdf(x)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(JcrError::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn t_quantile(df: f64, p: f64) -> Result<f64> {
    positive("degrees of freedom", df)?;
    let d = StudentsT::new(0.0, 1.0, df).map_err(|e| JcrError::invalid(e.to_string()))?;
    quantile(&d, p, REAL_LINE)
}

pub fn t_cdf(df: f64, x: f64) -> Result<f64> {
    positive("degrees of freedom", df)?;
    let d = StudentsT::new(0.0, 1.0, df).map_err(|e| JcrError::invalid(e.to_string()))?;
    Ok(d.cdf(x))
}

pub fn f_quantile(d1: f64, d2: f64, p: f64) -> Result<f64> {
    positive("numerator degrees of freedom", d1)?;
    positive("denominator degrees of freedom", d2)?;
    let d = FisherSnedecor::new(d1, d2).map_err(|e| JcrError::invalid(e.to_string()))?;
    quantile(&d, p, HALF_LINE)
}

pub fn f_cdf(d1: f64, d2: f64, x: f64) -> Result<f64> {
    positive("numerator degrees of freedom", d1)?;
    positive("denominator degrees of freedom", d2)?;
    let d = FisherSnedecor::new(d1, d2).map_err(|e| JcrError::invalid(e.to_string()))?;
    Ok(d.cdf(x.max(0.0)))
}

pub fn chi2_quantile(df: f64, p: f64) -> Result<f64> {
    positive("degrees of freedom", df)?;
    let d = ChiSquared::new(df).map_err(|e| JcrError::invalid(e.to_string()))?;
    quantile(&d, p, HALF_LINE)
}

pub fn chi2_cdf(df: f64, x: f64) -> Result<f64> {
    positive("degrees of freedom", df)?;
    let d = ChiSquared::new(df).map_err(|e| JcrError::invalid(e.to_string()))?;
    Ok(d.cdf(x.max(0.0)))
}

pub fn beta_quantile(a: f64, b: f64, p: f64) -> Result<f64> {
    positive("beta shape a", a)?;
    positive("beta shape b", b)?;
    let d = Beta::new(a, b).map_err(|e| JcrError::invalid(e.to_string()))?;
    quantile(&d, p, (0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_reference_values() {
        let q = normal_quantile(0.95);
        assert!((q - 1.6448536269514722).abs() < 1e-12, "{q}");
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-14);
        assert_eq!(normal_quantile(0.0), f64::NEG_INFINITY);
        assert_eq!(normal_quantile(1.0), f64::INFINITY);
    }

    #[test]
    fn chi_square_two_df_is_exponential() {
        // χ²(2) is exponential with mean 2, so its p-quantile is -2 ln(1 - p).
        for p in [0.1, 0.5, 0.9, 0.999] {
            let q = chi2_quantile(2.0, p).unwrap();
            let exact = -2.0 * (1.0 - p).ln();
            assert!((q - exact).abs() <= 1e-10 * exact, "{p}: {q} vs {exact}");
        }
    }

    #[test]
    fn f_one_df_is_squared_t() {
        for df in [3.0, 10.0, 99.0] {
            let f = f_quantile(1.0, df, 0.9).unwrap();
            let t = t_quantile(df, 0.95).unwrap();
            assert!((f - t * t).abs() <= 1e-10 * f);
        }
    }

    #[test]
    fn t_cauchy_case() {
        // t with one degree of freedom is Cauchy: q_p = tan(π(p - 1/2)).
        let q = t_quantile(1.0, 0.9).unwrap();
        let exact = (std::f64::consts::PI * 0.4).tan();
        assert!((q - exact).abs() <= 1e-10 * exact);
    }

    #[test]
    fn beta_uniform_case() {
        assert!((beta_quantile(1.0, 1.0, 0.3).unwrap() - 0.3).abs() < 1e-14);
        // Beta(a, 1) has CDF x^a.
        let q = beta_quantile(5.0, 1.0, 0.2).unwrap();
        assert!((q - 0.2f64.powf(0.2)).abs() < 1e-12);
    }

    #[test]
    fn frozen_reference_quantiles() {
        let cases = [
            (t_quantile(99.0, 0.95).unwrap(), 1.6603911559963895),
            (t_quantile(9.0, 0.025).unwrap(), -2.2621571628540997),
            (t_quantile(199.0, 0.975).unwrap(), 1.971956544249395),
            (f_quantile(1.0, 99.0, 0.9).unwrap(), 2.756898790979433),
            (chi2_quantile(7.0, 0.9).unwrap(), 12.017036623780532),
            (beta_quantile(9193.0, 808.0, 0.025).unwrap(), 0.9137885693079204),
            (beta_quantile(9194.0, 807.0, 0.975).unwrap(), 0.9245657482420407),
        ];
        for (got, want) in cases {
            assert!((got - want).abs() <= 1e-10 * want.abs(), "{got} vs {want}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(t_quantile(0.0, 0.5).is_err());
        assert!(chi2_quantile(2.0, 1.5).is_err());
    }
}
