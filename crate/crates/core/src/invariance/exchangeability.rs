use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{JcrError, Result};
use crate::invariance::{GroupAction, StatisticFn};
use crate::rng::{stream, Purpose};

/// Two-sample comparison of the laws of `m(I)` and `m(G I)`, `G` uniform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExchangeabilityReport {
    pub group: String,
    pub statistic: String,
    pub samples: usize,
    /// Kolmogorov–Smirnov distance between the two empirical laws.
    pub ks_statistic: f64,
    /// Asymptotic KS p-value; small values flag a violation of invariance.
    pub p_value: f64,
}

/// Draws `I` from `draw` (the invariant evaluated at the true parameter on
/// fresh data), transforms it by a uniform group element, and compares the
/// statistic's law before and after.
pub fn exchangeability_check<D>(group: &GroupAction, draw: D, stat: &StatisticFn, samples: usize, seed: u64) -> Result<ExchangeabilityReport>
where
    D: Fn(&mut dyn RngCore) -> Vec<f64> + Sync,
{
    if samples < 2 {
        return Err(JcrError::invalid("exchangeability check needs at least 2 samples"));
    }
    let pairs: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(seed, Purpose::Exchangeability, s as u64);
            let i = draw(&mut rng);
            let g = group.sample_with(&mut rng);
            (stat.eval(&i), stat.eval(&g.apply(&i)))
        })
        .collect();
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let d = ks_statistic(&a, &b);
    let ne = (samples as f64) / 2.0;
    Ok(ExchangeabilityReport {
        group: group.kind().to_string(),
        statistic: stat.name().to_string(),
        samples,
        ks_statistic: d,
        p_value: kolmogorov_survival((ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d),
    })
}

/// `sup_x |F_a(x) − F_b(x)|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Small-λ form converges where the alternating series does not.
        let pi2 = std::f64::consts::PI.powi(2);
        let s: f64 = (1..=20)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (-m * m * pi2 / (8.0 * lambda * lambda)).exp()
            })
            .sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let k = k as f64;
                let sign = if k as i64 % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * k * k * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariance::GroupKind;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn kolmogorov_reference_points() {
        // Classical critical values: P(K > 1.358) ≈ 0.05, P(K > 1.628) ≈ 0.01.
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 5e-4);
        assert!((kolmogorov_survival(1.628) - 0.01).abs() < 5e-4);
        // Both branches agree near the switch point.
        let lo = 1.0 - (2.0 * std::f64::consts::PI).sqrt() / 1.18
            * (1..=20).map(|k| (-(((2 * k - 1) as f64).powi(2)) * std::f64::consts::PI.powi(2) / (8.0 * 1.18 * 1.18)).exp()).sum::<f64>();
        assert!((lo - kolmogorov_survival(1.18)).abs() < 1e-10);
    }

    #[test]
    fn ks_distance_examples() {
        assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
    }

    #[test]
    fn identity_group_is_exact() {
        let g = GroupAction::new(GroupKind::Identity, 5, 0).unwrap();
        let draw = |rng: &mut dyn RngCore| (0..5).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let r = exchangeability_check(&g, draw, &StatisticFn::centered_last(5), 200, 1).unwrap();
        assert_eq!(r.ks_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn trend_is_flagged_under_cyclic_shifts() {
        let g = GroupAction::new(GroupKind::CyclicShift, 20, 0).unwrap();
        let draw = |rng: &mut dyn RngCore| (0..20).map(|i| i as f64 + rng.sample::<f64, _>(StandardNormal)).collect();
        let r = exchangeability_check(&g, draw, &StatisticFn::centered_last(20), 2000, 3).unwrap();
        assert!(r.p_value < 0.01, "{r:?}");
    }
}
