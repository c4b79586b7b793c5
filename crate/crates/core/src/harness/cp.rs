use crate::dist::beta_quantile;
use crate::error::{JcrError, Result};

/// Two-sided exact binomial interval for `hits` successes in `trials`.
pub fn clopper_pearson(hits: u64, trials: u64, conf: f64) -> Result<(f64, f64)> {
    if trials == 0 || hits > trials {
        return Err(JcrError::invalid(format!("need 0 <= hits <= trials and trials >= 1, got {hits}/{trials}")));
    }
    if !(conf > 0.0 && conf < 1.0) {
        return Err(JcrError::invalid(format!("confidence must lie in (0, 1), got {conf}")));
    }
    let tail = (1.0 - conf) / 2.0;
    let (k, n) = (hits as f64, trials as f64);
    let lo = if hits == 0 { 0.0 } else { beta_quantile(k, n - k + 1.0, tail)? };
    let hi = if hits == trials { 1.0 } else { beta_quantile(k + 1.0, n - k, 1.0 - tail)? };
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom_upper_tail(k: u64, n: u64, p: f64) -> f64 {
        // P(X >= k) by direct summation.
        let mut total = 0.0;
        for j in k..=n {
            let mut c = 1.0;
            for i in 0..j {
                c *= (n - i) as f64 / (i + 1) as f64;
            }
            total += c * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32);
        }
        total
    }

    fn solve(f: impl Fn(f64) -> f64, target: f64) -> f64 {
        // f increasing in p.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn matches_tail_inversion_for_small_n() {
        for n in 1..=30u64 {
            for k in 0..=n {
                let (lo, hi) = clopper_pearson(k, n, 0.95).unwrap();
                let want_lo = if k == 0 { 0.0 } else { solve(|p| binom_upper_tail(k, n, p), 0.025) };
                let want_hi = if k == n {
                    1.0
                } else {
                    solve(|p| binom_upper_tail(k + 1, n, p), 0.975)
                };
                assert!((lo - want_lo).abs() < 1e-9, "lo {k}/{n}: {lo} vs {want_lo}");
                assert!((hi - want_hi).abs() < 1e-9, "hi {k}/{n}: {hi} vs {want_hi}");
            }
        }
    }

    #[test]
    fn reported_intervals() {
        let (lo, hi) = clopper_pearson(9193, 10000, 0.95).unwrap();
        assert!((lo - 0.9138).abs() < 5e-4 && (hi - 0.9246).abs() < 5e-4);
        let (lo, hi) = clopper_pearson(942, 1000, 0.95).unwrap();
        assert!((lo - 0.9257).abs() < 5e-4 && (hi - 0.9557).abs() < 5e-4);
        assert_eq!(clopper_pearson(0, 10, 0.95).unwrap().0, 0.0);
        assert_eq!(clopper_pearson(10, 10, 0.95).unwrap().1, 1.0);
        assert!(clopper_pearson(11, 10, 0.95).is_err());
    }
}
