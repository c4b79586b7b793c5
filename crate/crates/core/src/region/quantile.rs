//! Empirical quantiles and the rank rule shared by every randomization-based
//! construction.

use crate::error::{JcrError, Result};

/// Relative tolerance under which two statistic values count as tied.
///
/// Mathematically equal statistics (for instance a mean over a permuted
/// vector) can differ in the last bits; ties are resolved in favor of
/// inclusion, so rounding noise must not break them.
pub const TIE_RTOL: f64 = 1e-12;

/// `⌊count · alpha⌋`, robust to representation error in `alpha`.
pub fn floor_count(count: usize, alpha: f64) -> usize {
    let x = count as f64 * alpha;
    if x <= 0.0 {
        0
    } else {
        (x + 1e-9 * x.max(1.0)).floor() as usize
    }
}

/// Returns `v_(⌊K·alpha⌋)` of the sorted sample, with `v_(0) = -∞`.
pub fn empirical_quantile(values: &[f64], alpha: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(JcrError::EmptySample);
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(JcrError::invalid(format!("quantile level {alpha} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(order_statistic(&sorted, floor_count(sorted.len(), alpha)))
}

/// One-based order statistic of a sorted sample; index 0 is `-∞` and
/// indices past the end are `+∞`.
pub fn order_statistic(sorted: &[f64], index: usize) -> f64 {
    match index {
        0 => f64::NEG_INFINITY,
        i if i > sorted.len() => f64::INFINITY,
        i => sorted[i - 1],
    }
}

/// `transformed <= observed` up to [`TIE_RTOL`].
#[inline]
pub fn at_most(transformed: f64, observed: f64) -> bool {
    transformed <= observed || transformed - observed <= TIE_RTOL * transformed.abs().max(observed.abs())
}

/// Rank rule: accept when at least `threshold` reference values are at most
/// `observed`. Equivalent to `observed >= v_(threshold)` of the references.
pub fn rank_accepts<I>(observed: f64, references: I, threshold: usize) -> bool
where
    I: IntoIterator<Item = f64>,
{
    if threshold == 0 {
        return true;
    }
    let mut hits = 0;
    for r in references {
        if at_most(r, observed) {
            hits += 1;
            if hits >= threshold {
                return true;
            }
        }
    }
    false
}
