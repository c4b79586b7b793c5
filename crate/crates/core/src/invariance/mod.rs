//! Group actions on residual vectors and the invariance-based constructions:
//! full group, sampled group, split, and adequate sets.

mod adequate;
mod exchangeability;
mod group;
mod jcr;
mod statistic;

pub use adequate::{adequate_set_jcr, default_a_window, AdequateSetResult};
pub use exchangeability::{exchangeability_check, kolmogorov_survival, ks_statistic, ExchangeabilityReport};
pub use group::{haar_orthogonal, GroupAction, GroupElement, GroupKind, GroupOrder, GroupSample, DEFAULT_GROUP_BUDGET};
pub use jcr::{full_group_jcr, randomized_group_jcr, split_group_jcr, InvariantFn, RankTest, SeparableModel};
pub use statistic::StatisticFn;

/// Builds a group action; `seed` drives [`GroupAction::sample_elements`].
pub fn make_group(kind: GroupKind, n_plus_1: usize, seed: u64) -> crate::Result<GroupAction> {
    GroupAction::new(kind, n_plus_1, seed)
}
