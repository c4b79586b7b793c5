use rayon::prelude::*;

use crate::error::{JcrError, Result};
use crate::invariance::{GroupAction, GroupElement, SeparableModel, StatisticFn};
use crate::linmod::RegressionData;
use crate::region::quantile::{at_most, floor_count};
use crate::region::{fmt_decimal, Axis, GridRegion, IntervalUnion};

/// Adequate sets `W(θ)` over the adequate-map value `a = y_te − f(θ, x_te)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdequateSetResult {
    pub theta_grid: Axis,
    pub a_window: (f64, f64),
    /// `W(θ_i)` for every θ-grid point.
    pub sets: Vec<IntervalUnion>,
    /// Uniform scan axis over the a-window used for the vote diagnostics.
    pub a_axis: Axis,
    /// Number of `W_i` containing each `(θ, a)` scan cell, θ-major.
    pub votes: Vec<u32>,
    pub transforms: usize,
    pub threshold: usize,
}

impl AdequateSetResult {
    pub fn contains(&self, theta_index: usize, a: f64) -> bool {
        self.sets[theta_index].contains(a)
    }

    pub fn votes_at(&self, theta_index: usize, a_index: usize) -> u32 {
        self.votes[theta_index * self.a_axis.count() + a_index]
    }

    /// CSV with header `theta,a_lo,a_hi`, one row per interval.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("theta,a_lo,a_hi\n");
        for (theta, set) in self.theta_grid.points().zip(&self.sets) {
            for &(lo, hi) in set.intervals() {
                out.push_str(&format!("{},{},{}\n", fmt_decimal(theta), fmt_decimal(lo), fmt_decimal(hi)));
            }
        }
        out
    }
}

/// Calibration residual range over the θ-grid, widened by half its span on
/// each side.
pub fn default_a_window(model: &SeparableModel, calib: &RegressionData, theta_grid: &Axis) -> (f64, f64) {
    let (lo, hi) = theta_grid
        .points()
        .flat_map(|t| model.residuals(t, calib))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r), b.max(r)));
    let span = (hi - lo).max(1e-12);
    (lo - 0.5 * span, hi + 0.5 * span)
}

/// Boundary between a point where `pred` is false and one where it is true,
/// refined until the two are adjacent floats; returns the true side.
fn refine(mut off: f64, mut on: f64, pred: &mut impl FnMut(f64) -> bool) -> f64 {
    loop {
        let mid = off + 0.5 * (on - off);
        if mid == off || mid == on {
            return on;
        }
        if pred(mid) {
            on = mid;
        } else {
            off = mid;
        }
    }
}

/// Closed set where `pred` holds, located at the scan points and refined at
/// every change of value.
fn extract(points: &[f64], mut pred: impl FnMut(f64) -> bool) -> IntervalUnion {
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    let mut prev: Option<(f64, bool)> = None;
    for &a in points {
        let v = pred(a);
        match (prev, v) {
            (None, true) => start = Some(a),
            (Some((p, false)), true) => start = Some(refine(p, a, &mut pred)),
            (Some((p, true)), false) => {
                out.push((start.take().expect("open interval"), refine(a, p, &mut pred)));
            }
            _ => {}
        }
        prev = Some((a, v));
    }
    if let (Some(s), Some((p, true))) = (start, prev) {
        out.push((s, p));
    }
    IntervalUnion::from_intervals(out)
}

/// One transform's affine pieces: `g I(a) = u + a·d`.
struct Decomposed {
    u: Vec<f64>,
    d: Vec<f64>,
}

fn decompose(g: &GroupElement, base: &[f64], tol_scale: f64) -> Result<Decomposed> {
    let n1 = base.len();
    let mut e = vec![0.0; n1];
    e[n1 - 1] = 1.0;
    let u = g.apply(base);
    let d = g.apply(&e);
    let probe = 1.234_567;
    let mut v = base.to_vec();
    v[n1 - 1] = probe;
    let direct = g.apply(&v);
    for k in 0..n1 {
        let lin = u[k] + probe * d[k];
        if (direct[k] - lin).abs() > 1e-9 * tol_scale {
            return Err(JcrError::Decomposition(format!(
                "coordinate {k}: g·I = {} but the affine split gives {lin}",
                direct[k]
            )));
        }
    }
    Ok(Decomposed { u, d })
}

/// Adequate-set construction. For every θ, `W_i(θ)` is the set of `a` with
/// `m(g_i I) ≤ m(I)` where `I = [Y − f(θ, X); a]`; `W(θ)` collects the `a`
/// lying in at least `⌊(K+1)α⌋` of them, and the region for a test input is
/// `{(θ, y): y − f(θ, x_te) ∈ W(θ)}`.
///
/// With `K = 0` there are no sets to vote and `W` is empty.
#[allow(clippy::too_many_arguments)]
pub fn adequate_set_jcr(
    group: &GroupAction,
    model: &SeparableModel,
    stat: &StatisticFn,
    alpha: f64,
    calib: &RegressionData,
    test_inputs: &[Vec<f64>],
    theta_grid: Axis,
    y_grid: Axis,
    a_window: Option<(f64, f64)>,
    k: usize,
    seed: u64,
) -> Result<(AdequateSetResult, Vec<GridRegion>)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(JcrError::invalid(format!("alpha {alpha} outside [0, 1]")));
    }
    let n = calib.n();
    if n == 0 {
        return Err(JcrError::EmptySample);
    }
    if group.dim() != n + 1 {
        return Err(JcrError::Decomposition(format!("group acts on {} coordinates, data has n + 1 = {}", group.dim(), n + 1)));
    }
    let (a_lo, a_hi) = a_window.unwrap_or_else(|| default_a_window(model, calib, &theta_grid));
    let a_axis = Axis::new(a_lo, a_hi, y_grid.count())?;
    let elements = GroupAction::new(group.kind(), group.dim(), seed)?.sample_elements(k);
    let threshold = floor_count(k + 1, alpha);
    let mut e_last = vec![0.0; n + 1];
    e_last[n] = 1.0;

    let rows = theta_grid
        .points()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|theta| -> Result<(IntervalUnion, Vec<u32>)> {
            let mut base = model.residuals(theta, calib);
            base.push(0.0);
            let scale = base.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            let parts = elements.iter().map(|g| decompose(g, &base, scale)).collect::<Result<Vec<_>>>()?;
            let own_kinks = stat.kinks(&base, &e_last);
            let eval_at = |u: &[f64], d: &[f64], a: f64, buf: &mut Vec<f64>| {
                buf.clear();
                buf.extend(u.iter().zip(d).map(|(x, y)| x + a * y));
                stat.eval(buf)
            };
            let w_sets: Vec<IntervalUnion> = parts
                .iter()
                .map(|p| {
                    let mut points: Vec<f64> = a_axis.points().collect();
                    for kink in stat.kinks(&p.u, &p.d).into_iter().chain(own_kinks.iter().copied()) {
                        if kink > a_lo && kink < a_hi {
                            points.push(kink);
                        }
                    }
                    points.sort_by(f64::total_cmp);
                    points.dedup();
                    let mut b1 = Vec::with_capacity(n + 1);
                    let mut b2 = Vec::with_capacity(n + 1);
                    extract(&points, |a: f64| {
                        let ours = eval_at(&base, &e_last, a, &mut b1);
                        let theirs = eval_at(&p.u, &p.d, a, &mut b2);
                        at_most(theirs, ours)
                    })
                })
                .collect();
            let w = if k == 0 {
                IntervalUnion::empty()
            } else {
                IntervalUnion::from_votes(&w_sets, threshold)
            };
            let votes = a_axis
                .points()
                .map(|a| w_sets.iter().filter(|s| s.contains(a)).count() as u32)
                .collect();
            Ok((w, votes))
        })
        .collect::<Result<Vec<_>>>()?;

    let (sets, vote_rows): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let result = AdequateSetResult {
        theta_grid,
        a_window: (a_lo, a_hi),
        sets,
        a_axis,
        votes: vote_rows.concat(),
        transforms: k,
        threshold,
    };
    let regions = test_inputs
        .iter()
        .map(|x_te| {
            GridRegion::from_rows(theta_grid, y_grid, |i, theta| {
                let pred = model.predict(theta, x_te);
                y_grid.points().map(|y| result.contains(i, y - pred)).collect()
            })
        })
        .collect();
    Ok((result, regions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariance::{split_group_jcr, GroupKind};

    fn setup() -> (RegressionData, Axis, Axis) {
        let x = [0.1, 0.4, 0.35, 0.8, 0.95, 0.6, 0.2, 0.5];
        let noise = [0.3, -0.5, 0.1, 0.7, -0.2, -0.9, 0.4, 0.05];
        let y: Vec<f64> = x.iter().zip(noise).map(|(a, e)| 2.0 * a + e).collect();
        let calib = RegressionData::univariate(&x, &y, 1.5, None).unwrap();
        (calib, Axis::new(0.0, 4.0, 41).unwrap(), Axis::new(-4.0, 10.0, 61).unwrap())
    }

    #[test]
    fn extract_finds_exact_transitions() {
        let pts: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let w = extract(&pts, |a| (2.5..=6.25).contains(&a));
        assert_eq!(w.intervals(), &[(2.5, 6.25)]);
        let w = extract(&pts, |a| a <= 0.5 || a >= 9.75);
        assert_eq!(w.intervals(), &[(0.0, 0.5), (9.75, 10.0)]);
    }

    #[test]
    fn matches_split_construction() {
        let (calib, t, y) = setup();
        for kind in [GroupKind::Permutation, GroupKind::CyclicShift, GroupKind::SignFlip] {
            let g = GroupAction::new(kind, 9, 0).unwrap();
            let m = StatisticFn::centered_last(9).negated();
            let tests = vec![vec![1.5], vec![-0.7]];
            let window = Some((-30.0, 30.0));
            let (res, regions) =
                adequate_set_jcr(&g, &SeparableModel::linear(), &m, 0.2, &calib, &tests, t, y, window, 24, 5).unwrap();
            let direct = split_group_jcr(&g, &SeparableModel::linear(), &m, 0.2, &calib, &tests, t, y, 5, 24).unwrap();
            assert_eq!(regions, direct, "{kind}");
            assert!(res.votes.iter().all(|&v| v as usize <= 24));
        }
    }

    #[test]
    fn cyclic_centered_last_sets_are_intervals() {
        let (calib, t, y) = setup();
        let g = GroupAction::new(GroupKind::CyclicShift, 9, 0).unwrap();
        let m = StatisticFn::centered_last(9).negated();
        let (res, _) = adequate_set_jcr(&g, &SeparableModel::linear(), &m, 0.2, &calib, &[], t, y, Some((-30.0, 30.0)), 1, 2).unwrap();
        // A single transform: W equals W_1 when the threshold is 1 or 0.
        for set in &res.sets {
            assert!(set.len() <= 1);
        }
    }

    #[test]
    fn zero_transforms_give_empty_region() {
        let (calib, t, y) = setup();
        let g = GroupAction::new(GroupKind::Permutation, 9, 0).unwrap();
        let m = StatisticFn::centered_last(9).negated();
        let (res, regions) =
            adequate_set_jcr(&g, &SeparableModel::linear(), &m, 0.2, &calib, &[vec![1.0]], t, y, None, 0, 2).unwrap();
        assert!(res.sets.iter().all(IntervalUnion::is_empty));
        assert!(regions[0].is_empty());
    }

    #[test]
    fn csv_lists_intervals() {
        let (calib, t, y) = setup();
        let g = GroupAction::new(GroupKind::CyclicShift, 9, 0).unwrap();
        let m = StatisticFn::centered_last(9).negated();
        let (res, _) = adequate_set_jcr(&g, &SeparableModel::linear(), &m, 0.3, &calib, &[], t, y, None, 10, 2).unwrap();
        let csv = res.to_csv_string();
        assert!(csv.starts_with("theta,a_lo,a_hi\n"));
        let rows = csv.lines().count() - 1;
        assert_eq!(rows, res.sets.iter().map(IntervalUnion::len).sum::<usize>());
    }
}
