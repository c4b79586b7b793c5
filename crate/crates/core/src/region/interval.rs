use serde::{Deserialize, Serialize};

/// A finite union of disjoint closed intervals, kept sorted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(a: f64, b: f64) -> Self {
        Self::from_intervals(vec![(a, b)])
    }

    /// Builds a normalized union; inverted pairs are dropped and
    /// overlapping or touching pieces merged.
    pub fn from_intervals(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|&(a, b)| a <= b && !a.is_nan() && !b.is_nan());
        raw.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, x: f64) -> bool {
        // Binary search on left endpoints.
        let idx = self.intervals.partition_point(|&(a, _)| a <= x);
        idx > 0 && x <= self.intervals[idx - 1].1
    }

    /// Total Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Smallest interval containing the union.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        Self::from_intervals(all)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a1, b1) = self.intervals[i];
            let (a2, b2) = other.intervals[j];
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo <= hi {
                out.push((lo, hi));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_intervals(out)
    }

    /// Translates every interval by `offset`.
    pub fn shift(&self, offset: f64) -> Self {
        Self::from_intervals(
            self.intervals
                .iter()
                .map(|&(a, b)| (a + offset, b + offset))
                .collect(),
        )
    }

    /// Points covered by at least `min_votes` of the given unions.
    pub fn from_votes(sets: &[IntervalUnion], min_votes: usize) -> Self {
        if min_votes == 0 {
            return Self::single(f64::NEG_INFINITY, f64::INFINITY);
        }
        // Starts sort before ends at the same coordinate so touching closed
        // intervals are counted together.
        let mut events: Vec<(f64, i32)> = sets
            .iter()
            .flat_map(|s| s.intervals.iter().flat_map(|&(a, b)| [(a, 1), (b, -1)]))
            .collect();
        events.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
        let need = min_votes as i32;
        let mut depth = 0;
        let mut open: Option<f64> = None;
        let mut out = Vec::new();
        for (x, delta) in events {
            depth += delta;
            if depth >= need && open.is_none() {
                open = Some(x);
            } else if depth < need {
                if let Some(a) = open.take() {
                    out.push((a, x));
                }
            }
        }
        Self::from_intervals(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_and_merges() {
        let u = IntervalUnion::from_intervals(vec![(3.0, 4.0), (0.0, 1.0), (0.5, 2.0), (2.0, 2.5), (5.0, 4.0)]);
        assert_eq!(u.intervals(), &[(0.0, 2.5), (3.0, 4.0)]);
        assert!(u.contains(2.5));
        assert!(!u.contains(2.7));
        assert!(u.contains(3.0));
        assert!(!u.contains(-0.1));
    }

    #[test]
    fn intersection_and_union() {
        let a = IntervalUnion::from_intervals(vec![(0.0, 2.0), (3.0, 5.0)]);
        let b = IntervalUnion::from_intervals(vec![(1.0, 3.5)]);
        assert_eq!(a.intersect(&b).intervals(), &[(1.0, 2.0), (3.0, 3.5)]);
        assert_eq!(a.union(&b).intervals(), &[(0.0, 5.0)]);
        assert!(a.intersect(&IntervalUnion::empty()).is_empty());
    }

    #[test]
    fn votes_count_closed_endpoints() {
        let sets = vec![
            IntervalUnion::single(0.0, 1.0),
            IntervalUnion::single(1.0, 2.0),
            IntervalUnion::single(0.5, 1.5),
        ];
        assert_eq!(IntervalUnion::from_votes(&sets, 3).intervals(), &[(1.0, 1.0)]);
        assert_eq!(IntervalUnion::from_votes(&sets, 2).intervals(), &[(0.5, 1.5)]);
        assert_eq!(IntervalUnion::from_votes(&sets, 1).intervals(), &[(0.0, 2.0)]);
        assert!(IntervalUnion::from_votes(&sets, 4).is_empty());
    }
}
