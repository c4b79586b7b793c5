use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{JcrError, Result};
use crate::rng::{stream, Purpose};

/// Default enumeration budget for full-group constructions.
pub const DEFAULT_GROUP_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    Identity,
    Permutation,
    CyclicShift,
    SignFlip,
    Orthogonal,
    /// Permutations of the first `n` coordinates that keep the last fixed.
    FixedLastPermutation,
}

impl GroupKind {
    pub fn name(&self) -> &'static str {
        match self {
            GroupKind::Identity => "identity",
            GroupKind::Permutation => "permutation",
            GroupKind::CyclicShift => "cyclic-shift",
            GroupKind::SignFlip => "sign-flip",
            GroupKind::Orthogonal => "orthogonal",
            GroupKind::FixedLastPermutation => "fixed-last-permutation",
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroupKind {
    type Err = JcrError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identity" => GroupKind::Identity,
            "permutation" => GroupKind::Permutation,
            "cyclic-shift" | "cyclic" => GroupKind::CyclicShift,
            "sign-flip" => GroupKind::SignFlip,
            "orthogonal" => GroupKind::Orthogonal,
            "fixed-last-permutation" => GroupKind::FixedLastPermutation,
            other => {
                return Err(JcrError::Unknown {
                    what: "group kind",
                    name: other.to_string(),
                })
            }
        })
    }
}

/// Number of elements of a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupOrder {
    /// Exact order, saturating at `u128::MAX`.
    Finite(u128),
    Infinite,
}

impl fmt::Display for GroupOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupOrder::Finite(u128::MAX) => f.write_str("more than 2^128"),
            GroupOrder::Finite(n) => write!(f, "{n}"),
            GroupOrder::Infinite => f.write_str("infinitely many"),
        }
    }
}

/// One group element acting linearly on vectors of length `n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    /// `(g v)[i] = v[perm[i]]`; also used for cyclic shifts.
    Permutation(Vec<usize>),
    /// `(g v)[i] = signs[i] * v[i]` with entries ±1.
    SignFlip(Vec<f64>),
    /// Row-major `d × d` orthogonal matrix.
    Orthogonal { dim: usize, entries: Vec<f64> },
}

impl GroupElement {
    pub fn dim(&self) -> usize {
        match self {
            GroupElement::Permutation(p) => p.len(),
            GroupElement::SignFlip(s) => s.len(),
            GroupElement::Orthogonal { dim, .. } => *dim,
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        out
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim());
        match self {
            GroupElement::Permutation(p) => {
                for (o, &k) in out.iter_mut().zip(p) {
                    *o = v[k];
                }
            }
            GroupElement::SignFlip(s) => {
                for ((o, &x), &sg) in out.iter_mut().zip(v).zip(s) {
                    *o = sg * x;
                }
            }
            GroupElement::Orthogonal { dim, entries } => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = entries[i * dim..(i + 1) * dim].iter().zip(v).map(|(a, b)| a * b).sum();
                }
            }
        }
    }

    /// The product `self · other`, acting as `self(other(v))`.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.dim() != other.dim() {
            return Err(JcrError::invalid("cannot compose elements of different dimension"));
        }
        Ok(match (self, other) {
            (GroupElement::Permutation(g), GroupElement::Permutation(h)) => {
                GroupElement::Permutation(g.iter().map(|&k| h[k]).collect())
            }
            (GroupElement::SignFlip(g), GroupElement::SignFlip(h)) => {
                GroupElement::SignFlip(g.iter().zip(h).map(|(a, b)| a * b).collect())
            }
            _ => {
                let a = self.to_matrix();
                let b = other.to_matrix();
                let c = a * b;
                GroupElement::Orthogonal {
                    dim: c.nrows(),
                    entries: row_major(&c),
                }
            }
        })
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            self.apply(&e)[i]
        })
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            GroupElement::Permutation(p) => serde_json::json!(p),
            GroupElement::SignFlip(s) => serde_json::json!(s.iter().map(|&x| x as i8).collect::<Vec<_>>()),
            GroupElement::Orthogonal { dim, entries } => {
                serde_json::json!(entries.chunks(*dim).map(|r| r.to_vec()).collect::<Vec<_>>())
            }
        }
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect()
}

/// A group acting on residual vectors of length `n + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupAction {
    kind: GroupKind,
    n_plus_1: usize,
    seed: u64,
}

/// Saved group-element samples, for exact replay of an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSample {
    pub kind: GroupKind,
    pub n_plus_1: usize,
    pub elements: Vec<serde_json::Value>,
}

impl GroupAction {
    pub fn new(kind: GroupKind, n_plus_1: usize, seed: u64) -> Result<Self> {
        if n_plus_1 < 2 {
            return Err(JcrError::invalid(format!("group dimension must be at least 2, got {n_plus_1}")));
        }
        Ok(Self { kind, n_plus_1, seed })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n_plus_1
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind {
            GroupKind::SignFlip => GroupElement::SignFlip(vec![1.0; self.n_plus_1]),
            _ => GroupElement::Permutation((0..self.n_plus_1).collect()),
        }
    }

    pub fn order(&self) -> GroupOrder {
        let d = self.n_plus_1 as u128;
        let factorial = |m: u128| (1..=m).fold(1u128, |acc, k| acc.saturating_mul(k));
        match self.kind {
            GroupKind::Identity => GroupOrder::Finite(1),
            GroupKind::Permutation => GroupOrder::Finite(factorial(d)),
            GroupKind::FixedLastPermutation => GroupOrder::Finite(factorial(d - 1)),
            GroupKind::CyclicShift => GroupOrder::Finite(d),
            GroupKind::SignFlip => GroupOrder::Finite(if d >= 128 { u128::MAX } else { 1u128 << d }),
            GroupKind::Orthogonal => GroupOrder::Infinite,
        }
    }

    /// All elements, identity first, provided the order is within `budget`.
    pub fn enumerate(&self, budget: u64) -> Result<Vec<GroupElement>> {
        let order = self.order();
        match order {
            GroupOrder::Finite(k) if k <= budget as u128 => {}
            _ => {
                return Err(JcrError::GroupTooLarge {
                    order: order.to_string(),
                    budget,
                })
            }
        }
        let d = self.n_plus_1;
        Ok(match self.kind {
            GroupKind::Identity => vec![self.identity()],
            GroupKind::Permutation => (0..d).permutations(d).map(GroupElement::Permutation).collect(),
            GroupKind::FixedLastPermutation => (0..d - 1)
                .permutations(d - 1)
                .map(|mut p| {
                    p.push(d - 1);
                    GroupElement::Permutation(p)
                })
                .collect(),
            GroupKind::CyclicShift => (0..d)
                .map(|k| GroupElement::Permutation((0..d).map(|i| (i + k) % d).collect()))
                .collect(),
            GroupKind::SignFlip => (0u64..1 << d)
                .map(|bits| GroupElement::SignFlip((0..d).map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }).collect()))
                .collect(),
            GroupKind::Orthogonal => unreachable!("orthogonal group is infinite"),
        })
    }

    /// One element drawn from the uniform (Haar) distribution on the group.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let d = self.n_plus_1;
        match self.kind {
            GroupKind::Identity => self.identity(),
            GroupKind::Permutation => {
                let mut p: Vec<usize> = (0..d).collect();
                p.shuffle(rng);
                GroupElement::Permutation(p)
            }
            GroupKind::FixedLastPermutation => {
                let mut p: Vec<usize> = (0..d).collect();
                p[..d - 1].shuffle(rng);
                GroupElement::Permutation(p)
            }
            GroupKind::CyclicShift => {
                let k = rng.random_range(0..d);
                GroupElement::Permutation((0..d).map(|i| (i + k) % d).collect())
            }
            GroupKind::SignFlip => {
                GroupElement::SignFlip((0..d).map(|_| if rng.random::<bool>() { -1.0 } else { 1.0 }).collect())
            }
            GroupKind::Orthogonal => haar_orthogonal(d, rng),
        }
    }

    /// `k` iid elements from this action's own seeded stream.
    pub fn sample_elements(&self, k: usize) -> Vec<GroupElement> {
        let mut rng = stream(self.seed, Purpose::GroupSample, 0);
        (0..k).map(|_| self.sample_with(&mut rng)).collect()
    }

    pub fn dump(&self, elements: &[GroupElement]) -> GroupSample {
        GroupSample {
            kind: self.kind,
            n_plus_1: self.n_plus_1,
            elements: elements.iter().map(GroupElement::to_json).collect(),
        }
    }
}

impl GroupSample {
    /// Rebuilds the elements, validating them against the group kind.
    pub fn elements(&self) -> Result<Vec<GroupElement>> {
        let d = self.n_plus_1;
        self.elements
            .iter()
            .map(|v| {
                let bad = || JcrError::invalid(format!("malformed {} element: {v}", self.kind));
                let el = match self.kind {
                    GroupKind::SignFlip => {
                        let s: Vec<i8> = serde_json::from_value(v.clone()).map_err(|_| bad())?;
                        if s.iter().any(|&x| x != 1 && x != -1) {
                            return Err(bad());
                        }
                        GroupElement::SignFlip(s.into_iter().map(f64::from).collect())
                    }
                    GroupKind::Orthogonal => {
                        let rows: Vec<Vec<f64>> = serde_json::from_value(v.clone()).map_err(|_| bad())?;
                        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                            return Err(bad());
                        }
                        GroupElement::Orthogonal {
                            dim: d,
                            entries: rows.concat(),
                        }
                    }
                    _ => {
                        let p: Vec<usize> = serde_json::from_value(v.clone()).map_err(|_| bad())?;
                        let mut seen = vec![false; d];
                        for &k in &p {
                            if k >= d || std::mem::replace(&mut seen[k], true) {
                                return Err(bad());
                            }
                        }
                        GroupElement::Permutation(p)
                    }
                };
                if el.dim() != d {
                    return Err(bad());
                }
                Ok(el)
            })
            .collect()
    }
}

/// Haar-distributed orthogonal matrix.
///
/// QR of a standard Gaussian matrix, with the columns of `Q` multiplied by the
/// signs of `diag(R)`. Without the sign fix the distribution depends on the
/// QR implementation's sign convention and is not Haar.
pub fn haar_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> GroupElement {
    let a = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    GroupElement::Orthogonal {
        dim: d,
        entries: row_major(&q),
    }
}
