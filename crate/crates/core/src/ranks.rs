//! Ranks, permutations, rank sets and the adjacency relation.
//!
//! Applicants are encoded as their global rank `1..=n`, so a subset of
//! applicants is just a set of ranks. Two members of a set `P` are adjacent
//! when their relative ranks within `P` differ by an element of
//! `Δ(|P|) = {-1, 1, |P|-1, 1-|P|}`: order neighbours, plus the pair made of
//! the minimum and the maximum.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Global rank of an applicant, `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
#[repr(transparent)]
pub struct Rank(u32);

impl Rank {
    pub fn new(value: u32) -> Result<Self> {
        if value == 0 {
            return Err(Error::ZeroRank);
        }
        Ok(Rank(value))
    }

    /// Checked against the universe size as well.
    pub fn in_universe(value: u32, n: u32) -> Result<Self> {
        if value == 0 || value > n {
            return Err(Error::RankOutOfRange { value, n });
        }
        Ok(Rank(value))
    }

    /// Caller guarantees `value >= 1`.
    #[inline]
    pub(crate) const fn new_unchecked(value: u32) -> Self {
        Rank(value)
    }

    #[inline]
    pub const fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An interview order: every rank `1..=n` exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    items: Vec<Rank>,
}

impl Permutation {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n + 1];
        for &v in &values {
            if v == 0 || v as usize > n {
                return Err(Error::NotAPermutation { len: n });
            }
            if std::mem::replace(&mut seen[v as usize], true) {
                return Err(Error::DuplicateRank(v));
            }
        }
        Ok(Permutation {
            items: values.into_iter().map(Rank).collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            items: (1..=n as u32).map(Rank).collect(),
        }
    }

    /// Caller guarantees `items` is a permutation of `1..=items.len()`.
    pub(crate) fn from_ranks_unchecked(items: Vec<Rank>) -> Self {
        Permutation { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn as_slice(&self) -> &[Rank] {
        &self.items
    }

    /// 1-based access, matching interview positions.
    pub fn at(&self, position: usize) -> Rank {
        self.items[position - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = Rank> + '_ {
        self.items.iter().copied()
    }

    /// Set of the applicants interviewed at positions `1..=len`.
    pub fn prefix_set(&self, len: usize) -> RankSet {
        RankSet::from_sorted_unchecked({
            let mut v = self.items[..len].to_vec();
            v.sort_unstable();
            v
        })
    }
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;

    fn try_from(values: Vec<u32>) -> Result<Self> {
        Permutation::new(values)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Self {
        p.items.into_iter().map(Rank::get).collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, r) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str(")")
    }
}

/// A finite set of ranks with order queries. Stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RankSet {
    members: Vec<Rank>,
}

impl RankSet {
    /// Rejects duplicates rather than silently merging them.
    pub fn new<I: IntoIterator<Item = Rank>>(members: I) -> Result<Self> {
        let mut members: Vec<Rank> = members.into_iter().collect();
        members.sort_unstable();
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateRank(w[0].get()));
        }
        Ok(RankSet { members })
    }

    pub fn from_values<I: IntoIterator<Item = u32>>(values: I) -> Result<Self> {
        let ranks = values
            .into_iter()
            .map(Rank::new)
            .collect::<Result<Vec<_>>>()?;
        RankSet::new(ranks)
    }

    /// `{1, ..., n}`, the full applicant set.
    pub fn universe(n: u32) -> Self {
        RankSet {
            members: (1..=n).map(Rank).collect(),
        }
    }

    fn from_sorted_unchecked(members: Vec<Rank>) -> Self {
        RankSet { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: Rank) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn min(&self) -> Option<Rank> {
        self.members.first().copied()
    }

    pub fn max(&self) -> Option<Rank> {
        self.members.last().copied()
    }

    /// Largest member strictly below `x`.
    pub fn predecessor(&self, x: Rank) -> Option<Rank> {
        let idx = self.members.partition_point(|&m| m < x);
        idx.checked_sub(1).map(|i| self.members[i])
    }

    /// Smallest member strictly above `x`.
    pub fn successor(&self, x: Rank) -> Option<Rank> {
        let idx = self.members.partition_point(|&m| m <= x);
        self.members.get(idx).copied()
    }

    /// `|{z ∈ P : z <= x}|`; defined for any `x`, member or not.
    pub fn count_le(&self, x: Rank) -> usize {
        self.members.partition_point(|&m| m <= x)
    }

    pub fn iter(&self) -> impl Iterator<Item = Rank> + '_ {
        self.members.iter().copied()
    }
}

impl FromIterator<Rank> for RankSet {
    /// Duplicates are merged. Use [`RankSet::new`] to reject them instead.
    fn from_iter<I: IntoIterator<Item = Rank>>(iter: I) -> Self {
        let members: BTreeSet<Rank> = iter.into_iter().collect();
        RankSet {
            members: members.into_iter().collect(),
        }
    }
}

/// Relative rank of `x` within `set`: the number of members `<= x`.
pub fn relative_rank(set: &RankSet, x: Rank) -> Result<usize> {
    if !set.contains(x) {
        return Err(Error::NotAMember(x.get()));
    }
    Ok(set.count_le(x))
}

/// `Δ(k) = {-1, 1, k-1, 1-k}`.
pub fn delta_set(k: usize) -> Result<BTreeSet<i64>> {
    if k < 3 {
        return Err(Error::DeltaTooSmall(k));
    }
    let k = k as i64;
    Ok([-1, 1, k - 1, 1 - k].into_iter().collect())
}

/// Adjacency with regard to `set`, evaluated literally from relative ranks.
///
/// This is the O(|P| log |P|) reference definition. The hot paths use
/// [`crate::PrefixState`], which reaches the same answer through
/// predecessor/successor/min/max queries.
pub fn is_adjacent(set: &RankSet, x: Rank, y: Rank) -> Result<bool> {
    if set.len() < 3 {
        return Err(Error::SetTooSmall {
            size: set.len(),
            min: 3,
        });
    }
    if x == y {
        return Err(Error::SelfPair(x.get()));
    }
    let diff = relative_rank(set, x)? as i64 - relative_rank(set, y)? as i64;
    Ok(delta_set(set.len())?.contains(&diff))
}

/// Number of members adjacent to `x` within `set`. Always 2 when `|set| >= 3`.
pub fn adjacent_count(set: &RankSet, x: Rank) -> Result<usize> {
    if set.len() < 3 {
        return Err(Error::SetTooSmall {
            size: set.len(),
            min: 3,
        });
    }
    if !set.contains(x) {
        return Err(Error::NotAMember(x.get()));
    }
    let mut count = 0;
    for y in set.iter().filter(|&y| y != x) {
        if is_adjacent(set, x, y)? {
            count += 1;
        }
    }
    Ok(count)
}

/// Adjacency within the full applicant set `{1..n}`: global ranks differ by
/// one, or the pair is `{1, n}`.
#[inline]
pub fn globally_adjacent(n: u32, x: Rank, y: Rank) -> bool {
    let d = x.get().abs_diff(y.get());
    d == 1 || d == n - 1
}
