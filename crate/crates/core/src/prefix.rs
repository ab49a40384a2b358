//! Incremental order-statistics index over the ranks interviewed so far.
//!
//! A 64-ary bit tree over the universe `1..=n`: level 0 holds one bit per
//! rank, and each bit of level `l + 1` records whether the matching word of
//! level `l` is non-zero. Insert, predecessor and successor walk at most
//! `ceil(log64 n)` levels, so the adjacency test for a freshly interviewed
//! applicant costs O(log n).

use crate::error::{Error, Result};
use crate::ranks::Rank;

const WORD_BITS: usize = 64;
const MAX_LEVELS: usize = 6;

#[derive(Debug, Clone)]
pub struct PrefixState {
    universe: u32,
    /// All levels back to back, leaves first.
    words: Vec<u64>,
    /// Start of each level in `words`; `offsets[depth]` is the total length.
    offsets: [usize; MAX_LEVELS + 1],
    depth: usize,
    len: usize,
    min: u32,
    max: u32,
}

impl PrefixState {
    pub fn new(universe: u32) -> Self {
        let mut offsets = [0; MAX_LEVELS + 1];
        let mut depth = 0;
        let mut bits = universe.max(1) as usize;
        loop {
            let words = bits.div_ceil(WORD_BITS);
            offsets[depth + 1] = offsets[depth] + words;
            depth += 1;
            if words == 1 {
                break;
            }
            bits = words;
        }
        PrefixState {
            universe,
            words: vec![0; offsets[depth]],
            offsets,
            depth,
            len: 0,
            min: u32::MAX,
            max: 0,
        }
    }

    pub fn universe_size(&self) -> u32 {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn min(&self) -> Option<Rank> {
        (self.len > 0).then(|| Rank::new_unchecked(self.min))
    }

    pub fn max(&self) -> Option<Rank> {
        (self.len > 0).then(|| Rank::new_unchecked(self.max))
    }

    fn check(&self, x: Rank) -> Result<usize> {
        if x.get() > self.universe {
            return Err(Error::RankOutOfRange {
                value: x.get(),
                n: self.universe,
            });
        }
        Ok(x.get() as usize - 1)
    }

    #[inline]
    fn leaf_bit(&self, i: usize) -> bool {
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn contains(&self, x: Rank) -> bool {
        self.check(x).is_ok_and(|i| self.leaf_bit(i))
    }

    #[inline]
    pub fn insert(&mut self, x: Rank) -> Result<()> {
        let i = self.check(x)?;
        let leaf = &mut self.words[i / WORD_BITS];
        let bit = 1u64 << (i % WORD_BITS);
        if *leaf & bit != 0 {
            return Err(Error::DuplicateRank(x.get()));
        }
        let was_empty = *leaf == 0;
        *leaf |= bit;
        if was_empty {
            let mut idx = i / WORD_BITS;
            for level in 1..self.depth {
                let word = &mut self.words[self.offsets[level] + idx / WORD_BITS];
                let was_empty = *word == 0;
                *word |= 1 << (idx % WORD_BITS);
                if !was_empty {
                    break;
                }
                idx /= WORD_BITS;
            }
        }
        self.len += 1;
        self.min = self.min.min(x.get());
        self.max = self.max.max(x.get());
        Ok(())
    }

    /// Empties the index. Cost is proportional to the universe size; prefer
    /// [`PrefixState::clear_members`] when only a few ranks were inserted.
    pub fn clear(&mut self) {
        self.words.fill(0);
        self.reset_counters();
    }

    /// Empties the index given every rank inserted since the last clear.
    /// Falls back to [`PrefixState::clear`] when that touches fewer words.
    pub fn clear_members<I>(&mut self, members: I)
    where
        I: IntoIterator<Item = Rank>,
        I::IntoIter: ExactSizeIterator,
    {
        let members = members.into_iter();
        if members.len() * self.depth >= self.words.len() {
            self.clear();
            return;
        }
        for x in members {
            let mut idx = x.get() as usize - 1;
            for level in 0..self.depth {
                idx /= WORD_BITS;
                self.words[self.offsets[level] + idx] = 0;
            }
        }
        self.reset_counters();
    }

    /// Replaces the contents with every rank of the universe except
    /// `excluded`. Costs O(n / 64 + |excluded|).
    pub fn fill_except<I>(&mut self, excluded: I) -> Result<()>
    where
        I: IntoIterator<Item = Rank>,
    {
        let n = self.universe as usize;
        if n == 0 {
            return excluded
                .into_iter()
                .try_for_each(|x| self.check(x).map(drop));
        }
        let leaves = &mut self.words[..self.offsets[1]];
        leaves.fill(!0);
        if !n.is_multiple_of(WORD_BITS) {
            *leaves.last_mut().expect("at least one leaf") = (1u64 << (n % WORD_BITS)) - 1;
        }
        for x in excluded {
            let i = self.check(x).inspect_err(|_| self.clear())?;
            self.words[i / WORD_BITS] &= !(1u64 << (i % WORD_BITS));
        }
        self.rebuild_summaries();
        self.len = self.level(0).iter().map(|w| w.count_ones() as usize).sum();
        if self.len == 0 {
            self.reset_counters();
        } else {
            self.min = if self.leaf_bit(0) {
                1
            } else {
                self.next_set(0).expect("non-empty") as u32 + 1
            };
            self.max = if self.leaf_bit(n - 1) {
                n
            } else {
                self.prev_set(n - 1).expect("non-empty") + 1
            } as u32;
        }
        Ok(())
    }

    fn rebuild_summaries(&mut self) {
        for level in 1..self.depth {
            let (lower, upper) = self.words.split_at_mut(self.offsets[level]);
            let lower = &lower[self.offsets[level - 1]..];
            let upper = &mut upper[..self.offsets[level + 1] - self.offsets[level]];
            upper.fill(0);
            for (idx, w) in lower.iter().enumerate() {
                if *w != 0 {
                    upper[idx / WORD_BITS] |= 1 << (idx % WORD_BITS);
                }
            }
        }
    }

    fn reset_counters(&mut self) {
        self.len = 0;
        self.min = u32::MAX;
        self.max = 0;
    }

    fn level(&self, level: usize) -> &[u64] {
        &self.words[self.offsets[level]..self.offsets[level + 1]]
    }

    /// Smallest leaf index `> i` holding a member.
    #[inline]
    fn next_set(&self, i: usize) -> Option<usize> {
        let b = i % WORD_BITS;
        if b != WORD_BITS - 1 {
            let masked = self.words[i / WORD_BITS] & (!0u64 << (b + 1));
            if masked != 0 {
                return Some(i / WORD_BITS * WORD_BITS + masked.trailing_zeros() as usize);
            }
        }
        self.next_set_slow(i)
    }

    fn next_set_slow(&self, mut i: usize) -> Option<usize> {
        let mut level = 0;
        // Climb until a word has a set bit above the current position.
        loop {
            let words = self.level(level);
            let w = i / WORD_BITS;
            let b = i % WORD_BITS;
            let masked = if b == WORD_BITS - 1 {
                0
            } else {
                words[w] & (!0u64 << (b + 1))
            };
            if masked != 0 {
                i = w * WORD_BITS + masked.trailing_zeros() as usize;
                break;
            }
            if level + 1 == self.depth {
                return None;
            }
            level += 1;
            i = w;
        }
        // Descend taking the lowest set bit.
        while level > 0 {
            level -= 1;
            let word = self.level(level)[i];
            i = i * WORD_BITS + word.trailing_zeros() as usize;
        }
        Some(i)
    }

    fn prev_set(&self, mut i: usize) -> Option<usize> {
        let mut level = 0;
        loop {
            let words = self.level(level);
            let w = i / WORD_BITS;
            let b = i % WORD_BITS;
            let masked = words[w] & ((1u64 << b) - 1);
            if masked != 0 {
                i = w * WORD_BITS + (WORD_BITS - 1 - masked.leading_zeros() as usize);
                break;
            }
            if level + 1 == self.depth {
                return None;
            }
            level += 1;
            i = w;
        }
        while level > 0 {
            level -= 1;
            let word = self.level(level)[i];
            i = i * WORD_BITS + (WORD_BITS - 1 - word.leading_zeros() as usize);
        }
        Some(i)
    }

    /// Largest member strictly below `x`; `x` itself need not be a member.
    pub fn predecessor(&self, x: Rank) -> Option<Rank> {
        let i = self.check(x).ok()?;
        self.prev_set(i).map(|j| Rank::new_unchecked(j as u32 + 1))
    }

    /// Smallest member strictly above `x`.
    pub fn successor(&self, x: Rank) -> Option<Rank> {
        let i = self.check(x).ok()?;
        self.next_set(i).map(|j| Rank::new_unchecked(j as u32 + 1))
    }

    /// Number of members `<= x`. Linear in `n / 64`; not used on hot paths.
    pub fn count_le(&self, x: Rank) -> usize {
        let i = x.get().min(self.universe) as usize - 1;
        let leaves = self.level(0);
        let full: usize = leaves[..i / WORD_BITS]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum();
        let b = i % WORD_BITS;
        let mask = if b == WORD_BITS - 1 {
            !0
        } else {
            (1u64 << (b + 1)) - 1
        };
        full + (leaves[i / WORD_BITS] & mask).count_ones() as usize
    }

    /// Inserts `new`, then reports whether `{prev, new}` is adjacent with
    /// regard to the enlarged set.
    ///
    /// Requires `prev` to be present, `new` absent, and at least two members
    /// before the insert, so the enlarged set has three or more.
    #[inline]
    pub fn insert_adjacent(&mut self, prev: Rank, new: Rank) -> Result<bool> {
        if self.len < 2 {
            return Err(Error::SetTooSmall {
                size: self.len + 1,
                min: 3,
            });
        }
        if !self.contains(prev) {
            return Err(Error::NotAMember(prev.get()));
        }
        self.insert(new)?;
        Ok(self.adjacent_to_member(prev, new))
    }

    /// Both ranks are members. Adjacent iff they are order neighbours, or
    /// they are the minimum and the maximum.
    #[inline]
    fn adjacent_to_member(&self, a: Rank, b: Rank) -> bool {
        let (lo, hi) = (a.get().min(b.get()), a.get().max(b.get()));
        if lo == self.min && hi == self.max {
            return true;
        }
        self.next_set(lo as usize - 1) == Some(hi as usize - 1)
    }
}

/// Free-function form of [`PrefixState::insert_adjacent`].
pub fn prefix_pair_adjacent(state: &mut PrefixState, prev: Rank, new: Rank) -> Result<bool> {
    state.insert_adjacent(prev, new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranks::{is_adjacent, RankSet};
    use proptest::prelude::*;

    fn r(v: u32) -> Rank {
        Rank::new(v).unwrap()
    }

    fn state_with(n: u32, members: &[u32]) -> PrefixState {
        let mut s = PrefixState::new(n);
        for &m in members {
            s.insert(r(m)).unwrap();
        }
        s
    }

    #[test]
    fn prefix_pair_examples() {
        let mut s = state_with(7, &[5, 2]);
        assert!(prefix_pair_adjacent(&mut s, r(2), r(4)).unwrap());

        let mut s = state_with(7, &[3, 6, 1]);
        assert!(!prefix_pair_adjacent(&mut s, r(1), r(5)).unwrap());

        let mut s = state_with(7, &[2, 6, 4]);
        assert!(!prefix_pair_adjacent(&mut s, r(4), r(7)).unwrap());
    }

    #[test]
    fn prefix_pair_errors() {
        let mut s = state_with(7, &[5, 2]);
        assert_eq!(
            prefix_pair_adjacent(&mut s, r(2), r(5)),
            Err(Error::DuplicateRank(5))
        );
        assert_eq!(
            prefix_pair_adjacent(&mut s, r(3), r(4)),
            Err(Error::NotAMember(3))
        );
        let mut s = state_with(7, &[5]);
        assert!(matches!(
            prefix_pair_adjacent(&mut s, r(5), r(4)),
            Err(Error::SetTooSmall { .. })
        ));
        let mut s = state_with(7, &[5, 2]);
        assert!(matches!(
            s.insert(r(8)),
            Err(Error::RankOutOfRange { value: 8, n: 7 })
        ));
    }

    #[test]
    fn min_max_wraparound() {
        let mut s = state_with(100, &[50, 1, 30]);
        assert!(!s.insert_adjacent(r(30), r(99)).unwrap());
        // 1 is min, 99 is max
        let mut s = state_with(100, &[99, 1, 30]);
        assert!(s.insert_adjacent(r(1), r(100)).unwrap());
    }

    #[test]
    fn queries_across_levels() {
        // 5000 > 64 * 64 forces three levels.
        let n = 5000;
        let mut s = state_with(n, &[1, 4097, 4999]);
        assert_eq!(s.depth, 3);
        assert_eq!(s.successor(r(1)), Some(r(4097)));
        assert_eq!(s.successor(r(4097)), Some(r(4999)));
        assert_eq!(s.successor(r(4999)), None);
        assert_eq!(s.predecessor(r(4999)), Some(r(4097)));
        assert_eq!(s.predecessor(r(4096)), Some(r(1)));
        assert_eq!(s.predecessor(r(1)), None);
        assert_eq!(s.count_le(r(4998)), 2);
        s.clear_members([r(1), r(4097), r(4999)]);
        assert!(s.is_empty());
        assert_eq!(s.successor(r(1)), None);
        assert!(s.words.iter().all(|&w| w == 0));
    }

    proptest! {
        #[test]
        fn matches_naive_scan(n in 3u32..700, seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<u32> = (1..=n).collect();
            perm.shuffle(&mut rng);

            let mut s = PrefixState::new(n);
            s.insert(r(perm[0])).unwrap();
            s.insert(r(perm[1])).unwrap();
            for j in 2..perm.len() {
                let fast = s.insert_adjacent(r(perm[j - 1]), r(perm[j])).unwrap();
                let naive_set = RankSet::from_values(perm[..=j].iter().copied()).unwrap();
                let naive = is_adjacent(&naive_set, r(perm[j - 1]), r(perm[j])).unwrap();
                prop_assert_eq!(fast, naive, "step {}", j);
                prop_assert_eq!(s.len(), j + 1);
                let probe = r(perm[(j * 7) % perm.len()]);
                prop_assert_eq!(s.count_le(probe), naive_set.count_le(probe));
                prop_assert_eq!(s.predecessor(probe), naive_set.predecessor(probe));
                prop_assert_eq!(s.successor(probe), naive_set.successor(probe));
            }
        }

        #[test]
        fn fill_except_matches_inserts(n in 1u32..9000, seed in any::<u64>(), keep in 0.0f64..1.0) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<u32> = (1..=n).collect();
            perm.shuffle(&mut rng);
            let m = (keep * n as f64) as usize;

            let mut filled = PrefixState::new(n);
            filled.insert(r(1 + (seed % n as u64) as u32)).unwrap();
            filled.fill_except(perm[m..].iter().map(|&v| r(v))).unwrap();
            let mut inserted = PrefixState::new(n);
            for &v in &perm[..m] {
                inserted.insert(r(v)).unwrap();
            }
            prop_assert_eq!(&filled.words, &inserted.words);
            prop_assert_eq!(filled.len(), m);
            prop_assert_eq!(filled.min(), inserted.min());
            prop_assert_eq!(filled.max(), inserted.max());
        }
    }
}
