//! Bit-vector point sets over a universe of at most 64 points.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest universe a [`PointSet`] can address.
pub const MAX_WIDTH: usize = 64;

/// A subset of `{0, .., n-1}` stored as a bit mask.
///
/// The width is owned by the space the set belongs to; operations between
/// sets are plain bitwise operations. Sets are ordered lexicographically by
/// their sorted index lists, so `{} < {0,1} < {0,1,2} < {3,4}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PointSet(u64);

impl PointSet {
    pub const EMPTY: PointSet = PointSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        PointSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_WIDTH);
        if n == MAX_WIDTH {
            PointSet(u64::MAX)
        } else {
            PointSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_WIDTH);
        PointSet(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        it.into_iter().fold(PointSet::EMPTY, |s, i| s.with(i))
    }

    pub fn with(self, i: usize) -> Self {
        PointSet(self.0 | (1u64 << i))
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_WIDTH && self.0 >> i & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: Self) -> Self {
        PointSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        PointSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        PointSet(self.0 & !other.0)
    }

    /// Complement inside `{0, .., n-1}`.
    pub fn complement(self, n: usize) -> Self {
        PointSet(!self.0 & PointSet::full(n).0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    /// Smallest element, if any.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// True iff every index is below `n`.
    pub fn within(self, n: usize) -> bool {
        self.is_subset(PointSet::full(n))
    }
}

/// Ascending iterator over the indices of a [`PointSet`].
#[derive(Clone)]
pub struct Iter(u64);

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

impl IntoIterator for PointSet {
    type Item = usize;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl FromIterator<usize> for PointSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        PointSet::from_indices(iter)
    }
}

impl Ord for PointSet {
    /// Lexicographic on ascending index lists, decided at the lowest index
    /// in exactly one of the sets.
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        let low = diff & diff.wrapping_neg();
        let self_has = self.0 & low != 0;
        let lacks = if self_has { other.0 } else { self.0 };
        // the holder of `low` is smaller unless the other list has ended
        if (lacks & !(low - 1) != 0) == self_has {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for PointSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for PointSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for PointSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let idx = Vec::<usize>::deserialize(d)?;
        if let Some(&bad) = idx.iter().find(|&&i| i >= MAX_WIDTH) {
            return Err(serde::de::Error::custom(format!(
                "point index {bad} exceeds the {MAX_WIDTH}-point limit"
            )));
        }
        Ok(PointSet::from_indices(idx))
    }
}
