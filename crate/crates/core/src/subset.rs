use std::fmt;

use serde::{Serialize, Serializer};

/// A subset of the coordinate indices `{0, .., n-1}` stored as a bit mask.
///
/// Indices are 0-based internally; `Display` and serialization use the
/// 1-based convention of the coordinate names `z1 .. zn`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(u64);

impl Subset {
    pub const MAX_DIM: usize = 64;

    pub const fn empty() -> Self {
        Subset(0)
    }

    pub fn full(n: usize) -> Self {
        assert!(n <= Self::MAX_DIM);
        if n == 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << n) - 1)
        }
    }

    pub const fn from_bits(bits: u64) -> Self {
        Subset(bits)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut bits = 0u64;
        for i in indices {
            assert!(i < Self::MAX_DIM);
            bits |= 1 << i;
        }
        Subset(bits)
    }

    /// Builds a subset from 1-based indices, as they appear in `z1 .. zn`.
    pub fn from_one_based<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        Self::from_indices(indices.into_iter().map(|i| i - 1))
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < Self::MAX_DIM && self.0 & (1 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn complement(self, n: usize) -> Subset {
        Subset(!self.0 & Self::full(n).0)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..Self::MAX_DIM).filter(move |&i| bits & (1 << i) != 0)
    }

    /// All subsets of `{0, .., n-1}` in increasing bit order.
    pub fn power_set(n: usize) -> impl Iterator<Item = Subset> {
        assert!(n < Self::MAX_DIM);
        (0..(1u64 << n)).map(Subset)
    }

    pub fn one_based(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.one_based())
    }
}
