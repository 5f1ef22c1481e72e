//! Coordinate subsets `u ⊆ {1, …, s}` stored as 64-bit masks.
//!
//! Bit `j - 1` is set when coordinate `j` (one-based) belongs to the subset.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

/// Largest dimension representable by a [`Subset`].
pub const MAX_COORDS: usize = 64;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Subset(u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_mask(mask: u64) -> Self {
        Subset(mask)
    }

    /// Builds a subset from one-based coordinate indices.
    pub fn from_coords(coords: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &j in coords {
            if j == 0 || j > MAX_COORDS {
                return Err(usage(format!("coordinate {j} outside 1..={MAX_COORDS}")));
            }
            mask |= 1 << (j - 1);
        }
        Ok(Subset(mask))
    }

    /// The full set `{1, …, s}`.
    pub fn full(s: usize) -> Self {
        debug_assert!(s <= MAX_COORDS);
        if s == MAX_COORDS {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << s) - 1)
        }
    }

    pub fn singleton(j: usize) -> Self {
        debug_assert!((1..=MAX_COORDS).contains(&j));
        Subset(1 << (j - 1))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, j: usize) -> bool {
        (1..=MAX_COORDS).contains(&j) && self.0 & (1 << (j - 1)) != 0
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// Largest coordinate in the subset, 0 for the empty set.
    pub fn max_coord(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn insert(self, j: usize) -> Self {
        Subset(self.0 | (1 << (j - 1)))
    }

    pub fn remove(self, j: usize) -> Self {
        Subset(self.0 & !(1 << (j - 1)))
    }

    /// One-based coordinates in increasing order.
    pub fn coords(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(j + 1)
            }
        })
    }

    /// Zero-based coordinate indices in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        self.coords().map(|j| j - 1)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.coords().collect()
    }

    /// Nonempty subsets of `self`, in increasing mask order.
    pub fn nonempty_subsets(self) -> impl Iterator<Item = Subset> {
        // Enumerates submasks from smallest to largest.
        let full = self.0;
        let mut cur: u64 = 0;
        let mut done = full == 0;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            cur = cur.wrapping_sub(full) & full;
            if cur == 0 {
                done = true;
                return None;
            }
            if cur == full {
                done = true;
            }
            Some(Subset(cur))
        })
    }
}

/// All nonempty `u ⊆ {1, …, s}` in increasing mask order.
pub fn nonempty_subsets(s: usize) -> impl Iterator<Item = Subset> {
    Subset::full(s).nonempty_subsets()
}

impl std::fmt::Display for Subset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, j) in self.coords().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_all_nonempty_subsets() {
        let all: Vec<_> = nonempty_subsets(3).map(Subset::mask).collect();
        assert_eq!(all, vec![1, 2, 3, 4, 5, 6, 7]);
        let sub: Vec<_> = Subset::from_coords(&[1, 3])
            .unwrap()
            .nonempty_subsets()
            .map(Subset::mask)
            .collect();
        assert_eq!(sub, vec![1, 4, 5]);
        assert_eq!(Subset::EMPTY.nonempty_subsets().count(), 0);
    }

    #[test]
    fn coords_are_one_based() {
        let u = Subset::from_coords(&[2, 5]).unwrap();
        assert_eq!(u.to_vec(), vec![2, 5]);
        assert_eq!(u.indices().collect::<Vec<_>>(), vec![1, 4]);
        assert_eq!(u.max_coord(), 5);
        assert_eq!(u.to_string(), "{2,5}");
        assert!(Subset::from_coords(&[0]).is_err());
        assert_eq!(Subset::full(64).len(), 64);
    }
}
