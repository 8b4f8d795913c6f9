use std::fmt;

use serde::{Deserialize, Serialize};

/// A subset of the ground set `{0, .., p-1}` stored as a fixed-capacity bit vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElementSet {
    words: Vec<u64>,
    p: usize,
}

impl ElementSet {
    pub fn empty(p: usize) -> Self {
        Self {
            words: vec![0; p.div_ceil(64)],
            p,
        }
    }

    pub fn full(p: usize) -> Self {
        let mut s = Self::empty(p);
        for w in &mut s.words {
            *w = u64::MAX;
        }
        s.trim();
        s
    }

    /// Panics if an index is out of range.
    pub fn from_indices<I: IntoIterator<Item = usize>>(p: usize, indices: I) -> Self {
        let mut s = Self::empty(p);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Bit `i` of `mask` selects element `i`; requires `p <= 64`.
    pub fn from_mask(p: usize, mask: u64) -> Self {
        assert!(p <= 64);
        let mut s = Self::empty(p);
        if p > 0 {
            s.words[0] = mask;
            s.trim();
        }
        s
    }

    fn trim(&mut self) {
        let rem = self.p % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn universe(&self) -> usize {
        self.p
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.p && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.p, "element {i} outside ground set of size {}", self.p);
        let had = self.contains(i);
        self.words[i / 64] |= 1 << (i % 64);
        !had
    }

    pub fn remove(&mut self, i: usize) -> bool {
        let had = self.contains(i);
        if had {
            self.words[i / 64] &= !(1 << (i % 64));
        }
        had
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn check_universe(&self, other: &Self) {
        assert_eq!(self.p, other.p, "sets over different ground sets");
    }

    pub fn union(&self, other: &Self) -> Self {
        self.check_universe(other);
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
            p: self.p,
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.check_universe(other);
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
            p: self.p,
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.check_universe(other);
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
            p: self.p,
        }
    }

    pub fn complement(&self) -> Self {
        let mut s = Self {
            words: self.words.iter().map(|w| !w).collect(),
            p: self.p,
        };
        s.trim();
        s
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.check_universe(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.check_universe(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + tz)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Serialize, Deserialize)]
struct SetRepr {
    p: usize,
    members: Vec<usize>,
}

impl Serialize for ElementSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SetRepr {
            p: self.p,
            members: self.to_vec(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ElementSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = SetRepr::deserialize(deserializer)?;
        if let Some(&bad) = repr.members.iter().find(|&&i| i >= repr.p) {
            return Err(serde::de::Error::custom(format!(
                "element {bad} outside ground set of size {}",
                repr.p
            )));
        }
        Ok(ElementSet::from_indices(repr.p, repr.members))
    }
}
