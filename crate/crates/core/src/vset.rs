//! Small vertex sets as 64-bit masks.
//!
//! Vertex identifiers are naturals below 64. The ordering on [`VSet`] is the
//! lexicographic order of the sorted element sequences, so `{1,2} < {1,2,3} <
//! {1,3}`; this is the canonical subset order used for every sorted output.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A vertex identifier.
pub type Vertex = u8;

/// Exclusive upper bound on vertex identifiers.
pub const VERTEX_LIMIT: Vertex = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VSet(pub u64);

impl Serialize for VSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for VSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<Vertex>::deserialize(d)?;
        VSet::try_from_iter(v.iter().copied())
            .ok_or_else(|| serde::de::Error::custom(format!("vertex identifiers must be below {VERTEX_LIMIT}")))
    }
}

impl VSet {
    pub const EMPTY: VSet = VSet(0);

    pub fn singleton(v: Vertex) -> Self {
        debug_assert!(v < VERTEX_LIMIT);
        VSet(1u64 << v)
    }

    /// Builds a set, returning `None` if any identifier is out of range.
    pub fn try_from_iter<I: IntoIterator<Item = Vertex>>(it: I) -> Option<Self> {
        let mut s = 0u64;
        for v in it {
            if v >= VERTEX_LIMIT {
                return None;
            }
            s |= 1u64 << v;
        }
        Some(VSet(s))
    }

    /// `{0, 1, .., k-1}` shifted to start at `start`.
    pub fn range(start: Vertex, k: usize) -> Self {
        (start..start + k as Vertex).collect()
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, v: Vertex) -> bool {
        v < VERTEX_LIMIT && self.0 >> v & 1 == 1
    }

    pub fn insert(&mut self, v: Vertex) {
        self.0 |= 1u64 << v;
    }

    pub fn remove(&mut self, v: Vertex) {
        self.0 &= !(1u64 << v);
    }

    pub fn with(self, v: Vertex) -> Self {
        VSet(self.0 | 1u64 << v)
    }

    pub fn without(self, v: Vertex) -> Self {
        VSet(self.0 & !(1u64 << v))
    }

    pub fn union(self, o: VSet) -> Self {
        VSet(self.0 | o.0)
    }

    pub fn intersection(self, o: VSet) -> Self {
        VSet(self.0 & o.0)
    }

    pub fn difference(self, o: VSet) -> Self {
        VSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: VSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_superset(self, o: VSet) -> bool {
        o.is_subset(self)
    }

    pub fn min(self) -> Option<Vertex> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as Vertex)
    }

    pub fn max(self) -> Option<Vertex> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as Vertex)
    }

    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    pub fn to_vec(self) -> Vec<Vertex> {
        self.iter().collect()
    }

    /// All subsets of `self`, in increasing mask order (starting with the empty set).
    pub fn subsets(self) -> Subsets {
        Subsets {
            set: self.0,
            next: Some(0),
        }
    }

    /// All `k`-element subsets of `self`, in canonical order.
    pub fn k_subsets(self, k: usize) -> KSubsets {
        KSubsets::new(self, k)
    }

    /// Position of the bits of `self` inside `within`, packed into the low bits.
    pub fn compress(self, within: VSet) -> u32 {
        let mut out = 0u32;
        for (i, v) in within.iter().enumerate() {
            if self.contains(v) {
                out |= 1 << i;
            }
        }
        out
    }

    /// Inverse of [`VSet::compress`].
    pub fn expand(local: u32, within: VSet) -> VSet {
        let mut out = VSet::EMPTY;
        for (i, v) in within.iter().enumerate() {
            if local >> i & 1 == 1 {
                out.insert(v);
            }
        }
        out
    }
}

impl Ord for VSet {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.0, other.0);
        if a == b {
            return Ordering::Equal;
        }
        let x = (a ^ b).trailing_zeros();
        let above = if x >= 63 { 0 } else { !0u64 << (x + 1) };
        if a >> x & 1 == 1 {
            // a continues with x; b continues with something larger, or stops.
            if b & above != 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        } else if a & above != 0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

impl PartialOrd for VSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<Vertex> for VSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(it: I) -> Self {
        let mut s = VSet::EMPTY;
        for v in it {
            s.insert(v);
        }
        s
    }
}

impl<'a> FromIterator<&'a Vertex> for VSet {
    fn from_iter<I: IntoIterator<Item = &'a Vertex>>(it: I) -> Self {
        it.into_iter().copied().collect()
    }
}

impl IntoIterator for VSet {
    type Item = Vertex;
    type IntoIter = Iter;
    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl fmt::Debug for VSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for VSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = Vertex;

    fn next(&mut self) -> Option<Vertex> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros() as Vertex;
        self.0 &= self.0 - 1;
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

/// Subset iterator (carry-rippler).
pub struct Subsets {
    set: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = VSet;

    fn next(&mut self) -> Option<VSet> {
        let cur = self.next?;
        let nxt = cur.wrapping_sub(self.set) & self.set;
        self.next = (nxt != 0).then_some(nxt);
        Some(VSet(cur))
    }
}

/// `k`-subsets of a set in lexicographic order of their element sequences.
pub struct KSubsets {
    elems: Vec<Vertex>,
    idx: Vec<usize>,
    done: bool,
}

impl KSubsets {
    fn new(set: VSet, k: usize) -> Self {
        let elems = set.to_vec();
        let done = k > elems.len();
        KSubsets {
            elems,
            idx: (0..k).collect(),
            done,
        }
    }
}

impl Iterator for KSubsets {
    type Item = VSet;

    fn next(&mut self) -> Option<VSet> {
        if self.done {
            return None;
        }
        let out: VSet = self.idx.iter().map(|&i| self.elems[i]).collect();
        let k = self.idx.len();
        let n = self.elems.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Binomial coefficient, saturating.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u64) / (i as u64 + 1);
    }
    acc
}
