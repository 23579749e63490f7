//! Difference sets `kM − kM` of iterated sumsets, which carry the frequency
//! support of `|f|^{2k}` when `f` has frequency set `M`.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencySet {
    elements: BTreeSet<u64>,
}

impl FrequencySet {
    pub fn new<I: IntoIterator<Item = u64>>(elements: I) -> Result<Self> {
        let elements: BTreeSet<u64> = elements.into_iter().collect();
        if elements.is_empty() {
            return Err(Error::InvalidArgument("frequency set is empty".into()));
        }
        if elements.contains(&0) {
            return Err(Error::InvalidArgument("frequencies must be >= 1".into()));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &BTreeSet<u64> {
        &self.elements
    }

    pub fn min(&self) -> u64 {
        *self.elements.first().expect("nonempty")
    }

    pub fn max(&self) -> u64 {
        *self.elements.last().expect("nonempty")
    }

    pub fn gcd(&self) -> u64 {
        self.elements.iter().fold(0, |g, &m| g.gcd(&m))
    }
}

/// Fixed-width bitset over `[offset, offset + len)`.
#[derive(Debug, Clone)]
struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[cfg(test)]
    fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// `self |= other << shift`, dropping bits past `len`.
    fn or_shifted(&mut self, other: &Bits, shift: usize) {
        let (word_shift, bit_shift) = (shift / 64, shift % 64);
        for i in (word_shift..self.words.len()).rev() {
            let src = i - word_shift;
            let mut v = other.words.get(src).copied().unwrap_or(0) << bit_shift;
            if bit_shift > 0 && src > 0 {
                v |= other.words.get(src - 1).copied().unwrap_or(0) >> (64 - bit_shift);
            }
            self.words[i] |= v;
        }
        self.trim();
    }

    fn trim(&mut self) {
        let extra = self.words.len() * 64 - self.len;
        if extra > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= u64::MAX >> extra;
            }
        }
    }

    /// Whether some `i` has both `i` and `i + d` set.
    fn has_gap(&self, d: usize) -> bool {
        let (word_shift, bit_shift) = (d / 64, d % 64);
        (0..self.words.len()).any(|i| {
            let j = i + word_shift;
            if j >= self.words.len() {
                return false;
            }
            let mut shifted = self.words[j] >> bit_shift;
            if bit_shift > 0 {
                if let Some(&next) = self.words.get(j + 1) {
                    shifted |= next << (64 - bit_shift);
                }
            }
            self.words[i] & shifted != 0
        })
    }
}

/// `kM` stored relative to its smallest element `k · min(M)`.
struct IteratedSumset<'a> {
    set: &'a FrequencySet,
    k: usize,
    bits: Bits,
}

impl<'a> IteratedSumset<'a> {
    fn new(set: &'a FrequencySet) -> Self {
        let m0 = set.min();
        let span = (set.max() - m0) as usize;
        let mut bits = Bits::new(span + 1);
        for &m in set.elements() {
            bits.set((m - m0) as usize);
        }
        Self { set, k: 1, bits }
    }

    fn step(&mut self) {
        let m0 = self.set.min();
        let span = (self.set.max() - m0) as usize;
        let len = (self.k + 1) * span + 1;
        let mut base = Bits::new(len);
        base.words[..self.bits.words.len()].copy_from_slice(&self.bits.words);
        let mut next = Bits::new(len);
        for &m in self.set.elements() {
            next.or_shifted(&base, (m - m0) as usize);
        }
        self.bits = next;
        self.k += 1;
    }

    fn differences(&self, range_limit: u64) -> BTreeSet<u64> {
        let reach = (range_limit as usize).min(self.bits.len.saturating_sub(1));
        (0..=reach)
            .filter(|&d| self.bits.has_gap(d))
            .map(|d| d as u64)
            .collect()
    }

    #[cfg(test)]
    fn elements(&self) -> BTreeSet<u64> {
        let base = self.k as u64 * self.set.min();
        (0..self.bits.len)
            .filter(|&i| self.bits.get(i))
            .map(|i| base + i as u64)
            .collect()
    }
}

/// `{|s − t| : s, t ∈ kM} ∩ [0, range_limit]`, with `kM` the set of sums of
/// exactly `k` elements of `M` (repetition allowed).
pub fn sumset_support(set: &FrequencySet, k: usize, range_limit: u64) -> Result<BTreeSet<u64>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if range_limit < set.max() {
        return Err(Error::InvalidArgument(format!(
            "range limit {range_limit} is below max(M) = {}",
            set.max()
        )));
    }
    let mut sums = IteratedSumset::new(set);
    while sums.k < k {
        sums.step();
    }
    Ok(sums.differences(range_limit))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcdLimit {
    pub gcd: u64,
    /// Smallest `k ≤ k_max` whose difference set equals `gcd · ℤ` on
    /// `[0, range_limit]` and still does at `k + 1`.
    pub stabilization_k: Option<usize>,
}

pub fn sumset_gcd_limit(set: &FrequencySet, k_max: usize, range_limit: u64) -> GcdLimit {
    let gcd = set.gcd();
    let target: BTreeSet<u64> = (0..=range_limit).step_by(gcd as usize).collect();
    let mut sums = IteratedSumset::new(set);
    let mut matched_at: Option<usize> = None;
    loop {
        let matches = sums.differences(range_limit) == target;
        match (matched_at, matches) {
            (Some(k), true) => {
                return GcdLimit {
                    gcd,
                    stabilization_k: Some(k),
                };
            }
            (_, true) => matched_at = Some(sums.k),
            (_, false) => matched_at = None,
        }
        if matched_at.is_none() && sums.k >= k_max {
            return GcdLimit {
                gcd,
                stabilization_k: None,
            };
        }
        sums.step();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[u64]) -> FrequencySet {
        FrequencySet::new(v.iter().copied()).unwrap()
    }

    /// All sums of `k` elements drawn with repetition, by direct enumeration.
    pub(crate) fn enumerate_sums(m: &[u64], k: usize) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        let mut idx = vec![0usize; k];
        loop {
            out.insert(idx.iter().map(|&i| m[i]).sum());
            let mut pos = 0;
            loop {
                if pos == k {
                    return out;
                }
                idx[pos] += 1;
                if idx[pos] < m.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    pub(crate) fn enumerate_support(m: &[u64], k: usize, range: u64) -> BTreeSet<u64> {
        let sums: Vec<u64> = enumerate_sums(m, k).into_iter().collect();
        let mut out = BTreeSet::new();
        for &s in &sums {
            for &t in &sums {
                let d = s.abs_diff(t);
                if d <= range {
                    out.insert(d);
                }
            }
        }
        out
    }

    #[test]
    fn two_three_small_k() {
        let m = set(&[2, 3]);
        assert_eq!(sumset_support(&m, 1, 20).unwrap(), BTreeSet::from([0, 1]));
        // 2M = {4, 5, 6}
        assert_eq!(sumset_support(&m, 2, 20).unwrap(), BTreeSet::from([0, 1, 2]));
        assert_eq!(sumset_support(&m, 20, 20).unwrap(), (0..=20).collect());
    }

    #[test]
    fn iterated_sums_match_enumeration() {
        let m = set(&[3, 7, 8]);
        let mut sums = IteratedSumset::new(&m);
        for k in 1..=6 {
            assert_eq!(sums.elements(), enumerate_sums(&[3, 7, 8], k), "k = {k}");
            sums.step();
        }
    }

    #[test]
    fn triad_frequencies() {
        let m = set(&[6, 9, 33]);
        for k in 1..=8 {
            assert!(sumset_support(&m, k, 60).unwrap().iter().all(|d| d % 3 == 0));
        }
        let limit = sumset_gcd_limit(&m, 50, 60);
        assert_eq!(limit.gcd, 3);
        let k = limit.stabilization_k.unwrap();
        assert_eq!(sumset_support(&m, k, 60).unwrap(), (0..=60).step_by(3).collect());
        assert_ne!(sumset_support(&m, k - 1, 60).unwrap(), (0..=60).step_by(3).collect());
    }

    #[test]
    fn singleton() {
        let m = set(&[4]);
        for k in [1, 2, 10] {
            assert_eq!(sumset_support(&m, k, 40).unwrap(), BTreeSet::from([0]));
        }
        assert_eq!(sumset_gcd_limit(&m, 10, 40), GcdLimit { gcd: 4, stabilization_k: None });
        // only a range below 4 has {0} = 4ℤ ∩ [0, range]
        assert_eq!(sumset_gcd_limit(&m, 10, 3).stabilization_k, Some(1));
    }

    #[test]
    fn two_three_limit() {
        let limit = sumset_gcd_limit(&set(&[2, 3]), 50, 20);
        assert_eq!(limit, GcdLimit { gcd: 1, stabilization_k: Some(20) });
    }

    #[test]
    fn difference_lattice_can_be_coarser_than_gcd() {
        // |e^{3it} + e^{5it}| = |1 + e^{2it}|: every difference is even
        let m = set(&[3, 5]);
        for k in 1..=10 {
            assert!(sumset_support(&m, k, 30).unwrap().iter().all(|d| d % 2 == 0));
        }
        assert_eq!(sumset_gcd_limit(&m, 30, 30).stabilization_k, None);
    }

    #[test]
    fn argument_checks() {
        assert!(FrequencySet::new([]).is_err());
        assert!(FrequencySet::new([0, 2]).is_err());
        assert!(sumset_support(&set(&[2, 3]), 0, 10).is_err());
        assert!(sumset_support(&set(&[2, 30]), 1, 10).is_err());
    }

    proptest! {
        #[test]
        fn matches_enumeration(m in proptest::collection::btree_set(1u64..40, 1..=4), k in 1usize..=6, extra in 0u64..60) {
            let elems: Vec<u64> = m.iter().copied().collect();
            let fs = FrequencySet::new(elems.clone()).unwrap();
            let range = fs.max() + extra;
            prop_assert_eq!(sumset_support(&fs, k, range).unwrap(), enumerate_support(&elems, k, range));
        }

        #[test]
        fn support_lies_in_gcd_lattice(m in proptest::collection::btree_set(1u64..30, 1..=5), g in 1u64..6, k in 1usize..12) {
            let fs = FrequencySet::new(m.iter().map(|v| v * g)).unwrap();
            let gcd = fs.gcd();
            prop_assert_eq!(gcd % g, 0);
            for d in sumset_support(&fs, k, 10 * fs.max()).unwrap() {
                prop_assert_eq!(d % gcd, 0);
            }
        }
    }
}
