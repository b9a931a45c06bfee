//! Sign vectors over `{-1, +1}^n` and index utilities.
//!
//! Entries are packed one per bit: a set bit is `-1`, a clear bit is `+1`.
//! The packed word view therefore coincides with the bit-string convention
//! `bit = (1 - sign) / 2` used by the hashing and Goldreich–Levin code.
//! Indices are zero-based throughout.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ensure_len, Error, Result};

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

fn tail_mask(n: usize) -> u64 {
    match n % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

fn popcount(words: impl Iterator<Item = u64>) -> i64 {
    words.map(|w| w.count_ones() as i64).sum()
}

/// A vector in `{-1, +1}^n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignVector {
    n: usize,
    words: Vec<u64>,
}

impl SignVector {
    /// The all-`+1` vector.
    pub fn ones(n: usize) -> Self {
        Self {
            n,
            words: vec![0; words_for(n)],
        }
    }

    /// The all-`-1` vector.
    pub fn minus_ones(n: usize) -> Self {
        Self::ones(n).negated()
    }

    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        let mut v = Self::ones(signs.len());
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => v.words[i / WORD] |= 1 << (i % WORD),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "entry {i} is {other}, expected -1 or +1"
                    )))
                }
            }
        }
        Ok(v)
    }

    /// Builds a vector from packed bits (`1` means `-1`). Bits past `n` are
    /// discarded.
    pub fn from_bits(n: usize, words: &[u64]) -> Result<Self> {
        ensure_len(words.len(), words_for(n))?;
        let mut words = words.to_vec();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(n);
        }
        Ok(Self { n, words })
    }

    /// Vector whose `i`-th bit is bit `i` of `index` (for enumerating
    /// `{-1, +1}^n` with `n <= 64`).
    pub fn from_index(n: usize, index: u64) -> Self {
        assert!(n <= WORD, "from_index supports n <= 64");
        let mut v = Self::ones(n);
        if n > 0 {
            v.words[0] = index & tail_mask(n);
        }
        v
    }

    pub fn uniform<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut words: Vec<u64> = (0..words_for(n)).map(|_| rng.next_u64()).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(n);
        }
        Self { n, words }
    }

    /// Uniform vector with entry `j` forced to `sign`.
    pub fn uniform_with<R: RngCore + ?Sized>(n: usize, j: usize, sign: i8, rng: &mut R) -> Self {
        let mut v = Self::uniform(n, rng);
        v.set(j, sign);
        v
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Packed bits, `1` meaning `-1`.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Entry `i` as `-1` or `+1`. Panics when `i >= n`.
    pub fn get(&self, i: usize) -> i8 {
        assert!(i < self.n, "index {i} out of range for length {}", self.n);
        1 - 2 * self.bit(i) as i8
    }

    pub fn try_get(&self, i: usize) -> Result<i8> {
        self.check(i)?;
        Ok(self.get(i))
    }

    /// Entry `i` in the bit view.
    pub fn bit(&self, i: usize) -> u8 {
        ((self.words[i / WORD] >> (i % WORD)) & 1) as u8
    }

    pub fn set(&mut self, i: usize, sign: i8) {
        assert!(i < self.n, "index {i} out of range for length {}", self.n);
        let mask = 1u64 << (i % WORD);
        if sign < 0 {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.n).map(|i| self.get(i)).collect()
    }

    fn check(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.n,
            })
        }
    }

    /// Copy with entry `i` negated.
    pub fn flip(&self, i: usize) -> Result<Self> {
        self.check(i)?;
        let mut v = self.clone();
        v.words[i / WORD] ^= 1 << (i % WORD);
        Ok(v)
    }

    pub fn negated(&self) -> Self {
        let mut v = self.clone();
        for w in &mut v.words {
            *w = !*w;
        }
        if let Some(last) = v.words.last_mut() {
            *last &= tail_mask(v.n);
        }
        v
    }

    /// Entrywise product `x · y`.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        ensure_len(self.n, other.n)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(Self { n: self.n, words })
    }

    /// Number of positions where the vectors differ.
    pub fn hamming(&self, other: &Self) -> Result<usize> {
        ensure_len(self.n, other.n)?;
        Ok(popcount(self.words.iter().zip(&other.words).map(|(a, b)| a ^ b)) as usize)
    }

    /// Number of `-1` entries.
    pub fn count_minus(&self) -> usize {
        popcount(self.words.iter().copied()) as usize
    }

    pub(crate) fn ip_unchecked(&self, other: &Self) -> i64 {
        let diff = popcount(self.words.iter().zip(&other.words).map(|(a, b)| a ^ b));
        self.n as i64 - 2 * diff
    }

    /// `⟨x · y, r⟩` without materialising the product.
    pub(crate) fn product_ip_unchecked(x: &Self, y: &Self, r: &Self) -> i64 {
        let diff = popcount(
            x.words
                .iter()
                .zip(&y.words)
                .zip(&r.words)
                .map(|((a, b), c)| a ^ b ^ c),
        );
        x.n as i64 - 2 * diff
    }

    /// GF(2) inner product of the bit views.
    pub fn parity_with(&self, other: &Self) -> Result<u8> {
        ensure_len(self.n, other.n)?;
        let ones = popcount(self.words.iter().zip(&other.words).map(|(a, b)| a & b));
        Ok((ones & 1) as u8)
    }

    /// Bitwise xor of the bit views (equal to the entrywise product).
    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.hadamard(other)
    }

    /// Positions holding `+1`.
    pub fn plus_set(&self) -> IndexSet {
        IndexSet {
            n: self.n,
            indices: (0..self.n).filter(|&i| self.bit(i) == 0).collect(),
        }
    }

    /// Positions holding `-1`.
    pub fn minus_set(&self) -> IndexSet {
        IndexSet {
            n: self.n,
            indices: (0..self.n).filter(|&i| self.bit(i) == 1).collect(),
        }
    }

    /// The entries of `self` on the `+1` positions of `r`.
    pub fn restrict_plus(&self, r: &Self) -> Result<Restricted> {
        ensure_len(self.n, r.n)?;
        Ok(Restricted::new(self, r.negated()))
    }

    /// The entries of `self` on the `-1` positions of `r`.
    pub fn restrict_minus(&self, r: &Self) -> Result<Restricted> {
        ensure_len(self.n, r.n)?;
        Ok(Restricted::new(self, r.clone()))
    }

    /// Forgets entry `i`.
    pub fn puncture(&self, i: usize) -> Result<Punctured> {
        self.check(i)?;
        let mut base = self.clone();
        base.set(i, 1);
        Ok(Punctured { base, hole: i })
    }
}

/// `⟨x, y⟩ = Σ x_i y_i`.
pub fn inner_product(x: &SignVector, y: &SignVector) -> Result<i64> {
    ensure_len(x.n, y.n)?;
    Ok(x.ip_unchecked(y))
}

/// `(⟨x_{r+}, y_{r+}⟩, ⟨x_{r-}, y_{r-}⟩)` where `r+` are the `+1` positions
/// of `r`.
pub fn masked_inner_products(x: &SignVector, y: &SignVector, r: &SignVector) -> Result<(i64, i64)> {
    ensure_len(x.n, y.n)?;
    ensure_len(x.n, r.n)?;
    Ok(masked_unchecked(x, y, r))
}

pub(crate) fn masked_unchecked(x: &SignVector, y: &SignVector, r: &SignVector) -> (i64, i64) {
    let mut plus_len = 0i64;
    let mut plus_diff = 0i64;
    let mut minus_diff = 0i64;
    for (k, ((a, b), m)) in x.words.iter().zip(&y.words).zip(&r.words).enumerate() {
        let valid = if k + 1 == x.words.len() {
            tail_mask(x.n)
        } else {
            u64::MAX
        };
        let d = a ^ b;
        plus_len += (!m & valid).count_ones() as i64;
        plus_diff += (d & !m & valid).count_ones() as i64;
        minus_diff += (d & m).count_ones() as i64;
    }
    let minus_len = x.n as i64 - plus_len;
    (plus_len - 2 * plus_diff, minus_len - 2 * minus_diff)
}

impl fmt::Display for SignVector {
    /// Renders as a string over `{+, -}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.n)
            .map(|i| if self.bit(i) == 0 { '+' } else { '-' })
            .collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignVector({self})")
    }
}

impl FromStr for SignVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let signs: Vec<i8> = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::InvalidParameter(format!(
                    "unexpected character {other:?}"
                ))),
            })
            .collect::<Result<_>>()?;
        Self::from_signs(&signs)
    }
}

impl Serialize for SignVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A sign vector with one entry removed, `z_{-i}`.
///
/// The hidden entry is not retrievable; callers that need `⟨z_{-i}, r_{-i}⟩`
/// get it from [`Punctured::ip_excluding`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Punctured {
    base: SignVector,
    hole: usize,
}

impl Punctured {
    /// Inserts a hole at position `hole` into the `(n-1)`-vector `rest`.
    pub fn from_rest(hole: usize, rest: &SignVector) -> Result<Self> {
        if hole > rest.len() {
            return Err(Error::IndexOutOfRange {
                index: hole,
                len: rest.len() + 1,
            });
        }
        let mut base = SignVector::ones(rest.len() + 1);
        for k in 0..rest.len() {
            let pos = if k < hole { k } else { k + 1 };
            base.set(pos, rest.get(k));
        }
        Ok(Self { base, hole })
    }

    pub fn hole(&self) -> usize {
        self.hole
    }

    /// Length of the full vector, hole included.
    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// `⟨z_{-i}, r_{-i}⟩`.
    pub fn ip_excluding(&self, r: &SignVector) -> i64 {
        debug_assert_eq!(r.len(), self.base.len());
        // The hole is stored as +1 and therefore contributes exactly r_i.
        self.base.ip_unchecked(r) - r.get(self.hole) as i64
    }

    /// Restores the full vector with `sign` at the hole.
    pub fn fill(&self, sign: i8) -> SignVector {
        let mut v = self.base.clone();
        v.set(self.hole, sign);
        v
    }
}

/// A vector restricted to a subset of positions, such as `x_{r+}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Restricted {
    values: SignVector,
    support: SignVector,
}

impl Restricted {
    /// `support` marks kept positions with `-1` bits.
    fn new(v: &SignVector, support: SignVector) -> Self {
        let words = v
            .words
            .iter()
            .zip(&support.words)
            .map(|(a, m)| a & m)
            .collect();
        Self {
            values: SignVector { n: v.n, words },
            support,
        }
    }

    pub fn len(&self) -> usize {
        self.values.n
    }

    pub fn is_empty(&self) -> bool {
        self.support.count_minus() == 0
    }

    /// Entry `i` if it lies in the support.
    pub fn get(&self, i: usize) -> Option<i8> {
        (self.support.bit(i) == 1).then(|| self.values.get(i))
    }

    pub fn support(&self) -> IndexSet {
        self.support.minus_set()
    }

    /// `⟨self, other⟩` over the positions kept by both restrictions.
    pub fn ip_on_common(&self, other: &Self) -> Result<i64> {
        ensure_len(self.len(), other.len())?;
        let mut common = 0i64;
        let mut diff = 0i64;
        for k in 0..self.values.words.len() {
            let m = self.support.words[k] & other.support.words[k];
            common += m.count_ones() as i64;
            diff += ((self.values.words[k] ^ other.values.words[k]) & m).count_ones() as i64;
        }
        Ok(common - 2 * diff)
    }

    /// `⟨self, v⟩` over the support.
    pub fn ip_with(&self, v: &SignVector) -> Result<i64> {
        ensure_len(self.len(), v.len())?;
        let mut len = 0i64;
        let mut diff = 0i64;
        for k in 0..v.words.len() {
            let m = self.support.words[k];
            len += m.count_ones() as i64;
            diff += ((self.values.words[k] ^ v.words[k]) & m).count_ones() as i64;
        }
        Ok(len - 2 * diff)
    }

    /// Overwrites the support positions of `target` with the kept entries.
    pub fn write_into(&self, target: &mut SignVector) {
        for ((t, v), m) in target
            .words
            .iter_mut()
            .zip(&self.values.words)
            .zip(&self.support.words)
        {
            *t = (*t & !m) | (v & m);
        }
    }
}

/// A strictly increasing set of zero-based positions below `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    n: usize,
    indices: Vec<usize>,
}

impl IndexSet {
    pub fn new(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("duplicate index".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    len: n,
                });
            }
        }
        Ok(Self { n, indices })
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            indices: (0..n).collect(),
        }
    }

    /// Positions `start..end`.
    pub fn range(n: usize, start: usize, end: usize) -> Result<Self> {
        Self::new(n, (start..end).collect())
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }
}
