//! Exact enumeration of three conditioning bounds for uniform bits.
//!
//! * Conditioning on a bit at a uniform index of `I` moves a uniform `R`
//!   by at most `1/√|I|` in statistical distance.
//! * For `X = |S_n|` with `S_n` a sum of `n` uniform signs and any event
//!   `E`, `Pr[E] · E[X | E] <= 4√n`.
//! * For an event `E` with `Pr[E] >= 1/n`, few indices `i` have a
//!   conditional probability `Pr[E | R_i = b]` outside `(1 ± 2q) Pr[E]`.
//!
//! All quantities are computed with integer arithmetic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` handled by the enumerations here.
pub const MAX_BITS: usize = 24;

fn check_bits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_BITS {
        return Err(Error::TooLarge { n, max: MAX_BITS });
    }
    Ok(())
}

/// `SD(R | R_I = 1, R | R_I = 0)` for `R` uniform on `{0,1}^n` and `I`
/// uniform on the index set `mask`, as the fraction `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexConditioning {
    pub n: usize,
    pub set_size: u32,
    pub num: u128,
    pub den: u128,
}

impl IndexConditioning {
    pub fn distance(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `distance <= 1/√|I|`, decided exactly as `num² |I| <= den²`.
    pub fn within_bound(&self) -> bool {
        self.num * self.num * self.set_size as u128 <= self.den * self.den
    }
}

/// Computes the distance by summing `|Pr[r | R_I = 1] - Pr[r | R_I = 0]|`
/// over all `r`.
pub fn index_conditioning_distance(n: usize, mask: u32) -> Result<IndexConditioning> {
    check_bits(n)?;
    if mask == 0 || (n < 32 && mask >> n != 0) {
        return Err(Error::InvalidParameter(format!(
            "index mask {mask:#b} is not a non-empty subset of [{n}]"
        )));
    }
    let size = mask.count_ones();
    // Pr[R = r, R_I = b] = 2^{-n} · #{i ∈ I : r_i = b} / |I| and Pr[R_I = b] = 1/2,
    // so 2 · SD = Σ_r 2^{1-n} |ones(r) - zeros(r)| / |I|.
    let total: u128 = (0..1u32 << n)
        .map(|r| {
            let ones = (r & mask).count_ones() as i64;
            (2 * ones - size as i64).unsigned_abs() as u128
        })
        .sum();
    Ok(IndexConditioning {
        n,
        set_size: size,
        num: total,
        den: (1u128 << n) * size as u128,
    })
}

/// `Pr[E] · E[|S_n| | E] = E[|S_n| · 1_E]` for `E = {|S_n| > threshold}`,
/// as `num / 2^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedMass {
    pub n: usize,
    pub threshold: i64,
    pub num: u128,
}

impl TruncatedMass {
    pub fn value(&self) -> f64 {
        self.num as f64 / (1u128 << self.n) as f64
    }

    /// `value <= 4√n`, decided exactly as `num² <= 16 n 4^n`.
    pub fn within_bound(&self) -> bool {
        self.num * self.num <= 16 * self.n as u128 * (1u128 << (2 * self.n))
    }
}

pub fn truncated_mass(n: usize, threshold: i64) -> Result<TruncatedMass> {
    check_bits(n)?;
    let mut binom = 1u128;
    let mut num = 0u128;
    for k in 0..=n {
        let s = (n as i64 - 2 * k as i64).abs();
        if s > threshold {
            num += binom * s as u128;
        }
        binom = binom * (n - k) as u128 / (k + 1) as u128;
    }
    Ok(TruncatedMass { n, threshold, num })
}

/// An event over `{0,1}^n` given by membership bits, `r` at bit `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeEvent {
    n: usize,
    members: Vec<u64>,
}

impl CubeEvent {
    pub fn new<F: Fn(u32) -> bool>(n: usize, member: F) -> Result<Self> {
        check_bits(n)?;
        let size = 1usize << n;
        let mut members = vec![0u64; size.div_ceil(64)];
        for r in 0..size {
            if member(r as u32) {
                members[r / 64] |= 1 << (r % 64);
            }
        }
        Ok(Self { n, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, r: u32) -> bool {
        (self.members[r as usize / 64] >> (r % 64)) & 1 == 1
    }

    pub fn count(&self) -> u64 {
        self.members.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// `#{r ∈ E : r_i = 1}` for every `i`.
    fn ones_per_index(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.n];
        for r in 0..1u32 << self.n {
            if self.contains(r) {
                for (i, c) in out.iter_mut().enumerate() {
                    *c += ((r >> i) & 1) as u64;
                }
            }
        }
        out
    }
}

/// How many indices have a bit-conditioned probability of `E` outside
/// `[(1-2q) Pr[E], (1+2q) Pr[E]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalSpread {
    pub n: usize,
    pub q: f64,
    pub event_size: u64,
    pub outliers: usize,
}

impl ConditionalSpread {
    pub fn fraction(&self) -> f64 {
        self.outliers as f64 / self.n as f64
    }

    /// `log₂ n / (n q²)`.
    pub fn bound(&self) -> f64 {
        (self.n as f64).log2() / (self.n as f64 * self.q * self.q)
    }

    pub fn within_bound(&self) -> bool {
        self.fraction() <= self.bound()
    }
}

pub fn conditional_spread(event: &CubeEvent, q: f64) -> Result<ConditionalSpread> {
    if !(q > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "q must be positive, got {q}"
        )));
    }
    let n = event.n();
    let size = event.count();
    if size * (n as u64) < (1u64 << n) {
        return Err(Error::Precondition(format!(
            "event has probability below 1/n ({size} of {})",
            1u64 << n
        )));
    }
    // Pr[E | R_i = b] = c_b / 2^{n-1} and Pr[E] = |E| / 2^n, so the ratio is 2 c_b / |E|.
    let outliers = event
        .ones_per_index()
        .into_iter()
        .filter(|&ones| {
            [ones, size - ones].iter().any(|&c| {
                let ratio = 2.0 * c as f64 / size as f64;
                ratio < 1.0 - 2.0 * q || ratio > 1.0 + 2.0 * q
            })
        })
        .count();
    Ok(ConditionalSpread {
        n,
        q,
        event_size: size,
        outliers,
    })
}
