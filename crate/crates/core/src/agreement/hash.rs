//! Affine Toeplitz hashing `{0,1}^n → {0,1}^m`, `h(x) = T·x ⊕ b`.
//!
//! Sign vectors are read as bit strings with `-1 ↦ 1`, matching the packed
//! representation.

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::sign::SignVector;

/// Largest output length.
pub const MAX_OUTPUT_BITS: usize = 64;

/// `T[a][b] = diag[a - b + n - 1]` plus an offset `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToeplitzHash {
    n: usize,
    m: usize,
    diag: SignVector,
    offset: u64,
    rows: Vec<SignVector>,
}

fn output_mask(m: usize) -> u64 {
    if m == 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

impl ToeplitzHash {
    /// Builds the hash from its `n + m - 1` diagonal bits and `m` offset bits.
    pub fn from_parts(n: usize, m: usize, diag: SignVector, offset: u64) -> Result<Self> {
        if n == 0 || m == 0 || m > MAX_OUTPUT_BITS {
            return Err(Error::InvalidParameter(format!(
                "hash needs n >= 1 and 1 <= m <= {MAX_OUTPUT_BITS}, got n = {n}, m = {m}"
            )));
        }
        if diag.len() != n + m - 1 {
            return Err(Error::DimensionMismatch {
                left: diag.len(),
                right: n + m - 1,
            });
        }
        if offset & !output_mask(m) != 0 {
            return Err(Error::InvalidParameter(format!(
                "offset {offset:#x} has more than {m} bits"
            )));
        }
        let rows = (0..m)
            .map(|a| {
                let mut row = SignVector::ones(n);
                for b in 0..n {
                    if diag.bit(a + n - 1 - b) == 1 {
                        row.set(b, -1);
                    }
                }
                row
            })
            .collect();
        Ok(Self {
            n,
            m,
            diag,
            offset,
            rows,
        })
    }

    /// Draws a uniform member of the family.
    pub fn sample<R: RngCore + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        if m == 0 || m > MAX_OUTPUT_BITS {
            return Err(Error::InvalidParameter(format!(
                "m must lie in [1, {MAX_OUTPUT_BITS}], got {m}"
            )));
        }
        let diag = SignVector::uniform(n + m - 1, rng);
        let offset = rng.random::<u64>() & output_mask(m);
        Self::from_parts(n, m, diag, offset)
    }

    pub fn input_bits(&self) -> usize {
        self.n
    }

    pub fn output_bits(&self) -> usize {
        self.m
    }

    pub fn diag(&self) -> &SignVector {
        &self.diag
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    /// `h(x)`, output bit `a` at bit position `a`.
    pub fn eval(&self, x: &SignVector) -> Result<u64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: self.n,
            });
        }
        Ok(self.linear(x) ^ self.offset)
    }

    fn linear(&self, x: &SignVector) -> u64 {
        self.rows.iter().enumerate().fold(0u64, |acc, (a, row)| {
            acc | (row.parity_with(x).expect("lengths match") as u64) << a
        })
    }
}

/// Draws `h ← H_{n,m}`.
pub fn sample_toeplitz_hash<R: RngCore + ?Sized>(
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<ToeplitzHash> {
    ToeplitzHash::sample(n, m, rng)
}

pub fn eval_hash(h: &ToeplitzHash, x: &SignVector) -> Result<u64> {
    h.eval(x)
}
