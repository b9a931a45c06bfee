//! The staged offset distribution used by the predictor.
//!
//! A draw picks a window `(s, t)` with weight `(t-s)(t+s+2)`, then a radius
//! `m ∈ [s, t-1]` with weight `2m+3`, then `k` uniform on `[-(m+1), m+1]`.
//! The radius weights make the last stage collapse: given `(s, t)`, each
//! radius contributes `1/((t-s)(t+s+2))` to every `k` it covers.

use num_rational::Ratio;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::isqrt;

/// Normaliser of the radius stage: `Σ_{m=s}^{t-1} (2m+3) = (t-s)(t+s+2)`.
pub fn window_weight(s: u64, t: u64) -> u64 {
    (t - s) * (t + s + 2)
}

/// Window sets `S = [0, ℓ-1]` and `T = [ℓ+2, ⌊√n⌋]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetParams {
    pub n: usize,
    pub ell: u64,
    pub t_max: u64,
}

impl OffsetParams {
    pub fn new(n: usize, ell: u64) -> Result<Self> {
        let t_max = isqrt(n as u64);
        if ell == 0 || ell + 2 > t_max {
            return Err(Error::Precondition(format!(
                "offset windows need 1 <= ell <= floor(sqrt(n)) - 2; got n = {n}, ell = {ell}"
            )));
        }
        Ok(Self { n, ell, t_max })
    }

    /// Largest admissible `ℓ` for this `n`, if any.
    pub fn max_ell(n: usize) -> Option<u64> {
        isqrt(n as u64).checked_sub(2).filter(|&l| l >= 1)
    }

    pub fn s_values(&self) -> Vec<u64> {
        (0..self.ell).collect()
    }

    pub fn t_values(&self) -> Vec<u64> {
        (self.ell + 2..=self.t_max).collect()
    }

    /// Largest `|k|` in the support.
    pub fn k_max(&self) -> i64 {
        self.t_max as i64
    }
}

/// Draws a radius from `M_{s,t}`, `Pr[m] = (2m+3)/((t-s)(t+s+2))`.
pub fn sample_m<R: RngCore + ?Sized>(s: u64, t: u64, rng: &mut R) -> Result<u64> {
    if s >= t {
        return Err(Error::InvalidParameter(format!(
            "radius window needs s < t, got s = {s}, t = {t}"
        )));
    }
    Ok(radius_from_uniform(
        s,
        t,
        rng.random_range(0..window_weight(s, t)),
    ))
}

/// Inverts the radius CDF: the smallest `m` with `cum(m) > u`, where
/// `cum(m) = (m+1)(m+3) - s(s+2)`.
fn radius_from_uniform(s: u64, t: u64, u: u64) -> u64 {
    let base = s * (s + 2);
    let (mut lo, mut hi) = (s, t - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if (mid + 1) * (mid + 3) - base > u {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Draws a window from `P_{S,T}`, `Pr[(s,t)] ∝ (t-s)(t+s+2)`.
pub fn sample_p<R: RngCore + ?Sized>(
    s_set: &[u64],
    t_set: &[u64],
    rng: &mut R,
) -> Result<(u64, u64)> {
    let table = WindowTable::new(s_set, t_set)?;
    Ok(table.draw(rng))
}

#[derive(Clone, Debug)]
struct WindowTable {
    pairs: Vec<(u64, u64)>,
    cumulative: Vec<u64>,
}

impl WindowTable {
    fn new(s_set: &[u64], t_set: &[u64]) -> Result<Self> {
        let (Some(&s_hi), Some(&t_lo)) = (s_set.iter().max(), t_set.iter().min()) else {
            return Err(Error::InvalidParameter(
                "window sets must be non-empty".into(),
            ));
        };
        if s_hi >= t_lo {
            return Err(Error::InvalidParameter(format!(
                "need max(S) < min(T), got {s_hi} >= {t_lo}"
            )));
        }
        let mut pairs = Vec::with_capacity(s_set.len() * t_set.len());
        let mut cumulative = Vec::with_capacity(pairs.capacity());
        let mut acc = 0u64;
        for &s in s_set {
            for &t in t_set {
                acc += window_weight(s, t);
                pairs.push((s, t));
                cumulative.push(acc);
            }
        }
        Ok(Self { pairs, cumulative })
    }

    fn total(&self) -> u64 {
        *self.cumulative.last().expect("non-empty")
    }

    fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> (u64, u64) {
        let u = rng.random_range(0..self.total());
        self.pairs[self.cumulative.partition_point(|&c| c <= u)]
    }
}

/// Staged sampler for `K_{n,ℓ}`.
#[derive(Clone, Debug)]
pub struct OffsetSampler {
    params: OffsetParams,
    windows: WindowTable,
}

impl OffsetSampler {
    pub fn new(params: OffsetParams) -> Self {
        let windows =
            WindowTable::new(&params.s_values(), &params.t_values()).expect("validated params");
        Self { params, windows }
    }

    pub fn for_size(n: usize, ell: u64) -> Result<Self> {
        Ok(Self::new(OffsetParams::new(n, ell)?))
    }

    pub fn params(&self) -> OffsetParams {
        self.params
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        let (s, t) = self.windows.draw(rng);
        let m = radius_from_uniform(s, t, rng.random_range(0..window_weight(s, t))) as i64;
        rng.random_range(-(m + 1)..=m + 1)
    }

    /// Closed-form law of the sampler.
    pub fn distribution(&self) -> OffsetDistribution {
        let k_max = self.params.k_max();
        let mut numerators = vec![0u64; (2 * k_max + 1) as usize];
        for &(s, t) in &self.windows.pairs {
            for m in s..t {
                let r = m as i64 + 1;
                for k in -r..=r {
                    numerators[(k + k_max) as usize] += 1;
                }
            }
        }
        OffsetDistribution {
            k_max,
            numerators,
            denominator: self.windows.total(),
        }
    }
}

/// Draws one `k ← K_{n,ℓ}`.
pub fn sample_k<R: RngCore + ?Sized>(n: usize, ell: u64, rng: &mut R) -> Result<i64> {
    Ok(OffsetSampler::for_size(n, ell)?.sample(rng))
}

/// Exact law of `K_{n,ℓ}`: `Pr[k] = numerators[k + k_max] / denominator`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetDistribution {
    pub k_max: i64,
    pub numerators: Vec<u64>,
    pub denominator: u64,
}

impl OffsetDistribution {
    pub fn weight(&self, k: i64) -> u64 {
        if k.abs() > self.k_max {
            0
        } else {
            self.numerators[(k + self.k_max) as usize]
        }
    }

    pub fn prob(&self, k: i64) -> Ratio<i128> {
        Ratio::new(self.weight(k) as i128, self.denominator as i128)
    }

    pub fn prob_f64(&self, k: i64) -> f64 {
        self.weight(k) as f64 / self.denominator as f64
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        -self.k_max..=self.k_max
    }
}
