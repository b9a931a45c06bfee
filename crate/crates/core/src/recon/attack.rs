//! Bitwise reconstruction of a hidden vector from an inner-product
//! estimator.
//!
//! For bit `i` the attacker knows `z_{-i}`. The residual
//! `a - ⟨z_{-i}, r_{-i}⟩` of an answer `a` is compared against a random
//! offset `k`; when it lands at distance one from `k`, the side it lands on,
//! times `r_i`, is a vote for `z_i`. Averaging the votes and taking the sign
//! recovers `z_i` whenever the mean vote is correlated with it.

use num_rational::Ratio;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::recon::estimator::{Estimator, EstimatorHandle};
use crate::recon::offset::OffsetSampler;
use crate::rng::{self, stream};
use crate::sign::{Punctured, SignVector};
use crate::stats::sign_or_minus;

/// Samples per parallel work unit in [`reconstruct_bit`].
const CHUNK: u64 = 1 << 14;

/// Largest `n` accepted by [`brute_force_mu`].
pub const BRUTE_FORCE_MAX_N: usize = 16;

/// Vote of offset `k` on an answer `a`: `(a - ⟨z_{-i}, r_{-i}⟩ - k) · r_i`
/// when the residual is `k ± 1`, and `0` otherwise.
pub fn g_k(k: i64, z_minus_i: &Punctured, r: &SignVector, a: i64) -> i8 {
    let d = a - z_minus_i.ip_excluding(r) - k;
    if d == 1 || d == -1 {
        d as i8 * r.get(z_minus_i.hole())
    } else {
        0
    }
}

/// Draws `k` from the sampler and returns the vote `g_k`.
pub fn predictor_p<R: RngCore + ?Sized>(
    z_minus_i: &Punctured,
    r: &SignVector,
    a: i64,
    sampler: &OffsetSampler,
    rng: &mut R,
) -> i8 {
    g_k(sampler.sample(rng), z_minus_i, r, a)
}

/// Default sample budget per bit, `64 n³`.
pub fn default_samples(n: usize) -> u64 {
    64 * (n as u64).pow(3)
}

/// Totals of a run of predictor votes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTally {
    pub sum: i64,
    pub nonzero: u64,
    pub samples: u64,
}

impl VoteTally {
    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.samples as f64
    }

    /// Standard error of the mean; votes lie in `{-1, 0, 1}`.
    pub fn std_error(&self) -> f64 {
        let n = self.samples as f64;
        let var = self.nonzero as f64 / n - self.mean().powi(2);
        (var.max(0.0) / n).sqrt()
    }

    fn merge(self, other: Self) -> Self {
        Self {
            sum: self.sum + other.sum,
            nonzero: self.nonzero + other.nonzero,
            samples: self.samples + other.samples,
        }
    }
}

/// Tally of `samples` predictor votes on fresh `(r, k)` pairs.
fn vote_tally<E: Estimator>(
    z_minus_i: &Punctured,
    f: &EstimatorHandle<E>,
    sampler: &OffsetSampler,
    samples: u64,
    base: u64,
) -> VoteTally {
    let n = z_minus_i.len();
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(base, c);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut acc = VoteTally {
                samples: len,
                ..VoteTally::default()
            };
            for _ in 0..len {
                let r = SignVector::uniform(n, &mut rng);
                let a = f.query(&r);
                let g = predictor_p(z_minus_i, &r, a, sampler, &mut rng);
                acc.sum += g as i64;
                acc.nonzero += (g != 0) as u64;
            }
            acc
        })
        .reduce(VoteTally::default, VoteTally::merge)
}

/// Monte Carlo estimate of the mean vote for the hidden bit of `z_minus_i`.
pub fn vote_mean<E, R>(
    z_minus_i: &Punctured,
    f: &EstimatorHandle<E>,
    sampler: &OffsetSampler,
    num_samples: u64,
    rng: &mut R,
) -> Result<VoteTally>
where
    E: Estimator,
    R: RngCore + ?Sized,
{
    ensure_len(f.n(), z_minus_i.len())?;
    ensure_len(sampler.params().n, z_minus_i.len())?;
    if num_samples == 0 {
        return Err(Error::InvalidParameter(
            "num_samples must be at least 1".into(),
        ));
    }
    Ok(vote_tally(
        z_minus_i,
        f,
        sampler,
        num_samples,
        rng::fork(rng),
    ))
}

/// Sign of the empirical mean vote for the hidden bit of `z_minus_i`;
/// a zero mean yields `-1`.
pub fn reconstruct_bit<E, R>(
    z_minus_i: &Punctured,
    f: &EstimatorHandle<E>,
    ell: u64,
    num_samples: u64,
    rng: &mut R,
) -> Result<i8>
where
    E: Estimator,
    R: RngCore + ?Sized,
{
    let sampler = OffsetSampler::for_size(z_minus_i.len(), ell)?;
    reconstruct_bit_with(z_minus_i, f, &sampler, num_samples, rng)
}

pub fn reconstruct_bit_with<E, R>(
    z_minus_i: &Punctured,
    f: &EstimatorHandle<E>,
    sampler: &OffsetSampler,
    num_samples: u64,
    rng: &mut R,
) -> Result<i8>
where
    E: Estimator,
    R: RngCore + ?Sized,
{
    Ok(sign_or_minus(
        vote_mean(z_minus_i, f, sampler, num_samples, rng)?.sum,
    ))
}

/// Result of reconstructing every bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub guess: SignVector,
    pub frac_correct: f64,
    pub queries: u64,
}

/// Reconstructs each `z_i` from `z_{-i}` and the estimator.
pub fn reconstruct_all<E, R>(
    z: &SignVector,
    f: &EstimatorHandle<E>,
    ell: u64,
    num_samples_per_bit: u64,
    rng: &mut R,
) -> Result<Reconstruction>
where
    E: Estimator,
    R: RngCore + ?Sized,
{
    ensure_len(f.n(), z.len())?;
    if num_samples_per_bit == 0 {
        return Err(Error::InvalidParameter(
            "num_samples_per_bit must be at least 1".into(),
        ));
    }
    let sampler = OffsetSampler::for_size(z.len(), ell)?;
    let before = f.query_count();
    let base = rng::fork(rng);
    let bits: Vec<i8> = (0..z.len())
        .into_par_iter()
        .map(|i| {
            let p = z.puncture(i).expect("index in range");
            let seed = stream(base, i as u64).next_u64();
            sign_or_minus(vote_tally(&p, f, &sampler, num_samples_per_bit, seed).sum)
        })
        .collect();
    let guess = SignVector::from_signs(&bits)?;
    let wrong = guess.hamming(z)?;
    Ok(Reconstruction {
        frac_correct: 1.0 - wrong as f64 / z.len() as f64,
        queries: f.query_count() - before,
        guess,
    })
}

/// Exact mean vote `E_{k, r}[g_k(i, z_{-i}, r, f(r))]`, by enumerating every
/// `r` and weighting offsets with their closed-form probabilities. Answers
/// are clipped to `[-n, n]` as in [`EstimatorHandle::query`].
pub fn brute_force_mu<E: Estimator + ?Sized>(
    i: usize,
    z: &SignVector,
    f: &E,
    ell: u64,
) -> Result<Ratio<i128>> {
    let n = z.len();
    ensure_len(f.n(), n)?;
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let dist = OffsetSampler::for_size(n, ell)?.distribution();
    let p = z.puncture(i)?;
    let total: i128 = (0..1u64 << n)
        .into_par_iter()
        .map(|idx| {
            let r = SignVector::from_index(n, idx);
            let a = f.answer(&r).clamp(-(n as i64), n as i64);
            let residual = a - p.ip_excluding(&r);
            let ri = r.get(i) as i128;
            // Only k = residual ∓ 1 vote, with values +r_i and -r_i.
            (dist.weight(residual - 1) as i128 - dist.weight(residual + 1) as i128) * ri
        })
        .sum();
    Ok(Ratio::new(total, dist.denominator as i128 * (1i128 << n)))
}

/// Serialised summary of one attack run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackRecord {
    pub n: usize,
    pub ell: u64,
    pub lambda_hat: f64,
    pub frac_correct: f64,
    pub queries: u64,
    pub seed: u64,
}
