//! Plug-in min-entropy estimates for `⟨X, Y⟩ mod c` and for `⟨X·Y, R⟩`
//! conditioned on `(R, X_{R+}, Y_{R-})`.
//!
//! The estimate is `-log₂` of the largest empirical frequency. Sampling
//! noise inflates the maximum, so the estimate is biased low and only
//! trustworthy when the trial count is large against the number of buckets.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::rng::{self, stream, StreamRng};
use crate::sign::SignVector;
use crate::source::SvSourceSpec;

/// Trials per work unit in [`condense_mod_experiment`].
const CHUNK: u64 = 1 << 14;

/// Trials per bucket below which an estimate is flagged as unreliable.
const TRIALS_PER_BUCKET_SQUARED: u64 = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinEntropyEstimate {
    pub h_min: f64,
    pub max_freq: f64,
    /// Bucket attaining the maximum (smallest on ties).
    pub argmax: u64,
    pub buckets: u64,
    pub trials: u64,
    /// `trials >= 100 · buckets²`.
    pub reliable: bool,
}

impl MinEntropyEstimate {
    /// Plug-in estimate from bucket counts summing to `trials`.
    pub fn from_counts(counts: &[u64], trials: u64) -> Self {
        let (argmax, &top) = counts
            .iter()
            .enumerate()
            .rev()
            .max_by_key(|&(_, c)| c)
            .expect("at least one bucket");
        let buckets = counts.len() as u64;
        let max_freq = top as f64 / trials as f64;
        Self {
            h_min: (1.0 / max_freq).log2(),
            max_freq,
            argmax: argmax as u64,
            buckets,
            trials,
            reliable: trials >= TRIALS_PER_BUCKET_SQUARED * buckets * buckets,
        }
    }
}

fn check_sources(a: &SvSourceSpec, b: &SvSourceSpec) -> Result<usize> {
    a.validate()?;
    b.validate()?;
    ensure_len(a.n, b.n)?;
    Ok(a.n)
}

fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Min-entropy of `⟨X, Y⟩ mod modulus` for independent `X ← a`, `Y ← b`.
pub fn condense_mod_experiment<R: RngCore + ?Sized>(
    a: &SvSourceSpec,
    b: &SvSourceSpec,
    modulus: u64,
    trials: u64,
    rng: &mut R,
) -> Result<MinEntropyEstimate> {
    let counts = condense_mod_counts(a, b, modulus, trials, rng)?;
    Ok(MinEntropyEstimate::from_counts(&counts, trials))
}

/// Bucket counts of `⟨X, Y⟩ mod modulus` over `trials` draws.
pub fn condense_mod_counts<R: RngCore + ?Sized>(
    a: &SvSourceSpec,
    b: &SvSourceSpec,
    modulus: u64,
    trials: u64,
    rng: &mut R,
) -> Result<Vec<u64>> {
    check_sources(a, b)?;
    if modulus < 2 {
        return Err(Error::InvalidParameter(format!(
            "modulus must be at least 2, got {modulus}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let base = rng::fork(rng);
    let m = modulus as usize;
    Ok((0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut r = stream(base, c);
            let mut counts = vec![0u64; m];
            for _ in 0..CHUNK.min(trials - c * CHUNK) {
                let x = a.sample(&mut r);
                let y = b.sample(&mut r);
                counts[x.ip_unchecked(&y).rem_euclid(modulus as i64) as usize] += 1;
            }
            counts
        })
        .reduce(|| vec![0u64; m], add_counts))
}

/// Min-entropy of `⟨X·Y, r⟩` given `r`, `X_{r+} = x_{r+}` and
/// `Y_{r-} = y_{r-}`: the free entries `X_{r-}` and `Y_{r+}` are redrawn
/// from their marginals `trials` times.
pub fn conditional_min_entropy<R: RngCore + ?Sized>(
    a: &SvSourceSpec,
    b: &SvSourceSpec,
    x: &SignVector,
    y: &SignVector,
    r: &SignVector,
    trials: u64,
    rng: &mut R,
) -> Result<MinEntropyEstimate> {
    let n = check_sources(a, b)?;
    ensure_len(x.len(), n)?;
    ensure_len(y.len(), n)?;
    ensure_len(r.len(), n)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut r2 = stream(rng::fork(rng), 0);
    Ok(conditional_counts(a, b, x, y, r, trials, &mut r2))
}

fn conditional_counts(
    a: &SvSourceSpec,
    b: &SvSourceSpec,
    x: &SignVector,
    y: &SignVector,
    r: &SignVector,
    trials: u64,
    rng: &mut StreamRng,
) -> MinEntropyEstimate {
    let n = x.len();
    let r_plus = r.negated();
    let mut counts = vec![0u64; 2 * n + 1];
    let (mut xs, mut ys) = (x.clone(), y.clone());
    for _ in 0..trials {
        // A -1 bit in the mask marks an entry to redraw.
        a.resample_masked(&mut xs, r, rng);
        b.resample_masked(&mut ys, &r_plus, rng);
        let v = SignVector::product_ip_unchecked(&xs, &ys, r);
        counts[(v + n as i64) as usize] += 1;
    }
    MinEntropyEstimate::from_counts(&counts, trials)
}

/// Distribution of conditional min-entropy estimates over conditionings
/// `(r, x_{r+}, y_{r-})` with `r` uniform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeededCondenseReport {
    pub n: usize,
    pub delta: f64,
    /// Lower `δ`-quantile of the per-conditioning estimates.
    pub quantile: f64,
    pub median: f64,
    pub mean: f64,
    pub min: f64,
    pub trials_outer: u64,
    pub trials_inner: u64,
    /// Whether every inner estimate had enough trials for its buckets.
    pub reliable: bool,
}

/// Lower `q`-quantile by nearest rank of a sorted slice.
fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let k = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

/// Samples `trials_outer` conditionings and estimates the conditional
/// min-entropy of `⟨X·Y, R⟩` at each with `trials_inner` redraws.
pub fn seeded_condense_experiment<R: RngCore + ?Sized>(
    a: &SvSourceSpec,
    b: &SvSourceSpec,
    trials_outer: u64,
    trials_inner: u64,
    delta: f64,
    rng: &mut R,
) -> Result<SeededCondenseReport> {
    check_delta(delta)?;
    let estimates = conditional_estimates(a, b, trials_outer, trials_inner, rng)?;
    SeededCondenseReport::from_estimates(a.n, delta, trials_inner, &estimates)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1], got {delta}"
        )))
    }
}

/// One estimate per conditioning `(r, x_{r+}, y_{r-})`, in draw order.
pub fn conditional_estimates<R: RngCore + ?Sized>(
    a: &SvSourceSpec,
    b: &SvSourceSpec,
    trials_outer: u64,
    trials_inner: u64,
    rng: &mut R,
) -> Result<Vec<MinEntropyEstimate>> {
    let n = check_sources(a, b)?;
    if trials_outer == 0 || trials_inner == 0 {
        return Err(Error::InvalidParameter(
            "trial counts must be at least 1".into(),
        ));
    }
    let base = rng::fork(rng);
    Ok(rng::par_map(base, trials_outer, |r, _| {
        let seed_r = SignVector::uniform(n, r);
        let x = a.sample(r);
        let y = b.sample(r);
        conditional_counts(a, b, &x, &y, &seed_r, trials_inner, r)
    }))
}

impl SeededCondenseReport {
    /// Summarises per-conditioning estimates.
    pub fn from_estimates(
        n: usize,
        delta: f64,
        trials_inner: u64,
        estimates: &[MinEntropyEstimate],
    ) -> Result<Self> {
        check_delta(delta)?;
        if estimates.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one estimate is required".into(),
            ));
        }
        let reliable = estimates.iter().all(|e| e.reliable);
        let mut h: Vec<f64> = estimates.iter().map(|e| e.h_min).collect();
        h.sort_by(f64::total_cmp);
        Ok(Self {
            n,
            delta,
            quantile: nearest_rank(&h, delta),
            median: nearest_rank(&h, 0.5),
            mean: h.iter().sum::<f64>() / h.len() as f64,
            min: h[0],
            trials_outer: h.len() as u64,
            trials_inner,
            reliable,
        })
    }
}
