//! Inner-product estimators `r ↦ a ≈ ⟨z, r⟩` and their certification.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::noise::Laplace;
use crate::rng::{self, hash_words, tally};
use crate::sign::SignVector;

/// A deterministic answer table over `{-1, +1}^n`.
pub trait Estimator: Send + Sync {
    fn n(&self) -> usize;

    fn answer(&self, r: &SignVector) -> i64;
}

impl<E: Estimator + ?Sized> Estimator for Box<E> {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn answer(&self, r: &SignVector) -> i64 {
        (**self).answer(r)
    }
}

/// `f(r) = ⟨z, r⟩`.
#[derive(Clone, Debug)]
pub struct ExactEstimator {
    z: SignVector,
}

impl ExactEstimator {
    pub fn new(z: SignVector) -> Self {
        Self { z }
    }
}

impl Estimator for ExactEstimator {
    fn n(&self) -> usize {
        self.z.len()
    }

    fn answer(&self, r: &SignVector) -> i64 {
        self.z.ip_unchecked(r)
    }
}

/// `f(r) = 0`.
#[derive(Clone, Copy, Debug)]
pub struct ZeroEstimator {
    n: usize,
}

impl ZeroEstimator {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Estimator for ZeroEstimator {
    fn n(&self) -> usize {
        self.n
    }

    fn answer(&self, _r: &SignVector) -> i64 {
        0
    }
}

/// `f(r) = ⟨z, r⟩ + ⌊Lap(scale)⌉`, with the noise a fixed function of `r`
/// so that repeated queries agree.
#[derive(Clone, Debug)]
pub struct LaplaceEstimator {
    z: SignVector,
    noise: Laplace,
    seed: u64,
}

impl LaplaceEstimator {
    pub fn new(z: SignVector, scale: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            z,
            noise: Laplace::new(scale)?,
            seed,
        })
    }

    pub fn noise(&self) -> Laplace {
        self.noise
    }
}

impl Estimator for LaplaceEstimator {
    fn n(&self) -> usize {
        self.z.len()
    }

    fn answer(&self, r: &SignVector) -> i64 {
        self.z.ip_unchecked(r)
            + self
                .noise
                .rounded_from_bits(hash_words(self.seed, r.words()))
    }
}

/// Answers replayed from a recorded table, with a default for missing rows.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableEstimator {
    pub n: usize,
    pub default: i64,
    pub entries: Vec<TableEntry>,
    #[serde(skip)]
    index: HashMap<SignVector, i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableEntry {
    pub r: SignVector,
    pub a: i64,
}

impl TableEstimator {
    pub fn new(n: usize, default: i64, entries: Vec<TableEntry>) -> Result<Self> {
        let mut t = Self {
            n,
            default,
            entries,
            index: HashMap::new(),
        };
        t.reindex()?;
        Ok(t)
    }

    /// Rebuilds the lookup index after deserialisation.
    pub fn reindex(&mut self) -> Result<()> {
        self.index.clear();
        for e in &self.entries {
            ensure_len(e.r.len(), self.n)?;
            if self.index.insert(e.r.clone(), e.a).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate table row {}",
                    e.r
                )));
            }
        }
        Ok(())
    }
}

impl Estimator for TableEstimator {
    fn n(&self) -> usize {
        self.n
    }

    fn answer(&self, r: &SignVector) -> i64 {
        self.index.get(r).copied().unwrap_or(self.default)
    }
}

/// Query access to an estimator: answers are clipped to `[-n, n]` and every
/// call is counted.
#[derive(Debug)]
pub struct EstimatorHandle<E> {
    inner: E,
    queries: AtomicU64,
}

impl<E: Estimator> EstimatorHandle<E> {
    pub fn new(inner: E) -> Self {
        Self {
            inner,
            queries: AtomicU64::new(0),
        }
    }

    pub fn n(&self) -> usize {
        self.inner.n()
    }

    pub fn query(&self, r: &SignVector) -> i64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let n = self.inner.n() as i64;
        self.inner.answer(r).clamp(-n, n)
    }

    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }
}

/// Empirical estimator quality: `λ̂ = (√n/ℓ) · Pr[|f(R) - ⟨z, R⟩| < ℓ]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorProfile {
    pub lambda_hat: f64,
    pub ell: u64,
    pub trials: u64,
    pub hits: u64,
}

impl EstimatorProfile {
    pub fn from_hits(n: usize, ell: u64, hits: u64, trials: u64) -> Self {
        let rate = hits as f64 / trials as f64;
        Self {
            lambda_hat: (n as f64).sqrt() / ell as f64 * rate,
            ell,
            trials,
            hits,
        }
    }
}

pub fn certify_estimator<E, R>(
    f: &EstimatorHandle<E>,
    z: &SignVector,
    ell: u64,
    trials: u64,
    rng: &mut R,
) -> Result<EstimatorProfile>
where
    E: Estimator,
    R: RngCore + ?Sized,
{
    ensure_len(f.n(), z.len())?;
    if trials == 0 || ell == 0 {
        return Err(Error::InvalidParameter(
            "trials and ell must be positive".into(),
        ));
    }
    let n = z.len();
    let base = rng::fork(rng);
    let [hits] = tally(base, 0, trials, |r, _| {
        let q = SignVector::uniform(n, r);
        [((f.query(&q) - z.ip_unchecked(&q)).unsigned_abs() < ell) as u64]
    });
    Ok(EstimatorProfile::from_hits(n, ell, hits, trials))
}
