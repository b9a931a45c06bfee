//! List decoding of the Hadamard code from a noisy parity oracle.
//!
//! `t` random probes `s_1..s_t` are guessed jointly: for each guess `b` of
//! their parities `⟨x, s_k⟩`, every nonempty subset `J` gives a pairwise
//! independent point `r_J = ⊕_{k∈J} s_k` with known parity `⊕_{k∈J} b_k`,
//! and bit `i` is a majority over `J` of `b·J ⊕ O(r_J ⊕ e_i)`. All `2^t`
//! majorities for bit `i` come out of one Walsh–Hadamard transform. The
//! candidate agreeing most with the oracle on fresh queries wins.

use std::collections::HashSet;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::hash_words;
use crate::rng::unit_from_hash;
use crate::sign::SignVector;

/// A parity oracle `r ↦ O(r) ∈ {0, 1}` on bit strings stored as sign vectors.
pub trait ParityOracle: Sync {
    fn query(&self, r: &SignVector) -> u8;
}

impl<F> ParityOracle for F
where
    F: Fn(&SignVector) -> u8 + Sync,
{
    fn query(&self, r: &SignVector) -> u8 {
        self(r)
    }
}

/// `⟨x, r⟩ mod 2`, flipped on a fixed pseudo-random `noise` fraction of
/// inputs.
#[derive(Clone, Debug)]
pub struct NoisyParity {
    x: SignVector,
    noise: f64,
    seed: u64,
}

impl NoisyParity {
    pub fn new(x: SignVector, noise: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&noise) {
            return Err(Error::InvalidParameter(format!(
                "noise must lie in [0, 1], got {noise}"
            )));
        }
        Ok(Self { x, noise, seed })
    }
}

impl ParityOracle for NoisyParity {
    fn query(&self, r: &SignVector) -> u8 {
        let flip = unit_from_hash(hash_words(self.seed, r.words())) < self.noise;
        self.x.parity_with(r).expect("oracle length") ^ flip as u8
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlParams {
    /// Number of random probes; the decoder enumerates `2^probes` guesses.
    pub probes: u32,
    /// Fresh queries used to pick among candidates.
    pub test_queries: u32,
}

/// Largest probe count accepted.
pub const MAX_PROBES: u32 = 20;

impl GlParams {
    /// Probes for oracles agreeing with the parity on at least `agreement`
    /// of inputs: `2^t - 1 >= n / ((1 - 2η)² (1 - confidence))` where
    /// `η = 1 - agreement` is the per-query error. Chebyshev over the
    /// pairwise independent points then bounds each bit's error by
    /// `(1 - confidence)/n`.
    pub fn for_agreement(n: usize, agreement: f64, confidence: f64) -> Result<Self> {
        if !(agreement > 0.5 && agreement <= 1.0) || !(confidence > 0.0 && confidence < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need agreement in (1/2, 1] and confidence in (0, 1), got {agreement}, {confidence}"
            )));
        }
        let bias = 2.0 * agreement - 1.0;
        let points = n as f64 / (bias * bias * (1.0 - confidence));
        let probes = (points + 1.0).log2().ceil().max(1.0) as u32;
        if probes > MAX_PROBES {
            return Err(Error::Precondition(format!(
                "{probes} probes exceed the limit of {MAX_PROBES}"
            )));
        }
        Ok(Self {
            probes,
            test_queries: 512,
        })
    }
}

/// In-place Walsh–Hadamard transform.
fn walsh_hadamard(v: &mut [i32]) {
    let mut h = 1;
    while h < v.len() {
        for chunk in v.chunks_mut(2 * h) {
            let (a, b) = chunk.split_at_mut(h);
            for (p, q) in a.iter_mut().zip(b.iter_mut()) {
                let (s, d) = (*p + *q, *p - *q);
                *p = s;
                *q = d;
            }
        }
        h *= 2;
    }
}

/// Decodes `x` from `oracle`; returns the best candidate found.
pub fn gl_decode<O, R>(oracle: &O, n: usize, params: GlParams, rng: &mut R) -> Result<SignVector>
where
    O: ParityOracle + ?Sized,
    R: RngCore + ?Sized,
{
    if n == 0 || params.probes == 0 || params.probes > MAX_PROBES || params.test_queries == 0 {
        return Err(Error::InvalidParameter(
            "gl_decode needs n, probes and test queries positive".into(),
        ));
    }
    let t = params.probes as usize;
    let size = 1usize << t;
    let probes: Vec<SignVector> = (0..t).map(|_| SignVector::uniform(n, rng)).collect();
    // r_{J ∪ {k}} = r_J ⊕ s_k for J ⊂ [0, k).
    let mut points = vec![SignVector::ones(n); size];
    for (k, s) in probes.iter().enumerate() {
        for j in 0..1usize << k {
            points[j | 1 << k] = points[j].xor(s).expect("equal lengths");
        }
    }
    // bits[b][i]: candidate bit i under guess b.
    let mut bits = vec![vec![0i8; n]; size];
    let mut f = vec![0i32; size];
    for i in 0..n {
        f[0] = 0;
        for (j, p) in points.iter().enumerate().skip(1) {
            let q = p.flip(i).expect("index in range");
            f[j] = if oracle.query(&q) == 0 { 1 } else { -1 };
        }
        walsh_hadamard(&mut f);
        for (candidate, &score) in bits.iter_mut().zip(&f) {
            candidate[i] = if score > 0 { 1 } else { -1 };
        }
    }
    let tests: Vec<(SignVector, u8)> = (0..params.test_queries)
        .map(|_| {
            let r = SignVector::uniform(n, rng);
            let a = oracle.query(&r);
            (r, a)
        })
        .collect();
    let mut seen = HashSet::new();
    let mut best: Option<(usize, SignVector)> = None;
    for candidate in bits {
        let c = SignVector::from_signs(&candidate)?;
        if !seen.insert(c.clone()) {
            continue;
        }
        let score = tests
            .iter()
            .filter(|(r, a)| c.parity_with(r).expect("equal lengths") == *a)
            .count();
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, c));
        }
    }
    Ok(best.expect("at least one candidate").1)
}
