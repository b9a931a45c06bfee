//! Hash-then-extract agreement: A sends `(h, h(x), r)`, B reports whether
//! `h(y) = h(x)`, and on a match both output the parity `⟨r, ·⟩ mod 2` of
//! their input. A repetition wrapper retries until a match.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agreement::hash::ToeplitzHash;
use crate::channel::{Channel, Transcript};
use crate::error::{Error, Result};
use crate::rng::{self, stream};
use crate::sign::SignVector;
use crate::stats::Rate;

/// Trials per batch in [`amplifier_stats`].
const BATCH: u64 = 1 << 14;

/// `m = ⌈log₂(1/α)⌉ + 8`.
pub fn default_hash_bits(alpha: f64) -> Result<usize> {
    check_alpha(alpha)?;
    Ok((1.0 / alpha).log2().ceil() as usize + 8)
}

/// `⌈5/α⌉` attempts.
pub fn max_attempts(alpha: f64) -> Result<u64> {
    check_alpha(alpha)?;
    Ok((5.0 / alpha).ceil() as u64)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )))
    }
}

/// The eavesdropper's view `(t, h, h(x), r)` plus B's match report.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplifiedView {
    pub t: Transcript,
    pub h: ToeplitzHash,
    pub hx: u64,
    pub r: SignVector,
    pub equal_flag: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HashRun {
    pub view: AmplifiedView,
    /// `(bit_A, bit_B)`, present iff the hashes matched.
    pub bits: Option<(u8, u8)>,
}

/// One execution with `m`-bit hashes.
pub fn run_pi_h<C, R>(channel: &C, m: usize, rng: &mut R) -> Result<HashRun>
where
    C: Channel + ?Sized,
    R: RngCore,
{
    let n = channel.n();
    let s = channel.sample(rng);
    let h = ToeplitzHash::sample(n, m, rng)?;
    let r = SignVector::uniform(n, rng);
    let hx = h.eval(&s.x)?;
    let equal_flag = h.eval(&s.y)? == hx;
    let bits = if equal_flag {
        Some((s.x.parity_with(&r)?, s.y.parity_with(&r)?))
    } else {
        None
    };
    Ok(HashRun {
        view: AmplifiedView {
            t: s.t,
            h,
            hx,
            r,
            equal_flag,
        },
        bits,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepeatOutcome {
    /// Executions run, at most `⌈5/α⌉`.
    pub attempts: u64,
    /// Bits of the first matching execution, or `(0, 0)` if none matched.
    pub output: (u8, u8),
    pub succeeded: bool,
    pub views: Vec<AmplifiedView>,
}

/// Runs [`run_pi_h`] until the hashes match, at most `⌈5/α⌉` times.
pub fn repeat_until_success<C, R>(
    channel: &C,
    alpha: f64,
    m: usize,
    rng: &mut R,
) -> Result<RepeatOutcome>
where
    C: Channel + ?Sized,
    R: RngCore,
{
    let cap = max_attempts(alpha)?;
    let mut views = Vec::new();
    for attempt in 1..=cap {
        let run = run_pi_h(channel, m, rng)?;
        views.push(run.view);
        if let Some(bits) = run.bits {
            return Ok(RepeatOutcome {
                attempts: attempt,
                output: bits,
                succeeded: true,
                views,
            });
        }
    }
    Ok(RepeatOutcome {
        attempts: cap,
        output: (0, 0),
        succeeded: false,
        views,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifierStats {
    pub m: usize,
    pub trials: u64,
    pub abort: Rate,
    /// `Pr[bit_A = bit_B | no abort]`.
    pub agreement: Rate,
}

/// Runs executions in order until `target_matches` of them match or
/// `max_trials` have run.
pub fn amplifier_stats<C, R>(
    channel: &C,
    m: usize,
    target_matches: u64,
    max_trials: u64,
    rng: &mut R,
) -> Result<AmplifierStats>
where
    C: Channel + ?Sized,
    R: RngCore + ?Sized,
{
    if target_matches == 0 || max_trials == 0 {
        return Err(Error::InvalidParameter(
            "trial counts must be at least 1".into(),
        ));
    }
    let base = rng::fork(rng);
    let (mut trials, mut matches, mut agree) = (0u64, 0u64, 0u64);
    'outer: while trials < max_trials {
        let len = BATCH.min(max_trials - trials);
        let batch: Vec<Option<bool>> = (trials..trials + len)
            .into_par_iter()
            .map(|k| {
                run_pi_h(channel, m, &mut stream(base, k)).map(|run| run.bits.map(|(a, b)| a == b))
            })
            .collect::<Result<_>>()?;
        for outcome in batch {
            trials += 1;
            if let Some(same) = outcome {
                matches += 1;
                agree += same as u64;
                if matches == target_matches {
                    break 'outer;
                }
            }
        }
    }
    Ok(AmplifierStats {
        m,
        trials,
        abort: Rate::new(trials - matches, trials),
        agreement: Rate::new(agree, matches),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatStats {
    pub alpha: f64,
    pub m: usize,
    pub all_fail: Rate,
    /// `Pr[bit_A = bit_B]`, counting exhausted runs as `(0, 0)`.
    pub agreement: Rate,
    pub mean_attempts: f64,
    pub max_attempts: u64,
}

pub fn repeat_stats<C, R>(
    channel: &C,
    alpha: f64,
    m: usize,
    trials: u64,
    rng: &mut R,
) -> Result<RepeatStats>
where
    C: Channel + ?Sized,
    R: RngCore + ?Sized,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    max_attempts(alpha)?;
    let base = rng::fork(rng);
    let runs = rng::par_map(base, trials, |r, _| {
        repeat_until_success(channel, alpha, m, r)
            .map(|o| (o.succeeded, o.output.0 == o.output.1, o.attempts))
    });
    let runs: Vec<(bool, bool, u64)> = runs.into_iter().collect::<Result<_>>()?;
    let fails = runs.iter().filter(|r| !r.0).count() as u64;
    let agree = runs.iter().filter(|r| r.1).count() as u64;
    let total: u64 = runs.iter().map(|r| r.2).sum();
    Ok(RepeatStats {
        alpha,
        m,
        all_fail: Rate::new(fails, trials),
        agreement: Rate::new(agree, trials),
        mean_attempts: total as f64 / trials as f64,
        max_attempts: runs.iter().map(|r| r.2).max().unwrap_or(0),
    })
}

/// An eavesdropper that guesses `x` from `(t, h, v)`.
pub trait HashAdversary: Sync {
    fn guess(&self, t: &Transcript, h: &ToeplitzHash, v: u64) -> SignVector;
}

impl<F> HashAdversary for F
where
    F: Fn(&Transcript, &ToeplitzHash, u64) -> SignVector + Sync,
{
    fn guess(&self, t: &Transcript, h: &ToeplitzHash, v: u64) -> SignVector {
        self(t, h, v)
    }
}

/// Samples `h ← H_{n,m}` and `v ← {0,1}^m` and returns the adversary's guess.
pub fn eve_amplified<A, R>(
    adversary: &A,
    t: &Transcript,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<SignVector>
where
    A: HashAdversary + ?Sized,
    R: RngCore + ?Sized,
{
    let h = ToeplitzHash::sample(n, m, rng)?;
    let mask = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let v = rng.random::<u64>() & mask;
    let guess = adversary.guess(t, &h, v);
    if guess.len() != n {
        return Err(Error::DimensionMismatch {
            left: guess.len(),
            right: n,
        });
    }
    Ok(guess)
}
