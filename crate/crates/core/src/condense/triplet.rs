//! Bit reconstruction over channel triplets `(x, y, t)`.
//!
//! The estimator sees `(r, x_{r+}, y_{r-}, t)` and answers an approximation
//! of `⟨x·y, r⟩`. Feeding those answers to the offset predictor recovers
//! bits of `x·y` the same way the plain attack recovers bits of `z`.

use rand::RngCore;
use rayon::prelude::*;

use crate::channel::{leaked_inputs, Channel, ChannelSample, Transcript};
use crate::error::{ensure_len, Error, Result};
use crate::noise::Laplace;
use crate::recon::{g_k, OffsetSampler};
use crate::rng::{self, stream, StreamRng};
use crate::sign::{Punctured, Restricted, SignVector};
use crate::stats::sign_or_minus;

/// A sampler of `(x, y, t)` triplets.
pub trait TripletSource: Send + Sync {
    fn n(&self) -> usize;

    fn draw(&self, rng: &mut dyn RngCore) -> ChannelSample;
}

impl<C: Channel + ?Sized> TripletSource for C {
    fn n(&self) -> usize {
        Channel::n(self)
    }

    fn draw(&self, rng: &mut dyn RngCore) -> ChannelSample {
        self.sample(rng)
    }
}

/// What an estimator is allowed to see for one query.
#[derive(Clone, Copy, Debug)]
pub struct TripletView<'a> {
    pub r: &'a SignVector,
    pub x_plus: &'a Restricted,
    pub y_minus: &'a Restricted,
    pub t: &'a Transcript,
}

/// A possibly randomised estimator `f(r, x_{r+}, y_{r-}, t) ≈ ⟨x·y, r⟩`.
pub trait TripletEstimator: Sync {
    fn estimate(&self, view: &TripletView<'_>, rng: &mut dyn RngCore) -> i64;
}

impl<F: TripletEstimator + ?Sized> TripletEstimator for &F {
    fn estimate(&self, view: &TripletView<'_>, rng: &mut dyn RngCore) -> i64 {
        (**self).estimate(view, rng)
    }
}

impl<F: TripletEstimator + ?Sized> TripletEstimator for Box<F> {
    fn estimate(&self, view: &TripletView<'_>, rng: &mut dyn RngCore) -> i64 {
        (**self).estimate(view, rng)
    }
}

/// Reads the inputs that a [`LeakyChannel`](crate::channel::LeakyChannel)
/// appended to the transcript and answers `⟨x·y, r⟩ + ⌊Lap(scale)⌉`.
/// Without leaked inputs it answers `0`.
#[derive(Clone, Copy, Debug)]
pub struct LeakedProductEstimator {
    noise: Laplace,
}

impl LeakedProductEstimator {
    pub fn exact() -> Self {
        Self {
            noise: Laplace::new(0.0).expect("zero scale"),
        }
    }

    pub fn noisy(scale: f64) -> Result<Self> {
        Ok(Self {
            noise: Laplace::new(scale)?,
        })
    }
}

impl TripletEstimator for LeakedProductEstimator {
    fn estimate(&self, view: &TripletView<'_>, rng: &mut dyn RngCore) -> i64 {
        match leaked_inputs(view.t) {
            Some((x, y)) if x.len() == view.r.len() && y.len() == view.r.len() => {
                SignVector::product_ip_unchecked(x, y, view.r) + self.noise.sample_rounded(rng)
            }
            _ => 0,
        }
    }
}

/// Default sample count for [`rec_triplet`], `n⁴`.
pub fn default_rec_samples(n: usize) -> u64 {
    (n as u64).pow(4)
}

/// One vote `G_{x,y,t}(j, r)`: draws `r`, then `k`, then queries `f`.
///
/// `r` and `k` are drawn before the estimator touches `rng`, so two calls on
/// pairs differing only at `j` see the same `(r, k)` from equal streams.
pub fn triplet_vote<F: TripletEstimator + ?Sized>(
    z_minus_j: &Punctured,
    x: &SignVector,
    y: &SignVector,
    t: &Transcript,
    f: &F,
    sampler: &OffsetSampler,
    rng: &mut StreamRng,
) -> i8 {
    let n = x.len();
    let r = SignVector::uniform(n, rng);
    let k = sampler.sample(rng);
    let x_plus = x.restrict_plus(&r).expect("lengths checked by caller");
    let y_minus = y.restrict_minus(&r).expect("lengths checked by caller");
    let view = TripletView {
        r: &r,
        x_plus: &x_plus,
        y_minus: &y_minus,
        t,
    };
    let a = f.estimate(&view, rng).clamp(-(n as i64), n as i64);
    g_k(k, z_minus_j, &r, a)
}

fn check_pair(j: usize, x: &SignVector, y: &SignVector) -> Result<()> {
    ensure_len(x.len(), y.len())?;
    if j >= x.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: x.len(),
        });
    }
    Ok(())
}

/// Sum of `samples` votes, sample `s` drawing from stream `(base, s)`.
#[allow(clippy::too_many_arguments)]
pub fn rec_score<F: TripletEstimator + ?Sized>(
    j: usize,
    x: &SignVector,
    y: &SignVector,
    t: &Transcript,
    f: &F,
    sampler: &OffsetSampler,
    samples: u64,
    base: u64,
) -> Result<i64> {
    check_pair(j, x, y)?;
    ensure_len(sampler.params().n, x.len())?;
    let z = x.hadamard(y)?.puncture(j)?;
    Ok((0..samples)
        .into_par_iter()
        .map(|s| triplet_vote(&z, x, y, t, f, sampler, &mut stream(base, s)) as i64)
        .sum())
}

/// Sign of the mean vote for `x_j · y_j`; a zero mean yields `-1`.
#[allow(clippy::too_many_arguments)]
pub fn rec_triplet<F, R>(
    j: usize,
    x: &SignVector,
    y: &SignVector,
    t: &Transcript,
    f: &F,
    ell: u64,
    samples: u64,
    rng: &mut R,
) -> Result<i8>
where
    F: TripletEstimator + ?Sized,
    R: RngCore + ?Sized,
{
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let sampler = OffsetSampler::for_size(x.len(), ell)?;
    let base = rng::fork(rng);
    Ok(sign_or_minus(rec_score(
        j, x, y, t, f, &sampler, samples, base,
    )?))
}

/// Scores of the four flip variants `(x, y)`, `(x̂, y)`, `(x, ŷ)`, `(x̂, ŷ)`
/// at `j`, all on the same randomness.
#[allow(clippy::too_many_arguments)]
pub fn rhombus_scores<F: TripletEstimator + ?Sized>(
    j: usize,
    x: &SignVector,
    y: &SignVector,
    t: &Transcript,
    f: &F,
    sampler: &OffsetSampler,
    samples: u64,
    base: u64,
) -> Result<[i64; 4]> {
    check_pair(j, x, y)?;
    let (xf, yf) = (x.flip(j)?, y.flip(j)?);
    Ok([
        rec_score(j, x, y, t, f, sampler, samples, base)?,
        rec_score(j, &xf, y, t, f, sampler, samples, base)?,
        rec_score(j, x, &yf, t, f, sampler, samples, base)?,
        rec_score(j, &xf, &yf, t, f, sampler, samples, base)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ExactIpChannel, LeakyChannel};
    use crate::rng::stream;

    #[test]
    fn exact_leak_recovers_every_product_bit() {
        let source = LeakyChannel::new(ExactIpChannel::new(25));
        let f = LeakedProductEstimator::exact();
        let mut rng = stream(1, 0);
        for _ in 0..3 {
            let s = source.draw(&mut rng);
            for j in 0..25 {
                let got = rec_triplet(j, &s.x, &s.y, &s.t, &f, 1, 4000, &mut rng).unwrap();
                assert_eq!(got, s.x.get(j) * s.y.get(j));
            }
        }
    }

    #[test]
    fn without_leak_the_estimator_answers_zero() {
        let s = ExactIpChannel::new(16).draw(&mut stream(2, 0));
        let r = SignVector::ones(16);
        let xp = s.x.restrict_plus(&r).unwrap();
        let ym = s.y.restrict_minus(&r).unwrap();
        let view = TripletView {
            r: &r,
            x_plus: &xp,
            y_minus: &ym,
            t: &s.t,
        };
        assert_eq!(
            LeakedProductEstimator::exact().estimate(&view, &mut stream(3, 0)),
            0
        );
    }

    #[test]
    fn rec_is_seed_deterministic_and_validates() {
        let s = LeakyChannel::new(ExactIpChannel::new(16)).draw(&mut stream(4, 0));
        let f = LeakedProductEstimator::noisy(3.0).unwrap();
        let a = rec_triplet(3, &s.x, &s.y, &s.t, &f, 1, 500, &mut stream(5, 0)).unwrap();
        let b = rec_triplet(3, &s.x, &s.y, &s.t, &f, 1, 500, &mut stream(5, 0)).unwrap();
        assert_eq!(a, b);
        assert!(rec_triplet(16, &s.x, &s.y, &s.t, &f, 1, 500, &mut stream(5, 0)).is_err());
        assert!(rec_triplet(3, &s.x, &s.y, &s.t, &f, 1, 0, &mut stream(5, 0)).is_err());
    }
}
