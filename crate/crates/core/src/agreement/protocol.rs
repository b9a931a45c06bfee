//! The one-round agreement protocol over an inner-product channel.
//!
//! After the channel call A draws `v ∈ [1, ℓ]` and `r`, B reveals `y_{r-}`
//! and A reveals `x_{r+}`. A computes `u_A = ⟨x_{r-}, y_{r-}⟩` and B
//! computes `u_B = out(t) - ⟨x_{r+}, y_{r+}⟩`; both output `u - v` rounded
//! down to a multiple of `ℓ`.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::channel::{leaked_inputs, Channel, ChannelSample, Transcript};
use crate::condense::{TripletEstimator, TripletView};
use crate::error::{Error, Result};
use crate::rng::{self, tally};
use crate::sign::{masked_inner_products, Restricted, SignVector};
use crate::stats::Rate;

/// Everything an eavesdropper sees: `(x_{r+}, y_{r-}, t, r, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KaTranscript {
    pub x_plus: Restricted,
    pub y_minus: Restricted,
    pub t: Transcript,
    pub r: SignVector,
    pub v: u64,
}

impl KaTranscript {
    pub fn n(&self) -> usize {
        self.r.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyOutputs {
    pub o_a: i64,
    pub o_b: i64,
    pub u_a: i64,
    pub u_b: i64,
}

impl PartyOutputs {
    pub fn agree(&self) -> bool {
        self.o_a == self.o_b
    }
}

/// `⌊(u - v)/ℓ⌋ · ℓ`, rounding toward `-∞`.
pub fn quantize(u: i64, v: u64, ell: u64) -> i64 {
    let ell = ell as i64;
    (u - v as i64).div_euclid(ell) * ell
}

fn check_ell(ell: u64) -> Result<()> {
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be at least 1".into()));
    }
    Ok(())
}

/// Runs the protocol on a channel sample that has already been drawn.
pub fn run_pi_c_on<R: RngCore + ?Sized>(
    sample: &ChannelSample,
    ell: u64,
    rng: &mut R,
) -> Result<(PartyOutputs, KaTranscript)> {
    check_ell(ell)?;
    let ChannelSample { x, y, t } = sample;
    let v = rng.random_range(1..=ell);
    let r = SignVector::uniform(x.len(), rng);
    let (ip_plus, ip_minus) = masked_inner_products(x, y, &r)?;
    let u_a = ip_minus;
    let u_b = t.out() - ip_plus;
    let outputs = PartyOutputs {
        o_a: quantize(u_a, v, ell),
        o_b: quantize(u_b, v, ell),
        u_a,
        u_b,
    };
    let view = KaTranscript {
        x_plus: x.restrict_plus(&r)?,
        y_minus: y.restrict_minus(&r)?,
        t: t.clone(),
        r,
        v,
    };
    Ok((outputs, view))
}

/// One execution: a channel call followed by [`run_pi_c_on`].
pub fn run_pi_c<C, R>(channel: &C, ell: u64, rng: &mut R) -> Result<(PartyOutputs, KaTranscript)>
where
    C: Channel + ?Sized,
    R: RngCore,
{
    let sample = channel.sample(rng);
    run_pi_c_on(&sample, ell, rng)
}

/// Agreement together with the channel's accuracy on the same runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    pub ell: u64,
    pub agree: Rate,
    /// Frequency of `|out(t) - ⟨x, y⟩| < ℓ`.
    pub within_ell: Rate,
    /// Frequency of `|out(t) - ⟨x, y⟩| < ℓ/2`.
    pub within_half: Rate,
    /// Agreement among runs with `|out(t) - ⟨x, y⟩| < ℓ/2`.
    pub agree_given_half: Rate,
    /// Runs that agreed although `|out(t) - ⟨x, y⟩| >= ℓ`; always zero.
    pub implication_violations: u64,
}

pub fn agreement_stats<C, R>(
    channel: &C,
    ell: u64,
    trials: u64,
    rng: &mut R,
) -> Result<AgreementStats>
where
    C: Channel + ?Sized,
    R: RngCore + ?Sized,
{
    check_ell(ell)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let base = rng::fork(rng);
    let [agree, within, half, agree_half, bad] = tally(base, 0, trials, |r, _| {
        let s = channel.sample(r);
        let (o, _) = run_pi_c_on(&s, ell, r).expect("ell checked above");
        let delta = s.error().unsigned_abs();
        let within = delta < ell;
        let half = 2 * delta < ell;
        [
            o.agree() as u64,
            within as u64,
            half as u64,
            (half && o.agree()) as u64,
            (o.agree() && !within) as u64,
        ]
    });
    Ok(AgreementStats {
        ell,
        agree: Rate::new(agree, trials),
        within_ell: Rate::new(within, trials),
        within_half: Rate::new(half, trials),
        agree_given_half: Rate::new(agree_half, half),
        implication_violations: bad,
    })
}

pub fn agreement_rate<C, R>(channel: &C, ell: u64, trials: u64, rng: &mut R) -> Result<Rate>
where
    C: Channel + ?Sized,
    R: RngCore + ?Sized,
{
    Ok(agreement_stats(channel, ell, trials, rng)?.agree)
}

/// An eavesdropper guessing `o_A` from the protocol view.
pub trait Adversary: Sync {
    fn guess(&self, view: &KaTranscript, ell: u64, rng: &mut dyn RngCore) -> i64;

    fn name(&self) -> &'static str;
}

impl<A: Adversary + ?Sized> Adversary for &A {
    fn guess(&self, view: &KaTranscript, ell: u64, rng: &mut dyn RngCore) -> i64 {
        (**self).guess(view, ell, rng)
    }

    fn name(&self) -> &'static str {
        (**self).name()
    }
}

impl<A: Adversary + ?Sized> Adversary for Box<A> {
    fn guess(&self, view: &KaTranscript, ell: u64, rng: &mut dyn RngCore) -> i64 {
        (**self).guess(view, ell, rng)
    }

    fn name(&self) -> &'static str {
        (**self).name()
    }
}

/// Guesses `u_A = 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BlindAdversary;

impl Adversary for BlindAdversary {
    fn guess(&self, view: &KaTranscript, ell: u64, _rng: &mut dyn RngCore) -> i64 {
        quantize(0, view.v, ell)
    }

    fn name(&self) -> &'static str {
        "blind"
    }
}

/// Guesses `u_A ≈ out(t) · |r⁻| / n`, the share of the output carried by
/// the `r⁻` coordinates.
#[derive(Clone, Copy, Debug, Default)]
pub struct ProportionalAdversary;

impl Adversary for ProportionalAdversary {
    fn guess(&self, view: &KaTranscript, ell: u64, _rng: &mut dyn RngCore) -> i64 {
        let n = view.n() as f64;
        let minus = view.r.count_minus() as f64;
        let u = (view.t.out() as f64 * minus / n).round() as i64;
        quantize(u, view.v, ell)
    }

    fn name(&self) -> &'static str {
        "proportional"
    }
}

/// Reads inputs leaked into the transcript and computes `o_A` exactly;
/// falls back to the blind guess without a leak.
#[derive(Clone, Copy, Debug, Default)]
pub struct LeakedInputAdversary;

impl Adversary for LeakedInputAdversary {
    fn guess(&self, view: &KaTranscript, ell: u64, rng: &mut dyn RngCore) -> i64 {
        match leaked_inputs(&view.t) {
            Some((x, _)) if x.len() == view.n() => match view.y_minus.ip_with(x) {
                Ok(u_a) => quantize(u_a, view.v, ell),
                Err(_) => BlindAdversary.guess(view, ell, rng),
            },
            _ => BlindAdversary.guess(view, ell, rng),
        }
    }

    fn name(&self) -> &'static str {
        "leaked-input"
    }
}

/// Success of an adversary at guessing `o_A` on runs where the parties agree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqualityLeakage {
    pub success: Rate,
    pub agreements: u64,
    pub trials: u64,
    /// No run agreed, so the conditional rate is undefined.
    pub degenerate: bool,
}

pub fn equality_leakage_rate<C, A, R>(
    channel: &C,
    ell: u64,
    adversary: &A,
    trials: u64,
    rng: &mut R,
) -> Result<EqualityLeakage>
where
    C: Channel + ?Sized,
    A: Adversary + ?Sized,
    R: RngCore + ?Sized,
{
    check_ell(ell)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let base = rng::fork(rng);
    let [agree, hit] = tally(base, 0, trials, |r, _| {
        let s = channel.sample(r);
        let (o, view) = run_pi_c_on(&s, ell, r).expect("ell checked above");
        if !o.agree() {
            return [0, 0];
        }
        [1, (adversary.guess(&view, ell, r) == o.o_a) as u64]
    });
    Ok(EqualityLeakage {
        success: Rate::new(hit, agree),
        agreements: agree,
        trials,
        degenerate: agree == 0,
    })
}

/// Turns an adversary into an estimator of `⟨x·y, r⟩` from
/// `(r, x_{r+}, y_{r-}, t)`: draw `v`, guess `e ≈ o_A`, answer
/// `out(t) - 2(e + v)`.
///
/// With `e = o_A` the answer lies in `[⟨x·y, r⟩ + Δ, ⟨x·y, r⟩ + Δ + 2ℓ)`
/// for `Δ = out(t) - ⟨x, y⟩`.
#[derive(Clone, Copy, Debug)]
pub struct AdversaryEstimator<A> {
    adversary: A,
    ell: u64,
}

pub fn adversary_to_ip_estimator<A: Adversary>(
    adversary: A,
    ell: u64,
) -> Result<AdversaryEstimator<A>> {
    check_ell(ell)?;
    Ok(AdversaryEstimator { adversary, ell })
}

impl<A: Adversary> AdversaryEstimator<A> {
    /// The estimate for a full protocol view, reusing its `v`.
    pub fn estimate_view(&self, view: &KaTranscript, rng: &mut dyn RngCore) -> i64 {
        let e = self.adversary.guess(view, self.ell, rng);
        view.t.out() - 2 * (e + view.v as i64)
    }
}

impl<A: Adversary> TripletEstimator for AdversaryEstimator<A> {
    fn estimate(&self, view: &TripletView<'_>, rng: &mut dyn RngCore) -> i64 {
        let v = rng.random_range(1..=self.ell);
        let ka = KaTranscript {
            x_plus: view.x_plus.clone(),
            y_minus: view.y_minus.clone(),
            t: view.t.clone(),
            r: view.r.clone(),
            v,
        };
        self.estimate_view(&ka, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ExactIpChannel, LeakyChannel};
    use crate::rng::stream;

    #[test]
    fn quantize_rounds_toward_minus_infinity() {
        assert_eq!(quantize(5, 1, 3), 3);
        assert_eq!(quantize(0, 1, 3), -3);
        assert_eq!(quantize(-3, 1, 3), -6);
        assert_eq!(quantize(-4, 2, 3), -6);
        assert_eq!(quantize(7, 1, 1), 6);
    }

    #[test]
    fn quantized_outputs_differ_by_multiples_of_ell() {
        for ell in 1..7u64 {
            for v in 1..=ell {
                for ua in -20..20i64 {
                    for ub in -20..20i64 {
                        let (a, b) = (quantize(ua, v, ell), quantize(ub, v, ell));
                        assert_eq!((a - b).rem_euclid(ell as i64), 0);
                        let same_block = (ua - v as i64).div_euclid(ell as i64)
                            == (ub - v as i64).div_euclid(ell as i64);
                        assert_eq!(a == b, same_block);
                        if a == b {
                            assert!((ua - ub).unsigned_abs() < ell);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn half_block_is_hit_half_the_time() {
        // Over v uniform on [1, ℓ] with ℓ even, (u - v) mod ℓ < ℓ/2 for exactly half the v.
        for ell in (2..=12u64).step_by(2) {
            for u in -30..30i64 {
                let low = (1..=ell)
                    .filter(|&v| (u - v as i64).rem_euclid(ell as i64) < ell as i64 / 2)
                    .count();
                assert_eq!(low as u64 * 2, ell);
            }
        }
    }

    #[test]
    fn exact_channel_always_agrees() {
        let c = ExactIpChannel::new(40);
        let mut rng = stream(1, 0);
        for ell in [1, 3, 8] {
            for _ in 0..200 {
                let (o, view) = run_pi_c(&c, ell, &mut rng).unwrap();
                assert_eq!(o.u_a, o.u_b);
                assert!(o.agree());
                assert!((1..=ell).contains(&view.v));
            }
        }
    }

    #[test]
    fn perfect_adversary_estimator_is_within_two_ell() {
        let c = LeakyChannel::new(ExactIpChannel::new(50));
        let ell = 4;
        let f = adversary_to_ip_estimator(LeakedInputAdversary, ell).unwrap();
        let mut rng = stream(2, 0);
        for _ in 0..500 {
            let s = c.sample(&mut rng);
            let (o, view) = run_pi_c_on(&s, ell, &mut rng).unwrap();
            assert_eq!(LeakedInputAdversary.guess(&view, ell, &mut rng), o.o_a);
            let target = SignVector::product_ip_unchecked(&s.x, &s.y, &view.r);
            let d = f.estimate_view(&view, &mut rng) - target;
            assert!((0..2 * ell as i64).contains(&d), "offset {d}");
        }
    }

    #[test]
    fn shifting_the_guess_by_ell_shifts_the_estimate_by_two_ell() {
        struct Shifted;
        impl Adversary for Shifted {
            fn guess(&self, view: &KaTranscript, ell: u64, rng: &mut dyn RngCore) -> i64 {
                BlindAdversary.guess(view, ell, rng) + ell as i64
            }
            fn name(&self) -> &'static str {
                "shifted"
            }
        }
        let ell = 3;
        let (a, b) = (
            adversary_to_ip_estimator(BlindAdversary, ell).unwrap(),
            adversary_to_ip_estimator(Shifted, ell).unwrap(),
        );
        let mut rng = stream(3, 0);
        for _ in 0..50 {
            let (_, view) = run_pi_c(&ExactIpChannel::new(20), ell, &mut rng).unwrap();
            assert_eq!(
                a.estimate_view(&view, &mut rng) - b.estimate_view(&view, &mut rng),
                2 * ell as i64
            );
        }
    }
}
