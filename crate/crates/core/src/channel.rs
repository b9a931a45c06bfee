//! Channels: samplers of `(x, y, transcript)` with a designated integer
//! output, plus accuracy estimation and an empirical privacy audit.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{round_half_away, Laplace};
use crate::rng::{self, tally};
use crate::sign::SignVector;
use crate::source::SvSourceSpec;
use crate::stats::{Rate, Z95};

/// One public message of a transcript.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Message {
    Int(i64),
    Real(f64),
    Signs(SignVector),
}

/// How the designated output is read off the messages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutRule {
    /// The integer message at this position.
    IntAt(usize),
    /// The real message at this position, rounded half away from zero.
    RoundedRealAt(usize),
    /// A constant independent of the messages.
    Fixed(i64),
}

/// Public transcript of one channel call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    messages: Vec<Message>,
    rule: OutRule,
    out: i64,
}

impl Transcript {
    pub fn new(messages: Vec<Message>, rule: OutRule) -> Result<Self> {
        let out = extract(&messages, rule)?;
        Ok(Self {
            messages,
            rule,
            out,
        })
    }

    /// The designated output `out(T)`.
    pub fn out(&self) -> i64 {
        self.out
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn rule(&self) -> OutRule {
        self.rule
    }

    /// Re-derives the output from the messages.
    pub fn extract_out(&self) -> Result<i64> {
        extract(&self.messages, self.rule)
    }

    /// Appends a message; the designated output is unchanged.
    pub fn push(&mut self, m: Message) {
        self.messages.push(m);
    }

    /// The `k`-th sign-vector message, counting from the end.
    pub fn signs_from_end(&self, k: usize) -> Option<&SignVector> {
        self.messages
            .iter()
            .rev()
            .filter_map(|m| match m {
                Message::Signs(v) => Some(v),
                _ => None,
            })
            .nth(k)
    }
}

fn extract(messages: &[Message], rule: OutRule) -> Result<i64> {
    let bad = || Error::InvalidParameter(format!("transcript does not match output rule {rule:?}"));
    match rule {
        OutRule::Fixed(z) => Ok(z),
        OutRule::IntAt(k) => match messages.get(k) {
            Some(Message::Int(v)) => Ok(*v),
            _ => Err(bad()),
        },
        OutRule::RoundedRealAt(k) => match messages.get(k) {
            Some(Message::Real(v)) => Ok(round_half_away(*v)),
            _ => Err(bad()),
        },
    }
}

/// `(x, y, t)` drawn from a channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSample {
    pub x: SignVector,
    pub y: SignVector,
    pub t: Transcript,
}

impl ChannelSample {
    /// `out(t) - ⟨x, y⟩`.
    pub fn error(&self) -> i64 {
        self.t.out() - self.x.ip_unchecked(&self.y)
    }
}

/// A sampler of channel triplets over `{-1, +1}^n × {-1, +1}^n`.
pub trait Channel: Send + Sync {
    fn n(&self) -> usize;

    fn sample(&self, rng: &mut dyn RngCore) -> ChannelSample;

    fn name(&self) -> &'static str;
}

impl<C: Channel + ?Sized> Channel for Box<C> {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> ChannelSample {
        (**self).sample(rng)
    }

    fn name(&self) -> &'static str {
        (**self).name()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )))
    }
}

/// Uniform inputs; `out = ⟨x, y⟩ + ⌊Lap(2/eps)⌉`.
#[derive(Clone, Debug)]
pub struct LaplaceIpChannel {
    n: usize,
    noise: Laplace,
}

impl LaplaceIpChannel {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        Ok(Self {
            n,
            noise: Laplace::for_privacy(eps, 2.0)?,
        })
    }

    pub fn noise(&self) -> Laplace {
        self.noise
    }
}

impl Channel for LaplaceIpChannel {
    fn n(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut dyn RngCore) -> ChannelSample {
        let x = SignVector::uniform(self.n, rng);
        let y = SignVector::uniform(self.n, rng);
        let out = x.ip_unchecked(&y) + self.noise.sample_rounded(rng);
        let t = Transcript {
            messages: vec![Message::Int(out)],
            rule: OutRule::IntAt(0),
            out,
        };
        ChannelSample { x, y, t }
    }

    fn name(&self) -> &'static str {
        "laplace"
    }
}

/// Uniform inputs; A publishes a randomised copy of `x` and B publishes a
/// debiased noisy inner product against it.
#[derive(Clone, Debug)]
pub struct RandomizedResponseChannel {
    n: usize,
    eps: f64,
    p: f64,
    noise: Laplace,
}

impl RandomizedResponseChannel {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let p = retention_advantage(eps);
        Ok(Self {
            n,
            eps,
            p,
            noise: Laplace::new(1.0 / (p * eps))?,
        })
    }

    /// Advantage `p` with which each bit is kept: `Pr[x̂_i = x_i] = 1/2 + p`.
    pub fn advantage(&self) -> f64 {
        self.p
    }

    /// `Var[z | x, y] = n (1/(4p²) - 1) + 2/(p eps)²`.
    pub fn variance(&self) -> f64 {
        let n = self.n as f64;
        n * (1.0 / (4.0 * self.p * self.p) - 1.0) + 2.0 / (self.p * self.eps).powi(2)
    }

    /// The real-valued estimate carried by a transcript of this channel.
    pub fn estimate(t: &Transcript) -> Option<f64> {
        match t.messages().get(1) {
            Some(Message::Real(z)) => Some(*z),
            _ => None,
        }
    }

    /// Samples the transcript for fixed inputs.
    pub fn respond(&self, x: &SignVector, y: &SignVector, rng: &mut dyn RngCore) -> Transcript {
        let keep = 0.5 + self.p;
        let mut noisy = x.clone();
        for i in 0..self.n {
            if rng.random::<f64>() >= keep {
                noisy.set(i, -x.get(i));
            }
        }
        let z = noisy.ip_unchecked(y) as f64 / (2.0 * self.p) + self.noise.sample(rng);
        Transcript {
            messages: vec![Message::Signs(noisy), Message::Real(z)],
            rule: OutRule::RoundedRealAt(1),
            out: round_half_away(z),
        }
    }
}

/// `e^eps / (e^eps + 1) - 1/2`.
pub fn retention_advantage(eps: f64) -> f64 {
    // Written via the logistic form to stay finite for large eps.
    1.0 / (1.0 + (-eps).exp()) - 0.5
}

impl Channel for RandomizedResponseChannel {
    fn n(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut dyn RngCore) -> ChannelSample {
        let x = SignVector::uniform(self.n, rng);
        let y = SignVector::uniform(self.n, rng);
        let t = self.respond(&x, &y, rng);
        ChannelSample { x, y, t }
    }

    fn name(&self) -> &'static str {
        "randomized-response"
    }
}

/// Independent inputs from two sources; both parties output `z`.
#[derive(Clone, Debug)]
pub struct ConstantChannel {
    n: usize,
    z: i64,
    source_a: SvSourceSpec,
    source_b: SvSourceSpec,
}

impl ConstantChannel {
    pub fn new(n: usize, z: i64, source_a: SvSourceSpec, source_b: SvSourceSpec) -> Result<Self> {
        if z.unsigned_abs() > n as u64 {
            return Err(Error::Precondition(format!(
                "constant output {z} outside [-{n}, {n}]"
            )));
        }
        for s in [&source_a, &source_b] {
            s.validate()?;
            if s.n != n {
                return Err(Error::DimensionMismatch {
                    left: s.n,
                    right: n,
                });
            }
        }
        Ok(Self {
            n,
            z,
            source_a,
            source_b,
        })
    }

    pub fn uniform(n: usize, z: i64) -> Result<Self> {
        Self::new(n, z, SvSourceSpec::uniform(n), SvSourceSpec::uniform(n))
    }
}

impl Channel for ConstantChannel {
    fn n(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut dyn RngCore) -> ChannelSample {
        let x = self.source_a.sample(rng);
        let y = self.source_b.sample(rng);
        let t = Transcript {
            messages: Vec::new(),
            rule: OutRule::Fixed(self.z),
            out: self.z,
        };
        ChannelSample { x, y, t }
    }

    fn name(&self) -> &'static str {
        "constant"
    }
}

/// Uniform inputs; `out = ⟨x, y⟩` exactly.
#[derive(Clone, Debug)]
pub struct ExactIpChannel {
    n: usize,
}

impl ExactIpChannel {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Channel for ExactIpChannel {
    fn n(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut dyn RngCore) -> ChannelSample {
        let x = SignVector::uniform(self.n, rng);
        let y = SignVector::uniform(self.n, rng);
        let out = x.ip_unchecked(&y);
        let t = Transcript {
            messages: vec![Message::Int(out)],
            rule: OutRule::IntAt(0),
            out,
        };
        ChannelSample { x, y, t }
    }

    fn name(&self) -> &'static str {
        "exact"
    }
}

/// Uniform inputs; `out = ⟨x, y⟩ + U` with `U` uniform on `[-radius, radius]`.
#[derive(Clone, Debug)]
pub struct BoundedNoiseChannel {
    n: usize,
    radius: i64,
}

impl BoundedNoiseChannel {
    pub fn new(n: usize, radius: i64) -> Result<Self> {
        if radius < 0 {
            return Err(Error::InvalidParameter(format!(
                "radius must be non-negative, got {radius}"
            )));
        }
        Ok(Self { n, radius })
    }
}

impl Channel for BoundedNoiseChannel {
    fn n(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut dyn RngCore) -> ChannelSample {
        let x = SignVector::uniform(self.n, rng);
        let y = SignVector::uniform(self.n, rng);
        let out = x.ip_unchecked(&y) + rng.random_range(-self.radius..=self.radius);
        let t = Transcript {
            messages: vec![Message::Int(out)],
            rule: OutRule::IntAt(0),
            out,
        };
        ChannelSample { x, y, t }
    }

    fn name(&self) -> &'static str {
        "bounded-noise"
    }
}

/// `x` uniform; with probability `agreement` the parties hold `y = x`,
/// otherwise `y` is an independent uniform vector. Nothing is published.
#[derive(Clone, Debug)]
pub struct EqualityChannel {
    n: usize,
    agreement: f64,
}

impl EqualityChannel {
    pub fn new(n: usize, agreement: f64) -> Result<Self> {
        if !(agreement > 0.0 && agreement <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "agreement must lie in (0, 1], got {agreement}"
            )));
        }
        Ok(Self { n, agreement })
    }
}

impl Channel for EqualityChannel {
    fn n(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut dyn RngCore) -> ChannelSample {
        let x = SignVector::uniform(self.n, rng);
        let y = if rng.random::<f64>() < self.agreement {
            x.clone()
        } else {
            SignVector::uniform(self.n, rng)
        };
        let t = Transcript {
            messages: Vec::new(),
            rule: OutRule::Fixed(0),
            out: 0,
        };
        ChannelSample { x, y, t }
    }

    fn name(&self) -> &'static str {
        "equality"
    }
}

/// Wraps a channel and appends both inputs to its transcript.
///
/// Models a completely non-private channel; oracle estimators read the
/// inputs back with [`leaked_inputs`].
#[derive(Clone, Debug)]
pub struct LeakyChannel<C> {
    inner: C,
}

impl<C: Channel> LeakyChannel<C> {
    pub fn new(inner: C) -> Self {
        Self { inner }
    }
}

impl<C: Channel> Channel for LeakyChannel<C> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> ChannelSample {
        let mut s = self.inner.sample(rng);
        s.t.push(Message::Signs(s.x.clone()));
        s.t.push(Message::Signs(s.y.clone()));
        s
    }

    fn name(&self) -> &'static str {
        "leaky"
    }
}

/// The `(x, y)` appended by [`LeakyChannel`], if present.
pub fn leaked_inputs(t: &Transcript) -> Option<(&SignVector, &SignVector)> {
    Some((t.signs_from_end(1)?, t.signs_from_end(0)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    Laplace,
    RandomizedResponse,
    Constant,
    Exact,
    BoundedNoise,
    Equality,
}

/// Declarative channel description used by the command-line driver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub kind: ChannelKind,
    pub n: usize,
    #[serde(default)]
    pub eps: Option<f64>,
    /// Output of the constant channel.
    #[serde(default)]
    pub z: Option<i64>,
    /// Noise radius of the bounded-noise channel.
    #[serde(default)]
    pub radius: Option<i64>,
    /// Agreement probability of the equality channel.
    #[serde(default)]
    pub agreement: Option<f64>,
    #[serde(default)]
    pub source_a: Option<SvSourceSpec>,
    #[serde(default)]
    pub source_b: Option<SvSourceSpec>,
    /// Append both inputs to every transcript.
    #[serde(default)]
    pub leak: bool,
}

impl ChannelConfig {
    pub fn new(kind: ChannelKind, n: usize) -> Self {
        Self {
            kind,
            n,
            eps: None,
            z: None,
            radius: None,
            agreement: None,
            source_a: None,
            source_b: None,
            leak: false,
        }
    }

    pub fn build(&self) -> Result<Box<dyn Channel>> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::InvalidParameter(format!("{name} is required for this channel")))
        };
        let n = self.n;
        let inner: Box<dyn Channel> = match self.kind {
            ChannelKind::Laplace => Box::new(LaplaceIpChannel::new(n, need(self.eps, "eps")?)?),
            ChannelKind::RandomizedResponse => {
                Box::new(RandomizedResponseChannel::new(n, need(self.eps, "eps")?)?)
            }
            ChannelKind::Constant => Box::new(ConstantChannel::new(
                n,
                self.z.unwrap_or(0),
                self.source_a
                    .clone()
                    .unwrap_or_else(|| SvSourceSpec::uniform(n)),
                self.source_b
                    .clone()
                    .unwrap_or_else(|| SvSourceSpec::uniform(n)),
            )?),
            ChannelKind::Exact => Box::new(ExactIpChannel::new(n)),
            ChannelKind::BoundedNoise => {
                Box::new(BoundedNoiseChannel::new(n, self.radius.unwrap_or(0))?)
            }
            ChannelKind::Equality => {
                Box::new(EqualityChannel::new(n, need(self.agreement, "agreement")?)?)
            }
        };
        Ok(if self.leak {
            Box::new(LeakyChannel::new(inner))
        } else {
            inner
        })
    }
}

/// Empirical `(alpha, gamma)` accuracy for the inner product.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub alpha: i64,
    pub gamma_hat: f64,
    pub trials: u64,
    pub half_width: f64,
}

impl AccuracyReport {
    fn from_rate(alpha: i64, rate: Rate) -> Self {
        Self {
            alpha,
            gamma_hat: rate.rate,
            trials: rate.trials,
            half_width: rate.half_width,
        }
    }

    pub fn std_error(&self) -> f64 {
        self.half_width / Z95
    }
}

/// Fraction of samples with `|out(t) - ⟨x, y⟩| <= alpha`.
pub fn estimate_accuracy<C, R>(
    channel: &C,
    alpha: i64,
    trials: u64,
    rng: &mut R,
) -> Result<AccuracyReport>
where
    C: Channel + ?Sized,
    R: RngCore + ?Sized,
{
    Ok(accuracy_profile(channel, &[alpha], trials, rng)?.remove(0))
}

/// Accuracy at several thresholds, evaluated on one shared set of samples.
pub fn accuracy_profile<C, R>(
    channel: &C,
    alphas: &[i64],
    trials: u64,
    rng: &mut R,
) -> Result<Vec<AccuracyReport>>
where
    C: Channel + ?Sized,
    R: RngCore + ?Sized,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let base = rng::fork(rng);
    let errors = rng::par_map(base, trials, |r, _| {
        channel.sample(r).error().unsigned_abs()
    });
    Ok(alphas
        .iter()
        .map(|&a| {
            let hits = if a < 0 {
                0
            } else {
                errors.iter().filter(|&&e| e <= a as u64).count() as u64
            };
            AccuracyReport::from_rate(a, Rate::new(hits, trials))
        })
        .collect())
}

/// A test `D(i, x, y, t) -> {0, 1}` used to audit privacy.
pub trait Distinguisher: Sync {
    fn decide(&self, i: usize, x: &SignVector, y: &SignVector, t: &Transcript) -> bool;
}

impl<F> Distinguisher for F
where
    F: Fn(usize, &SignVector, &SignVector, &Transcript) -> bool + Sync,
{
    fn decide(&self, i: usize, x: &SignVector, y: &SignVector, t: &Transcript) -> bool {
        self(i, x, y, t)
    }
}

/// Accepts when the output lies within `radius` of `⟨x, y⟩`.
#[derive(Clone, Copy, Debug)]
pub struct WithinRadius(pub i64);

impl Distinguisher for WithinRadius {
    fn decide(&self, _i: usize, x: &SignVector, y: &SignVector, t: &Transcript) -> bool {
        (t.out() - x.ip_unchecked(y)).abs() <= self.0
    }
}

/// Accepts when `out(t) - ⟨x, y⟩ >= threshold`.
#[derive(Clone, Copy, Debug)]
pub struct ErrorAtLeast(pub i64);

impl Distinguisher for ErrorAtLeast {
    fn decide(&self, _i: usize, x: &SignVector, y: &SignVector, t: &Transcript) -> bool {
        t.out() - x.ip_unchecked(y) >= self.0
    }
}

/// Flips entry `i` of the concatenated pair `(x, y)`, `0 <= i < 2n`.
pub fn flip_pair(x: &SignVector, y: &SignVector, i: usize) -> Result<(SignVector, SignVector)> {
    let n = x.len();
    if i < n {
        Ok((x.flip(i)?, y.clone()))
    } else if i < 2 * n {
        Ok((x.clone(), y.flip(i - n)?))
    } else {
        Err(Error::IndexOutOfRange {
            index: i,
            len: 2 * n,
        })
    }
}

/// Outcome of a paired privacy audit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpAudit {
    pub p_real: Rate,
    pub p_flipped: Rate,
    /// `ln(max(p_real, 1/trials) / max(p_flipped, 1/trials))`.
    pub eps_hat_lower: f64,
}

/// Runs `D` on each sample and on the same sample with entry `flip_index`
/// of the input pair negated.
pub fn dp_audit<C, D, R>(
    channel: &C,
    distinguisher: &D,
    flip_index: usize,
    trials: u64,
    rng: &mut R,
) -> Result<DpAudit>
where
    C: Channel + ?Sized,
    D: Distinguisher + ?Sized,
    R: RngCore + ?Sized,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if flip_index >= 2 * channel.n() {
        return Err(Error::IndexOutOfRange {
            index: flip_index,
            len: 2 * channel.n(),
        });
    }
    let base = rng::fork(rng);
    let [real, flipped] = tally(base, 0, trials, |r, _| {
        let s = channel.sample(r);
        let (fx, fy) = flip_pair(&s.x, &s.y, flip_index).expect("index checked above");
        [
            distinguisher.decide(flip_index, &s.x, &s.y, &s.t) as u64,
            distinguisher.decide(flip_index, &fx, &fy, &s.t) as u64,
        ]
    });
    let p_real = Rate::new(real, trials);
    let p_flipped = Rate::new(flipped, trials);
    let floor = 1.0 / trials as f64;
    let eps_hat_lower = (p_real.rate.max(floor) / p_flipped.rate.max(floor)).ln();
    Ok(DpAudit {
        p_real,
        p_flipped,
        eps_hat_lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn draws<C: Channel>(c: &C, seed: u64, k: usize) -> Vec<ChannelSample> {
        let mut r = stream(seed, 0);
        (0..k).map(|_| c.sample(&mut r)).collect()
    }

    #[test]
    fn transcripts_follow_their_rule() {
        let t = Transcript::new(vec![Message::Real(2.5)], OutRule::RoundedRealAt(0)).unwrap();
        assert_eq!(t.out(), 3);
        assert!(Transcript::new(vec![Message::Real(1.0)], OutRule::IntAt(0)).is_err());
        let channels: Vec<Box<dyn Channel>> = vec![
            Box::new(LaplaceIpChannel::new(30, 1.0).unwrap()),
            Box::new(RandomizedResponseChannel::new(30, 1.0).unwrap()),
            Box::new(ConstantChannel::uniform(30, 4).unwrap()),
            Box::new(ExactIpChannel::new(30)),
            Box::new(BoundedNoiseChannel::new(30, 3).unwrap()),
            Box::new(EqualityChannel::new(30, 0.5).unwrap()),
            Box::new(LeakyChannel::new(ExactIpChannel::new(30))),
        ];
        for c in &channels {
            for s in draws(c, 1, 50) {
                assert_eq!(s.t.extract_out().unwrap(), s.t.out(), "{}", c.name());
                assert_eq!((s.x.len(), s.y.len()), (30, 30));
            }
            assert_eq!(
                draws(c, 9, 5),
                draws(c, 9, 5),
                "{} is not reproducible",
                c.name()
            );
        }
    }

    #[test]
    fn exact_and_noiseless_laplace_agree() {
        let exact = ExactIpChannel::new(40);
        let noiseless = LaplaceIpChannel::new(40, f64::INFINITY).unwrap();
        for (a, b) in draws(&exact, 2, 100).iter().zip(draws(&noiseless, 2, 100)) {
            assert_eq!(a.error(), 0);
            assert_eq!(a.t.out(), b.t.out());
        }
        let rep = estimate_accuracy(&exact, 0, 500, &mut stream(3, 0)).unwrap();
        assert_eq!(rep.gamma_hat, 1.0);
    }

    #[test]
    fn randomized_response_advantage() {
        assert!((retention_advantage(3f64.ln()) - 0.25).abs() < 1e-12);
        assert!(RandomizedResponseChannel::new(10, 0.0).is_err());
        assert!(RandomizedResponseChannel::new(0, 1.0).is_err());
    }

    #[test]
    fn constant_channel_checks_range_and_is_constant() {
        assert!(ConstantChannel::uniform(5, 6).is_err());
        let c = ConstantChannel::uniform(20, -3).unwrap();
        assert!(draws(&c, 4, 100)
            .iter()
            .all(|s| s.t.out() == -3 && s.t.messages().is_empty()));
    }

    #[test]
    fn constant_channel_marginals() {
        let n = 64;
        let a = SvSourceSpec::iid(n, 0.5, 0.6).unwrap();
        let b = SvSourceSpec::iid(n, 0.5, 0.4).unwrap();
        let c = ConstantChannel::new(n, 0, a, b).unwrap();
        let k = 4000;
        let (mut sx, mut sy) = (0i64, 0i64);
        for s in draws(&c, 5, k) {
            sx += s.x.signs().iter().map(|&v| v as i64).sum::<i64>();
            sy += s.y.signs().iter().map(|&v| v as i64).sum::<i64>();
        }
        let m = (k * n) as f64;
        // Hoeffding at 1e-6 for pooled ±1 means.
        let tol = (2.0 * (2e6f64).ln() / m).sqrt();
        assert!((sx as f64 / m - 0.2).abs() < tol);
        assert!((sy as f64 / m + 0.2).abs() < tol);
    }

    #[test]
    fn accuracy_is_monotone_in_alpha() {
        let c = LaplaceIpChannel::new(50, 0.5).unwrap();
        let alphas: Vec<i64> = (0..20).collect();
        let prof = accuracy_profile(&c, &alphas, 2000, &mut stream(6, 0)).unwrap();
        assert!(prof.windows(2).all(|w| w[0].gamma_hat <= w[1].gamma_hat));
    }

    #[test]
    fn config_builds_every_kind() {
        for kind in [
            ChannelKind::Laplace,
            ChannelKind::RandomizedResponse,
            ChannelKind::Constant,
            ChannelKind::Exact,
            ChannelKind::BoundedNoise,
            ChannelKind::Equality,
        ] {
            let mut cfg = ChannelConfig::new(kind, 16);
            cfg.eps = Some(1.0);
            cfg.agreement = Some(0.5);
            cfg.leak = true;
            let c = cfg.build().unwrap();
            let s = c.sample(&mut stream(7, 0));
            assert!(leaked_inputs(&s.t).is_some());
        }
        assert!(ChannelConfig::new(ChannelKind::Laplace, 16)
            .build()
            .is_err());
    }

    #[test]
    fn audit_of_constant_channel_is_flat() {
        let c = ConstantChannel::uniform(20, 0).unwrap();
        let a = dp_audit(&c, &WithinRadius(2), 3, 20_000, &mut stream(8, 0)).unwrap();
        assert!(a.eps_hat_lower.abs() < 0.1, "{a:?}");
    }

    #[test]
    fn audit_of_exact_channel_is_large() {
        let trials = 10_000;
        let c = ExactIpChannel::new(20);
        let a = dp_audit(&c, &WithinRadius(0), 25, trials, &mut stream(9, 0)).unwrap();
        assert_eq!(a.p_real.rate, 1.0);
        assert_eq!(a.p_flipped.rate, 0.0);
        assert!(a.eps_hat_lower >= (trials as f64).ln() / 2.0);
    }

    #[test]
    fn flip_pair_routes_to_the_right_half() {
        let x = SignVector::ones(3);
        let y = SignVector::ones(3);
        let (a, b) = flip_pair(&x, &y, 4).unwrap();
        assert_eq!(a, x);
        assert_eq!(b.signs(), vec![1, -1, 1]);
        assert!(flip_pair(&x, &y, 6).is_err());
    }
}
