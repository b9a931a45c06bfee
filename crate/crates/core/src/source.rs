//! Product-form strong Santha–Vazirani sources.
//!
//! Bits are independent, so the conditional odds of `X_i = +1` given the
//! other bits equal `p_i / (1 - p_i)` no matter what is conditioned on.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sign::SignVector;

/// Tolerance when checking that a bias respects the odds window.
const ODDS_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SvModel {
    /// Every bit is `+1` with probability `p`.
    IidBias { p: f64 },
    /// Bit `i` is `+1` with probability `p[i]`.
    PerIndexBias { p: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvSourceSpec {
    pub alpha: f64,
    pub n: usize,
    pub model: SvModel,
}

impl SvSourceSpec {
    pub fn new(alpha: f64, n: usize, model: SvModel) -> Result<Self> {
        let spec = Self { alpha, n, model };
        spec.validate()?;
        Ok(spec)
    }

    /// The uniform distribution on `{-1, +1}^n`.
    pub fn uniform(n: usize) -> Self {
        Self {
            alpha: 1.0,
            n,
            model: SvModel::IidBias { p: 0.5 },
        }
    }

    /// Iid bits with `Pr[+1] = p`.
    pub fn iid(n: usize, alpha: f64, p: f64) -> Result<Self> {
        Self::new(alpha, n, SvModel::IidBias { p })
    }

    /// Iid bits at the edge of the window: odds of `+1` equal to `1/alpha`.
    pub fn extreme(n: usize, alpha: f64) -> Result<Self> {
        Self::iid(n, alpha, 1.0 / (1.0 + alpha))
    }

    /// `extreme` parameterised by `alpha = exp(-eps)`.
    pub fn from_eps(n: usize, eps: f64) -> Result<Self> {
        if !(eps >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be non-negative, got {eps}"
            )));
        }
        Self::extreme(n, (-eps).exp())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        let check = |p: f64| -> Result<()> {
            let odds = p / (1.0 - p);
            // `1 - p` carries relative rounding error up to eps / min(p, 1 - p).
            let slack = ODDS_SLACK + 4.0 * f64::EPSILON / p.min(1.0 - p);
            let ok = p > 0.0
                && p < 1.0
                && odds >= self.alpha * (1.0 - slack)
                && odds <= (1.0 + slack) / self.alpha;
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "bias {p} has odds outside [{}, {}]",
                    self.alpha,
                    1.0 / self.alpha
                )))
            }
        };
        match &self.model {
            SvModel::IidBias { p } => check(*p),
            SvModel::PerIndexBias { p } => {
                if p.len() != self.n {
                    return Err(Error::DimensionMismatch {
                        left: p.len(),
                        right: self.n,
                    });
                }
                p.iter().try_for_each(|&q| check(q))
            }
        }
    }

    /// `Pr[X_i = +1]`.
    pub fn bias(&self, i: usize) -> f64 {
        match &self.model {
            SvModel::IidBias { p } => *p,
            SvModel::PerIndexBias { p } => p[i],
        }
    }

    fn is_uniform(&self) -> bool {
        matches!(self.model, SvModel::IidBias { p } if p == 0.5)
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> SignVector {
        if self.is_uniform() {
            return SignVector::uniform(self.n, rng);
        }
        let mut v = SignVector::ones(self.n);
        self.resample_where(&mut v, |_| true, rng);
        v
    }

    /// Redraws the entries of `v` at the `-1` positions of `mask`.
    pub fn resample_masked<R: RngCore + ?Sized>(
        &self,
        v: &mut SignVector,
        mask: &SignVector,
        rng: &mut R,
    ) {
        if self.is_uniform() {
            let fresh = SignVector::uniform(self.n, rng);
            let words: Vec<u64> = v
                .words()
                .iter()
                .zip(fresh.words())
                .zip(mask.words())
                .map(|((old, new), m)| (old & !m) | (new & m))
                .collect();
            *v = SignVector::from_bits(self.n, &words).expect("same length");
        } else {
            self.resample_where(v, |i| mask.bit(i) == 1, rng);
        }
    }

    /// Redraws the entries of `v` selected by `select` from their marginals.
    pub fn resample_where<R, F>(&self, v: &mut SignVector, select: F, rng: &mut R)
    where
        R: RngCore + ?Sized,
        F: Fn(usize) -> bool,
    {
        for i in 0..self.n {
            if select(i) {
                let plus = rng.random::<f64>() < self.bias(i);
                v.set(i, if plus { 1 } else { -1 });
            }
        }
    }
}

/// Draws one vector from `spec`.
pub fn sample_sv_source<R: RngCore + ?Sized>(spec: &SvSourceSpec, rng: &mut R) -> SignVector {
    spec.sample(rng)
}
