//! Laplace noise and its integer rounding.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maps 64 random bits to a double strictly inside `(0, 1)`.
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Rounds to the nearest integer, halves away from zero.
pub fn round_half_away(w: f64) -> i64 {
    w.round() as i64
}

/// Zero-mean Laplace distribution with density `exp(-|z|/scale) / (2 scale)`.
///
/// A zero scale is accepted and denotes the point mass at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Laplace {
    scale: f64,
}

impl Laplace {
    pub fn new(scale: f64) -> Result<Self> {
        if scale.is_finite() && scale >= 0.0 {
            Ok(Self { scale })
        } else {
            Err(Error::InvalidParameter(format!(
                "Laplace scale must be finite and non-negative, got {scale}"
            )))
        }
    }

    /// The mechanism scale `2 / eps` for a sensitivity-2 query. An infinite
    /// `eps` gives the noiseless mechanism.
    pub fn for_privacy(eps: f64, sensitivity: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        Self::new(sensitivity / eps)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Inverse CDF at `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        if u < 0.5 {
            self.scale * (2.0 * u).ln()
        } else {
            -self.scale * (2.0 - 2.0 * u).ln()
        }
    }

    /// One draw. The point mass consumes no randomness, so a noiseless
    /// mechanism replays the stream of an exact one.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        self.quantile(open_unit(rng.next_u64()))
    }

    pub fn sample_rounded<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        round_half_away(self.sample(rng))
    }

    /// Rounded draw from externally supplied random bits.
    pub fn rounded_from_bits(&self, bits: u64) -> i64 {
        round_half_away(self.quantile(open_unit(bits)))
    }
}

/// One rounded Laplace draw together with its scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSample {
    pub value: i64,
    pub scale: f64,
}

/// `⌊w⌉` for `w ~ Lap(scale)`, sampled by inverse CDF.
pub fn sample_rounded_laplace<R: RngCore + ?Sized>(scale: f64, rng: &mut R) -> Result<NoiseSample> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "scale must be positive, got {scale}"
        )));
    }
    let lap = Laplace::new(scale)?;
    Ok(NoiseSample {
        value: lap.sample_rounded(rng),
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn rounding_ties_go_away_from_zero() {
        assert_eq!(round_half_away(0.5), 1);
        assert_eq!(round_half_away(-0.5), -1);
        assert_eq!(round_half_away(2.5), 3);
        assert_eq!(round_half_away(-2.5), -3);
        assert_eq!(round_half_away(0.49), 0);
    }

    #[test]
    fn quantile_is_the_inverse_cdf() {
        let lap = Laplace::new(1.5).unwrap();
        for &u in &[0.01, 0.2, 0.5, 0.7, 0.999] {
            let w: f64 = lap.quantile(u);
            let cdf = if w < 0.0 {
                0.5 * (w / 1.5).exp()
            } else {
                1.0 - 0.5 * (-w / 1.5).exp()
            };
            assert!((cdf - u).abs() < 1e-12);
        }
        assert!(open_unit(0) > 0.0 && open_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn bad_scales_are_rejected() {
        assert!(Laplace::new(-1.0).is_err());
        assert!(Laplace::new(f64::NAN).is_err());
        assert!(sample_rounded_laplace(0.0, &mut stream(0, 0)).is_err());
        assert_eq!(
            Laplace::for_privacy(f64::INFINITY, 2.0).unwrap().scale(),
            0.0
        );
    }

    #[test]
    fn tail_and_centre_masses() {
        let mut rng = stream(11, 0);
        let draws = 1_000_000u32;
        let lap = Laplace::new(1.0).unwrap();
        let mut tails = [0u32; 3];
        let mut zeros = 0u32;
        let mut sum = 0.0;
        for _ in 0..draws {
            let w = lap.sample(&mut rng);
            sum += w;
            for (k, t) in [1.0, 2.0, 5.0].iter().enumerate() {
                if w.abs() > *t {
                    tails[k] += 1;
                }
            }
            if round_half_away(w) == 0 {
                zeros += 1;
            }
        }
        let n = draws as f64;
        for (k, t) in [1.0f64, 2.0, 5.0].iter().enumerate() {
            let bound = (-t).exp();
            let se = (bound * (1.0 - bound) / n).sqrt();
            assert!(tails[k] as f64 / n <= bound + 3.0 * se, "t = {t}");
        }
        // Var of Lap(1) is 2.
        assert!((sum / n).abs() < 4.0 * (2.0 / n).sqrt());
        assert!(zeros as f64 / n >= 1.0 - (-0.5f64).exp() - 3.0 * (0.25 / n).sqrt());
    }
}
