//! Distinguishers built on triplet reconstruction, and the privacy attacker
//! that first tests the estimator on queries avoiding the unknown bit.

use std::fmt;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{flip_pair, Transcript};
use crate::condense::triplet::{rec_score, TripletEstimator, TripletSource, TripletView};
use crate::error::{ensure_len, Error, Result};
use crate::recon::{OffsetParams, OffsetSampler};
use crate::rng::{self, stream};
use crate::sign::SignVector;
use crate::stats::{sign_or_minus, Rate};

/// Which flip pattern the distinguisher applies before reconstructing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum FlipPattern {
    /// Flip pair entry `i`; active for `i < n`.
    First = 1,
    /// Flip pair entry `i`; active for `i >= n`.
    Second = 2,
    /// Flip both `x_j` and `y_j`; active for `i < n`.
    Both = 3,
}

impl FlipPattern {
    pub const ALL: [FlipPattern; 3] = [FlipPattern::First, FlipPattern::Second, FlipPattern::Both];

    /// Whether pair index `i` lies in the active half.
    pub fn active(self, i: usize, n: usize) -> bool {
        match self {
            FlipPattern::Second => (n..2 * n).contains(&i),
            _ => i < n,
        }
    }
}

impl TryFrom<u8> for FlipPattern {
    type Error = Error;

    fn try_from(d: u8) -> Result<Self> {
        match d {
            1 => Ok(FlipPattern::First),
            2 => Ok(FlipPattern::Second),
            3 => Ok(FlipPattern::Both),
            _ => Err(Error::InvalidParameter(format!(
                "flip pattern must be 1, 2 or 3, got {d}"
            ))),
        }
    }
}

impl From<FlipPattern> for u8 {
    fn from(d: FlipPattern) -> u8 {
        d as u8
    }
}

impl fmt::Display for FlipPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

/// Position in `x` and `y` addressed by pair index `i`.
pub fn pair_position(i: usize, n: usize) -> Result<usize> {
    if i < 2 * n {
        Ok(i % n)
    } else {
        Err(Error::IndexOutOfRange {
            index: i,
            len: 2 * n,
        })
    }
}

/// The pair handed to reconstruction under `pattern`, or `None` when `i`
/// is outside the active half.
fn flipped_input(
    pattern: FlipPattern,
    i: usize,
    x: &SignVector,
    y: &SignVector,
) -> Result<Option<(SignVector, SignVector)>> {
    ensure_len(x.len(), y.len())?;
    let n = x.len();
    let j = pair_position(i, n)?;
    if !pattern.active(i, n) {
        return Ok(None);
    }
    Ok(Some(match pattern {
        FlipPattern::First | FlipPattern::Second => flip_pair(x, y, i)?,
        FlipPattern::Both => (x.flip(j)?, y.flip(j)?),
    }))
}

/// Reconstructs `u_j v_j` on the pair `(u, v)` obtained from `pattern`
/// and outputs `true` iff the reconstruction disagrees with it. Outside the
/// active half the output is `false`.
#[allow(clippy::too_many_arguments)]
pub fn distinguisher_a<F, R>(
    pattern: FlipPattern,
    i: usize,
    x: &SignVector,
    y: &SignVector,
    t: &Transcript,
    f: &F,
    ell: u64,
    rec_samples: u64,
    rng: &mut R,
) -> Result<bool>
where
    F: TripletEstimator + ?Sized,
    R: RngCore + ?Sized,
{
    let base = rng::fork(rng);
    let Some((u, v)) = flipped_input(pattern, i, x, y)? else {
        return Ok(false);
    };
    let sampler = OffsetSampler::for_size(x.len(), ell)?;
    decide_flipped(i % x.len(), &u, &v, t, f, &sampler, rec_samples, base)
}

#[allow(clippy::too_many_arguments)]
fn decide_flipped<F: TripletEstimator + ?Sized>(
    j: usize,
    u: &SignVector,
    v: &SignVector,
    t: &Transcript,
    f: &F,
    sampler: &OffsetSampler,
    rec_samples: u64,
    base: u64,
) -> Result<bool> {
    if rec_samples == 0 {
        return Err(Error::InvalidParameter(
            "rec_samples must be at least 1".into(),
        ));
    }
    let d = sign_or_minus(rec_score(j, u, v, t, f, sampler, rec_samples, base)?);
    Ok(d != u.get(j) * v.get(j))
}

/// Parameters `(ℓ̂, v̂, d)` of the attacker.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EveParams {
    pub ell_hat: u64,
    pub v_hat: f64,
    pub d: FlipPattern,
}

impl EveParams {
    pub fn new(ell_hat: u64, v_hat: f64, d: FlipPattern) -> Result<Self> {
        if !(v_hat >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "v_hat must be non-negative, got {v_hat}"
            )));
        }
        Ok(Self { ell_hat, v_hat, d })
    }
}

/// Sample counts for one attacker run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EveSamples {
    /// Queries used to estimate `q`.
    pub test: u64,
    /// Votes per reconstruction.
    pub rec: u64,
}

impl EveSamples {
    /// `n⁵` test queries and `n⁴` votes.
    pub fn full(n: usize) -> Self {
        let n = n as u64;
        Self {
            test: n.pow(5),
            rec: n.pow(4),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EveOutcome {
    Zero,
    One,
    Abort,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EveRun {
    pub q: f64,
    pub outcome: EveOutcome,
}

/// `(j, b)`: the position of pair index `i` and the value `r_j` is pinned to
/// so that the entry at `i` stays hidden from the estimator.
pub fn hidden_side(i: usize, n: usize) -> Result<(usize, i8)> {
    let j = pair_position(i, n)?;
    Ok(if i < n { (j, -1) } else { (j, 1) })
}

/// For each threshold in `ell_hats`, how many of `samples` queries with
/// `r_j = b` satisfy `|f - ⟨(x'·y')_{-j}, r_{-j}⟩| <= ℓ̂`.
#[allow(clippy::too_many_arguments)]
pub fn hidden_bit_hits<F: TripletEstimator + ?Sized>(
    i: usize,
    x: &SignVector,
    y: &SignVector,
    t: &Transcript,
    f: &F,
    ell_hats: &[u64],
    samples: u64,
    base: u64,
) -> Result<Vec<u64>> {
    ensure_len(x.len(), y.len())?;
    let n = x.len();
    let (j, b) = hidden_side(i, n)?;
    let z = x.hadamard(y)?.puncture(j)?;
    let lim = n as i64;
    let errors: Vec<u64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(base, s);
            let r = SignVector::uniform_with(n, j, b, &mut rng);
            let x_plus = x.restrict_plus(&r).expect("equal lengths");
            let y_minus = y.restrict_minus(&r).expect("equal lengths");
            let view = TripletView {
                r: &r,
                x_plus: &x_plus,
                y_minus: &y_minus,
                t,
            };
            let a = f.estimate(&view, &mut rng).clamp(-lim, lim);
            (a - z.ip_excluding(&r)).unsigned_abs()
        })
        .collect();
    Ok(ell_hats
        .iter()
        .map(|&l| errors.iter().filter(|&&e| e <= l).count() as u64)
        .collect())
}

/// One run of the attacker on `(i, (x', y'), t)`.
///
/// Aborts when the estimator's hit rate `q` on queries avoiding the entry at
/// `i` is at most `v̂`; otherwise runs the `d`-th distinguisher with `ℓ̂ + 1`.
#[allow(clippy::too_many_arguments)]
pub fn eve_dp<F, R>(
    params: &EveParams,
    i: usize,
    x: &SignVector,
    y: &SignVector,
    t: &Transcript,
    f: &F,
    samples: EveSamples,
    rng: &mut R,
) -> Result<EveRun>
where
    F: TripletEstimator + ?Sized,
    R: RngCore + ?Sized,
{
    if samples.test == 0 {
        return Err(Error::InvalidParameter(
            "test samples must be at least 1".into(),
        ));
    }
    let base = rng::fork(rng);
    let hits = hidden_bit_hits(i, x, y, t, f, &[params.ell_hat], samples.test, base)?[0];
    let q = hits as f64 / samples.test as f64;
    if q <= params.v_hat {
        return Ok(EveRun {
            q,
            outcome: EveOutcome::Abort,
        });
    }
    let one = distinguisher_a(
        params.d,
        i,
        x,
        y,
        t,
        f,
        params.ell_hat + 1,
        samples.rec,
        rng,
    )?;
    Ok(EveRun {
        q,
        outcome: if one {
            EveOutcome::One
        } else {
            EveOutcome::Zero
        },
    })
}

/// The parameter grid searched by [`search_eve_params`].
///
/// `v̂` runs over `[c_ε ℓ/(4√n), c_ε ℓ/(2√n)]` in steps of `ℓ/(√n log³ n)`
/// with `c_ε = e^{4ε} c`; `ℓ̂` runs over `[ℓ+1, ℓ + m⌈log n⌉]` with
/// `m = m_factor · e^{2ε}`, cut where `ℓ̂ + 1` leaves the offset range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EveGrid {
    pub n: usize,
    pub ell: u64,
    pub eps: f64,
    pub c: f64,
    pub m_factor: f64,
}

impl EveGrid {
    pub fn new(n: usize, ell: u64, eps: f64) -> Result<Self> {
        let grid = Self {
            n,
            ell,
            eps,
            c: 1.0,
            m_factor: 1000.0,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_constants(mut self, c: f64, m_factor: f64) -> Result<Self> {
        self.c = c;
        self.m_factor = m_factor;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 4 || self.ell == 0 {
            return Err(Error::InvalidParameter(
                "grid needs n >= 4 and ell >= 1".into(),
            ));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite() && self.c > 0.0 && self.m_factor > 0.0) {
            return Err(Error::InvalidParameter(
                "grid needs finite eps >= 0 and positive constants".into(),
            ));
        }
        if self.ell_hat_values().is_empty() {
            return Err(Error::Precondition(format!(
                "no admissible ell_hat: need ell + 2 <= floor(sqrt(n)) - 2 (n = {}, ell = {})",
                self.n, self.ell
            )));
        }
        Ok(())
    }

    pub fn c_eps(&self) -> f64 {
        (4.0 * self.eps).exp() * self.c
    }

    pub fn v_step(&self) -> f64 {
        let n = self.n as f64;
        self.ell as f64 / (n.sqrt() * n.log2().powi(3))
    }

    pub fn v_range(&self) -> (f64, f64) {
        let base = self.c_eps() * self.ell as f64 / (self.n as f64).sqrt();
        (base / 4.0, base / 2.0)
    }

    fn v_steps(&self) -> u64 {
        let (lo, hi) = self.v_range();
        ((hi - lo) / self.v_step() + 1e-9).floor() as u64
    }

    pub fn v_hat_values(&self) -> Vec<f64> {
        let lo = self.v_range().0;
        (0..=self.v_steps())
            .map(|k| lo + k as f64 * self.v_step())
            .collect()
    }

    /// Whether `v` is one of [`v_hat_values`](Self::v_hat_values).
    pub fn contains_v_hat(&self, v: f64) -> bool {
        let (lo, _) = self.v_range();
        let k = (v - lo) / self.v_step();
        let nearest = k.round();
        nearest >= 0.0 && (k - nearest).abs() < 1e-6 && nearest as u64 <= self.v_steps()
    }

    /// Upper end of the `ℓ̂` range before truncation.
    pub fn ell_hat_limit(&self) -> u64 {
        let m = self.m_factor * (2.0 * self.eps).exp();
        let log_n = (self.n as f64).log2().ceil();
        self.ell + (m * log_n).ceil() as u64
    }

    pub fn ell_hat_values(&self) -> Vec<u64> {
        let cap = OffsetParams::max_ell(self.n).map_or(0, |m| m.saturating_sub(1));
        (self.ell + 1..=self.ell_hat_limit().min(cap)).collect()
    }

    /// Whether the `ℓ̂` range had to be cut to fit the offset windows.
    pub fn is_truncated(&self) -> bool {
        self.ell_hat_values().last() != Some(&self.ell_hat_limit())
    }

    pub fn points(&self) -> Vec<EveParams> {
        let mut out = Vec::new();
        for d in FlipPattern::ALL {
            for &ell_hat in &self.ell_hat_values() {
                for &v_hat in &self.v_hat_values() {
                    out.push(EveParams { ell_hat, v_hat, d });
                }
            }
        }
        out
    }
}

/// Effort spent by [`search_eve_params`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Triplets, each with its own uniform pair index.
    pub triplets: u64,
    pub samples: EveSamples,
}

impl SearchBudget {
    pub fn total_samples(&self, grid: &EveGrid) -> u64 {
        let per_triplet =
            2 * (self.samples.test + 3 * grid.ell_hat_values().len() as u64 * self.samples.rec);
        self.triplets * per_triplet
    }
}

/// The best grid point and its empirical gap
/// `Pr[1 | real] - e^{-ε} Pr[1 | flipped]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EveSearch {
    pub params: EveParams,
    pub gap: f64,
    pub p_real: Rate,
    pub p_flipped: Rate,
    pub candidates: usize,
    pub ell_hat_truncated: bool,
}

/// Per-triplet record: hit counts per `ℓ̂` and distinguisher outputs per
/// `(d, ℓ̂)`, on the real and the flipped input.
struct TripletTrace {
    hits: [Vec<u64>; 2],
    ones: [Vec<bool>; 2],
}

/// Searches the grid for the parameters with the largest distinguishing
/// gap between `(x, y)` and `(x, y)` with entry `i` flipped.
///
/// Every grid point is scored on the same triplets, indices and attacker
/// randomness, and the real and flipped inputs share randomness too. Ties
/// go to the earliest point in [`EveGrid::points`] order.
pub fn search_eve_params<S, F, R>(
    source: &S,
    f: &F,
    grid: &EveGrid,
    budget: &SearchBudget,
    rng: &mut R,
) -> Result<EveSearch>
where
    S: TripletSource + ?Sized,
    F: TripletEstimator + ?Sized,
    R: RngCore + ?Sized,
{
    let n = source.n();
    if grid.n != n {
        return Err(Error::DimensionMismatch {
            left: grid.n,
            right: n,
        });
    }
    if budget.triplets == 0 || budget.samples.test == 0 || budget.samples.rec == 0 {
        return Err(Error::InvalidParameter(
            "search budget must be positive".into(),
        ));
    }
    let ell_hats = grid.ell_hat_values();
    let samplers: Vec<OffsetSampler> = ell_hats
        .iter()
        .map(|&l| OffsetSampler::for_size(n, l + 1))
        .collect::<Result<_>>()?;
    let base = rng::fork(rng);
    let traces: Vec<TripletTrace> = (0..budget.triplets)
        .into_par_iter()
        .map(|k| -> Result<TripletTrace> {
            let mut r = stream(base, k);
            let s = source.draw(&mut r);
            let i = (r.next_u64() % (2 * n as u64)) as usize;
            let (test_base, rec_base) = (r.next_u64(), r.next_u64());
            let flipped = flip_pair(&s.x, &s.y, i)?;
            let inputs = [(&s.x, &s.y), (&flipped.0, &flipped.1)];
            let mut hits: [Vec<u64>; 2] = Default::default();
            let mut ones: [Vec<bool>; 2] = Default::default();
            for (side, (x, y)) in inputs.into_iter().enumerate() {
                hits[side] =
                    hidden_bit_hits(i, x, y, &s.t, f, &ell_hats, budget.samples.test, test_base)?;
                for d in FlipPattern::ALL {
                    let pair = flipped_input(d, i, x, y)?;
                    for sampler in &samplers {
                        let one = match &pair {
                            Some((u, v)) => decide_flipped(
                                i % n,
                                u,
                                v,
                                &s.t,
                                f,
                                sampler,
                                budget.samples.rec,
                                rec_base,
                            )?,
                            None => false,
                        };
                        ones[side].push(one);
                    }
                }
            }
            Ok(TripletTrace { hits, ones })
        })
        .collect::<Result<_>>()?;

    let threshold = (-grid.eps).exp();
    let trials = budget.triplets;
    let mut best: Option<EveSearch> = None;
    let points = grid.points();
    let v_count = grid.v_hat_values().len();
    for (idx, p) in points.iter().enumerate() {
        let l_idx = (idx / v_count) % ell_hats.len();
        let d_idx = idx / (v_count * ell_hats.len());
        let slot = d_idx * ell_hats.len() + l_idx;
        let count = |side: usize| -> u64 {
            traces
                .iter()
                .filter(|tr| {
                    let q = tr.hits[side][l_idx] as f64 / budget.samples.test as f64;
                    q > p.v_hat && tr.ones[side][slot]
                })
                .count() as u64
        };
        let (p_real, p_flipped) = (Rate::new(count(0), trials), Rate::new(count(1), trials));
        let gap = p_real.rate - threshold * p_flipped.rate;
        if best.as_ref().is_none_or(|b| gap > b.gap) {
            best = Some(EveSearch {
                params: *p,
                gap,
                p_real,
                p_flipped,
                candidates: points.len(),
                ell_hat_truncated: grid.is_truncated(),
            });
        }
    }
    Ok(best.expect("grid is non-empty"))
}
