//! `gl`: recovery rate of the Goldreich–Levin decoder on noisy parity
//! oracles.

use std::sync::atomic::{AtomicU64, Ordering};

use ipdp_core::agreement::{gl_decode, GlParams, NoisyParity, ParityOracle};
use ipdp_core::{Rate, SignVector};
use rand::RngCore;
use serde::Serialize;

use super::{at_least, start, DEFAULT_SEED};
use crate::checkpoint::{Counts, Runner};
use crate::error::{CliError, CliResult};
use crate::params::Params;
use crate::report::{Report, ReportBuilder};

pub const KEYS: &[&str] = &["n", "trials", "noise", "design-agreement", "confidence"];

pub const DEFAULT_NOISE: f64 = 0.2;
pub const DEFAULT_DESIGN_AGREEMENT: f64 = 0.76;
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// Decoder benchmark settings.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GlBench {
    pub n: usize,
    pub runs: u64,
    pub noise: f64,
    pub design_agreement: f64,
    pub confidence: f64,
}

impl GlBench {
    pub fn from_params(p: &Params, n: usize, runs: u64) -> CliResult<Self> {
        let noise = p.noise.unwrap_or(DEFAULT_NOISE);
        if !(0.0..=1.0).contains(&noise) {
            return Err(CliError::Config(format!(
                "--noise must lie in [0, 1], got {noise}"
            )));
        }
        let bench = Self {
            n,
            runs,
            noise,
            design_agreement: p.design_agreement.unwrap_or(DEFAULT_DESIGN_AGREEMENT),
            confidence: p.confidence.unwrap_or(DEFAULT_CONFIDENCE),
        };
        bench.params()?;
        Ok(bench)
    }

    pub fn params(&self) -> CliResult<GlParams> {
        Ok(GlParams::for_agreement(
            self.n,
            self.design_agreement,
            self.confidence,
        )?)
    }

    /// Runs the benchmark as stage `stage` and adds its metrics to `b`.
    pub fn run(&self, runner: &mut Runner, stage: &str, b: &mut ReportBuilder) -> CliResult<()> {
        let params = self.params()?;
        let c = runner.run(stage, self.runs, |rng, _, len| {
            let mut acc = [0u64; 3];
            for _ in 0..len {
                let x = SignVector::uniform(self.n, rng);
                let oracle = NoisyParity::new(x.clone(), self.noise, rng.next_u64())?;
                let queries = AtomicU64::new(0);
                let counted = |r: &SignVector| {
                    queries.fetch_add(1, Ordering::Relaxed);
                    oracle.query(r)
                };
                let guess = gl_decode(&counted, self.n, params, rng)?;
                acc[0] += (guess == x) as u64;
                acc[1] += (self.n - guess.hamming(&x)?) as u64;
                acc[2] += queries.into_inner();
            }
            Ok(Counts(acc.to_vec()))
        })?;
        b.rate(format!("{stage}_recovery"), Rate::new(c.0[0], self.runs))
            .rate(
                format!("{stage}_bit_accuracy"),
                Rate::new(c.0[1], self.runs * self.n as u64),
            )
            .value(format!("{stage}_probes"), params.probes as f64, self.runs)
            .queries(format!("{stage}_oracle"), c.0[2]);
        Ok(())
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct GlConfig {
    #[serde(flatten)]
    bench: GlBench,
    seed: u64,
}

pub fn run(p: &Params) -> CliResult<Report> {
    let n = at_least("n", p.n.unwrap_or(64), 1)?;
    let runs = at_least("trials", p.trials.unwrap_or(100), 1)?;
    let config = GlConfig {
        bench: GlBench::from_params(p, n, runs)?,
        seed: p.seed.unwrap_or(DEFAULT_SEED),
    };
    let (echo, mut runner) = start("gl", p, &config, config.seed)?;
    let mut b = Report::builder("gl", echo, config.seed);
    config.bench.run(&mut runner, "gl", &mut b)?;
    Ok(b.finish())
}
