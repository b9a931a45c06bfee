//! `amplify`: the hash amplifier on an equality channel, its repetition
//! wrapper, and a Goldreich–Levin decoding benchmark.

use ipdp_core::agreement::{
    amplifier_stats, default_hash_bits, max_attempts, repeat_stats, MAX_OUTPUT_BITS,
};
use ipdp_core::channel::EqualityChannel;
use ipdp_core::Rate;
use serde::Serialize;

use super::gl::GlBench;
use super::{at_least, in_half_open, start, DEFAULT_SEED};
use crate::checkpoint::Counts;
use crate::error::CliResult;
use crate::params::{check, Params};
use crate::report::Report;

pub const KEYS: &[&str] = &[
    "n",
    "alpha",
    "m",
    "trials",
    "gl-runs",
    "noise",
    "design-agreement",
    "confidence",
];

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct AmplifyConfig {
    n: usize,
    alpha: f64,
    m: usize,
    trials: u64,
    max_attempts: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gl: Option<GlBench>,
    seed: u64,
}

pub fn run(p: &Params) -> CliResult<Report> {
    let n = at_least("n", p.n.unwrap_or(32), 1)?;
    let alpha = in_half_open("alpha", p.alpha.unwrap_or(0.25), 0.0, 1.0)?;
    let m = p.m.map_or_else(|| default_hash_bits(alpha), Ok)?;
    check((1..=MAX_OUTPUT_BITS).contains(&m), || {
        format!("--m must lie in [1, {MAX_OUTPUT_BITS}], got {m}")
    })?;
    let gl_runs = p.gl_runs.unwrap_or(20);
    check(
        gl_runs > 0
            || (p.noise.is_none() && p.design_agreement.is_none() && p.confidence.is_none()),
        || "decoder settings need --gl-runs > 0".into(),
    )?;
    let config = AmplifyConfig {
        n,
        alpha,
        m,
        trials: at_least("trials", p.trials.unwrap_or(100_000), 1)?,
        max_attempts: max_attempts(alpha)?,
        gl: if gl_runs > 0 {
            Some(GlBench::from_params(p, n, gl_runs)?)
        } else {
            None
        },
        seed: p.seed.unwrap_or(DEFAULT_SEED),
    };
    let channel = EqualityChannel::new(n, alpha)?;
    let (echo, mut runner) = start("amplify", p, &config, config.seed)?;

    let trials = config.trials;
    let amp = runner.run("amplifier", trials, |rng, _, len| {
        let s = amplifier_stats(&channel, m, len, len, rng)?;
        Ok(Counts(vec![s.trials, s.agreement.trials, s.agreement.hits]))
    })?;
    let rep = runner.run("repeat", trials, |rng, _, len| {
        let s = repeat_stats(&channel, alpha, m, len, rng)?;
        let attempts = (s.mean_attempts * len as f64).round() as u64;
        Ok(Counts(vec![s.all_fail.hits, s.agreement.hits, attempts]))
    })?;
    let (runs, matches, agree) = (amp.0[0], amp.0[1], amp.0[2]);
    let mut b = Report::builder("amplify", echo, config.seed);
    b.rate("abort", Rate::new(runs - matches, runs))
        .rate("agreement_given_match", Rate::new(agree, matches))
        .rate("repeat_all_fail", Rate::new(rep.0[0], trials))
        .value("repeat_all_fail_bound", (-5.0f64).exp(), trials)
        .rate("repeat_agreement", Rate::new(rep.0[1], trials))
        .value(
            "repeat_mean_attempts",
            rep.0[2] as f64 / trials as f64,
            trials,
        )
        .queries("channel", runs + rep.0[2]);
    if let Some(gl) = &config.gl {
        gl.run(&mut runner, "gl", &mut b)?;
    }
    Ok(b.finish())
}
