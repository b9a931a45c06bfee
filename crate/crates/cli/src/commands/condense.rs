//! `condense`: min-entropy of `⟨X, Y⟩ mod c` or of the seeded extractor
//! output, for one or more source odds bounds.

use ipdp_core::condense::{
    condense_mod_counts, conditional_estimates, MinEntropyEstimate, SeededCondenseReport,
};
use ipdp_core::stats::isqrt;
use ipdp_core::SvSourceSpec;
use serde::Serialize;

use super::{at_least, in_half_open, start, DEFAULT_SEED};
use crate::checkpoint::{Counts, Values};
use crate::error::CliResult;
use crate::params::{check, CondenseMode, Params};
use crate::report::Report;

pub const KEYS: &[&str] = &[
    "n", "alpha", "alphas", "mode", "modulus", "trials", "samples", "delta",
];

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct CondenseConfig {
    n: usize,
    mode: CondenseMode,
    alphas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    modulus: Option<u64>,
    trials: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    seed: u64,
}

pub fn run(p: &Params) -> CliResult<Report> {
    let mode = p.mode.unwrap_or(CondenseMode::Mod);
    let seeded = mode == CondenseMode::Seeded;
    check(!(p.alpha.is_some() && p.alphas.is_some()), || {
        "give --alpha or --alphas, not both".into()
    })?;
    check(seeded || (p.samples.is_none() && p.delta.is_none()), || {
        "--samples and --delta need --mode seeded".into()
    })?;
    check(!seeded || p.modulus.is_none(), || {
        "--modulus needs --mode mod".into()
    })?;
    let n = at_least("n", p.n.unwrap_or(if seeded { 64 } else { 1024 }), 1)?;
    let alphas = match (&p.alphas, p.alpha) {
        (Some(a), _) => a.clone(),
        (None, Some(a)) => vec![a],
        (None, None) => vec![1.0],
    };
    check(!alphas.is_empty(), || "--alphas is empty".into())?;
    for &a in &alphas {
        in_half_open("alpha", a, 0.0, 1.0)?;
    }
    let config = CondenseConfig {
        n,
        mode,
        alphas,
        modulus: (!seeded).then(|| p.modulus.unwrap_or(isqrt(n as u64).max(2))),
        trials: at_least(
            "trials",
            p.trials.unwrap_or(if seeded { 200 } else { 1_000_000 }),
            1,
        )?,
        samples: seeded.then(|| p.samples.unwrap_or(20_000)),
        delta: seeded.then(|| p.delta.unwrap_or(0.05)),
        seed: p.seed.unwrap_or(DEFAULT_SEED),
    };
    if let Some(m) = config.modulus {
        at_least("modulus", m, 2)?;
    }
    if let Some(s) = config.samples {
        at_least("samples", s, 1)?;
    }
    if let Some(d) = config.delta {
        in_half_open("delta", d, 0.0, 1.0)?;
    }
    let sources: Vec<SvSourceSpec> = config
        .alphas
        .iter()
        .map(|&a| SvSourceSpec::extreme(n, a))
        .collect::<Result<_, _>>()?;
    let (echo, mut runner) = start("condense", p, &config, config.seed)?;

    let trials = config.trials;
    let mut b = Report::builder("condense", echo, config.seed);
    // (ln alpha, entropy) per source.
    let mut h_values = Vec::new();
    for (&alpha, src) in config.alphas.iter().zip(&sources) {
        let tag = format!("alpha={alpha}");
        let h = match (config.modulus, config.samples, config.delta) {
            (Some(modulus), _, _) => {
                let counts = runner.run(&format!("mod/{tag}"), trials, |rng, _, len| {
                    Ok(Counts(condense_mod_counts(src, src, modulus, len, rng)?))
                })?;
                let est = MinEntropyEstimate::from_counts(&counts.0, trials);
                b.value(format!("h_min[{tag}]"), est.h_min, trials)
                    .value(format!("max_freq[{tag}]"), est.max_freq, trials)
                    .value(format!("argmax[{tag}]"), est.argmax as f64, trials)
                    .value(
                        format!("reliable[{tag}]"),
                        est.reliable as u8 as f64,
                        trials,
                    );
                est.h_min
            }
            (None, Some(inner), Some(delta)) => {
                let est: Values<MinEntropyEstimate> =
                    runner.run(&format!("seeded/{tag}"), trials, |rng, _, len| {
                        Ok(Values(conditional_estimates(src, src, len, inner, rng)?))
                    })?;
                let r = SeededCondenseReport::from_estimates(n, delta, inner, &est.0)?;
                b.value(format!("quantile[{tag}]"), r.quantile, trials)
                    .value(format!("median[{tag}]"), r.median, trials)
                    .value(format!("mean[{tag}]"), r.mean, trials)
                    .value(format!("min[{tag}]"), r.min, trials)
                    .value(format!("reliable[{tag}]"), r.reliable as u8 as f64, trials);
                r.median
            }
            _ => unreachable!("mode fixes which settings are present"),
        };
        h_values.push((alpha.ln(), h));
    }
    if h_values.len() > 1 {
        b.value("h_slope_ln_alpha", slope_ln_alpha(&h_values), trials);
    }
    Ok(b.finish())
}

/// Least-squares slope of entropy against `ln alpha`; positive when entropy
/// falls as the sources get more biased. Zero if every `alpha` is equal.
fn slope_ln_alpha(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<(f64, f64)> = [1.0f64, 0.5, 0.1]
            .iter()
            .map(|a| (a.ln(), 2.0 + 3.0 * a.ln()))
            .collect();
        assert!((slope_ln_alpha(&pts) - 3.0).abs() < 1e-12);
        assert_eq!(slope_ln_alpha(&[(0.0, 1.0), (0.0, 2.0)]), 0.0);
    }
}
