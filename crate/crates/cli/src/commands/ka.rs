//! `ka`: agreement and equality leakage of the quantised protocol over a
//! channel, for each width in `[ell, ell-max]`.

use ipdp_core::agreement::{agreement_stats, equality_leakage_rate};
use ipdp_core::Rate;
use serde::Serialize;

use super::{adversary, at_least, start, ChannelSettings, DEFAULT_SEED};
use crate::checkpoint::Counts;
use crate::error::CliResult;
use crate::params::{check, AdversaryArg, Params};
use crate::report::Report;

pub const KEYS: &[&str] = &[
    "n",
    "ell",
    "ell-max",
    "trials",
    "adversary",
    "channel",
    "eps",
    "z",
    "radius",
    "agreement",
    "leak",
    "source-alpha",
];

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct KaConfig {
    n: usize,
    ell: u64,
    ell_max: u64,
    trials: u64,
    channel: ChannelSettings,
    adversary: AdversaryArg,
    seed: u64,
}

pub fn run(p: &Params) -> CliResult<Report> {
    let ell = at_least("ell", p.ell.unwrap_or(4), 1)?;
    let config = KaConfig {
        n: at_least("n", p.n.unwrap_or(256), 1)?,
        ell,
        ell_max: p.ell_max.unwrap_or(ell),
        trials: at_least("trials", p.trials.unwrap_or(100_000), 1)?,
        channel: ChannelSettings::from_params(p, false)?,
        adversary: p.adversary.unwrap_or(AdversaryArg::Blind),
        seed: p.seed.unwrap_or(DEFAULT_SEED),
    };
    check(config.ell_max >= ell, || {
        format!("--ell-max must be at least --ell = {ell}")
    })?;
    let channel = config.channel.build(config.n)?;
    let eve = adversary(config.adversary);
    let (echo, mut runner) = start("ka", p, &config, config.seed)?;

    let trials = config.trials;
    let mut b = Report::builder("ka", echo, config.seed);
    for ell in config.ell..=config.ell_max {
        let c = runner.run(&format!("agree/ell={ell}"), trials, |rng, _, len| {
            let s = agreement_stats(&channel, ell, len, rng)?;
            Ok(Counts(vec![
                s.agree.hits,
                s.within_ell.hits,
                s.within_half.hits,
                s.agree_given_half.hits,
                s.implication_violations,
            ]))
        })?;
        let leak = runner.run(&format!("leak/ell={ell}"), trials, |rng, _, len| {
            let l = equality_leakage_rate(&channel, ell, &eve, len, rng)?;
            Ok(Counts(vec![l.agreements, l.success.hits]))
        })?;
        let within = Rate::new(c.0[1], trials);
        b.rate(format!("agree[ell={ell}]"), Rate::new(c.0[0], trials))
            .rate(format!("within_ell[ell={ell}]"), within)
            .rate(format!("within_half[ell={ell}]"), Rate::new(c.0[2], trials))
            .rate(
                format!("agree_given_half[ell={ell}]"),
                Rate::new(c.0[3], c.0[2]),
            )
            .interval(
                format!("floor[ell={ell}]"),
                0.25 * within.rate,
                0.25 * within.half_width,
                trials,
            )
            .value(
                format!("implication_violations[ell={ell}]"),
                c.0[4] as f64,
                trials,
            )
            .rate(
                format!("leakage[ell={ell}]"),
                Rate::new(leak.0[1], leak.0[0]),
            )
            .queries("channel", 2 * trials);
    }
    Ok(b.finish())
}
