//! Subcommand implementations.

use std::sync::atomic::{AtomicU64, Ordering};

use ipdp_core::agreement::{
    Adversary, BlindAdversary, LeakedInputAdversary, ProportionalAdversary,
};
use ipdp_core::channel::{Channel, ChannelConfig};
use ipdp_core::condense::{TripletEstimator, TripletView};
use ipdp_core::SvSourceSpec;
use rand::RngCore;
use serde::Serialize;
use serde_json::Value;

use crate::checkpoint::Runner;
use crate::error::{CliError, CliResult};
use crate::params::{check, AdversaryArg, ChannelArg, Params};
use crate::report::Report;

mod amplify;
mod audit;
mod condense;
mod gl;
mod ka;
mod recon;

pub struct Command {
    pub name: &'static str,
    /// Parameter keys the command reads, besides the I/O keys.
    pub keys: &'static [&'static str],
    pub run: fn(&Params) -> CliResult<Report>,
}

pub const COMMANDS: [Command; 6] = [
    Command {
        name: "recon",
        keys: recon::KEYS,
        run: recon::run,
    },
    Command {
        name: "ka",
        keys: ka::KEYS,
        run: ka::run,
    },
    Command {
        name: "condense",
        keys: condense::KEYS,
        run: condense::run,
    },
    Command {
        name: "amplify",
        keys: amplify::KEYS,
        run: amplify::run,
    },
    Command {
        name: "audit",
        keys: audit::KEYS,
        run: audit::run,
    },
    Command {
        name: "gl",
        keys: gl::KEYS,
        run: gl::run,
    },
];

pub fn find(name: &str) -> &'static Command {
    COMMANDS
        .iter()
        .find(|c| c.name == name)
        .expect("registered command")
}

pub const DEFAULT_SEED: u64 = 1;

/// Echoes the resolved config and opens the checkpoint.
fn start<C: Serialize>(
    experiment: &str,
    p: &Params,
    config: &C,
    seed: u64,
) -> CliResult<(Value, Runner)> {
    let echo = serde_json::to_value(config).expect("config serialises");
    let runner = Runner::open(p.checkpoint.as_deref(), experiment, &echo, seed)?;
    Ok((echo, runner))
}

/// Channel parameters shared by `ka` and `audit`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ChannelSettings {
    pub kind: ChannelArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_alpha: Option<f64>,
    pub leak: bool,
}

impl ChannelSettings {
    /// Reads the channel keys; `eps` is taken only by channels that use it.
    pub fn from_params(p: &Params, eps_shared: bool) -> CliResult<Self> {
        let kind = p.channel.unwrap_or(ChannelArg::Exact);
        let takes_eps = matches!(kind, ChannelArg::Laplace | ChannelArg::RandomizedResponse);
        let only = |set: bool, want: ChannelArg, key: &str| {
            check(!set || kind == want, || {
                format!("--{key} applies only to the {want:?} channel")
            })
        };
        only(p.z.is_some(), ChannelArg::Constant, "z")?;
        only(
            p.source_alpha.is_some(),
            ChannelArg::Constant,
            "source-alpha",
        )?;
        only(p.radius.is_some(), ChannelArg::BoundedNoise, "radius")?;
        only(p.agreement.is_some(), ChannelArg::Equality, "agreement")?;
        check(eps_shared || takes_eps || p.eps.is_none(), || {
            format!("--eps does not apply to the {kind:?} channel")
        })?;
        Ok(Self {
            kind,
            eps: if takes_eps { p.eps } else { None },
            z: p.z.or((kind == ChannelArg::Constant).then_some(0)),
            radius: p.radius.or((kind == ChannelArg::BoundedNoise).then_some(0)),
            agreement: p.agreement,
            source_alpha: p.source_alpha,
            leak: p.leak.unwrap_or(false),
        })
    }

    pub fn build(&self, n: usize) -> CliResult<Box<dyn Channel>> {
        let source = self
            .source_alpha
            .map(|a| SvSourceSpec::extreme(n, a))
            .transpose()?;
        let config = ChannelConfig {
            kind: self.kind.into(),
            n,
            eps: self.eps,
            z: self.z,
            radius: self.radius,
            agreement: self.agreement,
            source_a: source.clone(),
            source_b: source,
            leak: self.leak,
        };
        Ok(config.build()?)
    }
}

pub fn adversary(kind: AdversaryArg) -> Box<dyn Adversary> {
    match kind {
        AdversaryArg::Blind => Box::new(BlindAdversary),
        AdversaryArg::Proportional => Box::new(ProportionalAdversary),
        AdversaryArg::LeakedInput => Box::new(LeakedInputAdversary),
    }
}

/// Counts the queries made to a triplet estimator.
pub struct CountingEstimator<F> {
    inner: F,
    queries: AtomicU64,
}

impl<F> CountingEstimator<F> {
    pub fn new(inner: F) -> Self {
        Self {
            inner,
            queries: AtomicU64::new(0),
        }
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

impl<F: TripletEstimator> TripletEstimator for CountingEstimator<F> {
    fn estimate(&self, view: &TripletView<'_>, rng: &mut dyn RngCore) -> i64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.inner.estimate(view, rng)
    }
}

/// Requires `value >= min`.
fn at_least<T: PartialOrd + std::fmt::Display>(key: &str, value: T, min: T) -> CliResult<T> {
    if value >= min {
        Ok(value)
    } else {
        Err(CliError::Config(format!(
            "--{key} must be at least {min}, got {value}"
        )))
    }
}

/// Requires `value` to lie in `(lo, hi]`.
fn in_half_open(key: &str, value: f64, lo: f64, hi: f64) -> CliResult<f64> {
    if value > lo && value <= hi {
        Ok(value)
    } else {
        Err(CliError::Config(format!(
            "--{key} must lie in ({lo}, {hi}], got {value}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_keys_must_match_the_kind() {
        let p = Params {
            channel: Some(ChannelArg::Exact),
            z: Some(3),
            ..Params::default()
        };
        assert!(ChannelSettings::from_params(&p, false).is_err());
        let p = Params {
            channel: Some(ChannelArg::Exact),
            eps: Some(1.0),
            ..Params::default()
        };
        assert!(ChannelSettings::from_params(&p, false).is_err());
        let s = ChannelSettings::from_params(&p, true).unwrap();
        assert_eq!(s.eps, None);
        let p = Params {
            channel: Some(ChannelArg::Constant),
            ..Params::default()
        };
        assert_eq!(ChannelSettings::from_params(&p, false).unwrap().z, Some(0));
    }

    #[test]
    fn every_command_key_is_a_param() {
        for c in &COMMANDS {
            for key in c.keys {
                let parsed: Result<Params, _> =
                    serde_json::from_value(serde_json::json!({ *key: null }));
                assert!(parsed.is_ok(), "{} lists unknown key {key}", c.name);
            }
        }
    }
}
