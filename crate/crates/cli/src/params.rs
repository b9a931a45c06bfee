//! Experiment parameters shared by the command line and JSON config files.
//!
//! A config file is a JSON object whose keys are the long flag names. Flags
//! given on the command line replace the file's values. Keys a subcommand
//! does not use are rejected.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorArg {
    /// `f(r) = ⟨z, r⟩`.
    Exact,
    /// `f(r) = 0`.
    Zero,
    /// `⟨z, r⟩` plus rounded Laplace noise of scale `2/eps`.
    Laplace,
    /// Answers replayed from `--table`.
    Replay,
    /// Reads inputs leaked into the transcript, plus noise of scale `--scale`.
    Leaked,
    /// The key-agreement adversary given by `--adversary`.
    Adversary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelArg {
    Laplace,
    RandomizedResponse,
    Constant,
    Exact,
    BoundedNoise,
    Equality,
}

impl From<ChannelArg> for ipdp_core::channel::ChannelKind {
    fn from(c: ChannelArg) -> Self {
        use ipdp_core::channel::ChannelKind as K;
        match c {
            ChannelArg::Laplace => K::Laplace,
            ChannelArg::RandomizedResponse => K::RandomizedResponse,
            ChannelArg::Constant => K::Constant,
            ChannelArg::Exact => K::Exact,
            ChannelArg::BoundedNoise => K::BoundedNoise,
            ChannelArg::Equality => K::Equality,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryArg {
    Blind,
    Proportional,
    LeakedInput,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CondenseMode {
    /// `⟨X, Y⟩ mod modulus`.
    Mod,
    /// `⟨X·Y, R⟩` given `(R, X_{R+}, Y_{R-})`.
    Seeded,
}

/// Every parameter any subcommand reads. All are optional; each subcommand
/// fills in its own defaults.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Params {
    /// Vector length.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Quantisation or accuracy width.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<u64>,
    /// Last width of an `ell` sweep.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell_max: Option<u64>,
    /// Privacy parameter.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Source odds bound (condense) or channel agreement (amplify).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Source odds bounds to sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    /// Modulus of the condensed inner product.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
    /// Monte Carlo trials.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Samples per estimate (votes per bit, inner redraws).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// Master seed.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Worker threads; defaults to one per CPU.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Checkpoint file, written after every block of trials and read back
    /// to resume.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorArg>,
    /// JSON file with `z` and a replay `table`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelArg>,
    /// Output of the constant channel.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<i64>,
    /// Noise radius of the bounded-noise channel.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<i64>,
    /// Agreement probability of the equality channel.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<f64>,
    /// Append both inputs to every transcript.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leak: Option<bool>,
    /// Odds bound of the channel's input sources.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_alpha: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adversary: Option<AdversaryArg>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<CondenseMode>,
    /// Lower quantile reported by the seeded condenser.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Hash output bits.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Decoder runs in the amplify benchmark.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gl_runs: Option<u64>,
    /// Fraction of parity-oracle answers that are flipped.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    /// Oracle agreement the decoder is sized for.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design_agreement: Option<f64>,
    /// Decoder success probability the probe count is sized for.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    /// Pair index flipped by the audit, in `[0, 2n)`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    /// Radius of the audit's acceptance test.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within: Option<i64>,
    /// Triplets scored by the attacker parameter search; 0 skips it.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triplets: Option<u64>,
    /// Queries per hit-rate estimate in the attacker.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_samples: Option<u64>,
    /// Laplace scale of the leaked-input estimator.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Constant of the attacker's `v̂` range.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Factor of the attacker's `ℓ̂` range.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_factor: Option<f64>,
}

/// Keys every subcommand accepts.
const IO_KEYS: [&str; 5] = ["seed", "out", "format", "threads", "checkpoint"];

/// Config key naming the subcommand a file is meant for.
const COMMAND_KEY: &str = "command";

/// Merges `flags` over the config file at `path` and checks that only keys
/// in `allowed` (plus the I/O keys) are set.
pub fn resolve(
    command: &str,
    allowed: &[&str],
    path: Option<&Path>,
    flags: &Params,
) -> CliResult<Params> {
    let mut map = match path {
        Some(p) => load(p)?,
        None => Map::new(),
    };
    if let Some(v) = map.remove(COMMAND_KEY) {
        if v.as_str() != Some(command) {
            return Err(CliError::Config(format!(
                "config file is for command {v}, not \"{command}\""
            )));
        }
    }
    let Value::Object(overlay) = serde_json::to_value(flags).expect("params serialise") else {
        unreachable!("params serialise to an object")
    };
    map.extend(overlay);
    let params: Params =
        serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Config(e.to_string()))?;
    let Value::Object(set) = serde_json::to_value(&params).expect("params serialise") else {
        unreachable!("params serialise to an object")
    };
    let unused: Vec<&str> = set
        .keys()
        .map(String::as_str)
        .filter(|k| !IO_KEYS.contains(k) && !allowed.contains(k))
        .collect();
    if !unused.is_empty() {
        return Err(CliError::Config(format!(
            "{command} does not use: {}",
            unused.join(", ")
        )));
    }
    Ok(params)
}

fn load(path: &Path) -> CliResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Config(format!(
            "{}: expected a JSON object",
            path.display()
        ))),
        Err(e) => Err(CliError::Config(format!("{}: {e}", path.display()))),
    }
}

/// Fails with a config error unless `ok`.
pub fn check(ok: bool, message: impl FnOnce() -> String) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(message()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn flags_override_the_file() {
        let f = file(r#"{"n": 100, "ell": 3, "trials": 50}"#);
        let flags = Params {
            ell: Some(5),
            ..Params::default()
        };
        let p = resolve("ka", &["n", "ell", "trials"], Some(f.path()), &flags).unwrap();
        assert_eq!((p.n, p.ell, p.trials), (Some(100), Some(5), Some(50)));
    }

    #[test]
    fn rejects_unknown_and_unused_keys() {
        let f = file(r#"{"n": 100, "bogus": 1}"#);
        assert!(matches!(
            resolve("ka", &["n"], Some(f.path()), &Params::default()),
            Err(CliError::Config(_))
        ));
        let flags = Params {
            noise: Some(0.1),
            ..Params::default()
        };
        assert!(matches!(
            resolve("ka", &["n"], None, &flags),
            Err(CliError::Config(_))
        ));
        let flags = Params {
            seed: Some(3),
            threads: Some(1),
            ..Params::default()
        };
        assert!(resolve("ka", &["n"], None, &flags).is_ok());
    }

    #[test]
    fn command_key_must_match() {
        let f = file(r#"{"command": "gl", "n": 8}"#);
        assert!(resolve("gl", &["n"], Some(f.path()), &Params::default()).is_ok());
        assert!(matches!(
            resolve("ka", &["n"], Some(f.path()), &Params::default()),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn malformed_files_are_config_errors() {
        for text in ["[1, 2]", "{", r#"{"n": -3}"#, r#"{"format": "xml"}"#] {
            let f = file(text);
            assert!(matches!(
                resolve("ka", &["n"], Some(f.path()), &Params::default()),
                Err(CliError::Config(_))
            ));
        }
    }
}
