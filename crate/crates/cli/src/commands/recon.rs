//! `recon`: certify an estimator and reconstruct every bit of `z` from it.

use std::path::PathBuf;

use ipdp_core::recon::{
    certify_estimator, vote_mean, Estimator, EstimatorHandle, EstimatorProfile, ExactEstimator,
    LaplaceEstimator, OffsetSampler, TableEstimator, ZeroEstimator,
};
use ipdp_core::rng::stream;
use ipdp_core::stats::sign_or_minus;
use ipdp_core::{Laplace, Rate, SignVector};
use serde::{Deserialize, Serialize};

use super::{at_least, start, DEFAULT_SEED};
use crate::checkpoint::Counts;
use crate::error::{CliError, CliResult};
use crate::params::{check, EstimatorArg, Params};
use crate::report::Report;

pub const KEYS: &[&str] = &["n", "ell", "eps", "trials", "samples", "estimator", "table"];

/// Votes per bit unless `--samples` is given.
pub const DEFAULT_SAMPLES: u64 = 1 << 14;

/// Replay input: the hidden vector and the recorded answers.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReplayFile {
    z: SignVector,
    table: TableEstimator,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ReconConfig {
    n: usize,
    ell: u64,
    estimator: EstimatorArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<PathBuf>,
    trials: u64,
    samples: u64,
    seed: u64,
}

pub fn run(p: &Params) -> CliResult<Report> {
    let estimator = p.estimator.unwrap_or(EstimatorArg::Exact);
    check(
        matches!(
            estimator,
            EstimatorArg::Exact | EstimatorArg::Zero | EstimatorArg::Laplace | EstimatorArg::Replay
        ),
        || format!("recon does not support the {estimator:?} estimator"),
    )?;
    check(
        p.eps.is_none() || estimator == EstimatorArg::Laplace,
        || "--eps applies only to --estimator laplace".into(),
    )?;
    check(
        p.table.is_some() == (estimator == EstimatorArg::Replay),
        || "--table is required by, and only used with, --estimator replay".into(),
    )?;
    let replay = match &p.table {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let mut file: ReplayFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            file.table.reindex()?;
            check(file.z.len() == file.table.n, || {
                "replay z and table lengths differ".into()
            })?;
            check(p.n.is_none_or(|n| n == file.z.len()), || {
                "--n differs from the replay table".into()
            })?;
            Some(file)
        }
        None => None,
    };
    let config = ReconConfig {
        n: replay.as_ref().map_or(p.n.unwrap_or(64), |r| r.z.len()),
        ell: p.ell.unwrap_or(1),
        estimator,
        eps: (estimator == EstimatorArg::Laplace).then(|| p.eps.unwrap_or(1.0)),
        table: p.table.clone(),
        trials: at_least("trials", p.trials.unwrap_or(10_000), 1)?,
        samples: at_least("samples", p.samples.unwrap_or(DEFAULT_SAMPLES), 1)?,
        seed: p.seed.unwrap_or(DEFAULT_SEED),
    };
    let sampler = OffsetSampler::for_size(config.n, config.ell)?;
    let (echo, mut runner) = start("recon", p, &config, config.seed)?;

    let n = config.n;
    let (z, f): (SignVector, Box<dyn Estimator>) = match replay {
        Some(r) => (r.z, Box::new(r.table)),
        None => {
            let z = SignVector::uniform(n, &mut stream(runner.stage_seed("z"), 0));
            let f: Box<dyn Estimator> = match estimator {
                EstimatorArg::Exact => Box::new(ExactEstimator::new(z.clone())),
                EstimatorArg::Zero => Box::new(ZeroEstimator::new(n)),
                _ => {
                    let scale =
                        Laplace::for_privacy(config.eps.expect("laplace has eps"), 2.0)?.scale();
                    Box::new(LaplaceEstimator::new(
                        z.clone(),
                        scale,
                        runner.stage_seed("noise"),
                    )?)
                }
            };
            (z, f)
        }
    };
    let f = EstimatorHandle::new(f);

    let cert = runner.run("certify", config.trials, |rng, _, len| {
        let before = f.query_count();
        let profile = certify_estimator(&f, &z, config.ell, len, rng)?;
        Ok(Counts(vec![profile.hits, f.query_count() - before]))
    })?;
    let recon = runner.run_blocks("reconstruct", n as u64, 1, |rng, i, _| {
        let i = i as usize;
        let before = f.query_count();
        let tally = vote_mean(&z.puncture(i)?, &f, &sampler, config.samples, rng)?;
        let correct = sign_or_minus(tally.sum) == z.get(i);
        Ok(Counts(vec![correct as u64, f.query_count() - before]))
    })?;

    let rate = Rate::new(cert.0[0], config.trials);
    let profile = EstimatorProfile::from_hits(n, config.ell, rate.hits, rate.trials);
    let mut b = Report::builder("recon", echo, config.seed);
    b.rate("certified_rate", rate)
        .interval(
            "lambda_hat",
            profile.lambda_hat,
            (n as f64).sqrt() / config.ell as f64 * rate.half_width,
            config.trials,
        )
        .value("frac_correct", recon.0[0] as f64 / n as f64, n as u64)
        .value("samples_per_bit", config.samples as f64, n as u64)
        .queries("certify", cert.0[1])
        .queries("reconstruct", recon.0[1]);
    Ok(b.finish())
}
