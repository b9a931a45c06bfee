//! `audit`: a paired privacy audit of a channel and a search for the best
//! attacker parameters on it.

use ipdp_core::agreement::adversary_to_ip_estimator;
use ipdp_core::channel::{dp_audit, WithinRadius};
use ipdp_core::condense::{
    search_eve_params, EveGrid, EveSamples, LeakedProductEstimator, SearchBudget, TripletEstimator,
};
use ipdp_core::rng::stream;
use ipdp_core::Rate;
use serde::Serialize;

use super::{adversary, at_least, start, ChannelSettings, CountingEstimator, DEFAULT_SEED};
use crate::checkpoint::Counts;
use crate::error::{CliError, CliResult};
use crate::params::{check, AdversaryArg, EstimatorArg, Params};
use crate::report::Report;

pub const KEYS: &[&str] = &[
    "n",
    "ell",
    "eps",
    "trials",
    "samples",
    "index",
    "within",
    "triplets",
    "test-samples",
    "estimator",
    "adversary",
    "scale",
    "c",
    "m-factor",
    "channel",
    "z",
    "radius",
    "agreement",
    "leak",
    "source-alpha",
];

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct SearchConfig {
    triplets: u64,
    test_samples: u64,
    samples: u64,
    estimator: EstimatorArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    adversary: Option<AdversaryArg>,
    c: f64,
    m_factor: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct AuditConfig {
    n: usize,
    ell: u64,
    eps: f64,
    channel: ChannelSettings,
    trials: u64,
    index: usize,
    within: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    search: Option<SearchConfig>,
    seed: u64,
}

fn search_config(p: &Params) -> CliResult<Option<SearchConfig>> {
    let triplets = p.triplets.unwrap_or(200);
    let estimator = p.estimator.unwrap_or(EstimatorArg::Leaked);
    if triplets == 0 {
        let unused = p.test_samples.is_some()
            || p.samples.is_some()
            || p.estimator.is_some()
            || p.adversary.is_some()
            || p.scale.is_some()
            || p.c.is_some()
            || p.m_factor.is_some();
        check(!unused, || "attacker settings need --triplets > 0".into())?;
        return Ok(None);
    }
    check(
        matches!(estimator, EstimatorArg::Leaked | EstimatorArg::Adversary),
        || format!("audit does not support the {estimator:?} estimator"),
    )?;
    let leaked = estimator == EstimatorArg::Leaked;
    check(leaked || p.scale.is_none(), || {
        "--scale applies only to --estimator leaked".into()
    })?;
    check(!leaked || p.adversary.is_none(), || {
        "--adversary applies only to --estimator adversary".into()
    })?;
    Ok(Some(SearchConfig {
        triplets,
        test_samples: at_least("test-samples", p.test_samples.unwrap_or(2000), 1)?,
        samples: at_least("samples", p.samples.unwrap_or(2000), 1)?,
        estimator,
        scale: leaked.then(|| p.scale.unwrap_or(0.0)),
        adversary: (!leaked).then(|| p.adversary.unwrap_or(AdversaryArg::Blind)),
        c: p.c.unwrap_or(1.0),
        m_factor: p.m_factor.unwrap_or(1000.0),
    }))
}

pub fn run(p: &Params) -> CliResult<Report> {
    let ell = at_least("ell", p.ell.unwrap_or(1), 1)?;
    let eps = p.eps.unwrap_or(0.0);
    check(eps >= 0.0 && eps.is_finite(), || {
        format!("--eps must be finite and non-negative, got {eps}")
    })?;
    let config = AuditConfig {
        n: at_least("n", p.n.unwrap_or(64), 1)?,
        ell,
        eps,
        channel: ChannelSettings::from_params(p, true)?,
        trials: at_least("trials", p.trials.unwrap_or(100_000), 1)?,
        index: p.index.unwrap_or(0),
        within: p.within.unwrap_or(ell as i64),
        search: search_config(p)?,
        seed: p.seed.unwrap_or(DEFAULT_SEED),
    };
    let n = config.n;
    check(config.index < 2 * n, || {
        format!("--index must lie in [0, {}), got {}", 2 * n, config.index)
    })?;
    let channel = config.channel.build(n)?;
    let grid = match &config.search {
        Some(s) => Some(EveGrid::new(n, ell, eps)?.with_constants(s.c, s.m_factor)?),
        None => None,
    };
    let (echo, mut runner) = start("audit", p, &config, config.seed)?;

    let trials = config.trials;
    let test = WithinRadius(config.within);
    let dp = runner.run("dp", trials, |rng, _, len| {
        let a = dp_audit(&channel, &test, config.index, len, rng)?;
        Ok(Counts(vec![a.p_real.hits, a.p_flipped.hits]))
    })?;
    let (p_real, p_flipped) = (Rate::new(dp.0[0], trials), Rate::new(dp.0[1], trials));
    let floor = 1.0 / trials as f64;
    let mut b = Report::builder("audit", echo, config.seed);
    b.rate("dp_p_real", p_real)
        .rate("dp_p_flipped", p_flipped)
        .value(
            "dp_eps_hat_lower",
            (p_real.rate.max(floor) / p_flipped.rate.max(floor)).ln(),
            trials,
        )
        .queries("channel", trials);

    if let (Some(s), Some(grid)) = (&config.search, &grid) {
        let budget = SearchBudget {
            triplets: s.triplets,
            samples: EveSamples {
                test: s.test_samples,
                rec: s.samples,
            },
        };
        let f: Box<dyn TripletEstimator> = match s.adversary {
            None => Box::new(LeakedProductEstimator::noisy(s.scale.unwrap_or(0.0))?),
            Some(kind) => Box::new(adversary_to_ip_estimator(adversary(kind), ell)?),
        };
        let f = CountingEstimator::new(f);
        let mut rng = stream(runner.stage_seed("search"), 0);
        let found =
            search_eve_params(&channel, &f, grid, &budget, &mut rng).map_err(CliError::from)?;
        let t = s.triplets;
        b.value("search_gap", found.gap, t)
            .rate("search_p_real", found.p_real)
            .rate("search_p_flipped", found.p_flipped)
            .value("search_ell_hat", found.params.ell_hat as f64, t)
            .value("search_v_hat", found.params.v_hat, t)
            .value("search_d", u8::from(found.params.d) as f64, t)
            .value(
                "search_v_hat_on_grid",
                grid.contains_v_hat(found.params.v_hat) as u8 as f64,
                t,
            )
            .value(
                "search_ell_hat_truncated",
                found.ell_hat_truncated as u8 as f64,
                t,
            )
            .value("search_candidates", found.candidates as f64, t)
            .queries("channel", t)
            .queries("estimator", f.queries());
    }
    Ok(b.finish())
}
