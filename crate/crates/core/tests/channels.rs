mod common;

use common::{binomial_within, rounded_laplace_pmf, rounded_laplace_within};
use ipdp_core::channel::{
    accuracy_profile, dp_audit, estimate_accuracy, Channel, ChannelConfig, ChannelKind,
    ConstantChannel, LaplaceIpChannel, RandomizedResponseChannel, WithinRadius,
};
use ipdp_core::rng::stream;
use ipdp_core::{inner_product, SignVector, SvSourceSpec};

#[test]
fn laplace_channel_accuracy_matches_the_noise_law() {
    let c = LaplaceIpChannel::new(100, 1.0).unwrap();
    let trials = 200_000;
    let rep = estimate_accuracy(&c, 10, trials, &mut stream(1, 0)).unwrap();
    let want = rounded_laplace_within(10, 2.0);
    let sigma = (want * (1.0 - want) / trials as f64).sqrt();
    assert!(
        (rep.gamma_hat - want).abs() <= 4.0 * sigma,
        "{} vs {want}",
        rep.gamma_hat
    );
}

#[test]
fn constant_channel_accuracy_is_binomial() {
    for n in [10usize, 21, 30] {
        let c = ConstantChannel::uniform(n, 0).unwrap();
        let trials = 100_000;
        let reps = accuracy_profile(&c, &[0, 1, 2, 4], trials, &mut stream(2, n as u64)).unwrap();
        for rep in reps {
            let want = binomial_within(n, rep.alpha as u64);
            let sigma = (want * (1.0 - want) / trials as f64).sqrt().max(1e-9);
            assert!(
                (rep.gamma_hat - want).abs() <= 4.0 * sigma,
                "n={n} alpha={}",
                rep.alpha
            );
        }
    }
}

#[test]
fn laplace_audit_stays_below_eps() {
    // Flipping one entry moves ⟨x, y⟩ by 2, so any test has likelihood
    // ratio at most e^eps under Lap(2/eps).
    let eps = 1.0;
    let c = LaplaceIpChannel::new(8, eps).unwrap();
    let trials = 400_000;
    for radius in [0, 1, 3] {
        let a = dp_audit(
            &c,
            &WithinRadius(radius),
            3,
            trials,
            &mut stream(3, radius as u64),
        )
        .unwrap();
        // Delta-method standard error of the log ratio.
        let se = (a.p_real.std_error() / a.p_real.rate)
            .hypot(a.p_flipped.std_error() / a.p_flipped.rate);
        assert!(
            a.eps_hat_lower <= eps + 4.0 * se,
            "radius {radius}: {}",
            a.eps_hat_lower
        );
    }
    // The exact audit value for radius 0: Pr[⌊W⌉ = 0] / Pr[⌊W⌉ = ±2].
    let a = dp_audit(&c, &WithinRadius(0), 3, trials, &mut stream(4, 0)).unwrap();
    let b = 2.0 / eps;
    let want = (rounded_laplace_pmf(0, b) / rounded_laplace_pmf(2, b)).ln();
    let se =
        (a.p_real.std_error() / a.p_real.rate).hypot(a.p_flipped.std_error() / a.p_flipped.rate);
    assert!((a.eps_hat_lower - want).abs() <= 4.0 * se);
}

#[test]
fn randomized_response_is_unbiased() {
    let n = 200;
    let c = RandomizedResponseChannel::new(n, 1.0).unwrap();
    let mut rng = stream(5, 0);
    let x = SignVector::uniform(n, &mut rng);
    let y = SignVector::uniform(n, &mut rng);
    let trials = 100_000;
    let mean: f64 = (0..trials)
        .map(|_| RandomizedResponseChannel::estimate(&c.respond(&x, &y, &mut rng)).unwrap())
        .sum::<f64>()
        / trials as f64;
    let tol = 4.0 * (c.variance() / trials as f64).sqrt();
    assert!((mean - inner_product(&x, &y).unwrap() as f64).abs() <= tol);
}

#[test]
fn every_configured_channel_is_seed_deterministic() {
    let mut configs = Vec::new();
    for kind in [
        ChannelKind::Laplace,
        ChannelKind::RandomizedResponse,
        ChannelKind::Constant,
        ChannelKind::Exact,
        ChannelKind::BoundedNoise,
        ChannelKind::Equality,
    ] {
        let mut c = ChannelConfig::new(kind, 40);
        c.eps = Some(0.5);
        c.agreement = Some(0.3);
        c.radius = Some(3);
        c.source_a = Some(SvSourceSpec::from_eps(40, 0.5).unwrap());
        configs.push(c.clone());
        c.leak = true;
        configs.push(c);
    }
    for cfg in configs {
        let ch = cfg.build().unwrap();
        let draw = |seed| {
            (0..50)
                .map(|k| ch.sample(&mut stream(seed, k)))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(6), draw(6), "{}", ch.name());
        for s in draw(7) {
            assert_eq!(s.t.extract_out().unwrap(), s.t.out());
            assert_eq!((s.x.len(), s.y.len()), (40, 40));
        }
    }
}
