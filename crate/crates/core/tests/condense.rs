mod common;

use common::binomial_pmf;
use ipdp_core::agreement::{adversary_to_ip_estimator, BlindAdversary, ProportionalAdversary};
use ipdp_core::channel::{
    flip_pair, ConstantChannel, ExactIpChannel, LaplaceIpChannel, LeakyChannel,
};
use ipdp_core::condense::{
    condense_mod_experiment, conditional_min_entropy, eve_dp, hidden_bit_hits, rec_triplet,
    rhombus_scores, search_eve_params, seeded_condense_experiment, EveGrid, EveParams, EveSamples,
    FlipPattern, LeakedProductEstimator, SearchBudget, TripletEstimator, TripletSource,
    TripletView,
};
use ipdp_core::recon::OffsetSampler;
use ipdp_core::rng::{hash_words, stream};
use ipdp_core::{SignVector, SvSourceSpec};
use rand::{Rng, RngCore};

/// Hashes the restricted inputs it is shown.
struct ViewHash;

impl TripletEstimator for ViewHash {
    fn estimate(&self, view: &TripletView<'_>, rng: &mut dyn RngCore) -> i64 {
        let n = view.r.len();
        let seen: Vec<u64> = (0..n)
            .map(|i| {
                let a = view.x_plus.get(i).map_or(0, |s| s as i64 + 2) as u64;
                let b = view.y_minus.get(i).map_or(0, |s| s as i64 + 2) as u64;
                a * 4 + b
            })
            .collect();
        let h = hash_words(hash_words(7, &seen), view.r.words());
        (h % (2 * n as u64 + 1)) as i64 - n as i64 + (rng.next_u32() % 3) as i64 - 1
    }
}

#[test]
fn the_abort_test_never_reads_the_hidden_entry() {
    let mut rng = stream(1, 0);
    let noisy = LeakedProductEstimator::noisy(1.0).unwrap();
    for case in 0..200u64 {
        let n = rng.random_range(25..=48usize);
        let source = LeakyChannel::new(LaplaceIpChannel::new(n, 1.0).unwrap());
        let s = source.draw(&mut rng);
        let i = rng.random_range(0..2 * n);
        let (fx, fy) = flip_pair(&s.x, &s.y, i).unwrap();
        let ells = [1, 2, 3, 5];
        let estimators: [&dyn TripletEstimator; 2] = [&noisy, &ViewHash];
        for f in estimators {
            let a = hidden_bit_hits(i, &s.x, &s.y, &s.t, f, &ells, 200, case).unwrap();
            let b = hidden_bit_hits(i, &fx, &fy, &s.t, f, &ells, 200, case).unwrap();
            assert_eq!(a, b, "case {case}");
        }
        let params = EveParams::new(2, 0.3, FlipPattern::Both).unwrap();
        let samples = EveSamples { test: 100, rec: 10 };
        let q = |x: &SignVector, y: &SignVector| {
            eve_dp(
                &params,
                i,
                x,
                y,
                &s.t,
                &ViewHash,
                samples,
                &mut stream(2, case),
            )
            .unwrap()
            .q
        };
        assert_eq!(q(&s.x, &s.y), q(&fx, &fy));
    }
}

#[test]
fn rhombus_identity_holds_for_adversary_estimators() {
    let mut rng = stream(3, 0);
    for case in 0..40u64 {
        let n = rng.random_range(16..=64usize);
        let ell = 1 + case % 2;
        let source = LeakyChannel::new(ExactIpChannel::new(n));
        let s = source.draw(&mut rng);
        let j = rng.random_range(0..n);
        let sampler = OffsetSampler::for_size(n, ell).unwrap();
        let blind = adversary_to_ip_estimator(BlindAdversary, 3).unwrap();
        let prop = adversary_to_ip_estimator(ProportionalAdversary, 2).unwrap();
        let noisy = LeakedProductEstimator::noisy(2.0).unwrap();
        let estimators: [&dyn TripletEstimator; 4] = [&blind, &prop, &noisy, &ViewHash];
        for f in estimators {
            let sc = rhombus_scores(j, &s.x, &s.y, &s.t, f, &sampler, 300, case).unwrap();
            assert_eq!(sc[0] + sc[3], sc[1] + sc[2], "case {case}");
        }
    }
}

#[test]
fn leaked_products_are_reconstructed() {
    let n = 64;
    let source = LeakyChannel::new(ExactIpChannel::new(n));
    let mut rng = stream(4, 0);
    for (f, samples) in [
        (LeakedProductEstimator::exact(), 20_000),
        (LeakedProductEstimator::noisy(1.0).unwrap(), 50_000),
    ] {
        let trials = 40;
        let correct = (0..trials)
            .filter(|_| {
                let s = source.draw(&mut rng);
                let j = rng.random_range(0..n);
                rec_triplet(j, &s.x, &s.y, &s.t, &f, 1, samples, &mut rng).unwrap()
                    == s.x.get(j) * s.y.get(j)
            })
            .count();
        assert!(correct as f64 >= 0.75 * trials as f64, "{correct}/{trials}");
    }
}

#[test]
fn search_separates_a_leaky_channel() {
    let n = 64;
    let grid = EveGrid::new(n, 1, 0.5).unwrap();
    assert_eq!(grid.ell_hat_values(), vec![2, 3, 4, 5]);
    let budget = SearchBudget {
        triplets: 100,
        samples: EveSamples {
            test: 500,
            rec: 2_000,
        },
    };
    let source = LeakyChannel::new(ExactIpChannel::new(n));
    let res = search_eve_params(
        &source,
        &LeakedProductEstimator::exact(),
        &grid,
        &budget,
        &mut stream(5, 0),
    )
    .unwrap();
    assert!(res.gap > 0.2, "gap {}", res.gap);
    assert!(grid.contains_v_hat(res.params.v_hat));
    assert!(grid.ell_hat_values().contains(&res.params.ell_hat));
    assert_eq!(res.candidates, grid.points().len());
}

#[test]
fn search_finds_nothing_in_a_constant_channel() {
    let n = 64;
    let grid = EveGrid::new(n, 1, 0.0).unwrap();
    let budget = SearchBudget {
        triplets: 400,
        samples: EveSamples {
            test: 200,
            rec: 200,
        },
    };
    let source = ConstantChannel::uniform(n, 0).unwrap();
    let res = search_eve_params(
        &source,
        &LeakedProductEstimator::exact(),
        &grid,
        &budget,
        &mut stream(6, 0),
    )
    .unwrap();
    // The best of the correlated grid points: a few standard errors of
    // sqrt(1/400) at most.
    assert!(res.gap.abs() <= 0.15, "gap {}", res.gap);
    assert!(grid.contains_v_hat(res.params.v_hat));
}

#[test]
fn grid_points_lie_on_the_grid() {
    for (n, ell, eps) in [
        (64usize, 1u64, 0.0),
        (100, 2, 0.3),
        (400, 5, 1.0),
        (1024, 3, 0.1),
    ] {
        let grid = EveGrid::new(n, ell, eps).unwrap();
        let vs = grid.v_hat_values();
        let (lo, hi) = grid.v_range();
        let c_eps = (4.0 * eps).exp();
        assert!((lo - c_eps * ell as f64 / (4.0 * (n as f64).sqrt())).abs() < 1e-12);
        assert!((hi - 2.0 * lo).abs() < 1e-12);
        assert!(vs
            .iter()
            .all(|&v| v >= lo && v <= hi + 1e-12 && grid.contains_v_hat(v)));
        assert!(hi - vs.last().unwrap() < grid.v_step());
        assert!(!grid.contains_v_hat(lo + 0.5 * grid.v_step()));
        assert_eq!(
            grid.points().len(),
            3 * vs.len() * grid.ell_hat_values().len()
        );
    }
}

#[test]
fn fully_fixed_x_leaves_a_binomial() {
    // With r all +1 the conditioning fixes x and leaves y free, and with r
    // all -1 the reverse: either way ⟨x·y, r⟩ is ±(n - 2 Bin(n, 1/2)).
    let n = 20;
    let u = SvSourceSpec::uniform(n);
    let mut rng = stream(7, 0);
    let x = SignVector::uniform(n, &mut rng);
    let y = SignVector::uniform(n, &mut rng);
    let want = binomial_pmf(n, n / 2);
    let trials = 1_000_000;
    for r in [SignVector::ones(n), SignVector::minus_ones(n)] {
        let est = conditional_min_entropy(&u, &u, &x, &y, &r, trials, &mut rng).unwrap();
        let sigma = (want * (1.0 - want) / trials as f64).sqrt();
        assert!(
            (est.max_freq - want).abs() <= 4.0 * sigma,
            "{} vs {want}",
            est.max_freq
        );
        assert_eq!(est.argmax, n as u64);
    }
}

#[test]
fn seeded_median_at_n_1024() {
    let n = 1024;
    let u = SvSourceSpec::uniform(n);
    let rep = seeded_condense_experiment(&u, &u, 64, 20_000, 0.5, &mut stream(8, 0)).unwrap();
    let floor = (n as f64).sqrt().log2() - 3.0;
    assert!(rep.median >= floor, "median {}", rep.median);
    // Every conditioning leaves n free signs, so the estimate sits near the
    // central binomial value.
    let oracle = -binomial_pmf(n, n / 2).log2();
    assert!(
        (rep.median - oracle).abs() < 0.5,
        "{} vs {oracle}",
        rep.median
    );
}

#[test]
fn near_constant_sources_have_no_entropy() {
    let n = 64;
    let s = SvSourceSpec::from_eps(n, 20.0).unwrap();
    let rep = seeded_condense_experiment(&s, &s, 16, 1_000, 0.5, &mut stream(9, 0)).unwrap();
    assert!(rep.median < 0.01);
}

#[test]
fn biased_sources_stay_within_a_constant_band() {
    let n = 256;
    let modulus = 16;
    let trials = 400_000;
    let u = SvSourceSpec::uniform(n);
    let sv = SvSourceSpec::from_eps(n, 1.0).unwrap();
    let h_u = condense_mod_experiment(&u, &u, modulus, trials, &mut stream(10, 0))
        .unwrap()
        .h_min;
    let h_sv = condense_mod_experiment(&sv, &sv, modulus, trials, &mut stream(10, 1))
        .unwrap()
        .h_min;
    // A factor e² in the largest bucket.
    assert!(
        h_u - h_sv <= 2.0 * std::f64::consts::LOG2_E,
        "{h_u} vs {h_sv}"
    );
    assert!(h_u <= (modulus as f64).log2() + 1e-9);
}
