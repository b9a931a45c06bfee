mod common;

use common::{oracle_mu, rounded_laplace_pmf, staged_offset_law, to_f64, Q};
use ipdp_core::recon::{
    brute_force_mu, certify_estimator, reconstruct_all, vote_mean, Estimator, EstimatorHandle,
    ExactEstimator, LaplaceEstimator, OffsetParams, OffsetSampler, ZeroEstimator,
};
use ipdp_core::rng::stream;
use ipdp_core::SignVector;

#[test]
fn noisy_estimator_means_match_enumeration() {
    for (n, ell, scale) in [(10usize, 1u64, 1.5), (16, 2, 0.7)] {
        let mut rng = stream(1, n as u64);
        let z = SignVector::uniform(n, &mut rng);
        let f = LaplaceEstimator::new(z.clone(), scale, 99).unwrap();
        let law = staged_offset_law(n, ell);
        let answer = |r: &[i8]| f.answer(&SignVector::from_signs(r).unwrap());
        for i in [0, n / 2, n - 1] {
            let mu = brute_force_mu(i, &z, &f, ell).unwrap();
            assert_eq!(mu, oracle_mu(i, &z.signs(), &answer, &law), "n={n} i={i}");
        }
    }
}

#[test]
fn exact_oracle_mean_for_the_smallest_window() {
    let z = SignVector::uniform(12, &mut stream(2, 0));
    let law = staged_offset_law(12, 1);
    let p = |k: i64| law.iter().find(|(j, _)| *j == k).unwrap().1;
    // The residual is z_i r_i, so k = 0 always votes z_i and
    // k = 2 z_i r_i always votes -z_i.
    let want_abs = p(0) - p(2);
    for i in 0..12 {
        let mu = brute_force_mu(i, &z, &ExactEstimator::new(z.clone()), 1).unwrap();
        assert_eq!(mu, want_abs * Q::from_integer(z.get(i) as i128));
    }
}

#[test]
fn monte_carlo_means_converge_for_noisy_estimators() {
    let n = 12;
    let z = SignVector::uniform(n, &mut stream(3, 0));
    let f = EstimatorHandle::new(LaplaceEstimator::new(z.clone(), 1.0, 5).unwrap());
    let sampler = OffsetSampler::for_size(n, 1).unwrap();
    for i in 0..n {
        let mu = to_f64(brute_force_mu(i, &z, f.inner(), 1).unwrap());
        let t = vote_mean(
            &z.puncture(i).unwrap(),
            &f,
            &sampler,
            100_000,
            &mut stream(4, i as u64),
        )
        .unwrap();
        assert!(
            (t.mean() - mu).abs() <= 4.0 * t.std_error(),
            "i={i}: {} vs {mu}",
            t.mean()
        );
    }
}

#[test]
fn laplace_estimator_is_certified_at_its_exact_rate() {
    let n = 400;
    let z = SignVector::uniform(n, &mut stream(5, 0));
    let scale = 1.5;
    let f = EstimatorHandle::new(LaplaceEstimator::new(z.clone(), scale, 8).unwrap());
    let trials = 100_000;
    for ell in 1..=4u64 {
        let p: f64 = (-(ell as i64 - 1)..ell as i64)
            .map(|k| rounded_laplace_pmf(k, scale))
            .sum();
        let prof = certify_estimator(&f, &z, ell, trials, &mut stream(6, ell)).unwrap();
        let factor = (n as f64).sqrt() / ell as f64;
        let sigma = factor * (p * (1.0 - p) / trials as f64).sqrt();
        assert!(
            (prof.lambda_hat - factor * p).abs() <= 4.0 * sigma,
            "ell={ell}"
        );
    }
}

#[test]
fn laplace_reconstruction_at_desk_scale() {
    let n = 100;
    let z = SignVector::uniform(n, &mut stream(7, 0));
    let f = EstimatorHandle::new(LaplaceEstimator::new(z.clone(), 1.0, 3).unwrap());
    let samples = 100_000;
    let rec = reconstruct_all(&z, &f, 1, samples, &mut stream(8, 0)).unwrap();
    assert!(rec.frac_correct >= 0.95, "{}", rec.frac_correct);
    assert!(rec.queries <= n as u64 * samples);
}

#[test]
fn zero_estimator_recovers_about_half() {
    let n = 400;
    let z = SignVector::uniform(n, &mut stream(9, 0));
    let f = EstimatorHandle::new(ZeroEstimator::new(n));
    let rec = reconstruct_all(&z, &f, 1, 2_000, &mut stream(10, 0)).unwrap();
    // Votes carry no information, so each guess matches with probability 1/2.
    assert!((rec.frac_correct - 0.5).abs() <= 4.0 * (0.25 / n as f64).sqrt());
}

#[test]
fn every_admissible_window_size_is_accepted() {
    for n in [9usize, 16, 100, 1000] {
        let max = OffsetParams::max_ell(n).unwrap();
        assert!(OffsetSampler::for_size(n, max).is_ok());
        assert!(OffsetSampler::for_size(n, max + 1).is_err());
    }
}
