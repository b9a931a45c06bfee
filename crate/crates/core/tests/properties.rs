use ipdp_core::agreement::{quantize, run_pi_c_on, ToeplitzHash};
use ipdp_core::channel::{accuracy_profile, LaplaceIpChannel, LeakyChannel};
use ipdp_core::condense::{triplet_vote, EveGrid, LeakedProductEstimator, TripletSource};
use ipdp_core::recon::{g_k, sample_m, OffsetSampler};
use ipdp_core::rng::stream;
use ipdp_core::{inner_product, SignVector, SvSourceSpec};
use proptest::prelude::*;

fn signs(n: impl Into<proptest::collection::SizeRange>) -> impl Strategy<Value = Vec<i8>> {
    proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n)
}

fn vector(v: &[i8]) -> SignVector {
    SignVector::from_signs(v).unwrap()
}

proptest! {
    #[test]
    fn inner_product_counts_disagreements(pair in (1usize..300).prop_flat_map(|n| (signs(n), signs(n)))) {
        let (x, y) = (vector(&pair.0), vector(&pair.1));
        let ham = pair.0.iter().zip(&pair.1).filter(|(a, b)| a != b).count() as i64;
        prop_assert_eq!(inner_product(&x, &y).unwrap(), x.len() as i64 - 2 * ham);
    }

    #[test]
    fn votes_are_signs(
        case in (2usize..200).prop_flat_map(|n| (signs(n), signs(n), 0..n, -500i64..500, -30i64..30))
    ) {
        let (z, r, i, a, k) = case;
        let (z, r) = (vector(&z), vector(&r));
        let g = g_k(k, &z.puncture(i).unwrap(), &r, a);
        prop_assert!((-1..=1).contains(&g));
        // The vote depends on z only through z_{-i}.
        let g_flipped = g_k(k, &z.flip(i).unwrap().puncture(i).unwrap(), &r, a);
        prop_assert_eq!(g, g_flipped);
    }

    #[test]
    fn quantised_outputs_are_aligned(u_a in -10_000i64..10_000, u_b in -10_000i64..10_000, ell in 1u64..50, v_raw in 0u64..1000) {
        let v = 1 + v_raw % ell;
        let (o_a, o_b) = (quantize(u_a, v, ell), quantize(u_b, v, ell));
        let l = ell as i64;
        prop_assert_eq!((o_a - o_b).rem_euclid(l), 0);
        prop_assert!(o_a <= u_a - v as i64 && u_a - (v as i64) < o_a + l);
        prop_assert_eq!(o_a == o_b, (u_a - v as i64).div_euclid(l) == (u_b - v as i64).div_euclid(l));
        if o_a == o_b {
            prop_assert!((u_a - u_b).abs() < l);
        }
    }

    #[test]
    fn half_blocks_take_half_the_offsets(u in -1_000i64..1_000, half in 1u64..30) {
        let ell = 2 * half;
        let low = (1..=ell).filter(|&v| (u - v as i64).rem_euclid(ell as i64) < half as i64).count() as u64;
        prop_assert_eq!(low, half);
    }

    #[test]
    fn protocol_agreement_implies_small_error(seed in any::<u64>(), ell in 1u64..12, n in 4usize..80) {
        let c = LaplaceIpChannel::new(n, 0.7).unwrap();
        let mut rng = stream(seed, 0);
        let s = c.draw(&mut rng);
        let (o, view) = run_pi_c_on(&s, ell, &mut rng).unwrap();
        prop_assert!(view.v >= 1 && view.v <= ell);
        prop_assert_eq!(o.u_b - o.u_a, s.error());
        if o.agree() {
            prop_assert!(s.error().unsigned_abs() < ell);
        }
    }

    #[test]
    fn toeplitz_hashes_are_affine(
        case in (1usize..40, 1usize..20).prop_flat_map(|(n, m)| (signs(n), signs(n), signs(n), signs(n + m - 1), 0u64..1 << m, 0u64..1 << m))
    ) {
        let (a, b, c, diag, off1, off2) = case;
        let n = a.len();
        let m = diag.len() + 1 - n;
        let h1 = ToeplitzHash::from_parts(n, m, vector(&diag), off1).unwrap();
        let h2 = ToeplitzHash::from_parts(n, m, vector(&diag), off2).unwrap();
        let (a, b, c) = (vector(&a), vector(&b), vector(&c));
        let abc = a.xor(&b).unwrap().xor(&c).unwrap();
        let e = |h: &ToeplitzHash, x: &SignVector| h.eval(x).unwrap();
        prop_assert_eq!(e(&h1, &a) ^ e(&h1, &b) ^ e(&h1, &c), e(&h1, &abc));
        prop_assert_eq!(e(&h1, &a) ^ e(&h1, &b), e(&h2, &a) ^ e(&h2, &b));
        prop_assert!(e(&h1, &a) < 1 << m);
    }

    #[test]
    fn offset_laws_are_normalised_and_symmetric(n in 9usize..=400, ell_raw in 0u64..100, seed in any::<u64>()) {
        let max = ipdp_core::recon::OffsetParams::max_ell(n).unwrap();
        let ell = 1 + ell_raw % max;
        let sampler = OffsetSampler::for_size(n, ell).unwrap();
        let d = sampler.distribution();
        prop_assert_eq!(d.numerators.iter().sum::<u64>(), d.denominator);
        prop_assert!(d.support().all(|k| d.weight(k) == d.weight(-k)));
        let mut rng = stream(seed, 0);
        for _ in 0..200 {
            prop_assert!(d.weight(sampler.sample(&mut rng)) > 0);
        }
    }

    #[test]
    fn radii_stay_in_their_window(s in 0u64..50, width in 1u64..50, seed in any::<u64>()) {
        let t = s + width;
        let mut rng = stream(seed, 0);
        for _ in 0..100 {
            let m = sample_m(s, t, &mut rng).unwrap();
            prop_assert!(s <= m && m < t);
        }
    }

    #[test]
    fn source_windows_are_enforced(alpha in 0.01f64..=1.0, t in 0.0f64..=1.0) {
        // Biases with odds in [alpha, 1/alpha] are accepted, others refused.
        let lo = alpha / (1.0 + alpha);
        let inside = lo + t * (1.0 - 2.0 * lo);
        prop_assert!(SvSourceSpec::iid(8, alpha, inside).is_ok());
        if alpha < 0.99 {
            prop_assert!(SvSourceSpec::iid(8, alpha, lo * 0.98).is_err());
            prop_assert!(SvSourceSpec::iid(8, alpha, 1.0 - lo * 0.98).is_err());
        }
    }

    #[test]
    fn resampling_touches_only_masked_entries(
        case in (1usize..200).prop_flat_map(|n| (signs(n), signs(n))), p in 0.3f64..0.7, seed in any::<u64>()
    ) {
        let (v, mask) = (vector(&case.0), vector(&case.1));
        for spec in [SvSourceSpec::uniform(v.len()), SvSourceSpec::iid(v.len(), 0.4, p.clamp(0.3, 0.7)).unwrap()] {
            let mut w = v.clone();
            spec.resample_masked(&mut w, &mask, &mut stream(seed, 0));
            for i in 0..v.len() {
                if mask.get(i) == 1 {
                    prop_assert_eq!(w.get(i), v.get(i));
                }
            }
        }
    }

    #[test]
    fn rhombus_identity_per_sample(seed in any::<u64>(), n in 9usize..=64) {
        let mut rng = stream(seed, 0);
        let s = LeakyChannel::new(LaplaceIpChannel::new(n, 1.0).unwrap()).draw(&mut rng);
        let j = (seed % n as u64) as usize;
        let sampler = OffsetSampler::for_size(n, 1).unwrap();
        let f = LeakedProductEstimator::noisy(1.5).unwrap();
        let z = s.x.hadamard(&s.y).unwrap().puncture(j).unwrap();
        let (xf, yf) = (s.x.flip(j).unwrap(), s.y.flip(j).unwrap());
        let vote = |x: &SignVector, y: &SignVector| triplet_vote(&z, x, y, &s.t, &f, &sampler, &mut stream(seed, 1)) as i64;
        prop_assert_eq!(vote(&s.x, &s.y) + vote(&xf, &yf), vote(&xf, &s.y) + vote(&s.x, &yf));
    }

    #[test]
    fn accuracy_is_monotone_in_alpha(seed in any::<u64>(), n in 1usize..100) {
        let c = LaplaceIpChannel::new(n, 1.0).unwrap();
        let reps = accuracy_profile(&c, &[0, 1, 2, 4, 8, 16], 500, &mut stream(seed, 0)).unwrap();
        prop_assert!(reps.windows(2).all(|w| w[0].gamma_hat <= w[1].gamma_hat));
        prop_assert!(reps.iter().all(|r| (0.0..=1.0).contains(&r.gamma_hat) && r.half_width >= 0.0));
    }

    #[test]
    fn grid_points_are_members(n in 64usize..2000, ell_raw in 0u64..4, eps in 0.0f64..0.5) {
        if let Ok(grid) = EveGrid::new(n, 1 + ell_raw, eps) {
            let (ells, vs) = (grid.ell_hat_values(), grid.v_hat_values());
            prop_assert!(vs.iter().all(|&v| grid.contains_v_hat(v)));
            prop_assert!(ells.iter().all(|&l| l > grid.ell && OffsetSampler::for_size(n, l + 1).is_ok()));
            let points = grid.points();
            prop_assert_eq!(points.len(), 3 * ells.len() * vs.len());
            for (k, p) in points.iter().enumerate() {
                prop_assert_eq!(p.v_hat, vs[k % vs.len()]);
                prop_assert_eq!(p.ell_hat, ells[(k / vs.len()) % ells.len()]);
            }
        }
    }
}
