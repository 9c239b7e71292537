use proptest::prelude::*;
use walsh_lprf::harness::identities::audit_interval;
use walsh_lprf::martingale::mart_diff_spectral;
use walsh_lprf::walsh::{inverse_walsh_transform_2d, project_box};
use walsh_lprf::*;

const M: u32 = 4;

fn res() -> Resolution {
    Resolution::new(M).unwrap()
}

fn grid() -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(-10.0f64..10.0, res().cell_count())
        .prop_map(|v| GridFunction::new(res(), v).unwrap())
}

fn index() -> impl Strategy<Value = SpectralIndex> {
    let b = res().spectral_bound();
    (0..b, 0..b).prop_map(SpectralIndex::from)
}

fn scale() -> impl Strategy<Value = SpectralIndex> {
    let m = u64::from(M);
    (0..=m, 0..=m).prop_map(SpectralIndex::from)
}

fn rectangle() -> impl Strategy<Value = SpectralRectangle> {
    let b = res().spectral_bound();
    (0..b, 0..b)
        .prop_flat_map(move |(a1, a2)| (Just(a1), a1 + 1..=b, Just(a2), a2 + 1..=b))
        .prop_map(|(a1, b1, a2, b2)| SpectralRectangle::from_corners(a1, b1, a2, b2).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn characters_multiply_by_xor(n in index(), k in index()) {
        let prod = GridFunction::walsh(res(), n).unwrap()
            .mul(&GridFunction::walsh(res(), k).unwrap()).unwrap();
        prop_assert_eq!(prod, GridFunction::walsh(res(), n ^ k).unwrap());
    }

    #[test]
    fn plancherel(f in grid()) {
        let c = walsh_transform_2d(&f);
        prop_assert!((c.sum_of_squares() - f.l2_norm_sq()).abs() <= 1e-10 * (1.0 + f.l2_norm_sq()));
        let back = inverse_walsh_transform_2d(&c);
        prop_assert!(back.max_abs_diff(&f).unwrap() <= 1e-12);
    }

    #[test]
    fn projection_is_idempotent(f in grid(), r in rectangle()) {
        let once = project_box(&f, &r.as_box()).unwrap();
        let twice = project_box(&once, &r.as_box()).unwrap();
        prop_assert!(once.max_abs_diff(&twice).unwrap() <= 1e-12);
    }

    #[test]
    fn expectations_commute_to_the_coarser(f in grid(), n in scale(), k in scale()) {
        let nk = cond_expect(&cond_expect(&f, k).unwrap(), n).unwrap();
        let kn = cond_expect(&cond_expect(&f, n).unwrap(), k).unwrap();
        let direct = cond_expect(&f, n.componentwise_min(k)).unwrap();
        prop_assert!(nk.max_abs_diff(&direct).unwrap() <= 1e-12);
        prop_assert!(kn.max_abs_diff(&direct).unwrap() <= 1e-12);
    }

    #[test]
    fn martingale_differences_sum_to_f(f in grid()) {
        let m = u64::from(M);
        let mut acc = GridFunction::zeros(res());
        for k1 in 0..=m {
            for k2 in 0..=m {
                let k = SpectralIndex::new(k1, k2);
                let d = mart_diff(&f, k).unwrap();
                prop_assert!(d.max_abs_diff(&mart_diff_spectral(&f, k).unwrap()).unwrap() <= 1e-12);
                acc.add_assign(&d).unwrap();
            }
        }
        prop_assert!(acc.max_abs_diff(&f).unwrap() <= 1e-11);
    }

    #[test]
    fn interval_decomposition_is_sound(a in 0u64..4096, len in 1u64..4096) {
        prop_assert_eq!(audit_interval(a, a + len), None);
    }

    #[test]
    fn rectangle_decomposition_is_sound(r in rectangle()) {
        let dec = decompose_rectangle(r);
        prop_assert!(verify_decomposition(&r, &dec).is_ok());
        let area: u64 = dec.blocks.iter().map(|b| b.size()).sum();
        prop_assert_eq!(area, r.area());
    }

    #[test]
    fn g_reconstructs_band_limited_sums(seed in any::<u64>()) {
        let rects = harness::gen_guillotine_partition(res(), seed, 2);
        let fs = rects
            .iter()
            .enumerate()
            .map(|(i, r)| harness::sample_spectral_function_seeded(
                r, res(), seed.wrapping_add(i as u64), harness::CoefficientDist::Gaussian))
            .collect::<Result<Vec<_>>>()
            .unwrap();
        let err = harness::identities::reconstruction_error(res(), &rects, &fs).unwrap();
        prop_assert!(err <= 1e-10);
    }

    #[test]
    fn square_function_is_an_isometry(f in grid()) {
        let s = square_function(&f);
        prop_assert!((s.l2_norm_sq() - f.l2_norm_sq()).abs() <= 1e-10 * (1.0 + f.l2_norm_sq()));
    }

    #[test]
    fn ratio_is_one_at_p_two(seed in any::<u64>()) {
        let rects = harness::gen_guillotine_partition(res(), seed, 1);
        let fs = rects
            .iter()
            .map(|r| harness::sample_spectral_function_seeded(
                r, res(), seed, harness::CoefficientDist::Rademacher))
            .collect::<Result<Vec<_>>>()
            .unwrap();
        prop_assert!((harness::lprf_ratio(&fs, 2.0).unwrap() - 1.0).abs() <= 1e-9);
    }
}
