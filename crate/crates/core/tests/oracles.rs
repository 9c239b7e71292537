//! Library routines against independent, definition-level oracles.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walsh_lprf::harness::generate::random_rectangle;
use walsh_lprf::harness::identities::naive_paley_coefficients;
use walsh_lprf::martingale::{cond_expect_spectral, mart_diff_spectral};
use walsh_lprf::walsh::inverse_walsh_transform_2d;
use walsh_lprf::*;

/// `r_k(x) = sgn sin(2^k π x)`, evaluated away from its jumps.
fn rademacher_sin(k: u32, x: f64) -> f64 {
    (2f64.powi(k as i32) * PI * x).sin().signum()
}

/// Paley `w_n(x) = Π r_{i+1}(x)^{bit i of n}`.
fn walsh_sin(n: u64, x: f64) -> f64 {
    (0..64)
        .filter(|i| n >> i & 1 == 1)
        .map(|i| rademacher_sin(i + 1, x))
        .product()
}

fn midpoint(j: usize, res: Resolution) -> f64 {
    (j as f64 + 0.5) / res.side() as f64
}

fn random_grid(res: Resolution, rng: &mut impl Rng) -> GridFunction {
    GridFunction::from_fn(res, |_, _| rng.random_range(-1.0..1.0)).unwrap()
}

#[test]
fn walsh_values_match_sine_definition() {
    for m in 0..=8 {
        let res = Resolution::new(m).unwrap();
        for n in 0..res.spectral_bound() {
            for j in 0..res.side() {
                let x = midpoint(j, res);
                assert_eq!(
                    f64::from(walsh_on_cell(n, j, res).unwrap()),
                    walsh_sin(n, x),
                    "n={n} j={j} m={m}"
                );
            }
        }
        for k in 1..=m {
            for j in 0..res.side() {
                assert_eq!(
                    f64::from(rademacher_on_cell(k, j, res).unwrap()),
                    rademacher_sin(k, midpoint(j, res))
                );
            }
        }
    }
}

#[test]
fn one_dimensional_transform_matches_sine_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in 0..=7 {
        let res = Resolution::new(m).unwrap();
        let f: Vec<f64> = (0..res.side())
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let fast = fwht_paley_forward(&f).unwrap();
        for (n, c) in fast.iter().enumerate() {
            let direct: f64 = f
                .iter()
                .enumerate()
                .map(|(j, v)| v * walsh_sin(n as u64, midpoint(j, res)))
                .sum::<f64>()
                / res.side() as f64;
            assert!((c - direct).abs() < 1e-12);
        }
        let naive = naive_paley_coefficients(&f, res).unwrap();
        for (a, b) in fast.iter().zip(&naive) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn two_dimensional_transform_matches_product_sum() {
    let res = Resolution::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let f = random_grid(res, &mut rng);
    let c = walsh_transform_2d(&f);
    let side = res.side();
    for n1 in 0..side as u64 {
        for n2 in 0..side as u64 {
            let mut acc = 0.0;
            for j1 in 0..side {
                for j2 in 0..side {
                    acc += f.get(j1, j2)
                        * walsh_sin(n1, midpoint(j1, res))
                        * walsh_sin(n2, midpoint(j2, res));
                }
            }
            acc /= (side * side) as f64;
            assert!((c.get(SpectralIndex::new(n1, n2)) - acc).abs() < 1e-12);
        }
    }
}

#[test]
fn averaging_expectation_equals_spectral_truncation() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for m in 1..=5 {
        let res = Resolution::new(m).unwrap();
        let f = random_grid(res, &mut rng);
        for n1 in 0..=u64::from(m) {
            for n2 in 0..=u64::from(m) {
                let n = SpectralIndex::new(n1, n2);
                let avg = cond_expect(&f, n).unwrap();
                let spec = cond_expect_spectral(&f, n).unwrap();
                assert!(avg.max_abs_diff(&spec).unwrap() < 1e-12);
                let d = mart_diff(&f, n).unwrap();
                let ds = mart_diff_spectral(&f, n).unwrap();
                assert!(d.max_abs_diff(&ds).unwrap() < 1e-12);
            }
        }
    }
}

#[test]
fn projection_onto_index_set_matches_coefficient_sum() {
    let res = Resolution::new(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let f = random_grid(res, &mut rng);
    let c = walsh_transform_2d(&f);
    let set: BTreeSet<SpectralIndex> = [(0, 0), (5, 1), (7, 7), (2, 6)]
        .into_iter()
        .map(SpectralIndex::from)
        .collect();
    let p = spectral_project(&f, &set).unwrap();
    let direct = GridFunction::from_fn(res, |j1, j2| {
        set.iter()
            .map(|n| {
                c.get(*n) * walsh_sin(n.n1, midpoint(j1, res)) * walsh_sin(n.n2, midpoint(j2, res))
            })
            .sum()
    })
    .unwrap();
    assert!(p.max_abs_diff(&direct).unwrap() < 1e-12);
}

#[test]
fn xor_shift_is_multiplication_by_characters() {
    let res = Resolution::new(5).unwrap();
    for (v, n) in [((3, 9), (17, 4)), ((31, 0), (1, 30)), ((12, 12), (12, 12))] {
        let (v, n) = (SpectralIndex::from(v), SpectralIndex::from(n));
        let product = GridFunction::walsh(res, v)
            .unwrap()
            .mul(&GridFunction::walsh(res, n).unwrap())
            .unwrap();
        let shifted = GridFunction::walsh(res, xor_index(v, n)).unwrap();
        assert_eq!(product, shifted);
    }
}

#[test]
fn rectangle_decompositions_pass_brute_force_audit() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for m in 1..=7 {
        let res = Resolution::new(m).unwrap();
        for _ in 0..60 {
            let rect = random_rectangle(res, &mut rng);
            let dec = decompose_rectangle(rect);
            verify_decomposition(&rect, &dec).unwrap();
            // Shifting characters realizes the block map on the spatial side.
            for blk in &dec.blocks {
                let n = SpectralIndex::new(blk.range1.start(), blk.range2.start());
                let w = GridFunction::walsh(res, n)
                    .unwrap()
                    .modulate(blk.vertex)
                    .unwrap();
                let target = GridFunction::walsh(res, n ^ blk.vertex).unwrap();
                assert_eq!(w, target);
            }
        }
    }
}

#[test]
fn frozen_decomposition_of_3_to_11() {
    // Frozen from the brute-force audit: a = 3 = 0b0011, b = 12 = 0b1100.
    let dec = decompose_interval(Interval1D::new(3, 12).unwrap());
    let rising: Vec<_> = dec
        .rising
        .iter()
        .map(|p| (p.block.start(), p.block.end()))
        .collect();
    let falling: Vec<_> = dec
        .falling
        .iter()
        .map(|p| (p.block.start(), p.block.end()))
        .collect();
    assert_eq!(dec.singleton, 3);
    assert_eq!(rising, vec![(4, 8)]);
    assert_eq!(falling, vec![(8, 12)]);
}

#[test]
fn frozen_norms_of_a_fixed_grid() {
    // Computed by hand under the cell-average convention.
    let f = GridFunction::from_rows(&[vec![1.0, -2.0], vec![0.0, 3.0]]).unwrap();
    assert!((lp_norm(&f, 1.0).unwrap() - 1.5).abs() < 1e-15);
    assert!((lp_norm(&f, 2.0).unwrap() - 3.5f64.sqrt()).abs() < 1e-15);
    let s = square_function(&f);
    let direct: f64 = s.values().iter().map(|v| v * v).sum::<f64>() / 4.0;
    assert!((direct - 3.5).abs() < 1e-14);
    assert!((hardy_norm(&f, 2.0).unwrap() - 3.5f64.sqrt()).abs() < 1e-14);
}

#[test]
fn synthesized_spectrum_stays_in_box() {
    let res = Resolution::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut c = CoeffMatrix::zeros(res);
    for n in SpectralBox::full(res).iter() {
        c.set(n, rng.random_range(-1.0..1.0));
    }
    let region = SpectralBox::new(3..9, 5..16);
    let f = walsh::synthesize_box(&c, &region).unwrap();
    let back = walsh_transform_2d(&f);
    assert!(back.max_outside(&region) < 1e-13);
    let full = inverse_walsh_transform_2d(&c);
    assert!(
        full.max_abs_diff(&walsh::project_box(&full, &SpectralBox::full(res)).unwrap())
            .unwrap()
            < 1e-13
    );
}
