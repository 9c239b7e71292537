//! Random test instances: rectangle partitions and band-limited functions.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::decomp::{Interval1D, SpectralRectangle};
use crate::error::{Error, Result};
use crate::operator_g::check_rectangle_family;
use crate::walsh::{
    inverse_walsh_transform_2d, spectrum_within, CoeffMatrix, GridFunction, Resolution,
};

pub const DEFAULT_STOP_PROBABILITY: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientDist {
    Gaussian,
    Rademacher,
}

impl CoefficientDist {
    fn draw(self, rng: &mut impl Rng) -> f64 {
        match self {
            CoefficientDist::Gaussian => StandardNormal.sample(rng),
            CoefficientDist::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

impl std::str::FromStr for CoefficientDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(CoefficientDist::Gaussian),
            "rademacher" => Ok(CoefficientDist::Rademacher),
            other => Err(Error::Config(format!(
                "unknown coefficient distribution {other:?} (expected gaussian or rademacher)"
            ))),
        }
    }
}

/// Recursive random splitting of `[0, 2^m)²`.
///
/// A side is splittable when it is longer than `min_block`. Every node below
/// the root stops with probability `stop_probability`; otherwise it is cut at
/// a uniform interior coordinate along a uniformly chosen splittable axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuillotineParams {
    pub min_block: u64,
    pub stop_probability: f64,
    /// Restrict cuts to the first axis, producing full-width bands.
    pub bands_only: bool,
}

impl GuillotineParams {
    pub fn new(min_block: u64) -> Self {
        GuillotineParams {
            min_block,
            stop_probability: DEFAULT_STOP_PROBABILITY,
            bands_only: false,
        }
    }

    pub fn generate(&self, res: Resolution, rng: &mut impl Rng) -> Vec<SpectralRectangle> {
        let side = res.spectral_bound();
        let full = Interval1D::new(0, side).expect("side is positive");
        let mut out = Vec::new();
        let mut stack = vec![(SpectralRectangle::new(full, full), 0usize)];
        let min = self.min_block.max(1);
        while let Some((rect, depth)) = stack.pop() {
            let split1 = rect.axis1.len() > min;
            let split2 = rect.axis2.len() > min && !self.bands_only;
            let stop = depth > 0 && rng.random::<f64>() < self.stop_probability;
            if stop || !(split1 || split2) {
                out.push(rect);
                continue;
            }
            let along_first = match (split1, split2) {
                (true, true) => rng.random::<bool>(),
                (first, _) => first,
            };
            let iv = if along_first { rect.axis1 } else { rect.axis2 };
            let cut = rng.random_range(iv.start() + 1..iv.end());
            let lo = Interval1D::new(iv.start(), cut).expect("cut is interior");
            let hi = Interval1D::new(cut, iv.end()).expect("cut is interior");
            let (left, right) = if along_first {
                (
                    SpectralRectangle::new(lo, rect.axis2),
                    SpectralRectangle::new(hi, rect.axis2),
                )
            } else {
                (
                    SpectralRectangle::new(rect.axis1, lo),
                    SpectralRectangle::new(rect.axis1, hi),
                )
            };
            // Right first so the left child is emitted first.
            stack.push((right, depth + 1));
            stack.push((left, depth + 1));
        }
        out
    }
}

pub fn gen_guillotine_partition(
    res: Resolution,
    seed: u64,
    min_block: u64,
) -> Vec<SpectralRectangle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GuillotineParams::new(min_block).generate(res, &mut rng)
}

/// Disjointness plus exact cover of `[0, 2^m)²`.
pub fn check_partition(
    rects: &[SpectralRectangle],
    res: Resolution,
) -> std::result::Result<(), Vec<String>> {
    check_rectangle_family(rects, res)?;
    let area: u64 = rects.iter().map(SpectralRectangle::area).sum();
    let full = res.spectral_bound() * res.spectral_bound();
    if area != full {
        return Err(vec![format!(
            "rectangles cover {area} indices, expected {full}"
        )]);
    }
    Ok(())
}

/// Reads a rectangle family from a JSON array of `{"a": [a1, a2], "b": [b1, b2]}`.
pub fn load_rectangles(path: &Path, res: Resolution) -> Result<Vec<SpectralRectangle>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rects: Vec<SpectralRectangle> =
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
    check_rectangle_family(&rects, res).map_err(Error::InvalidPartition)?;
    Ok(rects)
}

/// A function whose Walsh coefficients are iid on `rect` and zero elsewhere.
pub fn sample_spectral_function(
    rect: &SpectralRectangle,
    res: Resolution,
    dist: CoefficientDist,
    rng: &mut impl Rng,
) -> Result<GridFunction> {
    let region = rect.as_box();
    if !region.fits(res) {
        return Err(Error::SpectrumOutOfRange {
            index: rect.axis1.last().max(rect.axis2.last()),
            m: res.m(),
            bound: res.spectral_bound(),
        });
    }
    let mut coeffs = CoeffMatrix::zeros(res);
    for n in region.iter() {
        coeffs.set(n, dist.draw(rng));
    }
    let f = inverse_walsh_transform_2d(&coeffs);
    debug_assert!(spectrum_within(&f, &region, 1e-9 * (1.0 + f.max_abs())));
    Ok(f)
}

pub fn sample_spectral_function_seeded(
    rect: &SpectralRectangle,
    res: Resolution,
    seed: u64,
    dist: CoefficientDist,
) -> Result<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_spectral_function(rect, res, dist, &mut rng)
}

/// A random rectangle with both sides inside `[0, 2^m)`.
pub fn random_rectangle(res: Resolution, rng: &mut impl Rng) -> SpectralRectangle {
    let side = res.spectral_bound();
    let mut axis = || {
        let a = rng.random_range(0..side);
        let b = rng.random_range(a + 1..=side);
        Interval1D::new(a, b).expect("a < b")
    };
    let first = axis();
    SpectralRectangle::new(first, axis())
}

/// Mixes a base seed and a trial number into an independent trial seed.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walsh::{project_box, SpectralIndex};

    fn res(m: u32) -> Resolution {
        Resolution::new(m).unwrap()
    }

    #[test]
    fn min_block_at_full_side_gives_one_rectangle() {
        let rects = gen_guillotine_partition(res(4), 3, 16);
        assert_eq!(
            rects,
            vec![SpectralRectangle::from_corners(0, 16, 0, 16).unwrap()]
        );
    }

    #[test]
    fn guillotine_output_is_a_partition_and_deterministic() {
        for seed in 0..40 {
            for min_block in [1, 2, 5] {
                let rects = gen_guillotine_partition(res(5), seed, min_block);
                check_partition(&rects, res(5)).unwrap();
                assert_eq!(rects, gen_guillotine_partition(res(5), seed, min_block));
            }
        }
    }

    #[test]
    fn bands_span_the_second_axis() {
        let params = GuillotineParams {
            bands_only: true,
            ..GuillotineParams::new(1)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rects = params.generate(res(4), &mut rng);
        check_partition(&rects, res(4)).unwrap();
        assert!(rects.iter().all(|r| r.axis2.len() == 16));
    }

    #[test]
    fn sampled_function_examples() {
        let r = res(3);
        let origin = SpectralRectangle::from_corners(0, 1, 0, 1).unwrap();
        let f = sample_spectral_function_seeded(&origin, r, 5, CoefficientDist::Gaussian).unwrap();
        let v0 = f.values()[0];
        assert!(f.values().iter().all(|v| (v - v0).abs() < 1e-15));

        let rect = SpectralRectangle::from_corners(2, 7, 1, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = sample_spectral_function(&rect, r, CoefficientDist::Rademacher, &mut rng).unwrap();
        assert!((f.l2_norm_sq() - 15.0).abs() < 1e-12);
        let p = project_box(&f, &rect.as_box()).unwrap();
        assert!(p.max_abs_diff(&f).unwrap() < 1e-12);

        let outside = SpectralRectangle::from_corners(0, 9, 0, 1).unwrap();
        assert!(
            sample_spectral_function(&outside, r, CoefficientDist::Gaussian, &mut rng).is_err()
        );
    }

    #[test]
    fn plancherel_for_gaussian_samples() {
        let r = res(4);
        let rect = SpectralRectangle::from_corners(3, 13, 0, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut coeff_rng = ChaCha8Rng::seed_from_u64(2);
        let f = sample_spectral_function(&rect, r, CoefficientDist::Gaussian, &mut rng).unwrap();
        let expected: f64 = rect
            .as_box()
            .iter()
            .map(|_: SpectralIndex| {
                let c: f64 = StandardNormal.sample(&mut coeff_rng);
                c * c
            })
            .sum();
        assert!((f.l2_norm_sq() - expected).abs() < 1e-12 * expected.max(1.0));
    }

    #[test]
    fn partition_check_rejects_gaps() {
        let r = res(2);
        let a = SpectralRectangle::from_corners(0, 4, 0, 2).unwrap();
        assert!(check_partition(&[a], r).is_err());
    }
}
