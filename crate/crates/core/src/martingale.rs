//! Two-parameter dyadic martingales on a finite grid.
//!
//! A martingale is carried by its terminal [`GridFunction`]; `u_n` is
//! recovered as `E_n u`. Conditional expectations and martingale differences
//! have two independent implementations (cell averaging and Walsh-spectral
//! projection) which the tests hold against each other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::decomp::delta_block_2d;
use crate::error::{Error, Result};
use crate::walsh::{
    inverse_walsh_transform_2d, project_box, walsh_transform_2d, GridFunction, Resolution,
    SpectralBox, SpectralIndex,
};

fn check_scale(n: SpectralIndex, res: Resolution) -> Result<()> {
    let m = u64::from(res.m());
    if n.n1 > m || n.n2 > m {
        return Err(Error::Resolution(format!(
            "scale {n} is finer than the {res} grid"
        )));
    }
    Ok(())
}

/// `E_n f` by averaging over the dyadic rectangles of size `2^-n1 × 2^-n2`.
pub fn cond_expect(f: &GridFunction, n: SpectralIndex) -> Result<GridFunction> {
    let res = f.resolution();
    check_scale(n, res)?;
    let side = res.side();
    let m = res.m();
    let w1 = 1usize << (m - n.n1 as u32);
    let w2 = 1usize << (m - n.n2 as u32);
    let mut out = GridFunction::zeros(res);
    let area = (w1 * w2) as f64;
    let src = f.values();
    let dst = out.values_mut();
    for b1 in (0..side).step_by(w1) {
        for b2 in (0..side).step_by(w2) {
            let mut sum = 0.0;
            for j1 in b1..b1 + w1 {
                sum += src[j1 * side + b2..j1 * side + b2 + w2].iter().sum::<f64>();
            }
            let avg = sum / area;
            for j1 in b1..b1 + w1 {
                dst[j1 * side + b2..j1 * side + b2 + w2].fill(avg);
            }
        }
    }
    Ok(out)
}

/// `E_n f` as the projection onto `[0, 2^n1) × [0, 2^n2)`.
pub fn cond_expect_spectral(f: &GridFunction, n: SpectralIndex) -> Result<GridFunction> {
    check_scale(n, f.resolution())?;
    project_box(f, &SpectralBox::new(0..1 << n.n1, 0..1 << n.n2))
}

/// `Δ_k f` by the four-term difference of conditional expectations.
pub fn mart_diff(f: &GridFunction, k: SpectralIndex) -> Result<GridFunction> {
    check_scale(k, f.resolution())?;
    // u_{n1,-1} and u_{-1,n2} are zero.
    let e = |n1, n2| cond_expect(f, SpectralIndex::new(n1, n2));
    let (k1, k2) = (k.n1, k.n2);
    let mut out = e(k1, k2)?;
    if k1 > 0 {
        out = out.sub(&e(k1 - 1, k2)?)?;
    }
    if k2 > 0 {
        out = out.sub(&e(k1, k2 - 1)?)?;
    }
    if k1 > 0 && k2 > 0 {
        out = out.add(&e(k1 - 1, k2 - 1)?)?;
    }
    Ok(out)
}

/// `Δ_k f` as the projection onto `δ_k`.
pub fn mart_diff_spectral(f: &GridFunction, k: SpectralIndex) -> Result<GridFunction> {
    check_scale(k, f.resolution())?;
    project_box(f, &delta_block_2d(k))
}

/// Every martingale difference `Δ_k f` for `k ∈ [0, m]²`, sharing one forward transform.
pub fn all_mart_diffs(f: &GridFunction) -> Vec<(SpectralIndex, GridFunction)> {
    let res = f.resolution();
    let coeffs = walsh_transform_2d(f);
    let m = u64::from(res.m());
    let mut out = Vec::with_capacity(((m + 1) * (m + 1)) as usize);
    for k1 in 0..=m {
        for k2 in 0..=m {
            let k = SpectralIndex::new(k1, k2);
            let mut c = coeffs.clone();
            c.restrict(&delta_block_2d(k));
            out.push((k, inverse_walsh_transform_2d(&c)));
        }
    }
    out
}

/// `S(f) = (Σ_k |Δ_k f|²)^{1/2}` pointwise.
pub fn square_function(f: &GridFunction) -> GridFunction {
    let mut acc = GridFunction::zeros(f.resolution());
    for (_, d) in all_mart_diffs(f) {
        acc.values_mut()
            .iter_mut()
            .zip(d.values())
            .for_each(|(a, v)| *a += v * v);
    }
    acc.map(f64::sqrt)
}

/// `(∫ |f|^p)^{1/p}`; a quasi-norm for `p < 1`.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::Domain(format!(
            "L^p exponent must be positive, got {p}"
        )));
    }
    let mean = f.values().iter().map(|v| v.abs().powf(p)).sum::<f64>() / f.values().len() as f64;
    Ok(mean.powf(1.0 / p))
}

/// `‖f‖_{H^p} = ‖S(f)‖_{L^p}`.
pub fn hardy_norm(f: &GridFunction, p: f64) -> Result<f64> {
    lp_norm(&square_function(f), p)
}

/// `(Σ_k |f_k|²)^{1/2}` pointwise. An empty family needs an explicit
/// resolution, so it takes one.
pub fn pointwise_l2(res: Resolution, family: &[GridFunction]) -> Result<GridFunction> {
    let mut acc = GridFunction::zeros(res);
    for f in family {
        acc.check_same_resolution(f)?;
        acc.values_mut()
            .iter_mut()
            .zip(f.values())
            .for_each(|(a, v)| *a += v * v);
    }
    Ok(acc.map(f64::sqrt))
}

/// The dyadic rectangle `[k1 2^-n1, (k1+1) 2^-n1) × [k2 2^-n2, (k2+1) 2^-n2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicSpatialRect {
    pub n1: u32,
    pub n2: u32,
    pub k1: u64,
    pub k2: u64,
}

impl DyadicSpatialRect {
    pub fn new(n1: u32, n2: u32, k1: u64, k2: u64) -> Result<Self> {
        if n1 >= 64 || n2 >= 64 || k1 >= 1 << n1 || k2 >= 1 << n2 {
            return Err(Error::Domain(format!(
                "position ({k1}, {k2}) invalid at scale ({n1}, {n2})"
            )));
        }
        Ok(DyadicSpatialRect { n1, n2, k1, k2 })
    }

    pub fn unit() -> Self {
        DyadicSpatialRect {
            n1: 0,
            n2: 0,
            k1: 0,
            k2: 0,
        }
    }

    /// `|F| = 2^-(n1+n2)`.
    pub fn measure(&self) -> f64 {
        (-f64::from(self.n1 + self.n2)).exp2()
    }

    fn check_fits(&self, res: Resolution) -> Result<()> {
        if self.n1 > res.m() || self.n2 > res.m() {
            return Err(Error::Resolution(format!(
                "rectangle at scale ({}, {}) is finer than the {res} grid",
                self.n1, self.n2
            )));
        }
        Ok(())
    }

    /// Cell ranges covered at resolution `res` (assumed coarse enough).
    pub fn cell_ranges(&self, res: Resolution) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let w1 = 1usize << (res.m() - self.n1);
        let w2 = 1usize << (res.m() - self.n2);
        let s1 = self.k1 as usize * w1;
        let s2 = self.k2 as usize * w2;
        (s1..s1 + w1, s2..s2 + w2)
    }

    pub fn contains_cell(&self, res: Resolution, j1: usize, j2: usize) -> bool {
        let (r1, r2) = self.cell_ranges(res);
        r1.contains(&j1) && r2.contains(&j2)
    }
}

/// A rectangle atom together with its support metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectangleAtom {
    pub support: DyadicSpatialRect,
    pub p: f64,
    pub values: GridFunction,
    /// Set when the support is a single cell wide in some axis, which forces
    /// the zero function.
    pub degenerate: bool,
}

/// Draws a random rectangle atom supported on `support`.
///
/// Values are Gaussian on the support cells, then each row and each column
/// is centred so every axis-parallel line integral vanishes, then the result
/// is scaled to `‖a‖₂ = |F|^{1/2 - 1/p}`.
pub fn make_rectangle_atom(
    res: Resolution,
    support: DyadicSpatialRect,
    p: f64,
    seed: u64,
) -> Result<RectangleAtom> {
    support.check_fits(res)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!(
            "atom exponent must lie in (0, 1], got {p}"
        )));
    }
    let (r1, r2) = support.cell_ranges(res);
    if r1.len() < 2 || r2.len() < 2 {
        return Ok(RectangleAtom {
            support,
            p,
            values: GridFunction::zeros(res),
            degenerate: true,
        });
    }
    let (h, w) = (r1.len(), r2.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut block: Vec<f64> = (0..h * w)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();

    for row in block.chunks_mut(w) {
        let mean = row.iter().sum::<f64>() / w as f64;
        row.iter_mut().for_each(|v| *v -= mean);
    }
    for c in 0..w {
        let mean = (0..h).map(|r| block[r * w + c]).sum::<f64>() / h as f64;
        (0..h).for_each(|r| block[r * w + c] -= mean);
    }
    // Column centring keeps every row sum at zero.
    debug_assert!(block
        .chunks(w)
        .all(|row| row.iter().sum::<f64>().abs() <= 1e-9 * w as f64));

    let side = res.side();
    let mut values = vec![0.0; res.cell_count()];
    for (r, j1) in r1.clone().enumerate() {
        values[j1 * side + r2.start..j1 * side + r2.end]
            .copy_from_slice(&block[r * w..(r + 1) * w]);
    }
    let mut values = GridFunction::new(res, values)?;
    let target = support.measure().powf(0.5 - 1.0 / p);
    let norm = values.l2_norm_sq().sqrt();
    values = values.scale(target / norm);
    Ok(RectangleAtom {
        support,
        p,
        values,
        degenerate: false,
    })
}

/// Detailed outcome of [`check_rectangle_atom`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomCheck {
    pub max_outside_support: f64,
    pub l2_norm: f64,
    pub norm_bound: f64,
    pub max_row_integral: f64,
    pub max_column_integral: f64,
}

impl AtomCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_outside_support <= tol
            && self.l2_norm <= self.norm_bound + tol
            && self.max_row_integral <= tol
            && self.max_column_integral <= tol
    }
}

#[allow(clippy::needless_range_loop)]
pub fn check_rectangle_atom(
    f: &GridFunction,
    support: &DyadicSpatialRect,
    p: f64,
) -> Result<AtomCheck> {
    let res = f.resolution();
    support.check_fits(res)?;
    let side = res.side();
    let cell = 1.0 / side as f64;
    let mut max_outside = 0.0f64;
    let mut row_sums = vec![0.0; side];
    let mut col_sums = vec![0.0; side];
    for j1 in 0..side {
        for j2 in 0..side {
            let v = f.get(j1, j2);
            if !support.contains_cell(res, j1, j2) {
                max_outside = max_outside.max(v.abs());
            }
            row_sums[j2] += v * cell;
            col_sums[j1] += v * cell;
        }
    }
    let max_abs = |xs: &[f64]| xs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(AtomCheck {
        max_outside_support: max_outside,
        l2_norm: f.l2_norm_sq().sqrt(),
        norm_bound: support.measure().powf(0.5 - 1.0 / p),
        // ∫ a(u, y) du for each y-cell, then ∫ a(x, u) du for each x-cell.
        max_row_integral: max_abs(&row_sums),
        max_column_integral: max_abs(&col_sums),
    })
}

/// Whether `f` is an `H^p` rectangle atom on `support`, within `tol`.
pub fn is_rectangle_atom(f: &GridFunction, support: &DyadicSpatialRect, p: f64, tol: f64) -> bool {
    check_rectangle_atom(f, support, p).is_ok_and(|c| c.passes(tol))
}
