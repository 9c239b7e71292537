//! Walsh functions in Paley ordering on dyadic grids.
//!
//! A grid of resolution `m` has `2^m` cells per axis. Cell `j` of an axis is
//! `[j 2^-m, (j+1) 2^-m)`. Every Walsh function `w_n` with `n < 2^m` is
//! constant on those cells, so functions with spectrum in `[0, 2^m)²` are
//! represented exactly by their cell values.
//!
//! Conventions:
//!
//! * `w_0 ≡ 1`, and `w_n = ∏ r_{i+1}` over the set bits `i` of `n`.
//! * Characters are sampled at cell midpoints, where `sgn sin` never vanishes.
//! * The forward transform returns true inner products (it carries the
//!   `2^-m` factor per axis); the inverse is plain synthesis.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{BitXor, Range};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `m`; a `2^16 × 2^16` grid is already 32 GiB of `f64`.
pub const MAX_RESOLUTION: u32 = 16;

/// Number of dyadic cells per axis, as a base-2 exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Resolution(u32);

impl Resolution {
    pub fn new(m: u32) -> Result<Self> {
        Self::with_cap(m, MAX_RESOLUTION)
    }

    pub fn with_cap(m: u32, cap: u32) -> Result<Self> {
        if m > cap {
            return Err(Error::Resolution(format!(
                "m={m} exceeds the resolution cap {cap}"
            )));
        }
        Ok(Resolution(m))
    }

    #[inline]
    pub fn m(self) -> u32 {
        self.0
    }

    /// Cells per axis, `2^m`.
    #[inline]
    pub fn side(self) -> usize {
        1usize << self.0
    }

    #[inline]
    pub fn cell_count(self) -> usize {
        self.side() * self.side()
    }

    /// Exclusive upper bound on spectral indices, `2^m`.
    #[inline]
    pub fn spectral_bound(self) -> u64 {
        1u64 << self.0
    }

    fn check_index(self, n: u64) -> Result<()> {
        if n >= self.spectral_bound() {
            return Err(Error::SpectrumOutOfRange {
                index: n,
                m: self.0,
                bound: self.spectral_bound(),
            });
        }
        Ok(())
    }

    fn check_cell(self, j: usize) -> Result<()> {
        if j >= self.side() {
            return Err(Error::Domain(format!(
                "cell index {j} outside [0, {})",
                self.side()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={}", self.0)
    }
}

/// A two-parameter index `(n1, n2) ∈ Z_+²`.
///
/// The derived `Ord` is lexicographic and only serves map keys; the
/// mathematical partial order is [`SpectralIndex::componentwise_le`].
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(from = "[u64; 2]", into = "[u64; 2]")]
pub struct SpectralIndex {
    pub n1: u64,
    pub n2: u64,
}

impl SpectralIndex {
    pub const ZERO: SpectralIndex = SpectralIndex { n1: 0, n2: 0 };

    #[inline]
    pub const fn new(n1: u64, n2: u64) -> Self {
        SpectralIndex { n1, n2 }
    }

    /// `self ≤ other` iff both coordinates are `≤`.
    #[inline]
    pub fn componentwise_le(self, other: SpectralIndex) -> bool {
        self.n1 <= other.n1 && self.n2 <= other.n2
    }

    #[inline]
    pub fn componentwise_min(self, other: SpectralIndex) -> SpectralIndex {
        SpectralIndex::new(self.n1.min(other.n1), self.n2.min(other.n2))
    }
}

impl BitXor for SpectralIndex {
    type Output = SpectralIndex;

    #[inline]
    fn bitxor(self, rhs: SpectralIndex) -> SpectralIndex {
        xor_index(self, rhs)
    }
}

impl From<(u64, u64)> for SpectralIndex {
    fn from((n1, n2): (u64, u64)) -> Self {
        SpectralIndex::new(n1, n2)
    }
}

impl From<[u64; 2]> for SpectralIndex {
    fn from([n1, n2]: [u64; 2]) -> Self {
        SpectralIndex::new(n1, n2)
    }
}

impl From<SpectralIndex> for [u64; 2] {
    fn from(n: SpectralIndex) -> Self {
        [n.n1, n.n2]
    }
}

impl fmt::Display for SpectralIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n1, self.n2)
    }
}

/// Componentwise xor, the group law under which `w_n w_m = w_{n ∔ m}`.
#[inline]
pub fn xor_index(n: SpectralIndex, other: SpectralIndex) -> SpectralIndex {
    SpectralIndex::new(n.n1 ^ other.n1, n.n2 ^ other.n2)
}

/// Reverses the low `bits` bits of `j`.
#[inline]
pub fn bit_reverse(j: usize, bits: u32) -> usize {
    if bits == 0 {
        return 0;
    }
    j.reverse_bits() >> (usize::BITS - bits)
}

/// Value of the Rademacher function `r_k = sgn sin(2^k π x)` on cell `j`.
pub fn rademacher_on_cell(k: u32, j: usize, res: Resolution) -> Result<i8> {
    if k == 0 {
        return Err(Error::Domain(
            "Rademacher index k must be at least 1".into(),
        ));
    }
    if k > res.m() {
        return Err(Error::Resolution(format!(
            "r_{k} is not constant on the cells of a {res} grid"
        )));
    }
    res.check_cell(j)?;
    Ok(if (j >> (res.m() - k)) & 1 == 0 { 1 } else { -1 })
}

/// Value of the Paley-ordered Walsh function `w_n` on cell `j`.
pub fn walsh_on_cell(n: u64, j: usize, res: Resolution) -> Result<i8> {
    res.check_index(n)?;
    res.check_cell(j)?;
    Ok(walsh_sign(n, j, res.m()))
}

#[inline]
fn walsh_sign(n: u64, j: usize, m: u32) -> i8 {
    let rev = bit_reverse(j, m) as u64;
    if (n & rev).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// In-place unnormalized Hadamard butterfly in natural order.
fn hadamard_butterfly(data: &mut [f64]) {
    let n = data.len();
    let mut half = 1;
    while half < n {
        for chunk in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        half *= 2;
    }
}

fn bit_reverse_permute(data: &mut [f64]) {
    let bits = data.len().trailing_zeros();
    for i in 0..data.len() {
        let r = bit_reverse(i, bits);
        if i < r {
            data.swap(i, r);
        }
    }
}

fn check_power_of_two(len: usize) -> Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Shape(format!(
            "transform length {len} is not a power of two"
        )));
    }
    Ok(())
}

/// Forward Paley-ordered transform in place: `c_n = 2^-m Σ_j v_j w_n(j)`.
pub fn fwht_paley_forward_in_place(data: &mut [f64]) -> Result<()> {
    check_power_of_two(data.len())?;
    hadamard_butterfly(data);
    // Natural Hadamard order is H[n][j] = (-1)^{n·j}; Paley needs (-1)^{n·rev(j)}.
    bit_reverse_permute(data);
    let scale = 1.0 / data.len() as f64;
    data.iter_mut().for_each(|x| *x *= scale);
    Ok(())
}

/// Inverse (synthesis) in place: `f_j = Σ_n c_n w_n(j)`.
pub fn fwht_paley_inverse_in_place(data: &mut [f64]) -> Result<()> {
    check_power_of_two(data.len())?;
    hadamard_butterfly(data);
    bit_reverse_permute(data);
    Ok(())
}

pub fn fwht_paley_forward(values: &[f64]) -> Result<Vec<f64>> {
    let mut out = values.to_vec();
    fwht_paley_forward_in_place(&mut out)?;
    Ok(out)
}

pub fn fwht_paley_inverse(coeffs: &[f64]) -> Result<Vec<f64>> {
    let mut out = coeffs.to_vec();
    fwht_paley_inverse_in_place(&mut out)?;
    Ok(out)
}

/// A real function on `[0,1)²`, constant on the `2^-m × 2^-m` dyadic cells.
///
/// Values are stored row-major: cell `(j1, j2)` lives at `j1 * 2^m + j2`,
/// with `j1` indexing the first coordinate `x1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    resolution: Resolution,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(resolution: Resolution, values: Vec<f64>) -> Result<Self> {
        if values.len() != resolution.cell_count() {
            return Err(Error::Shape(format!(
                "expected {} values for {resolution}, got {}",
                resolution.cell_count(),
                values.len()
            )));
        }
        let side = resolution.side();
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                j1: pos / side,
                j2: pos % side,
            });
        }
        Ok(GridFunction { resolution, values })
    }

    /// Builds a grid from `2^m` rows of `2^m` values each.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let side = rows.len();
        check_power_of_two(side)?;
        if let Some(bad) = rows.iter().find(|r| r.len() != side) {
            return Err(Error::Shape(format!(
                "grid is not square: a row has {} values, expected {side}",
                bad.len()
            )));
        }
        let res = Resolution::new(side.trailing_zeros())?;
        GridFunction::new(res, rows.concat())
    }

    pub fn zeros(resolution: Resolution) -> Self {
        GridFunction {
            resolution,
            values: vec![0.0; resolution.cell_count()],
        }
    }

    pub fn constant(resolution: Resolution, c: f64) -> Self {
        GridFunction {
            resolution,
            values: vec![c; resolution.cell_count()],
        }
    }

    pub fn from_fn(resolution: Resolution, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let side = resolution.side();
        let values = (0..side * side).map(|i| f(i / side, i % side)).collect();
        GridFunction::new(resolution, values)
    }

    /// The two-parameter Walsh function `w_{n1}(x1) w_{n2}(x2)`.
    pub fn walsh(resolution: Resolution, n: SpectralIndex) -> Result<Self> {
        resolution.check_index(n.n1)?;
        resolution.check_index(n.n2)?;
        let m = resolution.m();
        GridFunction::from_fn(resolution, |j1, j2| {
            f64::from(walsh_sign(n.n1, j1, m) * walsh_sign(n.n2, j2, m))
        })
    }

    #[inline]
    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.resolution.side()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, j1: usize, j2: usize) -> f64 {
        self.values[j1 * self.side() + j2]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values
            .chunks(self.side())
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn check_same_resolution(&self, other: &GridFunction) -> Result<()> {
        if self.resolution != other.resolution {
            return Err(Error::ResolutionMismatch {
                left: self.resolution.m(),
                right: other.resolution.m(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add_assign(&mut self, other: &GridFunction) -> Result<()> {
        self.check_same_resolution(other)?;
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, b)| *a += b);
        Ok(())
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| v * c)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            resolution: self.resolution,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.check_same_resolution(other)?;
        Ok(GridFunction {
            resolution: self.resolution,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_resolution(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }

    /// Cell-averaged mean, `∫ f`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `‖f‖₂²` with respect to Lebesgue measure on the unit square.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    /// Multiplies pointwise by the Walsh character `w_n`.
    pub fn modulate(&self, n: SpectralIndex) -> Result<GridFunction> {
        let res = self.resolution;
        res.check_index(n.n1)?;
        res.check_index(n.n2)?;
        let m = res.m();
        let side = res.side();
        let row_signs: Vec<f64> = (0..side)
            .map(|j| f64::from(walsh_sign(n.n1, j, m)))
            .collect();
        let col_signs: Vec<f64> = (0..side)
            .map(|j| f64::from(walsh_sign(n.n2, j, m)))
            .collect();
        let mut out = self.clone();
        for (row, s1) in out.values.chunks_mut(side).zip(&row_signs) {
            for (v, s2) in row.iter_mut().zip(&col_signs) {
                *v *= s1 * s2;
            }
        }
        Ok(out)
    }
}

/// Two-parameter Walsh coefficients `⟨f, w_{n1,n2}⟩`, row-major in `(n1, n2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffMatrix {
    resolution: Resolution,
    coeffs: Vec<f64>,
}

impl CoeffMatrix {
    pub fn new(resolution: Resolution, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != resolution.cell_count() {
            return Err(Error::Shape(format!(
                "expected {} coefficients for {resolution}, got {}",
                resolution.cell_count(),
                coeffs.len()
            )));
        }
        Ok(CoeffMatrix { resolution, coeffs })
    }

    pub fn zeros(resolution: Resolution) -> Self {
        CoeffMatrix {
            resolution,
            coeffs: vec![0.0; resolution.cell_count()],
        }
    }

    #[inline]
    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn get(&self, n: SpectralIndex) -> f64 {
        self.coeffs[self.offset(n)]
    }

    pub fn set(&mut self, n: SpectralIndex, value: f64) {
        let i = self.offset(n);
        self.coeffs[i] = value;
    }

    #[inline]
    fn offset(&self, n: SpectralIndex) -> usize {
        let side = self.resolution.side();
        assert!(
            (n.n1 as usize) < side && (n.n2 as usize) < side,
            "index {n} outside [0, {side})²"
        );
        n.n1 as usize * side + n.n2 as usize
    }

    /// Indices whose coefficient exceeds `tol` in absolute value.
    pub fn support(&self, tol: f64) -> Vec<SpectralIndex> {
        let side = self.resolution.side();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(i, _)| SpectralIndex::new((i / side) as u64, (i % side) as u64))
            .collect()
    }

    /// Largest coefficient magnitude over indices outside `region`.
    pub fn max_outside(&self, region: &SpectralBox) -> f64 {
        let side = self.resolution.side();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                !region.contains(SpectralIndex::new((i / side) as u64, (i % side) as u64))
            })
            .fold(0.0, |acc, (_, c)| acc.max(c.abs()))
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Zeroes every coefficient outside `region`.
    pub fn restrict(&mut self, region: &SpectralBox) {
        let side = self.resolution.side();
        for (n1, row) in self.coeffs.chunks_mut(side).enumerate() {
            let keep_row = region.n1.contains(&(n1 as u64));
            for (n2, c) in row.iter_mut().enumerate() {
                if !(keep_row && region.n2.contains(&(n2 as u64))) {
                    *c = 0.0;
                }
            }
        }
    }
}

/// Axis along which a separable 2D pass runs first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisOrder {
    RowsFirst,
    ColumnsFirst,
}

fn transform_rows(data: &mut [f64], side: usize, op: fn(&mut [f64]) -> Result<()>) {
    for row in data.chunks_exact_mut(side) {
        op(row).expect("row length is a power of two");
    }
}

fn transform_columns(data: &mut [f64], side: usize, op: fn(&mut [f64]) -> Result<()>) {
    let mut column = vec![0.0; side];
    for j2 in 0..side {
        for (j1, c) in column.iter_mut().enumerate() {
            *c = data[j1 * side + j2];
        }
        op(&mut column).expect("column length is a power of two");
        for (j1, c) in column.iter().enumerate() {
            data[j1 * side + j2] = *c;
        }
    }
}

fn separable(data: &mut [f64], side: usize, order: AxisOrder, op: fn(&mut [f64]) -> Result<()>) {
    match order {
        AxisOrder::RowsFirst => {
            transform_rows(data, side, op);
            transform_columns(data, side, op);
        }
        AxisOrder::ColumnsFirst => {
            transform_columns(data, side, op);
            transform_rows(data, side, op);
        }
    }
}

pub fn walsh_transform_2d(f: &GridFunction) -> CoeffMatrix {
    walsh_transform_2d_ordered(f, AxisOrder::RowsFirst)
}

pub fn walsh_transform_2d_ordered(f: &GridFunction, order: AxisOrder) -> CoeffMatrix {
    let mut coeffs = f.values.clone();
    separable(&mut coeffs, f.side(), order, fwht_paley_forward_in_place);
    CoeffMatrix {
        resolution: f.resolution,
        coeffs,
    }
}

pub fn inverse_walsh_transform_2d(c: &CoeffMatrix) -> GridFunction {
    let mut values = c.coeffs.clone();
    separable(
        &mut values,
        c.resolution.side(),
        AxisOrder::RowsFirst,
        fwht_paley_inverse_in_place,
    );
    GridFunction {
        resolution: c.resolution,
        values,
    }
}

/// A product of two half-open index ranges, `n1 × n2 ⊂ Z_+²`.
///
/// Dyadic blocks, spectral rectangles and their xor-shifts are all boxes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpectralBox {
    pub n1: Range<u64>,
    pub n2: Range<u64>,
}

impl SpectralBox {
    pub fn new(n1: Range<u64>, n2: Range<u64>) -> Self {
        SpectralBox { n1, n2 }
    }

    /// `[0, 2^m)²`.
    pub fn full(res: Resolution) -> Self {
        let b = res.spectral_bound();
        SpectralBox::new(0..b, 0..b)
    }

    #[inline]
    pub fn contains(&self, n: SpectralIndex) -> bool {
        self.n1.contains(&n.n1) && self.n2.contains(&n.n2)
    }

    pub fn is_empty(&self) -> bool {
        self.n1.is_empty() || self.n2.is_empty()
    }

    pub fn cardinality(&self) -> u64 {
        (self.n1.end.saturating_sub(self.n1.start)) * (self.n2.end.saturating_sub(self.n2.start))
    }

    pub fn iter(&self) -> impl Iterator<Item = SpectralIndex> + '_ {
        self.n1
            .clone()
            .flat_map(move |a| self.n2.clone().map(move |b| SpectralIndex::new(a, b)))
    }

    pub fn intersects(&self, other: &SpectralBox) -> bool {
        self.n1.start < other.n1.end
            && other.n1.start < self.n1.end
            && self.n2.start < other.n2.end
            && other.n2.start < self.n2.end
    }

    pub fn fits(&self, res: Resolution) -> bool {
        let b = res.spectral_bound();
        self.n1.end <= b && self.n2.end <= b
    }

    fn check_fits(&self, res: Resolution) -> Result<()> {
        if self.is_empty() {
            return Ok(());
        }
        res.check_index(self.n1.end - 1)?;
        res.check_index(self.n2.end - 1)
    }
}

impl fmt::Display for SpectralBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {})×[{}, {})",
            self.n1.start, self.n1.end, self.n2.start, self.n2.end
        )
    }
}

/// `M_I f` for an arbitrary finite index set `I`.
pub fn spectral_project(
    f: &GridFunction,
    indices: &BTreeSet<SpectralIndex>,
) -> Result<GridFunction> {
    let res = f.resolution();
    for n in indices {
        res.check_index(n.n1)?;
        res.check_index(n.n2)?;
    }
    let coeffs = walsh_transform_2d(f);
    let mut kept = CoeffMatrix::zeros(res);
    for &n in indices {
        kept.set(n, coeffs.get(n));
    }
    Ok(inverse_walsh_transform_2d(&kept))
}

/// `M_I f` where `I` is a box; the workhorse behind `E_n` and `Δ_k`.
pub fn project_box(f: &GridFunction, region: &SpectralBox) -> Result<GridFunction> {
    region.check_fits(f.resolution())?;
    let mut coeffs = walsh_transform_2d(f);
    coeffs.restrict(region);
    Ok(inverse_walsh_transform_2d(&coeffs))
}

/// Synthesizes the function with the given coefficients restricted to `region`.
pub fn synthesize_box(coeffs: &CoeffMatrix, region: &SpectralBox) -> Result<GridFunction> {
    region.check_fits(coeffs.resolution())?;
    let mut kept = coeffs.clone();
    kept.restrict(region);
    Ok(inverse_walsh_transform_2d(&kept))
}

/// Whether every coefficient of `f` outside `region` is at most `tol`.
pub fn spectrum_within(f: &GridFunction, region: &SpectralBox, tol: f64) -> bool {
    walsh_transform_2d(f).max_outside(region) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(m: u32) -> Resolution {
        Resolution::new(m).unwrap()
    }

    #[test]
    fn rademacher_examples() {
        assert_eq!(rademacher_on_cell(1, 0, res(2)).unwrap(), 1);
        assert_eq!(rademacher_on_cell(1, 3, res(2)).unwrap(), -1);
        assert_eq!(rademacher_on_cell(2, 2, res(2)).unwrap(), 1);
    }

    #[test]
    fn rademacher_errors() {
        assert!(matches!(
            rademacher_on_cell(3, 0, res(2)),
            Err(Error::Resolution(_))
        ));
        assert!(matches!(
            rademacher_on_cell(0, 0, res(2)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn walsh_examples() {
        for j in 0..8 {
            assert_eq!(walsh_on_cell(0, j, res(3)).unwrap(), 1);
        }
        assert_eq!(walsh_on_cell(3, 1, res(2)).unwrap(), -1);
        assert_eq!(walsh_on_cell(2, 2, res(2)).unwrap(), 1);
        assert!(matches!(
            walsh_on_cell(4, 0, res(2)),
            Err(Error::SpectrumOutOfRange { index: 4, .. })
        ));
    }

    #[test]
    fn xor_examples() {
        let x = |a, b| SpectralIndex::new(a, b);
        assert_eq!(xor_index(x(3, 1), x(3, 1)), x(0, 0));
        assert_eq!(xor_index(x(3, 0), x(5, 0)), x(6, 0));
        assert_eq!(x(12, 3) ^ x(8, 2), x(4, 1));
    }

    #[test]
    fn forward_examples() {
        assert_eq!(
            fwht_paley_forward(&[1.0, 1.0, 1.0, 1.0]).unwrap(),
            [1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            fwht_paley_forward(&[1.0, 1.0, -1.0, -1.0]).unwrap(),
            [0.0, 1.0, 0.0, 0.0]
        );
        assert_eq!(
            fwht_paley_forward(&[1.0, -1.0, -1.0, 1.0]).unwrap(),
            [0.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(fwht_paley_inverse(&[1.0, 0.0, 0.0, 0.0]).unwrap(), [1.0; 4]);
        assert_eq!(
            fwht_paley_inverse(&[0.0, 1.0, 0.0, 0.0]).unwrap(),
            [1.0, 1.0, -1.0, -1.0]
        );
    }

    #[test]
    fn non_power_of_two_is_shape_error() {
        assert!(matches!(
            fwht_paley_forward(&[1.0; 3]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(fwht_paley_inverse(&[]), Err(Error::Shape(_))));
    }

    #[test]
    fn transform_2d_examples() {
        let one = GridFunction::constant(res(2), 1.0);
        let c = walsh_transform_2d(&one);
        assert_eq!(c.support(1e-15), vec![SpectralIndex::ZERO]);
        assert_eq!(c.get(SpectralIndex::ZERO), 1.0);

        let f = GridFunction::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let c = walsh_transform_2d(&f);
        assert_eq!(c.coeffs(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn grid_rejects_non_finite_and_bad_shapes() {
        assert!(matches!(
            GridFunction::new(res(1), vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite { j1: 0, j2: 1 })
        ));
        assert!(matches!(
            GridFunction::new(res(1), vec![0.0; 3]),
            Err(Error::Shape(_))
        ));
        let a = GridFunction::zeros(res(1));
        let b = GridFunction::zeros(res(2));
        assert!(matches!(
            a.add(&b),
            Err(Error::ResolutionMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn resolution_cap() {
        assert!(Resolution::new(16).is_ok());
        assert!(Resolution::new(17).is_err());
        assert!(Resolution::with_cap(5, 4).is_err());
    }

    #[test]
    fn projection_examples() {
        let f = GridFunction::walsh(res(3), SpectralIndex::new(5, 2))
            .unwrap()
            .add(&GridFunction::constant(res(3), 0.5))
            .unwrap();
        let spec: BTreeSet<_> = [SpectralIndex::new(5, 2), SpectralIndex::ZERO].into();
        let p = spectral_project(&f, &spec).unwrap();
        assert!(p.max_abs_diff(&f).unwrap() < 1e-15);
        assert_eq!(
            spectral_project(&f, &BTreeSet::new()).unwrap().max_abs(),
            0.0
        );
        let out_of_range: BTreeSet<_> = [SpectralIndex::new(8, 0)].into();
        assert!(spectral_project(&f, &out_of_range).is_err());
        assert!(project_box(&f, &SpectralBox::new(0..9, 0..1)).is_err());
    }

    #[test]
    fn modulation_is_character_multiplication() {
        let f = GridFunction::walsh(res(3), SpectralIndex::new(3, 6)).unwrap();
        let g = f.modulate(SpectralIndex::new(5, 4)).unwrap();
        let expected = GridFunction::walsh(res(3), SpectralIndex::new(6, 2)).unwrap();
        assert_eq!(g, expected);
    }

    #[test]
    fn box_geometry() {
        let a = SpectralBox::new(0..4, 2..3);
        assert_eq!(a.cardinality(), 4);
        assert!(a.intersects(&SpectralBox::new(3..5, 0..3)));
        assert!(!a.intersects(&SpectralBox::new(4..5, 0..3)));
        assert_eq!(a.iter().count(), 4);
    }
}
