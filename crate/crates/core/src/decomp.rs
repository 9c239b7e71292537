//! Xor-shiftable decompositions of spectral intervals and rectangles.
//!
//! An interval `[a, b)` splits into the singleton `{a}`, rising blocks `J_j`
//! with `a ∔ J_j = [2^κ, 2^(κ+1))`, and falling blocks `J̃_j` with
//! `b ∔ J̃_j = [2^γ, 2^(γ+1))`. With `s` the highest bit where `a` and `b`
//! differ, the rising exponents are the zero bits of `a` below `s` and the
//! falling exponents are the one bits of `b` below `s`.
//!
//! Intervals are half-open here. The serialized form uses closed `[lo, hi]`
//! pairs for blocks and the exclusive corner `b` for rectangles.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walsh::{SpectralBox, SpectralIndex};

/// Half-open integer interval `[start, end)` with `start < end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u64; 2]", into = "[u64; 2]")]
pub struct Interval1D {
    start: u64,
    end: u64,
}

impl Interval1D {
    pub fn new(start: u64, end: u64) -> Result<Self> {
        if start >= end {
            return Err(Error::InvalidInterval { start, end });
        }
        Ok(Interval1D { start, end })
    }

    /// From the closed form `[lo, hi]`.
    pub fn closed(lo: u64, hi: u64) -> Result<Self> {
        Interval1D::new(
            lo,
            hi.checked_add(1)
                .ok_or(Error::InvalidInterval { start: lo, end: hi })?,
        )
    }

    #[inline]
    pub fn start(self) -> u64 {
        self.start
    }

    /// Exclusive end.
    #[inline]
    pub fn end(self) -> u64 {
        self.end
    }

    /// Inclusive last element.
    #[inline]
    pub fn last(self) -> u64 {
        self.end - 1
    }

    #[inline]
    pub fn len(self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(self) -> bool {
        false
    }

    #[inline]
    pub fn contains(self, n: u64) -> bool {
        (self.start..self.end).contains(&n)
    }

    pub fn range(self) -> std::ops::Range<u64> {
        self.start..self.end
    }

    pub fn intersects(self, other: Interval1D) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl TryFrom<[u64; 2]> for Interval1D {
    type Error = Error;

    fn try_from([lo, hi]: [u64; 2]) -> Result<Self> {
        Interval1D::closed(lo, hi)
    }
}

impl From<Interval1D> for [u64; 2] {
    fn from(iv: Interval1D) -> Self {
        [iv.start, iv.last()]
    }
}

impl fmt::Display for Interval1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.last())
    }
}

/// The 1D dyadic block `δ_k`: `{0}` for `k = 0`, else `[2^(k-1), 2^k)`.
pub fn delta_block_1d(k: u32) -> Interval1D {
    if k == 0 {
        Interval1D { start: 0, end: 1 }
    } else {
        Interval1D {
            start: 1 << (k - 1),
            end: 1 << k,
        }
    }
}

/// `δ_k = δ_{k1} × δ_{k2}`.
pub fn delta_block_2d(k: SpectralIndex) -> SpectralBox {
    let b1 = delta_block_1d(k.n1 as u32);
    let b2 = delta_block_1d(k.n2 as u32);
    SpectralBox::new(b1.range(), b2.range())
}

/// A power-of-two piece of a 1D decomposition together with its exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicPiece {
    pub exponent: u32,
    pub block: Interval1D,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDecomposition1D {
    pub interval: Interval1D,
    pub singleton: u64,
    /// Ordered by strictly increasing `κ`.
    pub rising: Vec<DyadicPiece>,
    /// Ordered by strictly decreasing `γ`.
    pub falling: Vec<DyadicPiece>,
}

/// Where a 1D block came from; fixes its shift vertex and `δ` index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PieceKind {
    Singleton,
    Rising(u32),
    Falling(u32),
}

impl PieceKind {
    /// `δ` index factor: 0 for `{a}`, `κ+1` or `γ+1` otherwise.
    pub fn diff_factor(self) -> u64 {
        match self {
            PieceKind::Singleton => 0,
            PieceKind::Rising(e) | PieceKind::Falling(e) => u64::from(e) + 1,
        }
    }

    fn is_falling(self) -> bool {
        matches!(self, PieceKind::Falling(_))
    }
}

impl BlockDecomposition1D {
    /// All blocks, tagged, in the order singleton, rising, falling.
    pub fn pieces(&self) -> Vec<(PieceKind, Interval1D)> {
        let singleton = Interval1D {
            start: self.singleton,
            end: self.singleton + 1,
        };
        std::iter::once((PieceKind::Singleton, singleton))
            .chain(
                self.rising
                    .iter()
                    .map(|p| (PieceKind::Rising(p.exponent), p.block)),
            )
            .chain(
                self.falling
                    .iter()
                    .map(|p| (PieceKind::Falling(p.exponent), p.block)),
            )
            .collect()
    }

    pub fn block_count(&self) -> usize {
        1 + self.rising.len() + self.falling.len()
    }
}

/// Aligned block `base ∔ [2^e, 2^(e+1))`, which is again an interval.
fn shifted_dyadic(base: u64, e: u32) -> Interval1D {
    let start = ((base >> e) ^ 1) << e;
    Interval1D {
        start,
        end: start + (1 << e),
    }
}

pub fn decompose_interval(iv: Interval1D) -> BlockDecomposition1D {
    let (a, b) = (iv.start, iv.end);
    let s = 63 - (a ^ b).leading_zeros();
    let rising = (0..s)
        .filter(|&k| (a >> k) & 1 == 0)
        .map(|k| DyadicPiece {
            exponent: k,
            block: shifted_dyadic(a, k),
        })
        .collect();
    let falling = (0..s)
        .rev()
        .filter(|&g| (b >> g) & 1 == 1)
        .map(|g| DyadicPiece {
            exponent: g,
            block: shifted_dyadic(b, g),
        })
        .collect();
    BlockDecomposition1D {
        interval: iv,
        singleton: a,
        rising,
        falling,
    }
}

/// `[a1, b1) × [a2, b2)` in spectral index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RectRepr", into = "RectRepr")]
pub struct SpectralRectangle {
    pub axis1: Interval1D,
    pub axis2: Interval1D,
}

/// Wire form: lower corner `a` and exclusive upper corner `b`.
#[derive(Serialize, Deserialize)]
struct RectRepr {
    a: [u64; 2],
    b: [u64; 2],
}

impl TryFrom<RectRepr> for SpectralRectangle {
    type Error = Error;

    fn try_from(r: RectRepr) -> Result<Self> {
        SpectralRectangle::from_corners(r.a[0], r.b[0], r.a[1], r.b[1])
    }
}

impl From<SpectralRectangle> for RectRepr {
    fn from(r: SpectralRectangle) -> Self {
        RectRepr {
            a: [r.axis1.start, r.axis2.start],
            b: [r.axis1.end, r.axis2.end],
        }
    }
}

impl SpectralRectangle {
    pub fn new(axis1: Interval1D, axis2: Interval1D) -> Self {
        SpectralRectangle { axis1, axis2 }
    }

    /// `[a1, b1 - 1] × [a2, b2 - 1]`.
    pub fn from_corners(a1: u64, b1: u64, a2: u64, b2: u64) -> Result<Self> {
        Ok(SpectralRectangle {
            axis1: Interval1D::new(a1, b1)?,
            axis2: Interval1D::new(a2, b2)?,
        })
    }

    pub fn vertex_a(&self) -> SpectralIndex {
        SpectralIndex::new(self.axis1.start, self.axis2.start)
    }

    pub fn vertex_b(&self) -> SpectralIndex {
        SpectralIndex::new(self.axis1.end, self.axis2.end)
    }

    pub fn vertex_c(&self) -> SpectralIndex {
        SpectralIndex::new(self.axis1.end, self.axis2.start)
    }

    pub fn vertex_d(&self) -> SpectralIndex {
        SpectralIndex::new(self.axis1.start, self.axis2.end)
    }

    pub fn area(&self) -> u64 {
        self.axis1.len() * self.axis2.len()
    }

    pub fn as_box(&self) -> SpectralBox {
        SpectralBox::new(self.axis1.range(), self.axis2.range())
    }

    pub fn contains(&self, n: SpectralIndex) -> bool {
        self.axis1.contains(n.n1) && self.axis2.contains(n.n2)
    }

    pub fn intersects(&self, other: &SpectralRectangle) -> bool {
        self.axis1.intersects(other.axis1) && self.axis2.intersects(other.axis2)
    }
}

impl fmt::Display for SpectralRectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}×{}", self.axis1, self.axis2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockClass {
    /// Singleton-or-rising in both axes; shifted by `a`.
    A,
    /// Falling in both axes; shifted by `b`.
    B,
    /// Falling × singleton-or-rising; shifted by `c = (b1, a2)`.
    C,
    /// Singleton-or-rising × falling; shifted by `d = (a1, b2)`.
    D,
}

impl BlockClass {
    fn classify(first: PieceKind, second: PieceKind) -> BlockClass {
        match (first.is_falling(), second.is_falling()) {
            (false, false) => BlockClass::A,
            (true, true) => BlockClass::B,
            (true, false) => BlockClass::C,
            (false, true) => BlockClass::D,
        }
    }

    pub fn vertex(self, rect: &SpectralRectangle) -> SpectralIndex {
        match self {
            BlockClass::A => rect.vertex_a(),
            BlockClass::B => rect.vertex_b(),
            BlockClass::C => rect.vertex_c(),
            BlockClass::D => rect.vertex_d(),
        }
    }
}

/// One product block of a rectangle decomposition.
///
/// `vertex ∔ block = δ_{diff_index}` elementwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappedBlock {
    pub range1: Interval1D,
    pub range2: Interval1D,
    pub cls: BlockClass,
    pub vertex: SpectralIndex,
    pub diff_index: SpectralIndex,
}

impl MappedBlock {
    pub fn as_box(&self) -> SpectralBox {
        SpectralBox::new(self.range1.range(), self.range2.range())
    }

    pub fn size(&self) -> u64 {
        self.range1.len() * self.range2.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectangleDecomposition {
    pub rect: SpectralRectangle,
    pub blocks: Vec<MappedBlock>,
}

pub fn decompose_rectangle(rect: SpectralRectangle) -> RectangleDecomposition {
    let first = decompose_interval(rect.axis1).pieces();
    let second = decompose_interval(rect.axis2).pieces();
    let mut blocks = Vec::with_capacity(first.len() * second.len());
    for &(k1, range1) in &first {
        for &(k2, range2) in &second {
            let cls = BlockClass::classify(k1, k2);
            blocks.push(MappedBlock {
                range1,
                range2,
                cls,
                vertex: cls.vertex(&rect),
                diff_index: SpectralIndex::new(k1.diff_factor(), k2.diff_factor()),
            });
        }
    }
    RectangleDecomposition { rect, blocks }
}

/// Brute-force check that `dec` partitions `rect` and that every block
/// xor-shifts onto its `δ` block. Returns the list of defects on failure.
pub fn verify_decomposition(
    rect: &SpectralRectangle,
    dec: &RectangleDecomposition,
) -> std::result::Result<(), Vec<String>> {
    let mut problems = Vec::new();
    if dec.rect != *rect {
        problems.push(format!("decomposition is of {} not {rect}", dec.rect));
    }
    let mut seen: HashSet<SpectralIndex> = HashSet::new();
    for (i, blk) in dec.blocks.iter().enumerate() {
        let delta = delta_block_2d(blk.diff_index);
        if delta.cardinality() != blk.size() {
            problems.push(format!(
                "block {i}: size {} differs from |δ_{}| = {}",
                blk.size(),
                blk.diff_index,
                delta.cardinality()
            ));
        }
        for n in blk.as_box().iter() {
            if !rect.contains(n) {
                problems.push(format!("block {i}: index {n} lies outside {rect}"));
            }
            if !seen.insert(n) {
                problems.push(format!("block {i}: index {n} is covered twice"));
            }
            let shifted = n ^ blk.vertex;
            if !delta.contains(shifted) {
                problems.push(format!(
                    "block {i}: {} ∔ {n} = {shifted} is not in δ_{}",
                    blk.vertex, blk.diff_index
                ));
            }
        }
    }
    for n in rect.as_box().iter() {
        if !seen.contains(&n) {
            problems.push(format!("index {n} of {rect} is not covered"));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: u64, b: u64) -> Interval1D {
        Interval1D::new(a, b).unwrap()
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_block_1d(0), iv(0, 1));
        assert_eq!(delta_block_1d(1), iv(1, 2));
        assert_eq!(delta_block_1d(3), Interval1D::closed(4, 7).unwrap());
        assert_eq!(
            delta_block_2d(SpectralIndex::ZERO),
            SpectralBox::new(0..1, 0..1)
        );
        assert_eq!(
            delta_block_2d(SpectralIndex::new(1, 0)),
            SpectralBox::new(1..2, 0..1)
        );
        assert_eq!(
            delta_block_2d(SpectralIndex::new(3, 1)),
            SpectralBox::new(4..8, 1..2)
        );
    }

    #[test]
    fn interval_examples() {
        let d = decompose_interval(iv(5, 6));
        assert_eq!(d.singleton, 5);
        assert!(d.rising.is_empty() && d.falling.is_empty());

        let d = decompose_interval(iv(0, 8));
        assert_eq!(d.singleton, 0);
        let rising: Vec<_> = d.rising.iter().map(|p| (p.exponent, p.block)).collect();
        assert_eq!(rising, vec![(0, iv(1, 2)), (1, iv(2, 4)), (2, iv(4, 8))]);
        assert!(d.falling.is_empty());

        let d = decompose_interval(iv(3, 12));
        assert_eq!(d.singleton, 3);
        assert_eq!(
            d.rising,
            vec![DyadicPiece {
                exponent: 2,
                block: iv(4, 8)
            }]
        );
        assert_eq!(
            d.falling,
            vec![DyadicPiece {
                exponent: 2,
                block: iv(8, 12)
            }]
        );
    }

    #[test]
    fn invalid_interval() {
        assert!(matches!(
            Interval1D::new(4, 4),
            Err(Error::InvalidInterval { start: 4, end: 4 })
        ));
        assert!(Interval1D::new(5, 2).is_err());
    }

    #[test]
    fn rectangle_example() {
        let rect = SpectralRectangle::new(
            Interval1D::closed(3, 11).unwrap(),
            Interval1D::closed(1, 2).unwrap(),
        );
        let dec = decompose_rectangle(rect);
        let find = |r1: Interval1D, r2: Interval1D| {
            *dec.blocks
                .iter()
                .find(|b| b.range1 == r1 && b.range2 == r2)
                .unwrap()
        };
        let b = find(iv(3, 4), iv(1, 2));
        assert_eq!(
            (b.cls, b.vertex, b.diff_index),
            (
                BlockClass::A,
                SpectralIndex::new(3, 1),
                SpectralIndex::new(0, 0)
            )
        );
        let b = find(iv(4, 8), iv(1, 2));
        assert_eq!(
            (b.cls, b.diff_index),
            (BlockClass::A, SpectralIndex::new(3, 0))
        );
        let b = find(iv(8, 12), iv(1, 2));
        assert_eq!(
            (b.cls, b.vertex, b.diff_index),
            (
                BlockClass::C,
                SpectralIndex::new(12, 1),
                SpectralIndex::new(3, 0)
            )
        );
        let b = find(iv(8, 12), iv(2, 3));
        assert_eq!(
            (b.cls, b.vertex, b.diff_index),
            (
                BlockClass::B,
                SpectralIndex::new(12, 3),
                SpectralIndex::new(3, 1)
            )
        );
        assert_eq!(dec.blocks.len(), 3 * 2);
        verify_decomposition(&rect, &dec).unwrap();
    }

    #[test]
    fn singleton_rectangle() {
        let rect = SpectralRectangle::from_corners(0, 1, 0, 1).unwrap();
        let dec = decompose_rectangle(rect);
        assert_eq!(dec.blocks.len(), 1);
        let b = dec.blocks[0];
        assert_eq!(
            (b.cls, b.vertex, b.diff_index),
            (BlockClass::A, SpectralIndex::ZERO, SpectralIndex::ZERO)
        );
    }

    #[test]
    fn verify_detects_missing_index() {
        let rect = SpectralRectangle::from_corners(3, 12, 1, 3).unwrap();
        let mut dec = decompose_rectangle(rect);
        // Shrink one multi-element block so one index goes uncovered.
        let blk = dec.blocks.iter_mut().find(|b| b.range1.len() > 1).unwrap();
        blk.range1 = iv(blk.range1.start(), blk.range1.end() - 1);
        let problems = verify_decomposition(&rect, &dec).unwrap_err();
        assert!(problems.iter().any(|p| p.contains("not covered")));
    }

    #[test]
    fn verify_detects_wrong_vertex() {
        let rect = SpectralRectangle::from_corners(3, 12, 1, 3).unwrap();
        let mut dec = decompose_rectangle(rect);
        dec.blocks[1].vertex = dec.blocks[1].vertex ^ SpectralIndex::new(1, 0);
        assert!(verify_decomposition(&rect, &dec).is_err());
    }

    #[test]
    fn json_shape() {
        let rect = SpectralRectangle::from_corners(3, 12, 1, 3).unwrap();
        let v = serde_json::to_value(rect).unwrap();
        assert_eq!(v, serde_json::json!({"a": [3, 1], "b": [12, 3]}));
        let dec = decompose_rectangle(rect);
        let v = serde_json::to_value(dec.blocks[0]).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "range1": [3, 3], "range2": [1, 1], "cls": "A",
                "vertex": [3, 1], "diff_index": [0, 0]
            })
        );
        let back: RectangleDecomposition =
            serde_json::from_str(&serde_json::to_string(&dec).unwrap()).unwrap();
        assert_eq!(back, dec);
        assert!(serde_json::from_str::<SpectralRectangle>(r#"{"a":[4,0],"b":[4,1]}"#).is_err());
    }
}
