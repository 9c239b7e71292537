//! The operator `G h = Σ w_{a_{j,k}} Δ_k h_{j,k}` induced by a family of
//! shifts whose blocks `a_{j,k} ∔ δ_k` are pairwise disjoint, and the
//! reconstruction of `Σ f_i` through it from a disjoint rectangle family.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{decompose_rectangle, SpectralRectangle};
use crate::error::{Error, Result};
use crate::martingale::{lp_norm, mart_diff_spectral, pointwise_l2};
use crate::walsh::{
    spectrum_within, synthesize_box, walsh_transform_2d, GridFunction, Resolution, SpectralBox,
    SpectralIndex,
};

/// Relative tolerance for spectral containment checks on sampled data.
pub const LEAK_TOLERANCE: f64 = 1e-9;

/// Opaque component label: which rectangle, and which block inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComponentLabel {
    pub rect: usize,
    pub block: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftEntry {
    pub label: ComponentLabel,
    pub diff_index: SpectralIndex,
    pub shift: SpectralIndex,
}

impl ShiftEntry {
    /// `shift ∔ δ_k`, itself a dyadic box.
    pub fn shifted_block(&self) -> SpectralBox {
        let axis = |a: u64, k: u64| {
            if k == 0 {
                a..a + 1
            } else {
                let e = k - 1;
                let start = ((a >> e) ^ 1) << e;
                start..start + (1 << e)
            }
        };
        SpectralBox::new(
            axis(self.shift.n1, self.diff_index.n1),
            axis(self.shift.n2, self.diff_index.n2),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GShiftFamily {
    pub entries: Vec<ShiftEntry>,
}

impl GShiftFamily {
    pub fn new(entries: Vec<ShiftEntry>) -> Self {
        GShiftFamily { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

const MAX_REPORTED_VIOLATIONS: usize = 32;

/// Checks that every shifted block lies in `[0, 2^m)²` and that no two overlap.
pub fn validate_shift_family(
    fam: &GShiftFamily,
    res: Resolution,
) -> std::result::Result<(), Vec<String>> {
    let mut problems = Vec::new();
    let side = res.side();
    let mut owner: Vec<u32> = vec![u32::MAX; res.cell_count()];
    for (i, e) in fam.entries.iter().enumerate() {
        let m = u64::from(res.m());
        if e.diff_index.n1 > m || e.diff_index.n2 > m {
            problems.push(format!("entry {i}: δ index {} exceeds m={m}", e.diff_index));
            continue;
        }
        let blk = e.shifted_block();
        if !blk.fits(res) {
            problems.push(format!(
                "entry {i}: shifted block {blk} leaves [0, {side})²"
            ));
            continue;
        }
        for n in blk.iter() {
            let slot = &mut owner[n.n1 as usize * side + n.n2 as usize];
            if *slot != u32::MAX {
                if problems.len() < MAX_REPORTED_VIOLATIONS {
                    problems.push(format!("entries {} and {i} both cover index {n}", *slot));
                }
                break;
            }
            *slot = i as u32;
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}

/// Components `h_{j,k}` keyed by `(label, k)`, all at one resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFunction {
    resolution: Resolution,
    components: BTreeMap<(ComponentLabel, SpectralIndex), GridFunction>,
}

impl VectorFunction {
    pub fn new(resolution: Resolution) -> Self {
        VectorFunction {
            resolution,
            components: BTreeMap::new(),
        }
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn insert(
        &mut self,
        label: ComponentLabel,
        k: SpectralIndex,
        f: GridFunction,
    ) -> Result<Option<GridFunction>> {
        if f.resolution() != self.resolution {
            return Err(Error::ResolutionMismatch {
                left: self.resolution.m(),
                right: f.resolution().m(),
            });
        }
        Ok(self.components.insert((label, k), f))
    }

    pub fn get(&self, label: ComponentLabel, k: SpectralIndex) -> Option<&GridFunction> {
        self.components.get(&(label, k))
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(ComponentLabel, SpectralIndex), &GridFunction)> {
        self.components.iter()
    }

    /// `(Σ |h_{j,k}|²)^{1/2}` pointwise.
    pub fn pointwise_l2(&self) -> GridFunction {
        let family: Vec<GridFunction> = self.components.values().cloned().collect();
        pointwise_l2(self.resolution, &family).expect("components share the resolution")
    }

    /// `‖h‖_{L^p(l²)}`.
    pub fn lp_l2_norm(&self, p: f64) -> Result<f64> {
        lp_norm(&self.pointwise_l2(), p)
    }
}

fn summand(entry: &ShiftEntry, h: &VectorFunction) -> Result<Option<GridFunction>> {
    let Some(component) = h.get(entry.label, entry.diff_index) else {
        return Ok(None);
    };
    let term = mart_diff_spectral(component, entry.diff_index)?.modulate(entry.shift)?;
    debug_assert!(
        spectrum_within(
            &term,
            &entry.shifted_block(),
            LEAK_TOLERANCE * (1.0 + term.max_abs())
        ),
        "summand for {:?} leaves its shifted block",
        entry.label
    );
    Ok(Some(term))
}

/// `G h`. Components missing from `h` count as zero.
pub fn apply_g(fam: &GShiftFamily, h: &VectorFunction) -> Result<GridFunction> {
    validate_shift_family(fam, h.resolution()).map_err(Error::InvalidFamily)?;
    let terms = fam
        .entries
        .par_iter()
        .map(|e| summand(e, h))
        .collect::<Result<Vec<_>>>()?;
    let mut out = GridFunction::zeros(h.resolution());
    for t in terms.into_iter().flatten() {
        out.add_assign(&t)?;
    }
    Ok(out)
}

/// The two sides of the L² identity `‖G h‖₂² = Σ ‖Δ_k h_{j,k}‖₂²`.
pub fn g_l2_bookkeeping(fam: &GShiftFamily, h: &VectorFunction) -> Result<(f64, f64)> {
    let gh = apply_g(fam, h)?;
    let mut parts = 0.0;
    for e in &fam.entries {
        if let Some(c) = h.get(e.label, e.diff_index) {
            parts += mart_diff_spectral(c, e.diff_index)?.l2_norm_sq();
        }
    }
    Ok((gh.l2_norm_sq(), parts))
}

/// Pairwise-disjointness and range check for a rectangle family.
pub fn check_rectangle_family(
    rects: &[SpectralRectangle],
    res: Resolution,
) -> std::result::Result<(), Vec<String>> {
    let mut problems = Vec::new();
    for (i, r) in rects.iter().enumerate() {
        if !r.as_box().fits(res) {
            problems.push(format!("rectangle {i} = {r} leaves [0, {})²", res.side()));
        }
        for (j, other) in rects.iter().enumerate().skip(i + 1) {
            if r.intersects(other) {
                problems.push(format!("rectangles {i} = {r} and {j} = {other} intersect"));
            }
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}

/// Splits each `f_i` along the decomposition of its rectangle and returns the
/// shift family and components `g = w_vertex · M_block f_i` for which
/// `apply_g(fam, h) = Σ f_i`.
pub fn build_from_partition(
    res: Resolution,
    rects: &[SpectralRectangle],
    fs: &[GridFunction],
) -> Result<(GShiftFamily, VectorFunction)> {
    if rects.len() != fs.len() {
        return Err(Error::Shape(format!(
            "{} rectangles but {} functions",
            rects.len(),
            fs.len()
        )));
    }
    check_rectangle_family(rects, res).map_err(Error::InvalidPartition)?;

    let per_rect = rects
        .par_iter()
        .zip(fs.par_iter())
        .enumerate()
        .map(
            |(i, (rect, f))| -> Result<Vec<(ShiftEntry, GridFunction)>> {
                if f.resolution() != res {
                    return Err(Error::ResolutionMismatch {
                        left: res.m(),
                        right: f.resolution().m(),
                    });
                }
                let coeffs = walsh_transform_2d(f);
                let scale = coeffs.coeffs().iter().fold(0.0f64, |a, c| a.max(c.abs()));
                let max_leak = coeffs.max_outside(&rect.as_box());
                if max_leak > LEAK_TOLERANCE * (1.0 + scale) {
                    return Err(Error::SpectrumLeak { index: i, max_leak });
                }
                decompose_rectangle(*rect)
                    .blocks
                    .iter()
                    .enumerate()
                    .map(|(b, blk)| {
                        let piece = synthesize_box(&coeffs, &blk.as_box())?;
                        let entry = ShiftEntry {
                            label: ComponentLabel { rect: i, block: b },
                            diff_index: blk.diff_index,
                            shift: blk.vertex,
                        };
                        Ok((entry, piece.modulate(blk.vertex)?))
                    })
                    .collect()
            },
        )
        .collect::<Result<Vec<_>>>()?;

    let mut fam = GShiftFamily::default();
    let mut h = VectorFunction::new(res);
    for (entry, g) in per_rect.into_iter().flatten() {
        h.insert(entry.label, entry.diff_index, g)?;
        fam.entries.push(entry);
    }
    Ok((fam, h))
}
