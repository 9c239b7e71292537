//! The exact-identity verification suite.
//!
//! Each check returns the worst error it saw next to its tolerance:
//!
//! * (a) Paley transform vs. the definition, and round trips
//! * (b) brute-force sweep of interval decompositions
//! * (c) `Δ_k(w_vertex f) = w_vertex f` on every mapped block
//! * (d) `G` reconstructs `Σ f_k` from a partition
//! * (e) `‖G h‖₂² = Σ ‖Δ_k h_{j,k}‖₂²` and `‖G h‖₂ ≤ ‖h‖_{L²(l²)}`
//! * (f) `G h` vanishes outside the support of a rectangle atom
//! * (g) `‖S f‖₂ = ‖f‖₂`

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::generate::{
    check_partition, random_rectangle, sample_spectral_function, trial_seed, CoefficientDist,
    GuillotineParams,
};
use super::tolerances;
use crate::decomp::{decompose_interval, decompose_rectangle, Interval1D, SpectralRectangle};
use crate::error::{Error, Result};
use crate::martingale::{
    make_rectangle_atom, mart_diff, square_function, DyadicSpatialRect, RectangleAtom,
};
use crate::operator_g::{apply_g, build_from_partition, g_l2_bookkeeping, VectorFunction};
use crate::walsh::{
    fwht_paley_forward, fwht_paley_inverse, inverse_walsh_transform_2d, walsh_on_cell,
    walsh_transform_2d, GridFunction, Resolution, SpectralIndex,
};

/// Deliberate corruption used to show that a check can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Flip the top bit of the first vertex coordinate of every mapped block.
    CorruptDecomposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityConfig {
    pub m: u32,
    pub seed: u64,
    pub trials: usize,
    /// Sweep every interval `0 ≤ a < b ≤ interval_bound` in check (b).
    pub interval_bound: u64,
    pub min_block: u64,
    pub fault: Option<Fault>,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig {
            m: 5,
            seed: 0x1D_E471,
            trials: 50,
            interval_bound: 512,
            min_block: 1,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: char,
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
    pub cases: usize,
    pub detail: String,
}

impl CheckResult {
    fn from_error(id: char, name: &str, max_error: f64, tolerance: f64, cases: usize) -> Self {
        CheckResult {
            id,
            name: name.into(),
            passed: max_error <= tolerance,
            max_error,
            tolerance,
            cases,
            detail: String::new(),
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] ({}) {:<34} max_err={:.3e} tol={:.0e} cases={}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.max_error,
            self.tolerance,
            self.cases
        )?;
        if !self.detail.is_empty() {
            write!(f, "  {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: IdentityConfig,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, id: char) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }
}

pub fn verify_identities(cfg: &IdentityConfig) -> Result<SuiteReport> {
    let res = Resolution::new(cfg.m)?;
    if cfg.m == 0 {
        return Err(Error::Config("the identity suite needs m ≥ 1".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let checks = vec![
        check_transform(cfg)?,
        check_interval_sweep(cfg.interval_bound),
        check_shift_identities(cfg, res)?,
        check_reconstruction(cfg, res)?,
        check_bookkeeping(cfg, res)?,
        check_atom_support(cfg, res)?,
        check_square_function(cfg, res)?,
    ];
    Ok(SuiteReport {
        config: cfg.clone(),
        checks,
    })
}

fn rng_for(cfg: &IdentityConfig, check: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed ^ (check << 56), trial as u64))
}

fn gaussian_grid(res: Resolution, rng: &mut impl Rng) -> GridFunction {
    let values = (0..res.cell_count())
        .map(|_| StandardNormal.sample(&mut *rng))
        .collect();
    GridFunction::new(res, values).expect("gaussian samples are finite")
}

/// Naive `O(N²)` Paley coefficients straight from the character values.
pub fn naive_paley_coefficients(values: &[f64], res: Resolution) -> Result<Vec<f64>> {
    let n = res.side();
    (0..n as u64)
        .map(|k| {
            let mut acc = 0.0;
            for (j, v) in values.iter().enumerate() {
                acc += v * f64::from(walsh_on_cell(k, j, res)?);
            }
            Ok(acc / n as f64)
        })
        .collect()
}

fn check_transform(cfg: &IdentityConfig) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for m in 0..=cfg.m.min(8) {
        let res = Resolution::new(m)?;
        let mut rng = rng_for(cfg, 1, m as usize);
        let values: Vec<f64> = (0..res.side())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let fast = fwht_paley_forward(&values)?;
        let naive = naive_paley_coefficients(&values, res)?;
        let back = fwht_paley_inverse(&fast)?;
        for i in 0..values.len() {
            worst = worst.max((fast[i] - naive[i]).abs());
            worst = worst.max((back[i] - values[i]).abs());
        }
        let grid = gaussian_grid(res, &mut rng);
        let round = inverse_walsh_transform_2d(&walsh_transform_2d(&grid));
        worst = worst.max(round.max_abs_diff(&grid)?);
        cases += 1;
    }
    Ok(CheckResult::from_error(
        'a',
        "transform vs naive + round trip",
        worst,
        tolerances::TRANSFORM,
        cases,
    ))
}

/// Brute-force audit of one interval decomposition; `None` when it is sound.
pub fn audit_interval(a: u64, b: u64) -> Option<String> {
    let iv = Interval1D::new(a, b).ok()?;
    let dec = decompose_interval(iv);
    let mut seen = HashSet::new();
    if dec.singleton != a {
        return Some(format!("[{a},{b}): singleton is {} not {a}", dec.singleton));
    }
    seen.insert(a);
    let mut audit_blocks = |pieces: &[crate::decomp::DyadicPiece], vertex: u64| -> Option<String> {
        for p in pieces {
            let e = p.exponent;
            if p.block.len() != 1 << e {
                return Some(format!("[{a},{b}): block {} has size ≠ 2^{e}", p.block));
            }
            for n in p.block.range() {
                if !(a..b).contains(&n) || !seen.insert(n) {
                    return Some(format!("[{a},{b}): index {n} outside or repeated"));
                }
                let shifted = n ^ vertex;
                if !((1 << e)..(1 << (e + 1))).contains(&shifted) {
                    return Some(format!(
                        "[{a},{b}): {vertex} ∔ {n} = {shifted} ∉ [2^{e}, 2^{})",
                        e + 1
                    ));
                }
            }
        }
        None
    };
    if let Some(msg) = audit_blocks(&dec.rising, a) {
        return Some(msg);
    }
    if let Some(msg) = audit_blocks(&dec.falling, b) {
        return Some(msg);
    }
    if dec
        .rising
        .windows(2)
        .any(|w| w[0].exponent >= w[1].exponent)
    {
        return Some(format!("[{a},{b}): κ not strictly increasing"));
    }
    if dec
        .falling
        .windows(2)
        .any(|w| w[0].exponent <= w[1].exponent)
    {
        return Some(format!("[{a},{b}): γ not strictly decreasing"));
    }
    if seen.len() as u64 != b - a {
        return Some(format!(
            "[{a},{b}): covers {} of {} indices",
            seen.len(),
            b - a
        ));
    }
    None
}

fn check_interval_sweep(bound: u64) -> CheckResult {
    let mut failures = Vec::new();
    let mut cases = 0;
    for b in 1..=bound {
        for a in 0..b {
            cases += 1;
            if let Some(msg) = audit_interval(a, b) {
                failures.push(msg);
            }
        }
    }
    let mut c = CheckResult::from_error(
        'b',
        "interval decomposition sweep",
        failures.len() as f64,
        0.0,
        cases,
    );
    if let Some(first) = failures.first() {
        c.detail = format!("{} failures, first: {first}", failures.len());
    }
    c
}

fn check_shift_identities(cfg: &IdentityConfig, res: Resolution) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for t in 0..cfg.trials {
        let mut rng = rng_for(cfg, 3, t);
        let rect = random_rectangle(res, &mut rng);
        let mut dec = decompose_rectangle(rect);
        if cfg.fault == Some(Fault::CorruptDecomposition) {
            let top = 1u64 << (res.m() - 1);
            dec.blocks
                .iter_mut()
                .for_each(|b| b.vertex = b.vertex ^ SpectralIndex::new(top, 0));
        }
        for blk in &dec.blocks {
            let block_rect = SpectralRectangle::new(blk.range1, blk.range2);
            let f =
                sample_spectral_function(&block_rect, res, CoefficientDist::Gaussian, &mut rng)?;
            let shifted = f.modulate(blk.vertex)?;
            let diff = mart_diff(&shifted, blk.diff_index)?;
            worst = worst.max(diff.max_abs_diff(&shifted)?);
            cases += 1;
        }
    }
    Ok(CheckResult::from_error(
        'c',
        "spectral shift identities",
        worst,
        tolerances::SHIFT_IDENTITY,
        cases,
    ))
}

fn random_partition(
    cfg: &IdentityConfig,
    res: Resolution,
    rng: &mut impl Rng,
) -> Result<Vec<SpectralRectangle>> {
    let rects = GuillotineParams::new(cfg.min_block).generate(res, rng);
    check_partition(&rects, res).map_err(Error::InvalidPartition)?;
    Ok(rects)
}

fn check_reconstruction(cfg: &IdentityConfig, res: Resolution) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for t in 0..cfg.trials {
        let mut rng = rng_for(cfg, 4, t);
        let rects = random_partition(cfg, res, &mut rng)?;
        let fs = rects
            .iter()
            .map(|r| sample_spectral_function(r, res, CoefficientDist::Gaussian, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        worst = worst.max(reconstruction_error(res, &rects, &fs)?);
    }
    Ok(CheckResult::from_error(
        'd',
        "G reconstruction",
        worst,
        tolerances::RECONSTRUCTION,
        cfg.trials,
    ))
}

/// `max |Σ f_i − G h|` for the family built from `rects` and `fs`.
pub fn reconstruction_error(
    res: Resolution,
    rects: &[SpectralRectangle],
    fs: &[GridFunction],
) -> Result<f64> {
    let (fam, h) = build_from_partition(res, rects, fs)?;
    let gh = apply_g(&fam, &h)?;
    let mut sum = GridFunction::zeros(res);
    for f in fs {
        sum.add_assign(f)?;
    }
    gh.max_abs_diff(&sum)
}

/// Bookkeeping on a random full-spectrum `h` over the family of a random partition.
/// Returns `(|‖Gh‖² − Σ‖Δh‖²|, ‖Gh‖₂ / ‖h‖_{L²(l²)})`.
pub fn bookkeeping_trial(
    res: Resolution,
    min_block: u64,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    let rects = GuillotineParams::new(min_block).generate(res, rng);
    let fs: Vec<_> = rects.iter().map(|_| GridFunction::zeros(res)).collect();
    let (fam, _) = build_from_partition(res, &rects, &fs)?;
    let mut h = VectorFunction::new(res);
    for e in &fam.entries {
        h.insert(e.label, e.diff_index, gaussian_grid(res, rng))?;
    }
    let (lhs, rhs) = g_l2_bookkeeping(&fam, &h)?;
    let norm_h = h.lp_l2_norm(2.0)?;
    Ok(((lhs - rhs).abs(), lhs.sqrt() / norm_h))
}

fn check_bookkeeping(cfg: &IdentityConfig, res: Resolution) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for t in 0..cfg.trials {
        let mut rng = rng_for(cfg, 5, t);
        let (err, ratio) = bookkeeping_trial(res, cfg.min_block, &mut rng)?;
        worst = worst.max(err);
        worst_ratio = worst_ratio.max(ratio);
    }
    let mut c = CheckResult::from_error(
        'e',
        "G L2 bookkeeping",
        worst,
        tolerances::G_BOOKKEEPING,
        cfg.trials,
    );
    c.passed &= worst_ratio <= 1.0 + tolerances::G_L2_BOUND_SLACK;
    c.detail = format!("max ‖Gh‖/‖h‖ = {worst_ratio:.6}");
    Ok(c)
}

/// A random non-degenerate dyadic rectangle at resolution `res` (needs `m ≥ 1`).
pub fn random_atom_support(res: Resolution, rng: &mut impl Rng) -> DyadicSpatialRect {
    let n1 = rng.random_range(0..res.m());
    let n2 = rng.random_range(0..res.m());
    let k1 = rng.random_range(0..1u64 << n1);
    let k2 = rng.random_range(0..1u64 << n2);
    DyadicSpatialRect::new(n1, n2, k1, k2).expect("position in range")
}

/// Largest `|G h|` outside the atom's support, with every component of `h`
/// equal to the atom and the shift family taken from `rects`.
pub fn g_outside_support(atom: &RectangleAtom, rects: &[SpectralRectangle]) -> Result<f64> {
    let res = atom.values.resolution();
    let fs: Vec<_> = rects.iter().map(|_| GridFunction::zeros(res)).collect();
    let (fam, _) = build_from_partition(res, rects, &fs)?;
    let mut h = VectorFunction::new(res);
    for e in &fam.entries {
        h.insert(e.label, e.diff_index, atom.values.clone())?;
    }
    let gh = apply_g(&fam, &h)?;
    let mut worst = 0.0f64;
    for j1 in 0..res.side() {
        for j2 in 0..res.side() {
            if !atom.support.contains_cell(res, j1, j2) {
                worst = worst.max(gh.get(j1, j2).abs());
            }
        }
    }
    Ok(worst)
}

/// [`g_outside_support`] for a random atom and a random partition.
pub fn atom_support_trial(res: Resolution, min_block: u64, rng: &mut impl Rng) -> Result<f64> {
    let support = random_atom_support(res, rng);
    let atom = make_rectangle_atom(res, support, 1.0, rng.random())?;
    let rects = GuillotineParams::new(min_block).generate(res, rng);
    g_outside_support(&atom, &rects)
}

fn check_atom_support(cfg: &IdentityConfig, res: Resolution) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for t in 0..cfg.trials {
        let mut rng = rng_for(cfg, 6, t);
        worst = worst.max(atom_support_trial(res, cfg.min_block, &mut rng)?);
    }
    Ok(CheckResult::from_error(
        'f',
        "atom support of G",
        worst,
        tolerances::ATOM_SUPPORT,
        cfg.trials,
    ))
}

fn check_square_function(cfg: &IdentityConfig, res: Resolution) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for t in 0..cfg.trials {
        let mut rng = rng_for(cfg, 7, t);
        let f = gaussian_grid(res, &mut rng);
        let s = square_function(&f);
        worst = worst.max((s.l2_norm_sq().sqrt() - f.l2_norm_sq().sqrt()).abs());
    }
    Ok(CheckResult::from_error(
        'g',
        "square function isometry",
        worst,
        tolerances::SQUARE_FUNCTION_ISOMETRY,
        cfg.trials,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> IdentityConfig {
        IdentityConfig {
            m: 4,
            trials: 4,
            interval_bound: 64,
            ..Default::default()
        }
    }

    #[test]
    fn suite_passes_on_small_config() {
        let report = verify_identities(&small()).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{c}");
        }
        assert_eq!(report.checks.len(), 7);
    }

    #[test]
    fn corrupted_decomposition_fails_shift_check() {
        let cfg = IdentityConfig {
            fault: Some(Fault::CorruptDecomposition),
            ..small()
        };
        let report = verify_identities(&cfg).unwrap();
        assert!(!report.check('c').unwrap().passed);
        assert!(!report.passed());
        assert!(report.check('d').unwrap().passed);
    }

    #[test]
    fn audit_accepts_spec_examples() {
        assert_eq!(audit_interval(5, 6), None);
        assert_eq!(audit_interval(0, 8), None);
        assert_eq!(audit_interval(3, 12), None);
    }
}
