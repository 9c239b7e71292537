//! Two-parameter Walsh analysis on finite dyadic grids.
//!
//! * [`walsh`]: Paley-ordered Walsh functions, fast transforms, projections.
//! * [`decomp`]: xor-shiftable decompositions of spectral rectangles.
//! * [`martingale`]: dyadic conditional expectations, martingale differences,
//!   the square function, `L^p`/`H^p` norms and rectangle atoms.
//! * [`operator_g`]: the shift-family operator `G` and reconstruction of
//!   `Σ f_k` through it.
//! * [`harness`]: random instances, ratio experiments and the identity suite.

pub mod decomp;
pub mod error;
pub mod harness;
pub mod martingale;
pub mod operator_g;
pub mod walsh;

pub use decomp::{
    decompose_interval, decompose_rectangle, delta_block_1d, delta_block_2d, verify_decomposition,
    BlockClass, BlockDecomposition1D, Interval1D, MappedBlock, RectangleDecomposition,
    SpectralRectangle,
};
pub use error::{Error, Result};
pub use martingale::{
    cond_expect, hardy_norm, is_rectangle_atom, lp_norm, make_rectangle_atom, mart_diff,
    pointwise_l2, square_function, DyadicSpatialRect, RectangleAtom,
};
pub use operator_g::{
    apply_g, build_from_partition, validate_shift_family, ComponentLabel, GShiftFamily, ShiftEntry,
    VectorFunction,
};
pub use walsh::{
    fwht_paley_forward, fwht_paley_inverse, rademacher_on_cell, spectral_project, walsh_on_cell,
    walsh_transform_2d, xor_index, CoeffMatrix, GridFunction, Resolution, SpectralBox,
    SpectralIndex,
};
