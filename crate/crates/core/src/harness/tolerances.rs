//! Named tolerances for the identity suite and the ratio experiments.

/// Transform vs. naive definition, and transform round trips.
pub const TRANSFORM: f64 = 1e-12;

/// `Δ_k(w_vertex f) = w_vertex f` for `spec f` inside a mapped block.
pub const SHIFT_IDENTITY: f64 = 1e-12;

/// `apply_g(build_from_partition(..)) = Σ f_i`.
pub const RECONSTRUCTION: f64 = 1e-10;

/// `‖G h‖₂² = Σ ‖Δ_k h_{j,k}‖₂²`.
pub const G_BOOKKEEPING: f64 = 1e-10;

/// Relative slack in `‖G h‖₂ ≤ ‖h‖_{L²(l²)}`.
pub const G_L2_BOUND_SLACK: f64 = 1e-12;

/// `|G h|` outside the support of a rectangle atom.
pub const ATOM_SUPPORT: f64 = 1e-12;

/// `|‖S f‖₂ − ‖f‖₂|`.
pub const SQUARE_FUNCTION_ISOMETRY: f64 = 1e-10;

/// `|ratio − 1|` at `p = 2`.
pub const PARSEVAL_RATIO: f64 = 1e-9;

/// Line integrals and support leakage when validating generated atoms.
pub const ATOM_VALIDATION: f64 = 1e-12;
