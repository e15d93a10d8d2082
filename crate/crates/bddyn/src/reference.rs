//! Published reference values for the default parameter set.
//!
//! These are comparison targets, never gates: the toolkit's own
//! residual-verified computations are treated as ground truth, and every
//! report that cites one of these constants also prints the computed value
//! and the relative difference.

/// Published critical growth rate at the `table2` parameter set.
pub const PUBLISHED_RC: f64 = 1.320961640;

/// Published limit-cycle stability quantity at the `table2` parameter set.
pub const PUBLISHED_PI: f64 = 1.0424314050;

/// Published interior equilibrium `(x1*, x2*, x3*)`.
///
/// Note: this point does not satisfy the model's own closed-form component
/// relations at any growth rate in [0.8, 2.0]; the discrepancy report in
/// `cmd_validate` quantifies the gap.
pub const PUBLISHED_INTERIOR: [f64; 3] = [169.1663564, 55.36073780, 62.98120968];
