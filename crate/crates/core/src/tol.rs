//! Numerical tolerances used across the solver stack.
//!
//! Every comparison against "zero" in the LP kernel and its consumers goes
//! through one of these constants so the tolerances can be audited (and
//! changed) in one place.

/// Absolute feasibility tolerance on primal constraint residuals.
pub const FEAS_EPS: f64 = 1e-7;

/// Reduced-cost threshold below which a column is not considered improving.
pub const COST_EPS: f64 = 1e-9;

/// Maximum acceptable residual when verifying a factorised basis system.
pub const RESIDUAL_EPS: f64 = 1e-8;

/// Pivots smaller than this (in absolute value) are treated as zero during
/// LU factorisation and ratio tests.
pub const PIVOT_EPS: f64 = 1e-10;

/// Condition-number estimate above which a basis is reported as
/// ill-conditioned instead of silently used.
pub const COND_LIMIT: f64 = 1e12;

/// Relative duality-gap tolerance for accepting an optimal solution.
pub const GAP_REL: f64 = 1e-6;

/// Number of simplex pivots between basis refactorisations.
pub const REFACTOR_EVERY: usize = 64;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
pub const STALL_LIMIT: usize = 40;
