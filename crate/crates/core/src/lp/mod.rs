//! Dense two-phase revised simplex with dual and basis extraction.
//!
//! Solves
//!
//! ```text
//! min  c'x   s.t.   A_eq x  = b_eq     (p rows)
//!                   A_ub x <= b_ub     (m rows)
//! ```
//!
//! where every structural variable is free; variable bounds, when needed,
//! are expressed as `A_ub` rows. This shape matches market-clearing LPs,
//! whose sensitivity analysis needs three artefacts that off-the-shelf
//! interior-point crates do not expose: equality duals (prices), inequality
//! duals (congestion rents), and the optimal basis itself.
//!
//! The solver works on the slack form `[A_eq 0; A_ub I] [x; s] = [b; f]`,
//! `s >= 0`, using a dense LU of the basis with product-form (eta) updates
//! and periodic refactorisation. Dantzig pricing with deterministic
//! tie-breaking keeps runs reproducible; Bland's rule takes over after a
//! stall. A final purification pass pivots every structural variable into
//! the basis so that the binding inequality set has exactly `n - p` rows.

pub mod basis;
pub mod dense;
mod simplex;

pub use basis::OptimalBasis;
pub use dense::{Lu, Matrix};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("problem dimensions are inconsistent: {0}")]
    Dimensions(String),
    #[error("LP is infeasible (phase-1 residual {residual:.6e})")]
    Infeasible { residual: f64 },
    #[error("LP is unbounded (column {col} can improve without limit)")]
    Unbounded { col: usize },
    #[error("basis became singular: {0}")]
    SingularBasis(#[from] dense::Singular),
    #[error("basis is ill-conditioned (estimate {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("iteration limit {limit} reached without convergence")]
    IterationLimit { limit: usize },
}

/// LP in the solver's native shape. All structural variables are free.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub c: Vec<f64>,
    pub a_eq: Matrix,
    pub b_eq: Vec<f64>,
    pub a_ub: Matrix,
    pub b_ub: Vec<f64>,
}

impl LpProblem {
    pub fn n_vars(&self) -> usize {
        self.c.len()
    }

    pub fn n_eq(&self) -> usize {
        self.b_eq.len()
    }

    pub fn n_ub(&self) -> usize {
        self.b_ub.len()
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.c.len();
        let mismatch = |what: &str| Err(LpError::Dimensions(what.to_string()));
        if self.a_eq.n_rows() != self.b_eq.len() {
            return mismatch("a_eq rows != b_eq length");
        }
        if self.a_ub.n_rows() != self.b_ub.len() {
            return mismatch("a_ub rows != b_ub length");
        }
        if self.a_eq.n_rows() > 0 && self.a_eq.n_cols() != n {
            return mismatch("a_eq cols != c length");
        }
        if self.a_ub.n_rows() > 0 && self.a_ub.n_cols() != n {
            return mismatch("a_ub cols != c length");
        }
        if n == 0 {
            return mismatch("no variables");
        }
        Ok(())
    }
}

/// Primal/dual optimum of an [`LpProblem`].
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Multipliers on equality rows; `d objective / d b_eq[i]`.
    pub duals_eq: Vec<f64>,
    /// Multipliers on inequality rows, nonpositive at optimality;
    /// `d objective / d b_ub[i]`.
    pub duals_ub: Vec<f64>,
    /// Inequality rows whose slack is nonbasic (active at the vertex),
    /// ascending. After purification `binding_ub.len() + p == n`.
    pub binding_ub: Vec<usize>,
    pub iterations: usize,
}

impl LpSolution {
    /// `b_eq' y_eq + b_ub' y_ub`; equals the objective at optimality.
    pub fn dual_objective(&self, p: &LpProblem) -> f64 {
        let eq: f64 = self.duals_eq.iter().zip(&p.b_eq).map(|(y, b)| y * b).sum();
        let ub: f64 = self.duals_ub.iter().zip(&p.b_ub).map(|(y, b)| y * b).sum();
        eq + ub
    }
}

/// Solve to optimality. Deterministic: identical problems produce identical
/// pivot sequences and bit-identical solutions.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution, LpError> {
    problem.check()?;
    simplex::Worker::new(problem).solve()
}
