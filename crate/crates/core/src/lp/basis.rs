//! The optimal basis of a solved LP as an explicit square system.
//!
//! At a nondegenerate optimum of `min c'x, Gx = h, Kx <= f` with `n`
//! variables and `p` equalities, exactly `n - p` inequality rows are active.
//! Stacking the equalities with those rows gives a nonsingular `n x n`
//! system `A x* = b` whose inverse drives every sensitivity computation
//! downstream: `dx*/db = A^-1`, and linear functionals of `x*` have
//! gradients `A^-T g` with respect to `b`.

use super::dense::{Lu, Matrix};
use super::{LpError, LpProblem, LpSolution};
use crate::tol::{COND_LIMIT, FEAS_EPS, RESIDUAL_EPS};

/// Origin of one row of the basis system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisRow {
    /// Equality row `i` of the source problem.
    Eq(usize),
    /// Inequality row `i`, active at the optimum.
    Ub(usize),
}

/// Square active-constraint system at the optimum, factorised.
#[derive(Debug)]
pub struct OptimalBasis {
    rows: Vec<BasisRow>,
    a: Matrix,
    b: Vec<f64>,
    lu: Lu,
}

impl OptimalBasis {
    /// Assemble from the solver's binding set, falling back to greedy row
    /// re-selection among near-active rows when degeneracy makes the
    /// reported set unusable.
    pub fn from_solution(prob: &LpProblem, sol: &LpSolution) -> Result<OptimalBasis, LpError> {
        let n = prob.n_vars();
        let p = prob.n_eq();
        if sol.binding_ub.len() + p == n {
            let rows: Vec<BasisRow> = (0..p)
                .map(BasisRow::Eq)
                .chain(sol.binding_ub.iter().map(|&i| BasisRow::Ub(i)))
                .collect();
            if let Ok(basis) = Self::assemble(prob, rows) {
                return Ok(basis);
            }
        }
        Self::reselect(prob, sol)
    }

    fn assemble(prob: &LpProblem, rows: Vec<BasisRow>) -> Result<OptimalBasis, LpError> {
        let n = prob.n_vars();
        let mut a = Matrix::zeros(n, n);
        let mut b = vec![0.0; n];
        for (r, src) in rows.iter().enumerate() {
            match *src {
                BasisRow::Eq(i) => {
                    a.row_mut(r).copy_from_slice(prob.a_eq.row(i));
                    b[r] = prob.b_eq[i];
                }
                BasisRow::Ub(i) => {
                    a.row_mut(r).copy_from_slice(prob.a_ub.row(i));
                    b[r] = prob.b_ub[i];
                }
            }
        }
        let lu = Lu::factor(&a)?;
        let cond = lu.condition_estimate();
        if cond > COND_LIMIT {
            return Err(LpError::IllConditioned { cond });
        }
        Ok(OptimalBasis { rows, a, b, lu })
    }

    /// Deterministic fallback: take every inequality row active at `x*`
    /// (within feasibility tolerance) in ascending index order, keeping a row
    /// only if it is numerically independent of those already kept.
    fn reselect(prob: &LpProblem, sol: &LpSolution) -> Result<OptimalBasis, LpError> {
        let n = prob.n_vars();
        let p = prob.n_eq();
        let mut rows: Vec<BasisRow> = (0..p).map(BasisRow::Eq).collect();

        // Orthonormalised span of the rows kept so far.
        let mut span: Vec<Vec<f64>> = Vec::new();
        let mut push_if_independent = |row: &[f64]| -> bool {
            let mut v = row.to_vec();
            let norm0: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm0 == 0.0 {
                return false;
            }
            for q in &span {
                let proj: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm <= 1e-8 * norm0.max(1.0) {
                return false;
            }
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            span.push(v);
            true
        };

        for i in 0..p {
            if !push_if_independent(prob.a_eq.row(i)) {
                return Err(LpError::Dimensions(format!(
                    "equality row {i} is linearly dependent on earlier rows"
                )));
            }
        }
        for i in 0..prob.n_ub() {
            if rows.len() == n {
                break;
            }
            let ax: f64 = prob.a_ub.row(i).iter().zip(&sol.x).map(|(a, x)| a * x).sum();
            let slack = prob.b_ub[i] - ax;
            if slack.abs() > FEAS_EPS * (1.0 + prob.b_ub[i].abs()) * 10.0 {
                continue;
            }
            if push_if_independent(prob.a_ub.row(i)) {
                rows.push(BasisRow::Ub(i));
            }
        }
        if rows.len() != n {
            return Err(LpError::IllConditioned { cond: f64::INFINITY });
        }
        Self::assemble(prob, rows)
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// Row provenance, equalities first.
    pub fn rows(&self) -> &[BasisRow] {
        &self.rows
    }

    /// Active inequality rows of this basis, ascending.
    pub fn active_ub_rows(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .rows
            .iter()
            .filter_map(|r| match r {
                BasisRow::Ub(i) => Some(*i),
                BasisRow::Eq(_) => None,
            })
            .collect();
        v.sort_unstable();
        v
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    /// `A^-1 rhs`: response of `x*` to a right-hand-side perturbation.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut out = rhs.to_vec();
        self.lu.solve(&mut out);
        out
    }

    /// `A^-T g`: gradient with respect to `b` of the functional `g'x*`.
    pub fn solve_transpose(&self, g: &[f64]) -> Vec<f64> {
        let mut out = g.to_vec();
        self.lu.solve_transpose(&mut out);
        out
    }

    /// Max-norm residual `||A x - b||` of a candidate optimum; small values
    /// confirm the basis is consistent with the solution it came from.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let ax = self.a.mul_vec(x);
        ax.iter()
            .zip(&self.b)
            .map(|(l, r)| (l - r).abs())
            .fold(0.0, f64::max)
    }

    /// Verify `x` satisfies the basis system to solver tolerance.
    pub fn verify(&self, x: &[f64]) -> Result<(), LpError> {
        let scale = 1.0 + self.b.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        let res = self.residual(x);
        if res > RESIDUAL_EPS * scale * 100.0 {
            return Err(LpError::Dimensions(format!(
                "optimal basis residual {res:.3e} exceeds tolerance"
            )));
        }
        Ok(())
    }
}
