//! Revised simplex internals. See the module docs in `lp` for the overall
//! scheme; this file holds the pivoting machinery.

use super::dense::{Lu, Matrix};
use super::{LpError, LpProblem, LpSolution};
use crate::tol::{COST_EPS, FEAS_EPS, PIVOT_EPS, REFACTOR_EVERY, STALL_LIMIT};

/// Ratio-test entries closer than this are treated as tied and resolved by
/// pivot magnitude, then variable index.
const RATIO_TIE: f64 = 1e-9;

enum Pricing {
    /// Most negative improvement, ties to the lowest column index.
    Dantzig,
    /// Lowest improving column index; finite but slow, used to escape stalls.
    Bland,
}

pub(super) struct Worker<'a> {
    prob: &'a LpProblem,
    n: usize,
    p: usize,
    m: usize,
    /// Row count of the slack form, `p + m`.
    rows: usize,
    /// Sparse columns for structurals and slacks (`n + m` of them).
    cols: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    /// Artificial column signs, one per row.
    art_sign: Vec<f64>,
    /// Variable occupying each basis position.
    basis: Vec<usize>,
    /// Positions: `pos[j] = Some(r)` iff variable `j` is basic in row `r`.
    pos: Vec<Option<usize>>,
    /// Values of basic variables; every nonbasic variable sits at zero.
    x_b: Vec<f64>,
    /// Columns that may never (re-)enter: artificials, plus artificials
    /// pinned in the basis by redundant rows.
    barred: Vec<bool>,
    factor: Option<Lu>,
    etas: Vec<(usize, Vec<f64>)>,
    iterations: usize,
    degen_run: usize,
    pricing: Pricing,
}

impl<'a> Worker<'a> {
    pub(super) fn new(prob: &'a LpProblem) -> Worker<'a> {
        let n = prob.n_vars();
        let p = prob.n_eq();
        let m = prob.n_ub();
        let rows = p + m;

        let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n + m);
        for j in 0..n {
            let mut col = Vec::new();
            for i in 0..p {
                let v = prob.a_eq.at(i, j);
                if v != 0.0 {
                    col.push((i, v));
                }
            }
            for i in 0..m {
                let v = prob.a_ub.at(i, j);
                if v != 0.0 {
                    col.push((p + i, v));
                }
            }
            cols.push(col);
        }
        for i in 0..m {
            cols.push(vec![(p + i, 1.0)]);
        }

        let mut rhs = Vec::with_capacity(rows);
        rhs.extend_from_slice(&prob.b_eq);
        rhs.extend_from_slice(&prob.b_ub);
        let art_sign: Vec<f64> = rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();

        Worker {
            prob,
            n,
            p,
            m,
            rows,
            cols,
            rhs,
            art_sign,
            basis: Vec::new(),
            pos: vec![None; n + m + rows],
            x_b: Vec::new(),
            barred: vec![false; n + m + rows],
            factor: None,
            etas: Vec::new(),
            iterations: 0,
            degen_run: 0,
            pricing: Pricing::Dantzig,
        }
    }

    fn art(&self, row: usize) -> usize {
        self.n + self.m + row
    }

    fn is_art(&self, j: usize) -> bool {
        j >= self.n + self.m
    }

    fn is_free(&self, j: usize) -> bool {
        j < self.n
    }

    fn col_entries(&self, j: usize) -> Vec<(usize, f64)> {
        if self.is_art(j) {
            let r = j - self.n - self.m;
            vec![(r, self.art_sign[r])]
        } else {
            self.cols[j].clone()
        }
    }

    fn col_dense(&self, j: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.rows];
        for (i, v) in self.col_entries(j) {
            w[i] = v;
        }
        w
    }

    fn dot_col(&self, y: &[f64], j: usize) -> f64 {
        if self.is_art(j) {
            let r = j - self.n - self.m;
            return y[r] * self.art_sign[r];
        }
        self.cols[j].iter().map(|&(i, v)| y[i] * v).sum()
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let mut b = Matrix::zeros(self.rows, self.rows);
        for (r, &j) in self.basis.iter().enumerate() {
            for (i, v) in self.col_entries(j) {
                *b.at_mut(i, r) = v;
            }
        }
        self.factor = Some(Lu::factor(&b)?);
        self.etas.clear();
        // Recompute basic values from scratch; every nonbasic sits at zero.
        let mut xb = self.rhs.clone();
        self.factor.as_ref().unwrap().solve(&mut xb);
        self.x_b = xb;
        Ok(())
    }

    /// `B^-1 w` through the factor and eta file.
    fn ftran(&self, mut w: Vec<f64>) -> Vec<f64> {
        self.factor.as_ref().unwrap().solve(&mut w);
        for (r, u) in &self.etas {
            let zr = w[*r] / u[*r];
            for (i, (wi, ui)) in w.iter_mut().zip(u.iter()).enumerate() {
                if i != *r {
                    *wi -= ui * zr;
                }
            }
            w[*r] = zr;
        }
        w
    }

    /// `B^-T v` (row form `v' B^-1`): etas in reverse, then the factor.
    fn btran(&self, mut v: Vec<f64>) -> Vec<f64> {
        for (r, u) in self.etas.iter().rev() {
            let mut s = v[*r];
            for (i, ui) in u.iter().enumerate() {
                if i != *r {
                    s -= ui * v[i];
                }
            }
            v[*r] = s / u[*r];
        }
        self.factor.as_ref().unwrap().solve_transpose(&mut v);
        v
    }

    fn set_basis(&mut self, r: usize, j: usize) {
        let old = self.basis[r];
        self.pos[old] = None;
        self.basis[r] = j;
        self.pos[j] = Some(r);
    }

    /// Cost vector for the current basis under phase costs `c`.
    fn basic_costs(&self, c: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|&j| c[j]).collect()
    }

    /// Pick an entering column and movement direction, or `None` at phase
    /// optimality.
    fn price(&self, c: &[f64], y: &[f64], threshold: f64) -> Option<(usize, f64)> {
        let mut best: Option<(f64, usize, f64)> = None;
        for j in 0..self.n + self.m {
            if self.pos[j].is_some() || self.barred[j] {
                continue;
            }
            let rc = c[j] - self.dot_col(y, j);
            let (improv, dir) = if self.is_free(j) {
                (-rc.abs(), if rc > 0.0 { -1.0 } else { 1.0 })
            } else {
                (rc, 1.0)
            };
            if improv >= -threshold {
                continue;
            }
            match self.pricing {
                Pricing::Bland => return Some((j, dir)),
                Pricing::Dantzig => {
                    let better = match &best {
                        None => true,
                        Some((bi, bj, _)) => improv < *bi || (improv == *bi && j < *bj),
                    };
                    if better {
                        best = Some((improv, j, dir));
                    }
                }
            }
        }
        best.map(|(_, j, dir)| (j, dir))
    }

    /// Ratio test for entering column `u = B^-1 W_e` moving in `dir`.
    /// Returns the leaving position and step length, or `None` if unblocked.
    ///
    /// Only nonnegative basic variables (slacks, artificials) can block;
    /// free structurals may pass through any value.
    fn ratio_test(&self, u: &[f64], dir: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None; // (row, step, |pivot|)
        for r in 0..self.rows {
            let j = self.basis[r];
            if self.is_free(j) {
                continue;
            }
            let d = dir * u[r];
            if d <= PIVOT_EPS {
                continue;
            }
            let step = (self.x_b[r].max(0.0)) / d;
            match &mut best {
                None => best = Some((r, step, d.abs())),
                Some((br, bs, bp)) => {
                    let by_index_bland = matches!(self.pricing, Pricing::Bland);
                    if step < *bs - RATIO_TIE * (1.0 + bs.abs()) {
                        *br = r;
                        *bs = step;
                        *bp = d.abs();
                    } else if step <= *bs + RATIO_TIE * (1.0 + bs.abs()) {
                        // Tie: Bland wants the lowest variable index; default
                        // prefers the biggest pivot for stability.
                        let take = if by_index_bland {
                            self.basis[r] < self.basis[*br]
                        } else {
                            d.abs() > *bp * (1.0 + 1e-12)
                                || (d.abs() >= *bp * (1.0 - 1e-12) && self.basis[r] < self.basis[*br])
                        };
                        if take {
                            *br = r;
                            *bs = step.min(*bs);
                            *bp = d.abs();
                        }
                    }
                }
            }
        }
        best.map(|(r, s, _)| (r, s.max(0.0)))
    }

    fn pivot(&mut self, enter: usize, r: usize, step: f64, dir: f64, u: Vec<f64>) {
        for i in 0..self.rows {
            if i != r {
                self.x_b[i] -= step * dir * u[i];
            }
        }
        self.set_basis(r, enter);
        self.x_b[r] = step * dir;
        self.etas.push((r, u));
        if step > 1e-10 {
            self.degen_run = 0;
            self.pricing = Pricing::Dantzig;
        } else {
            self.degen_run += 1;
            if self.degen_run > STALL_LIMIT {
                self.pricing = Pricing::Bland;
            }
        }
    }

    fn iteration_limit(&self) -> usize {
        1000 + 200 * self.rows
    }

    /// Run simplex iterations under phase costs `c` until optimal.
    fn run(&mut self, c: &[f64], phase1: bool) -> Result<(), LpError> {
        let scale = 1.0 + c.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        let threshold = COST_EPS * scale;
        let limit = self.iteration_limit();
        // A fresh factorisation right before declaring optimality guards
        // against drift accumulated in the eta file.
        let mut fresh = self.etas.is_empty();
        loop {
            if self.etas.len() >= REFACTOR_EVERY {
                self.refactor()?;
                fresh = true;
            }
            let y = self.btran(self.basic_costs(c));
            let Some((enter, dir)) = self.price(c, &y, threshold) else {
                if fresh {
                    return Ok(());
                }
                self.refactor()?;
                fresh = true;
                continue;
            };
            let u = self.ftran(self.col_dense(enter));
            let Some((r, step)) = self.ratio_test(&u, dir) else {
                if phase1 {
                    // Phase-1 objective is bounded below; an unblocked ray
                    // means the eta file has degraded. Refactor once.
                    if !fresh {
                        self.refactor()?;
                        fresh = true;
                        continue;
                    }
                    return Err(LpError::Unbounded { col: enter });
                }
                return Err(LpError::Unbounded { col: enter });
            };
            // A vanishing pivot with a stale factor: recompute before trusting it.
            if u[r].abs() < 1e-7 && !fresh {
                self.refactor()?;
                fresh = true;
                continue;
            }
            self.pivot(enter, r, step, dir, u);
            fresh = false;
            self.iterations += 1;
            if self.iterations > limit {
                return Err(LpError::IterationLimit { limit });
            }
        }
    }

    /// Initial basis: slacks for inequality rows with nonnegative rhs,
    /// artificials elsewhere.
    fn install_initial_basis(&mut self) -> Result<bool, LpError> {
        let mut need_phase1 = false;
        self.basis.clear();
        for r in 0..self.rows {
            let j = if r >= self.p && self.rhs[r] >= 0.0 {
                self.n + (r - self.p)
            } else {
                need_phase1 = true;
                self.art(r)
            };
            self.basis.push(j);
            self.pos[j] = Some(r);
        }
        // Bar every artificial that is not part of the starting basis.
        for r in 0..self.rows {
            let a = self.art(r);
            if self.pos[a].is_none() {
                self.barred[a] = true;
            }
        }
        self.refactor()?;
        Ok(need_phase1)
    }

    /// After phase 1: replace basic artificials by structural or slack
    /// columns via degenerate pivots. Rows whose artificial cannot be
    /// replaced are redundant; their artificial stays pinned at zero.
    fn drive_out_artificials(&mut self) -> Result<(), LpError> {
        for r in 0..self.rows {
            if !self.is_art(self.basis[r]) {
                continue;
            }
            let mut e_r = vec![0.0; self.rows];
            e_r[r] = 1.0;
            let rho = self.btran(e_r);
            let mut found = None;
            for j in 0..self.n + self.m {
                if self.pos[j].is_some() {
                    continue;
                }
                if self.dot_col(&rho, j).abs() > 1e-7 {
                    found = Some(j);
                    break;
                }
            }
            if let Some(j) = found {
                let u = self.ftran(self.col_dense(j));
                let art = self.basis[r];
                self.set_basis(r, j);
                self.barred[art] = true;
                self.x_b[r] = 0.0;
                self.etas.push((r, u));
                if self.etas.len() >= REFACTOR_EVERY {
                    self.refactor()?;
                }
            }
            // else: redundant row; artificial stays basic at zero and is
            // already barred from re-entering anywhere else.
        }
        Ok(())
    }

    /// Pivot nonbasic structural variables into the basis. Each pivot moves
    /// along the optimal face (reduced costs are zero up to tolerance), so
    /// the objective is preserved while the vertex becomes explicit:
    /// afterwards the nonbasic slacks number exactly `n - p`.
    fn purify(&mut self) -> Result<(), LpError> {
        for j in 0..self.n {
            if self.pos[j].is_some() {
                continue;
            }
            let u = self.ftran(self.col_dense(j));
            let chosen = [1.0, -1.0]
                .into_iter()
                .filter_map(|dir| self.ratio_test(&u, dir).map(|(r, s)| (dir, r, s)))
                .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
            if let Some((dir, r, step)) = chosen {
                self.pivot(j, r, step, dir, u);
                if self.etas.len() >= REFACTOR_EVERY {
                    self.refactor()?;
                }
            }
        }
        Ok(())
    }

    pub(super) fn solve(mut self) -> Result<LpSolution, LpError> {
        let need_phase1 = self.install_initial_basis()?;

        if need_phase1 {
            let mut c1 = vec![0.0; self.n + self.m + self.rows];
            for r in 0..self.rows {
                c1[self.art(r)] = 1.0;
            }
            self.run(&c1, true)?;
            let infeas: f64 = self
                .basis
                .iter()
                .zip(&self.x_b)
                .filter(|(&j, _)| self.is_art(j))
                .map(|(_, &v)| v.max(0.0))
                .sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
            if infeas > FEAS_EPS * scale {
                return Err(LpError::Infeasible { residual: infeas });
            }
            self.drive_out_artificials()?;
            self.degen_run = 0;
            self.pricing = Pricing::Dantzig;
        }

        let mut c2 = vec![0.0; self.n + self.m + self.rows];
        c2[..self.n].copy_from_slice(&self.prob.c);
        self.run(&c2, false)?;
        self.purify()?;

        // Final clean factorisation for the reported artefacts.
        self.refactor()?;
        let y = self.btran(self.basic_costs(&c2));

        let mut x = vec![0.0; self.n];
        for (r, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                // Normalise -0.0 so downstream formatting never shows it.
                x[j] = if self.x_b[r] == 0.0 { 0.0 } else { self.x_b[r] };
            }
        }
        let objective = self.prob.c.iter().zip(&x).map(|(c, v)| c * v).sum();
        let binding_ub: Vec<usize> =
            (0..self.m).filter(|&i| self.pos[self.n + i].is_none()).collect();

        Ok(LpSolution {
            x,
            objective,
            duals_eq: y[..self.p].to_vec(),
            duals_ub: y[self.p..].to_vec(),
            binding_ub,
            iterations: self.iterations,
        })
    }
}
