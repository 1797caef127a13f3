//! Shared helpers for integration tests: a seeded random-LP generator whose
//! instances are feasible and bounded by construction, plus optimality
//! checks used by both the solver suite and the acceptance gate.

#![allow(dead_code)]

use gridshift_core::lp::{LpProblem, LpSolution, Matrix, OptimalBasis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random LP: `n <= 50` variables, a mix of equality and inequality rows.
///
/// Feasibility by construction: rows are generated around an interior point
/// `x0` (`b_eq = A x0`, `b_ub = A x0 + margin`). Boundedness by
/// construction: every variable gets a two-sided box around `x0`.
pub fn random_lp(seed: u64) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=50);
    let p = rng.gen_range(0..=n / 2);
    let extra = rng.gen_range(0..=n);

    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();

    let mut eq_rows = Vec::new();
    let mut b_eq = Vec::new();
    for _ in 0..p {
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rhs: f64 = row.iter().zip(&x0).map(|(a, x)| a * x).sum();
        eq_rows.push(row);
        b_eq.push(rhs);
    }

    let mut ub_rows = Vec::new();
    let mut b_ub = Vec::new();
    // Boxes keep the feasible set bounded in every direction.
    for i in 0..n {
        let half = rng.gen_range(0.5..6.0);
        let mut hi = vec![0.0; n];
        hi[i] = 1.0;
        ub_rows.push(hi);
        b_ub.push(x0[i] + half);
        let mut lo = vec![0.0; n];
        lo[i] = -1.0;
        ub_rows.push(lo);
        b_ub.push(-(x0[i] - half));
    }
    for _ in 0..extra {
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ax: f64 = row.iter().zip(&x0).map(|(a, x)| a * x).sum();
        let margin = rng.gen_range(0.1..5.0);
        ub_rows.push(row);
        b_ub.push(ax + margin);
    }

    LpProblem {
        c,
        a_eq: if p == 0 { Matrix::zeros(0, n) } else { Matrix::from_rows(&eq_rows) },
        b_eq,
        a_ub: Matrix::from_rows(&ub_rows),
        b_ub,
    }
}

/// Largest primal constraint violation of `x` (positive means infeasible).
pub fn primal_violation(p: &LpProblem, x: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    if p.n_eq() > 0 {
        for (i, &b) in p.b_eq.iter().enumerate() {
            let ax: f64 = p.a_eq.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
            worst = worst.max((ax - b).abs());
        }
    }
    for (i, &b) in p.b_ub.iter().enumerate() {
        let ax: f64 = p.a_ub.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
        worst = worst.max(ax - b);
    }
    worst
}

/// Assert the standard optimality certificate on a solved instance:
/// feasibility, nonpositive inequality duals, complementary slackness,
/// vanishing duality gap, a full binding set, and a consistent basis system.
pub fn assert_optimal(p: &LpProblem, s: &LpSolution, tag: &str) {
    let scale = 1.0
        + p.b_eq.iter().chain(&p.b_ub).fold(0.0_f64, |a, &b| a.max(b.abs()))
        + s.x.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    let viol = primal_violation(p, &s.x);
    assert!(viol <= 1e-7 * scale, "{tag}: primal violation {viol:.3e} (scale {scale:.3e})");

    for (i, &y) in s.duals_ub.iter().enumerate() {
        assert!(y <= 1e-7, "{tag}: inequality dual {i} is positive: {y:.3e}");
        if !s.binding_ub.contains(&i) {
            assert!(
                y.abs() <= 1e-6,
                "{tag}: slack row {i} carries dual {y:.3e}"
            );
        }
    }

    let gap = (s.objective - s.dual_objective(p)).abs();
    assert!(
        gap <= 1e-6 * (1.0 + s.objective.abs()),
        "{tag}: duality gap {gap:.3e} vs objective {:.6}",
        s.objective
    );

    assert_eq!(
        s.binding_ub.len() + p.n_eq(),
        p.n_vars(),
        "{tag}: binding rows ({}) + equalities ({}) != variables ({})",
        s.binding_ub.len(),
        p.n_eq(),
        p.n_vars()
    );

    let basis = OptimalBasis::from_solution(p, s).expect("basis assembles");
    basis.verify(&s.x).expect("basis consistent with solution");
    let back = basis.solve(basis.rhs());
    let worst = back.iter().zip(&s.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(
        worst <= 1e-6 * scale,
        "{tag}: basis solve reproduces x* to {worst:.3e} only"
    );
}
