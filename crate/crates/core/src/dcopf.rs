//! DC optimal power flow as a linear program.
//!
//! Variables are stacked `[theta (one per bus); p_g (one per generator)]`.
//! Equalities: one nodal balance per bus plus the reference-angle pin.
//! Inequalities: two thermal rows per line (each direction) and two capacity
//! rows per generator. Nodal balance is written so that its dual is the
//! locational marginal price with the usual sign: more load at a bus means
//! higher cost, so LMPs come out nonnegative under normal conditions.

use crate::lp::{solve_lp, LpError, LpProblem, LpSolution, Matrix, OptimalBasis};
use crate::net::{NetError, Network};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DcopfError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("clearing failed: {0}")]
    Lp(#[from] LpError),
}

/// Objective used when clearing the market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ObjectiveMode {
    /// Production cost only: `sum c_k p_k`.
    Cost,
    /// Cost plus a carbon price: `sum (c_k + rho * g_k) p_k`.
    CarbonPriced { rho: f64 },
    /// Emissions only: `sum g_k p_k`.
    CarbonOnly,
}

impl ObjectiveMode {
    /// Per-MWh objective coefficient for a generator.
    fn coeff(self, cost: f64, rate: f64) -> f64 {
        match self {
            ObjectiveMode::Cost => cost,
            ObjectiveMode::CarbonPriced { rho } => cost + rho * rate,
            ObjectiveMode::CarbonOnly => rate,
        }
    }
}

/// A binding constraint at the cleared dispatch, in network terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id")]
pub enum ConstraintId {
    /// Line at its limit in the from->to direction.
    LineForward(usize),
    /// Line at its limit in the to->from direction.
    LineReverse(usize),
    GenMax(usize),
    GenMin(usize),
}

/// The OPF linear program plus the index maps tying LP rows and columns back
/// to network elements.
#[derive(Debug, Clone)]
pub struct DcopfLp {
    pub lp: LpProblem,
    pub mode: ObjectiveMode,
    /// Bus ids in variable/row order.
    pub bus_ids: Vec<usize>,
    /// Generator ids in variable order.
    pub gen_ids: Vec<usize>,
    n_bus: usize,
    n_gen: usize,
    n_line: usize,
}

impl DcopfLp {
    pub fn n_bus(&self) -> usize {
        self.n_bus
    }

    pub fn n_gen(&self) -> usize {
        self.n_gen
    }

    /// LP column of bus `i`'s angle.
    pub fn theta_col(&self, i: usize) -> usize {
        i
    }

    /// LP column of generator `k`'s output.
    pub fn gen_col(&self, k: usize) -> usize {
        self.n_bus + k
    }

    /// Equality row carrying the balance of bus `i` (dual = LMP).
    pub fn balance_row(&self, i: usize) -> usize {
        i
    }

    /// Network meaning of inequality row `r`.
    pub fn ub_row_meaning(&self, r: usize, net: &Network) -> ConstraintId {
        if r < 2 * self.n_line {
            let line = &net.lines[r / 2];
            if r % 2 == 0 {
                ConstraintId::LineForward(line.id)
            } else {
                ConstraintId::LineReverse(line.id)
            }
        } else {
            let k = (r - 2 * self.n_line) / 2;
            let gen = &net.gens[k];
            if r % 2 == 0 {
                ConstraintId::GenMax(gen.id)
            } else {
                ConstraintId::GenMin(gen.id)
            }
        }
    }
}

/// Assemble the clearing LP for `net` under `mode`.
///
/// Row/column orders are fixed by the network's element order, so identical
/// networks produce identical LPs.
pub fn build_dcopf(net: &Network, mode: ObjectiveMode) -> Result<DcopfLp, DcopfError> {
    net.validate()?;
    let idx = net.bus_index();
    let nb = net.n_buses();
    let ng = net.n_gens();
    let nl = net.n_lines();
    let n = nb + ng;

    let mut c = vec![0.0; n];
    for (k, g) in net.gens.iter().enumerate() {
        c[nb + k] = mode.coeff(g.cost, g.emission_rate);
    }

    // Equalities: nodal balance rows, then the reference pin.
    let mut a_eq = Matrix::zeros(nb + 1, n);
    let mut b_eq = vec![0.0; nb + 1];
    for (k, g) in net.gens.iter().enumerate() {
        *a_eq.at_mut(idx[&g.bus], nb + k) += 1.0;
    }
    for l in &net.lines {
        let (f, t) = (idx[&l.from], idx[&l.to]);
        let k = l.coeff();
        // Outflow on the from side, inflow on the to side.
        *a_eq.at_mut(f, f) -= k;
        *a_eq.at_mut(f, t) += k;
        *a_eq.at_mut(t, f) += k;
        *a_eq.at_mut(t, t) -= k;
    }
    for load in &net.loads {
        b_eq[idx[&load.bus]] += load.demand;
    }
    let ref_i = idx[&net.ref_bus().expect("validated").id];
    *a_eq.at_mut(nb, ref_i) = 1.0;

    // Inequalities: line thermal rows (both directions), then generator
    // capacity rows.
    let m = 2 * nl + 2 * ng;
    let mut a_ub = Matrix::zeros(m, n);
    let mut b_ub = vec![0.0; m];
    for (li, l) in net.lines.iter().enumerate() {
        let (f, t) = (idx[&l.from], idx[&l.to]);
        let k = l.coeff();
        *a_ub.at_mut(2 * li, f) = k;
        *a_ub.at_mut(2 * li, t) = -k;
        b_ub[2 * li] = l.limit;
        *a_ub.at_mut(2 * li + 1, f) = -k;
        *a_ub.at_mut(2 * li + 1, t) = k;
        b_ub[2 * li + 1] = l.limit;
    }
    for (k, g) in net.gens.iter().enumerate() {
        let r = 2 * nl + 2 * k;
        *a_ub.at_mut(r, nb + k) = 1.0;
        b_ub[r] = g.p_max;
        *a_ub.at_mut(r + 1, nb + k) = -1.0;
        b_ub[r + 1] = -g.p_min;
    }

    Ok(DcopfLp {
        lp: LpProblem { c, a_eq, b_eq, a_ub, b_ub },
        mode,
        bus_ids: net.buses.iter().map(|b| b.id).collect(),
        gen_ids: net.gens.iter().map(|g| g.id).collect(),
        n_bus: nb,
        n_gen: ng,
        n_line: nl,
    })
}

/// Cleared market snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DispatchResult {
    /// Generator outputs in MW, network generator order.
    pub p_g: Vec<f64>,
    /// Bus angles in radians, network bus order.
    pub theta: Vec<f64>,
    /// Line flows in MW (from -> to positive), network line order.
    pub flows: Vec<f64>,
    /// Production cost `sum c_k p_k` under the network's cost vector,
    /// regardless of the clearing objective.
    pub cost: f64,
    /// Value of the clearing objective actually minimised.
    pub objective: f64,
    /// CO2 output in tons.
    pub emissions: f64,
    /// Undispatched wind/solar capability in MW.
    pub curtailment: f64,
    /// Nodal prices (duals of the balance rows), bus order.
    pub lmp: Vec<f64>,
    /// Constraints active at the optimum.
    pub binding: Vec<ConstraintId>,
    pub total_load: f64,
}

/// A solved OPF: the LP artefacts plus the network-level summary.
#[derive(Debug)]
pub struct Dispatch {
    pub model: DcopfLp,
    pub solution: LpSolution,
    pub result: DispatchResult,
}

impl Dispatch {
    /// Active-constraint basis at this optimum, for sensitivity analysis.
    pub fn optimal_basis(&self) -> Result<OptimalBasis, LpError> {
        let b = OptimalBasis::from_solution(&self.model.lp, &self.solution)?;
        b.verify(&self.solution.x)?;
        Ok(b)
    }
}

/// Total CO2 in tons for an output vector.
pub fn emissions_of(net: &Network, p_g: &[f64]) -> f64 {
    net.gens.iter().zip(p_g).map(|(g, p)| g.emission_rate * p).sum()
}

/// Undispatched renewable capability in MW for an output vector.
pub fn curtailment_of(net: &Network, p_g: &[f64]) -> f64 {
    net.gens
        .iter()
        .zip(p_g)
        .filter(|(g, _)| g.fuel.is_curtailable_renewable())
        .map(|(g, p)| (g.p_max - p).max(0.0))
        .sum()
}

/// Clear the market for `net` under `mode`.
pub fn solve_dcopf(net: &Network, mode: ObjectiveMode) -> Result<Dispatch, DcopfError> {
    let model = build_dcopf(net, mode)?;
    let solution = solve_lp(&model.lp)?;
    let result = summarize(net, &model, &solution);
    Ok(Dispatch { model, solution, result })
}

fn summarize(net: &Network, model: &DcopfLp, sol: &LpSolution) -> DispatchResult {
    let nb = model.n_bus;
    let theta = sol.x[..nb].to_vec();
    let p_g = sol.x[nb..].to_vec();
    let idx = net.bus_index();
    let flows: Vec<f64> = net
        .lines
        .iter()
        .map(|l| l.coeff() * (theta[idx[&l.from]] - theta[idx[&l.to]]))
        .collect();
    let cost = net.gens.iter().zip(&p_g).map(|(g, p)| g.cost * p).sum();
    let binding = sol.binding_ub.iter().map(|&r| model.ub_row_meaning(r, net)).collect();
    DispatchResult {
        cost,
        objective: sol.objective,
        emissions: emissions_of(net, &p_g),
        curtailment: curtailment_of(net, &p_g),
        lmp: sol.duals_eq[..nb].to_vec(),
        flows,
        p_g,
        theta,
        binding,
        total_load: net.total_load(),
    }
}
