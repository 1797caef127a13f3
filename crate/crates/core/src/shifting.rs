//! Geographical load shifting between data-center sites.
//!
//! Three strategies are implemented over the same flexibility description:
//!
//! * [`solve_consumer_shift`] (model 1) — the operator publishes per-bus
//!   price/carbon signals from the cleared market; the data-center fleet
//!   re-allocates its load against those signals, and the market re-clears
//!   with the shifted demand. Signals are taken as constants, so the fleet's
//!   view is only locally valid.
//! * [`solve_carbon_priced`] (model 2) — no demand flexibility; the market
//!   itself internalises carbon by clearing on `c + rho g` (or `g` alone).
//! * [`solve_co_optimized`] (model 3) — the fleet submits its shiftable
//!   range to the market, which clears generation and load movement jointly
//!   in one LP.
//!
//! All three share the fleet constraints: per-site moves bounded by
//! `epsilon x` base demand, pairwise transfers bounded by a cap, moved MW
//! conserved across the fleet.

use crate::dcopf::{
    build_dcopf, solve_dcopf, DcopfError, Dispatch, DispatchResult, ObjectiveMode,
};
use crate::emissions::{EmissionSignals, EmissionsError};
use crate::lp::{solve_lp, LpError, LpProblem, Matrix};
use crate::net::io::FleetCfg;
use crate::net::Network;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShiftError {
    #[error("network has no data centers")]
    NoDataCenters,
    #[error("shift plan violates fleet constraints: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Dcopf(#[from] DcopfError),
    #[error(transparent)]
    Emissions(#[from] EmissionsError),
}

/// Which cost the shifting decision optimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveVariant {
    /// Electricity cost only.
    Cost,
    /// Cost plus priced carbon.
    #[default]
    Balance,
    /// Carbon only.
    Co2,
}

impl ObjectiveVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveVariant::Cost => "cost",
            ObjectiveVariant::Balance => "balance",
            ObjectiveVariant::Co2 => "co2",
        }
    }

    /// Market-side clearing objective for this variant.
    pub fn clearing_mode(self, rho: f64) -> ObjectiveMode {
        match self {
            ObjectiveVariant::Cost => ObjectiveMode::Cost,
            ObjectiveVariant::Balance => ObjectiveMode::CarbonPriced { rho },
            ObjectiveVariant::Co2 => ObjectiveMode::CarbonOnly,
        }
    }
}

/// Which carbon signal consumers receive under model 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    /// Locational marginal intensity from the optimal basis.
    #[default]
    Marginal,
    /// Regional average intensity.
    Average,
}

impl SignalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SignalKind::Marginal => "marginal",
            SignalKind::Average => "average",
        }
    }
}

/// Fleet-wide flexibility parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Flexibility {
    /// Shiftable fraction of each site's base demand.
    pub epsilon: f64,
    /// Pairwise transfer capacity in MW.
    pub transfer_cap: f64,
    /// Cost per MWh moved between any two sites.
    pub transfer_cost: f64,
}

impl From<&FleetCfg> for Flexibility {
    fn from(cfg: &FleetCfg) -> Flexibility {
        Flexibility {
            epsilon: cfg.epsilon,
            transfer_cap: cfg.transfer_cap_mw,
            transfer_cost: cfg.shift_cost_per_mwh,
        }
    }
}

/// One pairwise transfer of load between sites.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transfer {
    pub from_bus: usize,
    pub to_bus: usize,
    pub mw: f64,
}

/// First-order effect of a plan predicted from the base-case optimal basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftPrediction {
    /// Generator output changes, network generator order.
    pub delta_pg: Vec<f64>,
    pub delta_cost: f64,
    pub delta_emissions: f64,
    pub delta_curtailment: f64,
}

/// A load re-allocation across the data-center fleet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftPlan {
    /// Buses hosting data centers, fleet order.
    pub dc_buses: Vec<usize>,
    /// Demand change per site in MW, fleet order; sums to zero.
    pub delta_pd: Vec<f64>,
    /// Nonzero pairwise transfers, sorted by (from, to).
    pub transfers: Vec<Transfer>,
    /// Linearised effect estimate; only meaningful when the plan was built
    /// from marginal signals.
    pub predicted: Option<ShiftPrediction>,
}

impl ShiftPlan {
    pub fn total_shifted_mw(&self) -> f64 {
        self.delta_pd.iter().map(|d| d.max(0.0)).sum()
    }

    /// Check the fleet constraints: per-site bounds, conservation, transfer
    /// bounds, and per-site transfer bookkeeping.
    pub fn validate(&self, net: &Network, flex: &Flexibility) -> Result<(), ShiftError> {
        const TOL: f64 = 1e-6;
        let centers = net.data_centers();
        if centers.len() != self.delta_pd.len() {
            return Err(ShiftError::InvalidPlan(format!(
                "plan covers {} sites, network has {}",
                self.delta_pd.len(),
                centers.len()
            )));
        }
        for ((_, bus, base), &d) in centers.iter().zip(&self.delta_pd) {
            let cap = flex.epsilon * base;
            if d.abs() > cap + TOL {
                return Err(ShiftError::InvalidPlan(format!(
                    "site at bus {bus} moves {d:.6} MW, cap is {cap:.6}"
                )));
            }
        }
        let sum: f64 = self.delta_pd.iter().sum();
        if sum.abs() > TOL * (1.0 + centers.len() as f64) {
            return Err(ShiftError::InvalidPlan(format!("moved load does not balance: {sum:.6}")));
        }
        let mut net_in = vec![0.0; centers.len()];
        let bus_pos: std::collections::HashMap<usize, usize> =
            centers.iter().enumerate().map(|(i, &(_, bus, _))| (bus, i)).collect();
        for t in &self.transfers {
            if t.mw < -TOL || t.mw > flex.transfer_cap + TOL {
                return Err(ShiftError::InvalidPlan(format!(
                    "transfer {} -> {} of {:.6} MW outside [0, {}]",
                    t.from_bus, t.to_bus, t.mw, flex.transfer_cap
                )));
            }
            let (Some(&f), Some(&to)) = (bus_pos.get(&t.from_bus), bus_pos.get(&t.to_bus)) else {
                return Err(ShiftError::InvalidPlan(format!(
                    "transfer references non-fleet bus {} or {}",
                    t.from_bus, t.to_bus
                )));
            };
            net_in[to] += t.mw;
            net_in[f] -= t.mw;
        }
        for (i, (&d, &inflow)) in self.delta_pd.iter().zip(&net_in).enumerate() {
            if (d - inflow).abs() > TOL * 10.0 {
                return Err(ShiftError::InvalidPlan(format!(
                    "site at bus {} moves {:.6} MW but transfers account for {:.6}",
                    self.dc_buses[i], d, inflow
                )));
            }
        }
        Ok(())
    }
}

/// Apply a plan to the network: data-center demands move by `delta_pd`.
pub fn apply_plan(net: &Network, plan: &ShiftPlan) -> Result<Network, ShiftError> {
    let mut out = net.clone();
    let centers = out.data_centers();
    if centers.len() != plan.delta_pd.len() {
        return Err(ShiftError::InvalidPlan("plan/fleet size mismatch".into()));
    }
    for ((load_idx, _, _), &d) in centers.iter().zip(&plan.delta_pd) {
        out.loads[*load_idx].demand += d;
    }
    Ok(out)
}

/// Linearised consequences of `plan` around the cleared base case.
///
/// Perturbs only the balance rows of the optimal basis (limits are
/// unchanged), so one forward solve yields the generator response. Accurate
/// exactly while the plan leaves the binding set intact.
pub fn predict_shift_effects(
    net: &Network,
    base: &Dispatch,
    plan: &ShiftPlan,
    flex: &Flexibility,
) -> Result<ShiftPrediction, ShiftError> {
    let basis = base.optimal_basis()?;
    let idx = net.bus_index();
    let mut db = vec![0.0; basis.n()];
    for (bus, d) in plan.dc_buses.iter().zip(&plan.delta_pd) {
        db[base.model.balance_row(idx[bus])] += d;
    }
    let dx = basis.solve(&db);
    let nb = base.model.n_bus();
    let delta_pg = dx[nb..].to_vec();
    let delta_cost: f64 = net.gens.iter().zip(&delta_pg).map(|(g, d)| g.cost * d).sum::<f64>()
        + flex.transfer_cost * plan.transfers.iter().map(|t| t.mw).sum::<f64>();
    let delta_emissions: f64 =
        net.gens.iter().zip(&delta_pg).map(|(g, d)| g.emission_rate * d).sum();
    let delta_curtailment: f64 = -net
        .gens
        .iter()
        .zip(&delta_pg)
        .filter(|(g, _)| g.fuel.is_curtailable_renewable())
        .map(|(_, d)| *d)
        .sum::<f64>();
    Ok(ShiftPrediction { delta_pg, delta_cost, delta_emissions, delta_curtailment })
}

/// Per-site price the fleet minimises against under model 1.
fn site_prices(
    net: &Network,
    base: &DispatchResult,
    signals: &EmissionSignals,
    variant: ObjectiveVariant,
    signal: SignalKind,
    rho: f64,
    dc_buses: &[usize],
) -> Vec<f64> {
    let idx = net.bus_index();
    let region_of: std::collections::HashMap<usize, usize> =
        net.buses.iter().map(|b| (b.id, b.region)).collect();
    dc_buses
        .iter()
        .map(|bus| {
            let i = idx[bus];
            let carbon = match signal {
                SignalKind::Marginal => signals.marginal[i],
                SignalKind::Average => signals.average_by_region[&region_of[bus]],
            };
            match variant {
                ObjectiveVariant::Cost => base.lmp[i],
                ObjectiveVariant::Balance => base.lmp[i] + rho * carbon,
                ObjectiveVariant::Co2 => rho * carbon,
            }
        })
        .collect()
}

/// Index helper for the flattened ordered-pair transfer variables.
fn pair_index(n_sites: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n_sites * (n_sites - 1));
    for a in 0..n_sites {
        for b in 0..n_sites {
            if a != b {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// Model 1: the fleet re-allocates load against posted signals.
///
/// Decision LP over `[delta (per site); s (per ordered pair)]`:
/// minimise `price' delta + transfer_cost * sum s` subject to per-site
/// bounds, transfer caps and conservation. The per-site conservation rows
/// already imply `sum delta = 0`, so no aggregate row is added.
pub fn solve_consumer_shift(
    net: &Network,
    base: &Dispatch,
    signals: &EmissionSignals,
    flex: &Flexibility,
    variant: ObjectiveVariant,
    signal: SignalKind,
    rho: f64,
) -> Result<ShiftPlan, ShiftError> {
    let centers = net.data_centers();
    let nc = centers.len();
    if nc == 0 {
        return Err(ShiftError::NoDataCenters);
    }
    let dc_buses: Vec<usize> = centers.iter().map(|&(_, bus, _)| bus).collect();
    let prices = site_prices(net, &base.result, signals, variant, signal, rho, &dc_buses);
    let pairs = pair_index(nc);
    let n = nc + pairs.len();

    let mut c = vec![0.0; n];
    c[..nc].copy_from_slice(&prices);
    for j in nc..n {
        c[j] = flex.transfer_cost;
    }

    // Conservation: delta_a - (inflow_a - outflow_a) = 0.
    let mut a_eq = Matrix::zeros(nc, n);
    let b_eq = vec![0.0; nc];
    for a in 0..nc {
        *a_eq.at_mut(a, a) = 1.0;
    }
    for (j, &(from, to)) in pairs.iter().enumerate() {
        *a_eq.at_mut(to, nc + j) -= 1.0;
        *a_eq.at_mut(from, nc + j) += 1.0;
    }

    // Bounds: |delta_a| <= eps * base, 0 <= s <= cap.
    let m = 2 * nc + 2 * pairs.len();
    let mut a_ub = Matrix::zeros(m, n);
    let mut b_ub = vec![0.0; m];
    for (a, &(_, _, p_base)) in centers.iter().enumerate() {
        let span = flex.epsilon * p_base;
        *a_ub.at_mut(2 * a, a) = 1.0;
        b_ub[2 * a] = span;
        *a_ub.at_mut(2 * a + 1, a) = -1.0;
        b_ub[2 * a + 1] = span;
    }
    for j in 0..pairs.len() {
        let r = 2 * nc + 2 * j;
        *a_ub.at_mut(r, nc + j) = 1.0;
        b_ub[r] = flex.transfer_cap;
        *a_ub.at_mut(r + 1, nc + j) = -1.0;
        b_ub[r + 1] = 0.0;
    }

    let lp = LpProblem { c, a_eq, b_eq, a_ub, b_ub };
    let sol = solve_lp(&lp)?;

    let delta_pd = sol.x[..nc].to_vec();
    let mut transfers: Vec<Transfer> = pairs
        .iter()
        .zip(&sol.x[nc..])
        .filter(|(_, &s)| s > 1e-9)
        .map(|(&(from, to), &s)| Transfer {
            from_bus: dc_buses[from],
            to_bus: dc_buses[to],
            mw: s,
        })
        .collect();
    transfers.sort_by_key(|t| (t.from_bus, t.to_bus));

    let mut plan =
        ShiftPlan { dc_buses: dc_buses.clone(), delta_pd, transfers, predicted: None };
    if signal == SignalKind::Marginal {
        plan.predicted = Some(predict_shift_effects(net, base, &plan, flex)?);
    }
    plan.validate(net, flex)?;
    Ok(plan)
}

/// Model 2: carbon-aware clearing with inflexible demand.
pub fn solve_carbon_priced(
    net: &Network,
    variant: ObjectiveVariant,
    rho: f64,
) -> Result<Dispatch, ShiftError> {
    Ok(solve_dcopf(net, variant.clearing_mode(rho))?)
}

/// Model 3 result: a cleared market together with the load movement it chose.
#[derive(Debug)]
pub struct CoOptimizedClearing {
    pub result: DispatchResult,
    pub plan: ShiftPlan,
    /// Value of the joint objective (generation term plus transfer cost).
    pub lp_objective: f64,
}

/// Model 3: clear generation and fleet flexibility in one LP.
///
/// Extends the OPF with per-site movement variables (entering the balance
/// rows of their host buses) and pairwise transfer variables under the fleet
/// constraints. The objective prices generation according to `variant` and
/// charges `transfer_cost` per MWh moved.
pub fn solve_co_optimized(
    net: &Network,
    flex: &Flexibility,
    variant: ObjectiveVariant,
    rho: f64,
) -> Result<CoOptimizedClearing, ShiftError> {
    let centers = net.data_centers();
    let nc = centers.len();
    if nc == 0 {
        return Err(ShiftError::NoDataCenters);
    }
    let base = build_dcopf(net, variant.clearing_mode(rho))?;
    let nb = base.n_bus();
    let ng = base.n_gen();
    let n0 = nb + ng;
    let p0 = base.lp.n_eq();
    let m0 = base.lp.n_ub();
    let idx = net.bus_index();
    let dc_buses: Vec<usize> = centers.iter().map(|&(_, bus, _)| bus).collect();
    let pairs = pair_index(nc);
    let n = n0 + nc + pairs.len();

    let mut c = vec![0.0; n];
    c[..n0].copy_from_slice(&base.lp.c);
    for j in 0..pairs.len() {
        c[n0 + nc + j] = flex.transfer_cost;
    }

    // Balance rows gain -delta at each site's bus; then the reference pin;
    // then fleet conservation rows.
    let p = p0 + nc;
    let mut a_eq = Matrix::zeros(p, n);
    let mut b_eq = vec![0.0; p];
    for i in 0..p0 {
        a_eq.row_mut(i)[..n0].copy_from_slice(base.lp.a_eq.row(i));
        b_eq[i] = base.lp.b_eq[i];
    }
    for (a, bus) in dc_buses.iter().enumerate() {
        *a_eq.at_mut(idx[bus], n0 + a) = -1.0;
    }
    for a in 0..nc {
        *a_eq.at_mut(p0 + a, n0 + a) = 1.0;
    }
    for (j, &(from, to)) in pairs.iter().enumerate() {
        *a_eq.at_mut(p0 + to, n0 + nc + j) -= 1.0;
        *a_eq.at_mut(p0 + from, n0 + nc + j) += 1.0;
    }

    // Network rows keep their OPF positions; fleet boxes follow.
    let m = m0 + 2 * nc + 2 * pairs.len();
    let mut a_ub = Matrix::zeros(m, n);
    let mut b_ub = vec![0.0; m];
    for i in 0..m0 {
        a_ub.row_mut(i)[..n0].copy_from_slice(base.lp.a_ub.row(i));
        b_ub[i] = base.lp.b_ub[i];
    }
    for (a, &(_, _, p_base)) in centers.iter().enumerate() {
        let span = flex.epsilon * p_base;
        let r = m0 + 2 * a;
        *a_ub.at_mut(r, n0 + a) = 1.0;
        b_ub[r] = span;
        *a_ub.at_mut(r + 1, n0 + a) = -1.0;
        b_ub[r + 1] = span;
    }
    for j in 0..pairs.len() {
        let r = m0 + 2 * nc + 2 * j;
        *a_ub.at_mut(r, n0 + nc + j) = 1.0;
        b_ub[r] = flex.transfer_cap;
        *a_ub.at_mut(r + 1, n0 + nc + j) = -1.0;
        b_ub[r + 1] = 0.0;
    }

    let lp = LpProblem { c, a_eq, b_eq, a_ub, b_ub };
    let sol = solve_lp(&lp)?;

    let theta = sol.x[..nb].to_vec();
    let p_g = sol.x[nb..n0].to_vec();
    let delta_pd = sol.x[n0..n0 + nc].to_vec();
    let mut transfers: Vec<Transfer> = pairs
        .iter()
        .zip(&sol.x[n0 + nc..])
        .filter(|(_, &s)| s > 1e-9)
        .map(|(&(from, to), &s)| Transfer {
            from_bus: dc_buses[from],
            to_bus: dc_buses[to],
            mw: s,
        })
        .collect();
    transfers.sort_by_key(|t| (t.from_bus, t.to_bus));

    let flows: Vec<f64> = net
        .lines
        .iter()
        .map(|l| l.coeff() * (theta[idx[&l.from]] - theta[idx[&l.to]]))
        .collect();
    let cost = net.gens.iter().zip(&p_g).map(|(g, q)| g.cost * q).sum();
    let binding = sol
        .binding_ub
        .iter()
        .filter(|&&r| r < m0)
        .map(|&r| base.ub_row_meaning(r, net))
        .collect();
    let result = DispatchResult {
        cost,
        objective: sol.objective,
        emissions: crate::dcopf::emissions_of(net, &p_g),
        curtailment: crate::dcopf::curtailment_of(net, &p_g),
        lmp: sol.duals_eq[..nb].to_vec(),
        flows,
        p_g,
        theta,
        binding,
        total_load: net.total_load(),
    };
    let plan = ShiftPlan { dc_buses, delta_pd, transfers, predicted: None };
    plan.validate(net, flex)?;
    Ok(CoOptimizedClearing { result, plan, lp_objective: sol.objective })
}
