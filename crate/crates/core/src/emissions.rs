//! Carbon intensity signals derived from a cleared market.
//!
//! Two signals drive consumer-side shifting:
//!
//! * **Marginal** (LMCE): the derivative of system CO2 with respect to demand
//!   at each bus, obtained from the optimal basis `A` of the clearing LP.
//!   With `g` the generator emission-rate vector embedded at the generator
//!   columns, the whole vector is one transpose solve `A^-T g_hat`; the
//!   entries on the balance rows are the per-bus marginal intensities.
//!   Valid exactly as long as the binding set does not change.
//! * **Average**: regional CO2 output divided by regional generation. Cheap
//!   and widely published, but blind to which unit actually follows load.

use crate::dcopf::Dispatch;
use crate::lp::LpError;
use crate::net::Network;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmissionsError {
    #[error("regions without generation cannot report average intensity: {0:?}")]
    ZeroGeneration(Vec<usize>),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Dcopf(#[from] crate::dcopf::DcopfError),
}

/// Per-bus marginal and per-region average carbon intensities, in t/MWh.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmissionSignals {
    /// Bus order follows the network bus table.
    pub marginal: Vec<f64>,
    pub average_by_region: BTreeMap<usize, f64>,
}

/// Locational marginal CO2 intensity at every bus (t/MWh).
///
/// One additional MWh of demand at bus `i` changes the optimal dispatch by
/// `A^-1 e_i`; its emission content is the corresponding entry of
/// `A^-T g_hat`. Negative values are legitimate: extra demand can displace
/// flows in a way that backs down a dirtier unit elsewhere.
pub fn compute_lmce(net: &Network, dispatch: &Dispatch) -> Result<Vec<f64>, EmissionsError> {
    let basis = dispatch.optimal_basis()?;
    let nb = dispatch.model.n_bus();
    let n = basis.n();
    let mut g_hat = vec![0.0; n];
    for (k, g) in net.gens.iter().enumerate() {
        g_hat[dispatch.model.gen_col(k)] = g.emission_rate;
    }
    let y = basis.solve_transpose(&g_hat);
    Ok(y[..nb].to_vec())
}

/// Reference implementation of [`compute_lmce`]: re-solves the clearing LP
/// with `delta` MW of extra demand at `bus` and differences total emissions.
/// Exact only while the binding set is unchanged by the perturbation.
pub fn finite_difference_lmce(
    net: &Network,
    mode: crate::dcopf::ObjectiveMode,
    bus: usize,
    delta: f64,
) -> Result<f64, EmissionsError> {
    let base = crate::dcopf::solve_dcopf(net, mode)?;
    let mut bumped = net.clone();
    let next_id = bumped.loads.iter().map(|l| l.id).max().unwrap_or(0) + 1;
    bumped.loads.push(crate::net::Load {
        id: next_id,
        bus,
        demand: delta,
        is_data_center: false,
    });
    let after = crate::dcopf::solve_dcopf(&bumped, mode)?;
    Ok((after.result.emissions - base.result.emissions) / delta)
}

/// Average CO2 intensity per region: emissions divided by generation.
///
/// Fails listing every region that generated nothing this interval, since
/// its average is undefined.
pub fn compute_average_emissions(
    net: &Network,
    p_g: &[f64],
) -> Result<BTreeMap<usize, f64>, EmissionsError> {
    let region_of: std::collections::HashMap<usize, usize> =
        net.buses.iter().map(|b| (b.id, b.region)).collect();
    let mut gen_mw: BTreeMap<usize, f64> = BTreeMap::new();
    let mut gen_co2: BTreeMap<usize, f64> = BTreeMap::new();
    for r in net.regions() {
        gen_mw.insert(r, 0.0);
        gen_co2.insert(r, 0.0);
    }
    for (g, &p) in net.gens.iter().zip(p_g) {
        let r = region_of[&g.bus];
        *gen_mw.get_mut(&r).unwrap() += p;
        *gen_co2.get_mut(&r).unwrap() += g.emission_rate * p;
    }
    let dead: Vec<usize> =
        gen_mw.iter().filter(|(_, &mw)| mw <= 0.0).map(|(&r, _)| r).collect();
    if !dead.is_empty() {
        return Err(EmissionsError::ZeroGeneration(dead));
    }
    Ok(gen_mw.iter().map(|(&r, &mw)| (r, gen_co2[&r] / mw)).collect())
}

/// Bundle both signals for one cleared interval.
pub fn compute_signals(net: &Network, dispatch: &Dispatch) -> Result<EmissionSignals, EmissionsError> {
    Ok(EmissionSignals {
        marginal: compute_lmce(net, dispatch)?,
        average_by_region: compute_average_emissions(net, &dispatch.result.p_g)?,
    })
}
