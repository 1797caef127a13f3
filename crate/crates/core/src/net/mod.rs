//! Network data model: buses, generators, transmission lines and loads.
//!
//! A [`Network`] is an in-memory snapshot of one market interval. Ingestion
//! (CSV directories, scenario files) lives in [`io`]; conversion from the
//! public RTS-GMLC source tables lives in [`rts_import`].

pub mod io;
pub mod rts_import;

use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

/// System base power in MVA; angles are in radians and susceptances in per
/// unit on this base, so a line carries `BASE_MVA * b * (theta_f - theta_t)`
/// megawatts.
pub const BASE_MVA: f64 = 100.0;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: usize },
    #[error("{kind} {id} references unknown bus {bus}")]
    DanglingBus { kind: &'static str, id: usize, bus: usize },
    #[error("generator {id}: p_min {p_min} exceeds p_max {p_max}")]
    BadGenBounds { id: usize, p_min: f64, p_max: f64 },
    #[error("generator {id}: {fuel} unit must have zero emission rate, got {rate}")]
    EmittingCleanFuel { id: usize, fuel: Fuel, rate: f64 },
    #[error("generator {id}: negative {field}")]
    NegativeGenField { id: usize, field: &'static str },
    #[error("line {id}: susceptance must be positive, got {b}")]
    BadSusceptance { id: usize, b: f64 },
    #[error("line {id}: thermal limit must be positive, got {limit}")]
    BadLimit { id: usize, limit: f64 },
    #[error("line {id} connects bus {bus} to itself")]
    SelfLoop { id: usize, bus: usize },
    #[error("load {id}: negative demand {demand}")]
    NegativeDemand { id: usize, demand: f64 },
    #[error("expected exactly one reference bus, found {count}")]
    ReferenceBusCount { count: usize },
    #[error("network is not connected: bus {bus} is unreachable from the reference bus")]
    Disconnected { bus: usize },
    #[error("no bus with id {0}")]
    NoSuchBus(usize),
    #[error("bus {0} already hosts a data center")]
    DataCenterExists(usize),
    #[error("network has no buses")]
    Empty,
}

/// Fuel category of a generating unit. Determines the default emission rate
/// and whether the unit counts toward renewable curtailment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fuel {
    Oil,
    Coal,
    Gas,
    Hydro,
    Nuclear,
    Wind,
    Solar,
    Storage,
}

impl Fuel {
    /// Default CO2 intensity in tons per MWh of electric output.
    pub fn default_emission_rate(self) -> f64 {
        match self {
            Fuel::Oil => 0.7434,
            Fuel::Gas => 0.9606,
            Fuel::Coal => 0.6042,
            Fuel::Hydro | Fuel::Nuclear | Fuel::Wind | Fuel::Solar | Fuel::Storage => 0.0,
        }
    }

    /// Fuels whose undispatched headroom is reported as curtailment.
    pub fn is_curtailable_renewable(self) -> bool {
        matches!(self, Fuel::Wind | Fuel::Solar)
    }

    pub fn parse(s: &str) -> Option<Fuel> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oil" => Some(Fuel::Oil),
            "coal" => Some(Fuel::Coal),
            "gas" | "ng" | "naturalgas" => Some(Fuel::Gas),
            "hydro" => Some(Fuel::Hydro),
            "nuclear" => Some(Fuel::Nuclear),
            "wind" => Some(Fuel::Wind),
            "solar" | "pv" => Some(Fuel::Solar),
            "storage" => Some(Fuel::Storage),
            _ => None,
        }
    }
}

impl std::fmt::Display for Fuel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Fuel::Oil => "oil",
            Fuel::Coal => "coal",
            Fuel::Gas => "gas",
            Fuel::Hydro => "hydro",
            Fuel::Nuclear => "nuclear",
            Fuel::Wind => "wind",
            Fuel::Solar => "solar",
            Fuel::Storage => "storage",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub name: String,
    /// Region number used for average-intensity reporting (1-based).
    pub region: usize,
    /// Angle reference flag; exactly one bus per network carries it.
    pub is_ref: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: usize,
    pub bus: usize,
    pub fuel: Fuel,
    /// Marginal cost in $/MWh (possibly perturbed by tie-break noise).
    pub cost: f64,
    pub p_min: f64,
    /// Available capacity for this interval in MW.
    pub p_max: f64,
    /// CO2 intensity in t/MWh.
    pub emission_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    /// Per-unit susceptance `1/x` on [`BASE_MVA`].
    pub susceptance: f64,
    /// Thermal limit in MW, enforced in both directions.
    pub limit: f64,
}

impl Line {
    /// MW transfer coefficient: flow = `coeff() * (theta_from - theta_to)`.
    pub fn coeff(&self) -> f64 {
        BASE_MVA * self.susceptance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub id: usize,
    pub bus: usize,
    /// Demand in MW for this interval.
    pub demand: f64,
    /// True for flexible data-center loads added via
    /// [`Network::designate_data_centers`].
    #[serde(default)]
    pub is_data_center: bool,
}

/// One-interval snapshot of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub buses: Vec<Bus>,
    pub gens: Vec<Generator>,
    pub lines: Vec<Line>,
    pub loads: Vec<Load>,
}

impl Network {
    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn n_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    /// Map from bus id to position in `buses`.
    pub fn bus_index(&self) -> HashMap<usize, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    pub fn ref_bus(&self) -> Option<&Bus> {
        self.buses.iter().find(|b| b.is_ref)
    }

    pub fn total_load(&self) -> f64 {
        self.loads.iter().map(|l| l.demand).sum()
    }

    pub fn data_center_load(&self) -> f64 {
        self.loads.iter().filter(|l| l.is_data_center).map(|l| l.demand).sum()
    }

    /// Total demand at a bus, all loads combined.
    pub fn demand_at(&self, bus: usize) -> f64 {
        self.loads.iter().filter(|l| l.bus == bus).map(|l| l.demand).sum()
    }

    /// Sorted list of region numbers present in the bus table.
    pub fn regions(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self
            .buses
            .iter()
            .map(|b| b.region)
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        r.sort_unstable();
        r
    }

    /// Structural validation: referential integrity, bounds, a single
    /// reference bus, and connectivity of the line graph.
    pub fn validate(&self) -> Result<(), NetError> {
        if self.buses.is_empty() {
            return Err(NetError::Empty);
        }
        let mut seen = HashSet::new();
        for b in &self.buses {
            if !seen.insert(b.id) {
                return Err(NetError::DuplicateId { kind: "bus", id: b.id });
            }
        }
        let idx = self.bus_index();

        let mut gen_ids = HashSet::new();
        for g in &self.gens {
            if !gen_ids.insert(g.id) {
                return Err(NetError::DuplicateId { kind: "generator", id: g.id });
            }
            if !idx.contains_key(&g.bus) {
                return Err(NetError::DanglingBus { kind: "generator", id: g.id, bus: g.bus });
            }
            if g.p_min > g.p_max {
                return Err(NetError::BadGenBounds { id: g.id, p_min: g.p_min, p_max: g.p_max });
            }
            if g.p_min < 0.0 {
                return Err(NetError::NegativeGenField { id: g.id, field: "p_min" });
            }
            if g.cost < 0.0 {
                return Err(NetError::NegativeGenField { id: g.id, field: "cost" });
            }
            if g.emission_rate < 0.0 {
                return Err(NetError::NegativeGenField { id: g.id, field: "emission_rate" });
            }
            if g.fuel.default_emission_rate() == 0.0 && g.emission_rate != 0.0 {
                return Err(NetError::EmittingCleanFuel {
                    id: g.id,
                    fuel: g.fuel,
                    rate: g.emission_rate,
                });
            }
        }

        let mut line_ids = HashSet::new();
        for l in &self.lines {
            if !line_ids.insert(l.id) {
                return Err(NetError::DuplicateId { kind: "line", id: l.id });
            }
            for bus in [l.from, l.to] {
                if !idx.contains_key(&bus) {
                    return Err(NetError::DanglingBus { kind: "line", id: l.id, bus });
                }
            }
            if l.from == l.to {
                return Err(NetError::SelfLoop { id: l.id, bus: l.from });
            }
            if l.susceptance <= 0.0 {
                return Err(NetError::BadSusceptance { id: l.id, b: l.susceptance });
            }
            if l.limit <= 0.0 {
                return Err(NetError::BadLimit { id: l.id, limit: l.limit });
            }
        }

        let mut load_ids = HashSet::new();
        for l in &self.loads {
            if !load_ids.insert(l.id) {
                return Err(NetError::DuplicateId { kind: "load", id: l.id });
            }
            if !idx.contains_key(&l.bus) {
                return Err(NetError::DanglingBus { kind: "load", id: l.id, bus: l.bus });
            }
            if l.demand < 0.0 {
                return Err(NetError::NegativeDemand { id: l.id, demand: l.demand });
            }
        }

        let refs = self.buses.iter().filter(|b| b.is_ref).count();
        if refs != 1 {
            return Err(NetError::ReferenceBusCount { count: refs });
        }

        // Connectivity sweep from the reference bus.
        let start = idx[&self.ref_bus().unwrap().id];
        let mut adj = vec![Vec::new(); self.buses.len()];
        for l in &self.lines {
            let (f, t) = (idx[&l.from], idx[&l.to]);
            adj[f].push(t);
            adj[t].push(f);
        }
        let mut visited = vec![false; self.buses.len()];
        let mut stack = vec![start];
        visited[start] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !visited[v] {
                    visited[v] = true;
                    stack.push(v);
                }
            }
        }
        if let Some(i) = visited.iter().position(|v| !v) {
            return Err(NetError::Disconnected { bus: self.buses[i].id });
        }
        Ok(())
    }

    /// Attach a flexible data-center load of `demand_mw` at each listed bus.
    ///
    /// Existing loads are untouched, so total inflexible demand is preserved
    /// and total demand grows by `buses.len() * demand_mw`. At most one data
    /// center per bus.
    pub fn designate_data_centers(
        &mut self,
        buses: &[usize],
        demand_mw: f64,
    ) -> Result<(), NetError> {
        let idx = self.bus_index();
        let mut next_id = self.loads.iter().map(|l| l.id).max().unwrap_or(0) + 1;
        for &bus in buses {
            if !idx.contains_key(&bus) {
                return Err(NetError::NoSuchBus(bus));
            }
            if self.loads.iter().any(|l| l.bus == bus && l.is_data_center) {
                return Err(NetError::DataCenterExists(bus));
            }
            self.loads.push(Load { id: next_id, bus, demand: demand_mw, is_data_center: true });
            next_id += 1;
        }
        Ok(())
    }

    /// Data-center loads in id order, as `(load index, bus id, demand)`.
    pub fn data_centers(&self) -> Vec<(usize, usize, f64)> {
        let mut out: Vec<(usize, usize, f64)> = self
            .loads
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_data_center)
            .map(|(i, l)| (i, l.bus, l.demand))
            .collect();
        out.sort_by_key(|&(i, _, _)| self.loads[i].id);
        out
    }

    /// Add a reproducible tie-break perturbation to generator costs.
    ///
    /// Each unit receives an independent draw from `U[0, magnitude)`, applied
    /// in generator id order, so equal-cost units acquire a strict ordering
    /// without materially changing the economics.
    pub fn apply_cost_noise(&mut self, seed: u64, magnitude: f64) {
        use rand::{Rng, SeedableRng};
        let mut order: Vec<usize> = (0..self.gens.len()).collect();
        order.sort_by_key(|&i| self.gens[i].id);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for i in order {
            self.gens[i].cost += rng.gen::<f64>() * magnitude;
        }
    }
}
