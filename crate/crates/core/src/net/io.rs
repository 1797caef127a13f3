//! CSV ingestion/serialisation for [`Network`] and scenario configuration.
//!
//! A network directory holds four tables:
//!
//! ```text
//! bus.csv     id,name,region,is_ref
//! gen.csv     id,bus,fuel,cost,p_min,p_max,emission_rate
//! branch.csv  id,from,to,susceptance,limit
//! load.csv    id,bus,demand
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! `load_dir(save_dir(net)) == net` exactly.

use super::{Bus, Fuel, Generator, Line, Load, NetError, Network};
use crate::shifting::{ObjectiveVariant, SignalKind};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: unknown fuel '{fuel}' for generator {id}")]
    UnknownFuel { path: PathBuf, id: usize, fuel: String },
    #[error("scenario {path}: {msg}")]
    Scenario { path: PathBuf, msg: String },
    #[error(transparent)]
    Net(#[from] NetError),
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| IoError::Csv { path: path.into(), source })?;
    rdr.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|source| IoError::Csv { path: path.into(), source })
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), IoError> {
    let mut wtr =
        csv::Writer::from_path(path).map_err(|source| IoError::Csv { path: path.into(), source })?;
    for row in rows {
        wtr.serialize(row).map_err(|source| IoError::Csv { path: path.into(), source })?;
    }
    wtr.flush().map_err(|source| IoError::Io { path: path.into(), source })
}

#[derive(Deserialize, Serialize)]
struct GenRow {
    id: usize,
    bus: usize,
    fuel: String,
    cost: f64,
    p_min: f64,
    p_max: f64,
    emission_rate: f64,
}

#[derive(Deserialize, Serialize)]
struct LoadRow {
    id: usize,
    bus: usize,
    demand: f64,
}

/// Read a network from a directory of CSV tables and validate it.
pub fn load_dir(dir: impl AsRef<Path>) -> Result<Network, IoError> {
    let dir = dir.as_ref();
    let buses: Vec<Bus> = read_rows(&dir.join("bus.csv"))?;
    let gen_rows: Vec<GenRow> = read_rows(&dir.join("gen.csv"))?;
    let lines: Vec<Line> = read_rows(&dir.join("branch.csv"))?;
    let load_rows: Vec<LoadRow> = read_rows(&dir.join("load.csv"))?;

    let gens = gen_rows
        .into_iter()
        .map(|r| {
            let fuel = Fuel::parse(&r.fuel).ok_or_else(|| IoError::UnknownFuel {
                path: dir.join("gen.csv"),
                id: r.id,
                fuel: r.fuel.clone(),
            })?;
            Ok(Generator {
                id: r.id,
                bus: r.bus,
                fuel,
                cost: r.cost,
                p_min: r.p_min,
                p_max: r.p_max,
                emission_rate: r.emission_rate,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;

    let loads = load_rows
        .into_iter()
        .map(|r| Load { id: r.id, bus: r.bus, demand: r.demand, is_data_center: false })
        .collect();

    let net = Network { buses, gens, lines, loads };
    net.validate()?;
    Ok(net)
}

/// Write the four CSV tables for `net` into `dir` (created if missing).
///
/// Data-center flags are scenario state, not network state, so `load.csv`
/// only records inflexible loads plus any data-center demand as plain rows.
pub fn save_dir(net: &Network, dir: impl AsRef<Path>) -> Result<(), IoError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)
        .map_err(|source| IoError::Io { path: dir.into(), source })?;
    write_rows(&dir.join("bus.csv"), &net.buses)?;
    let gen_rows: Vec<GenRow> = net
        .gens
        .iter()
        .map(|g| GenRow {
            id: g.id,
            bus: g.bus,
            fuel: g.fuel.to_string(),
            cost: g.cost,
            p_min: g.p_min,
            p_max: g.p_max,
            emission_rate: g.emission_rate,
        })
        .collect();
    write_rows(&dir.join("gen.csv"), &gen_rows)?;
    write_rows(&dir.join("branch.csv"), &net.lines)?;
    let load_rows: Vec<LoadRow> =
        net.loads.iter().map(|l| LoadRow { id: l.id, bus: l.bus, demand: l.demand }).collect();
    write_rows(&dir.join("load.csv"), &load_rows)?;
    Ok(())
}

/// Data-center placement block of a scenario file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataCenterCfg {
    pub buses: Vec<usize>,
    pub demand_mw: f64,
}

/// Flexibility parameters shared by all data centers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FleetCfg {
    /// Fraction of each center's base demand that may move (±).
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Per-pair transfer capacity in MW.
    #[serde(default = "default_transfer_cap")]
    pub transfer_cap_mw: f64,
    /// Per-MWh cost of moving work between sites.
    #[serde(default)]
    pub shift_cost_per_mwh: f64,
}

fn default_epsilon() -> f64 {
    0.05
}
fn default_transfer_cap() -> f64 {
    400.0
}

impl Default for FleetCfg {
    fn default() -> Self {
        FleetCfg {
            epsilon: default_epsilon(),
            transfer_cap_mw: default_transfer_cap(),
            shift_cost_per_mwh: 0.0,
        }
    }
}

/// Market-side knobs: carbon price and shifting objective.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarketCfg {
    /// Carbon price in $/ton used by balance objectives and model 2/3.
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub objective: ObjectiveVariant,
    #[serde(default)]
    pub signal: SignalKind,
}

fn default_rho() -> f64 {
    30.0
}

impl Default for MarketCfg {
    fn default() -> Self {
        MarketCfg { rho: default_rho(), objective: ObjectiveVariant::default(), signal: SignalKind::default() }
    }
}

/// Deterministic tie-break noise on generator costs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseCfg {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_noise")]
    pub magnitude: f64,
}

fn default_seed() -> u64 {
    42
}
fn default_noise() -> f64 {
    1e-3
}

impl Default for NoiseCfg {
    fn default() -> Self {
        NoiseCfg { seed: default_seed(), magnitude: default_noise() }
    }
}

/// A scenario file: network location plus experiment parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    /// Directory of network CSVs, relative to the scenario file.
    pub network: PathBuf,
    pub data_centers: DataCenterCfg,
    #[serde(default)]
    pub fleet: FleetCfg,
    #[serde(default)]
    pub market: MarketCfg,
    #[serde(default)]
    pub noise: NoiseCfg,
}

impl Scenario {
    /// Parse a TOML scenario file.
    pub fn from_file(path: impl AsRef<Path>) -> Result<(Scenario, PathBuf), IoError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| IoError::Io { path: path.into(), source })?;
        let sc: Scenario = toml::from_str(&text)
            .map_err(|e| IoError::Scenario { path: path.into(), msg: e.to_string() })?;
        if sc.fleet.epsilon < 0.0 || sc.fleet.epsilon > 1.0 {
            return Err(IoError::Scenario {
                path: path.into(),
                msg: format!("fleet.epsilon must be in [0, 1], got {}", sc.fleet.epsilon),
            });
        }
        if sc.data_centers.demand_mw < 0.0 {
            return Err(IoError::Scenario {
                path: path.into(),
                msg: "data_centers.demand_mw must be nonnegative".into(),
            });
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((sc, base))
    }

    /// Load the referenced network, attach data centers and apply cost noise.
    pub fn realize(&self, base_dir: &Path) -> Result<Network, IoError> {
        let dir = if self.network.is_absolute() {
            self.network.clone()
        } else {
            base_dir.join(&self.network)
        };
        let mut net = load_dir(dir)?;
        net.designate_data_centers(&self.data_centers.buses, self.data_centers.demand_mw)?;
        net.apply_cost_noise(self.noise.seed, self.noise.magnitude);
        Ok(net)
    }
}
