//! Best-effort converter from RTS-GMLC source tables to the native schema.
//!
//! The public RTS-GMLC repository ships `bus.csv`, `gen.csv` and `branch.csv`
//! under `RTS_Data/SourceData/`. This module maps those tables onto
//! [`Network`]: susceptance is `1/X`, generator marginal cost is
//! `fuel price x average heat rate`, emission rates come from
//! [`Fuel::default_emission_rate`], and the `Area` column becomes the region.
//!
//! Renewable columns carry nameplate capacity; pick an operating interval by
//! scaling `p_max` of wind/solar units and the load column afterwards (see
//! `scripts/fetch_rts_gmlc.sh`).

use super::{Bus, Fuel, Generator, Line, Load, Network};
use std::collections::HashMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RtsImportError {
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: missing column '{col}'")]
    MissingColumn { path: String, col: String },
    #[error("{path} row {row}: cannot parse '{value}' for column '{col}'")]
    BadValue { path: String, row: usize, col: String, value: String },
    #[error("gen.csv row {row}: unrecognised unit type '{unit}' / fuel '{fuel}'")]
    UnknownUnit { row: usize, unit: String, fuel: String },
}

struct Table {
    path: String,
    headers: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn open(path: &Path) -> Result<Table, RtsImportError> {
        let pstr = path.display().to_string();
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|source| RtsImportError::Csv { path: pstr.clone(), source })?;
        let headers = rdr
            .headers()
            .map_err(|source| RtsImportError::Csv { path: pstr.clone(), source })?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        let rows = rdr
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|source| RtsImportError::Csv { path: pstr.clone(), source })?;
        Ok(Table { path: pstr, headers, rows })
    }

    fn col(&self, name: &str) -> Result<usize, RtsImportError> {
        self.headers.get(name).copied().ok_or_else(|| RtsImportError::MissingColumn {
            path: self.path.clone(),
            col: name.to_string(),
        })
    }

    fn get<'a>(&'a self, row: usize, col: usize) -> &'a str {
        self.rows[row].get(col).unwrap_or("")
    }

    fn num(&self, row: usize, col: usize, name: &str) -> Result<f64, RtsImportError> {
        let raw = self.get(row, col);
        if raw.is_empty() {
            return Ok(0.0);
        }
        raw.parse().map_err(|_| RtsImportError::BadValue {
            path: self.path.clone(),
            row: row + 2,
            col: name.to_string(),
            value: raw.to_string(),
        })
    }

    fn int(&self, row: usize, col: usize, name: &str) -> Result<usize, RtsImportError> {
        let raw = self.get(row, col);
        raw.parse().map_err(|_| RtsImportError::BadValue {
            path: self.path.clone(),
            row: row + 2,
            col: name.to_string(),
            value: raw.to_string(),
        })
    }
}

fn classify(unit_type: &str, fuel: &str) -> Option<Fuel> {
    let u = unit_type.to_ascii_uppercase();
    let f = fuel.to_ascii_uppercase();
    match u.as_str() {
        "NUCLEAR" => Some(Fuel::Nuclear),
        "HYDRO" | "ROR" => Some(Fuel::Hydro),
        "WIND" => Some(Fuel::Wind),
        "PV" | "RTPV" | "CSP" => Some(Fuel::Solar),
        "STORAGE" => Some(Fuel::Storage),
        "SYNC_COND" => None,
        _ => match f.as_str() {
            "OIL" => Some(Fuel::Oil),
            "COAL" => Some(Fuel::Coal),
            "NG" | "GAS" => Some(Fuel::Gas),
            "NUCLEAR" => Some(Fuel::Nuclear),
            "HYDRO" => Some(Fuel::Hydro),
            "WIND" => Some(Fuel::Wind),
            "SOLAR" => Some(Fuel::Solar),
            "STORAGE" => Some(Fuel::Storage),
            _ => None,
        },
    }
}

/// Convert a `SourceData` directory into a [`Network`].
///
/// `load_scale` multiplies the bus `MW Load` column, selecting the operating
/// interval relative to the annual peak recorded in the source data.
/// Synchronous condensers (no real-power capability) are dropped.
pub fn import_sourcedata(dir: impl AsRef<Path>, load_scale: f64) -> Result<Network, RtsImportError> {
    let dir = dir.as_ref();
    let bus_t = Table::open(&dir.join("bus.csv"))?;
    let gen_t = Table::open(&dir.join("gen.csv"))?;
    let br_t = Table::open(&dir.join("branch.csv"))?;

    let b_id = bus_t.col("Bus ID")?;
    let b_name = bus_t.col("Bus Name")?;
    let b_type = bus_t.col("Bus Type")?;
    let b_load = bus_t.col("MW Load")?;
    let b_area = bus_t.col("Area")?;

    let mut buses = Vec::new();
    let mut loads = Vec::new();
    let mut load_id = 1;
    for r in 0..bus_t.rows.len() {
        let id = bus_t.int(r, b_id, "Bus ID")?;
        buses.push(Bus {
            id,
            name: bus_t.get(r, b_name).to_string(),
            region: bus_t.int(r, b_area, "Area")?,
            is_ref: bus_t.get(r, b_type).eq_ignore_ascii_case("Ref"),
        });
        let mw = bus_t.num(r, b_load, "MW Load")? * load_scale;
        if mw > 0.0 {
            loads.push(Load { id: load_id, bus: id, demand: mw, is_data_center: false });
            load_id += 1;
        }
    }

    let g_bus = gen_t.col("Bus ID")?;
    let g_type = gen_t.col("Unit Type")?;
    let g_fuel = gen_t.col("Fuel")?;
    let g_pmax = gen_t.col("PMax MW")?;
    let g_price = gen_t.col("Fuel Price $/MMBTU")?;
    let g_hr = gen_t.col("HR_avg_0")?;

    let mut gens = Vec::new();
    let mut gen_id = 1;
    for r in 0..gen_t.rows.len() {
        let unit = gen_t.get(r, g_type);
        let fuel_raw = gen_t.get(r, g_fuel);
        let Some(fuel) = classify(unit, fuel_raw) else {
            if unit.eq_ignore_ascii_case("SYNC_COND") {
                continue;
            }
            return Err(RtsImportError::UnknownUnit {
                row: r + 2,
                unit: unit.to_string(),
                fuel: fuel_raw.to_string(),
            });
        };
        // $/MMBTU x BTU/kWh / 1000 = $/MWh.
        let cost = gen_t.num(r, g_price, "Fuel Price $/MMBTU")?
            * gen_t.num(r, g_hr, "HR_avg_0")?
            / 1000.0;
        gens.push(Generator {
            id: gen_id,
            bus: gen_t.int(r, g_bus, "Bus ID")?,
            fuel,
            cost,
            // Single-interval economic dispatch: commitment minimums do not
            // apply, only capability.
            p_min: 0.0,
            p_max: gen_t.num(r, g_pmax, "PMax MW")?,
            emission_rate: fuel.default_emission_rate(),
        });
        gen_id += 1;
    }

    let l_from = br_t.col("From Bus")?;
    let l_to = br_t.col("To Bus")?;
    let l_x = br_t.col("X")?;
    let l_rate = br_t.col("Cont Rating")?;

    let mut lines = Vec::new();
    for r in 0..br_t.rows.len() {
        let x = br_t.num(r, l_x, "X")?;
        lines.push(Line {
            id: r + 1,
            from: br_t.int(r, l_from, "From Bus")?,
            to: br_t.int(r, l_to, "To Bus")?,
            susceptance: 1.0 / x,
            limit: br_t.num(r, l_rate, "Cont Rating")?,
        });
    }

    Ok(Network { buses, gens, lines, loads })
}
