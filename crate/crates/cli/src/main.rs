//! `gridshift`: market clearing, carbon-intensity signals and data-center
//! load-shifting experiments over scenario files.
//!
//! Exit codes: 0 success, 1 solver failure, 2 configuration problem,
//! 3 ordering-check violation (from `check`, for CI gating).

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use gridshift_core::dcopf::{solve_dcopf, ConstraintId, DcopfError, DispatchResult};
use gridshift_core::emissions::{compute_signals, EmissionSignals, EmissionsError};
use gridshift_core::net::io::{save_dir, Scenario};
use gridshift_core::net::rts_import::import_sourcedata;
use gridshift_core::net::Network;
use gridshift_core::report::{
    check_orderings, compare_models, digest_bytes, run_pipeline, DeltaComparison,
    ExperimentReport, OrderingCheck, PipelineOutcome,
};
use gridshift_core::shifting::{
    solve_carbon_priced, solve_co_optimized, Flexibility, ObjectiveVariant, ShiftError,
    ShiftPlan, SignalKind,
};
use serde::Serialize;

const EXIT_SOLVER: i32 = 1;
const EXIT_CONFIG: i32 = 2;
const EXIT_ORDERING: i32 = 3;

#[derive(Parser)]
#[command(
    name = "gridshift",
    version,
    about = "DC-OPF market clearing, marginal CO2 signals and load shifting"
)]
struct Cli {
    /// Scenario TOML file describing the network and experiment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the scenario's tie-break noise seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Cost,
    Balance,
    Co2,
}

impl From<VariantArg> for ObjectiveVariant {
    fn from(v: VariantArg) -> ObjectiveVariant {
        match v {
            VariantArg::Cost => ObjectiveVariant::Cost,
            VariantArg::Balance => ObjectiveVariant::Balance,
            VariantArg::Co2 => ObjectiveVariant::Co2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SignalArg {
    Marginal,
    Average,
}

impl From<SignalArg> for SignalKind {
    fn from(s: SignalArg) -> SignalKind {
        match s {
            SignalArg::Marginal => SignalKind::Marginal,
            SignalArg::Average => SignalKind::Average,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Clear the market once and print the dispatch.
    Opf {
        /// Clearing objective (defaults to plain cost).
        #[arg(long, value_enum, default_value_t = VariantArg::Cost)]
        objective: VariantArg,
        /// Carbon price override for the balance objective.
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Per-bus marginal and per-region average carbon intensities.
    Lmce,
    /// Run one shifting strategy and print the plan and dispatches.
    Shift {
        /// Strategy: 1 signal-driven, 2 carbon-priced clearing, 3 co-optimised.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        model: u8,
        #[arg(long, value_enum)]
        objective: Option<VariantArg>,
        /// Carbon signal for model 1 (ignored by models 2 and 3).
        #[arg(long, value_enum)]
        signal: Option<SignalArg>,
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Signal-driven pipeline: clear, publish signals, shift, re-clear.
    Pipeline {
        #[arg(long, value_enum)]
        objective: Option<VariantArg>,
        #[arg(long, value_enum)]
        signal: Option<SignalArg>,
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Run every strategy/objective combination and tabulate the outcomes.
    Compare,
    /// Verify the provable orderings between strategies; exit 3 on violation.
    Check,
    /// Convert RTS-GMLC SourceData tables into the native CSV schema.
    ImportRts {
        /// Directory containing bus.csv, gen.csv and branch.csv.
        #[arg(long)]
        source: PathBuf,
        /// Output directory for the converted network.
        #[arg(long)]
        dest: PathBuf,
        /// Multiplier on the source MW Load column.
        #[arg(long, default_value_t = 1.0)]
        load_scale: f64,
    },
}

/// Error carrying the process exit code it should produce.
struct AppError {
    code: i32,
    err: anyhow::Error,
}

impl AppError {
    fn config(err: impl Into<anyhow::Error>) -> AppError {
        AppError { code: EXIT_CONFIG, err: err.into() }
    }

    fn solver(err: impl Into<anyhow::Error>) -> AppError {
        AppError { code: EXIT_SOLVER, err: err.into() }
    }
}

impl From<DcopfError> for AppError {
    fn from(e: DcopfError) -> AppError {
        match e {
            // Structural problems in the network are configuration issues.
            DcopfError::Net(_) => AppError::config(e),
            DcopfError::Lp(_) => AppError::solver(e),
        }
    }
}

impl From<EmissionsError> for AppError {
    fn from(e: EmissionsError) -> AppError {
        match e {
            EmissionsError::Dcopf(inner) => inner.into(),
            _ => AppError::solver(e),
        }
    }
}

impl From<ShiftError> for AppError {
    fn from(e: ShiftError) -> AppError {
        match e {
            ShiftError::NoDataCenters => AppError::config(e),
            ShiftError::Dcopf(inner) => inner.into(),
            ShiftError::Emissions(inner) => inner.into(),
            _ => AppError::solver(e),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {:#}", e.err);
            std::process::exit(e.code);
        }
    }
}

/// Load and realize the scenario behind `--config`, applying `--seed`.
fn load_scenario(cli: &Cli) -> Result<(Scenario, Network, String), AppError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| AppError::config(anyhow::anyhow!("--config <scenario.toml> is required")))?;
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(AppError::config)?;
    let (mut sc, base_dir) = Scenario::from_file(path).map_err(AppError::config)?;
    if let Some(seed) = cli.seed {
        sc.noise.seed = seed;
    }
    let net = sc.realize(&base_dir).map_err(AppError::config)?;
    let digest = digest_bytes(&[bytes.as_slice(), sc.noise.seed.to_string().as_bytes()].concat());
    Ok((sc, net, digest))
}

fn emit(cli: &Cli, text: &str) -> Result<(), AppError> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(AppError::config),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serialises");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<i32, AppError> {
    match &cli.cmd {
        Cmd::Opf { objective, rho } => {
            let (sc, net, _) = load_scenario(&cli)?;
            let mode =
                ObjectiveVariant::from(*objective).clearing_mode(rho.unwrap_or(sc.market.rho));
            let d = solve_dcopf(&net, mode)?;
            let text = match cli.format {
                Format::Json => to_json(&d.result),
                Format::Csv => dispatch_csv(&net, &d.result),
            };
            emit(&cli, &text)?;
        }
        Cmd::Lmce => {
            let (_, net, _) = load_scenario(&cli)?;
            let d = solve_dcopf(&net, gridshift_core::dcopf::ObjectiveMode::Cost)?;
            let signals = compute_signals(&net, &d)?;
            let text = match cli.format {
                Format::Json => to_json(&signals),
                Format::Csv => signals_csv(&net, &signals),
            };
            emit(&cli, &text)?;
        }
        Cmd::Shift { model, objective, signal, rho } => {
            let (sc, net, _) = load_scenario(&cli)?;
            let variant = objective.map(ObjectiveVariant::from).unwrap_or(sc.market.objective);
            let signal = signal.map(SignalKind::from).unwrap_or(sc.market.signal);
            let rho = rho.unwrap_or(sc.market.rho);
            let flex = Flexibility::from(&sc.fleet);
            let output = run_shift(&net, &flex, *model, variant, signal, rho)?;
            let text = match cli.format {
                Format::Json => to_json(&output),
                Format::Csv => shift_csv(&output),
            };
            emit(&cli, &text)?;
        }
        Cmd::Pipeline { objective, signal, rho } => {
            let (sc, net, _) = load_scenario(&cli)?;
            let variant = objective.map(ObjectiveVariant::from).unwrap_or(sc.market.objective);
            let signal = signal.map(SignalKind::from).unwrap_or(sc.market.signal);
            let rho = rho.unwrap_or(sc.market.rho);
            let flex = Flexibility::from(&sc.fleet);
            let outcome = run_pipeline(&net, &flex, variant, signal, rho)?;
            let text = match cli.format {
                Format::Json => to_json(&outcome),
                Format::Csv => pipeline_csv(&outcome),
            };
            emit(&cli, &text)?;
        }
        Cmd::Compare => {
            let (sc, net, digest) = load_scenario(&cli)?;
            let flex = Flexibility::from(&sc.fleet);
            let mut report = compare_models(&net, &flex, sc.market.rho)?;
            report.seed = sc.noise.seed;
            report.config_digest = digest;
            let checks = check_orderings(&report);
            let text = match cli.format {
                Format::Json => to_json(&CompareOutput { report, checks }),
                Format::Csv => compare_csv(&report, &checks),
            };
            emit(&cli, &text)?;
        }
        Cmd::Check => {
            let (sc, net, _) = load_scenario(&cli)?;
            let flex = Flexibility::from(&sc.fleet);
            let report = compare_models(&net, &flex, sc.market.rho)?;
            let checks = check_orderings(&report);
            let mut text = String::new();
            let mut failed = 0;
            for c in &checks {
                let verdict = if c.ok { "PASS" } else { "FAIL" };
                if !c.ok {
                    failed += 1;
                }
                let _ = writeln!(
                    text,
                    "{verdict} {} ({:.6} <= {:.6})",
                    c.name, c.lhs, c.rhs
                );
            }
            let _ = writeln!(text, "{} checks, {} failed", checks.len(), failed);
            emit(&cli, &text)?;
            if failed > 0 {
                return Ok(EXIT_ORDERING);
            }
        }
        Cmd::ImportRts { source, dest, load_scale } => {
            let net = import_sourcedata(source, *load_scale)
                .map_err(AppError::config)?;
            net.validate().map_err(AppError::config)?;
            save_dir(&net, dest).map_err(AppError::config)?;
            emit(
                &cli,
                &format!(
                    "imported {} buses, {} generators, {} lines, {} loads into {}\n",
                    net.n_buses(),
                    net.n_gens(),
                    net.n_lines(),
                    net.loads.len(),
                    dest.display()
                ),
            )?;
        }
    }
    Ok(0)
}

/// One strategy run in a shared output shape.
#[derive(Serialize)]
struct ShiftOutput {
    model: u8,
    objective: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    signal: Option<String>,
    /// Cost-based clearing before any strategy acts.
    base: DispatchResult,
    /// Dispatch after the strategy acts.
    result: DispatchResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<ShiftPlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prediction: Option<DeltaComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lp_objective: Option<f64>,
}

fn run_shift(
    net: &Network,
    flex: &Flexibility,
    model: u8,
    variant: ObjectiveVariant,
    signal: SignalKind,
    rho: f64,
) -> Result<ShiftOutput, AppError> {
    match model {
        1 => {
            let outcome = run_pipeline(net, flex, variant, signal, rho)?;
            Ok(ShiftOutput {
                model: 1,
                objective: variant.as_str().to_string(),
                signal: Some(signal.as_str().to_string()),
                base: outcome.base,
                result: outcome.shifted,
                plan: Some(outcome.plan),
                prediction: outcome.prediction,
                lp_objective: None,
            })
        }
        2 => {
            let base = solve_dcopf(net, gridshift_core::dcopf::ObjectiveMode::Cost)?;
            let d = solve_carbon_priced(net, variant, rho)?;
            Ok(ShiftOutput {
                model: 2,
                objective: variant.as_str().to_string(),
                signal: None,
                base: base.result,
                lp_objective: Some(d.solution.objective),
                result: d.result,
                plan: None,
                prediction: None,
            })
        }
        3 => {
            let base = solve_dcopf(net, gridshift_core::dcopf::ObjectiveMode::Cost)?;
            let c = solve_co_optimized(net, flex, variant, rho)?;
            Ok(ShiftOutput {
                model: 3,
                objective: variant.as_str().to_string(),
                signal: None,
                base: base.result,
                result: c.result,
                plan: Some(c.plan),
                prediction: None,
                lp_objective: Some(c.lp_objective),
            })
        }
        _ => unreachable!("clap bounds the model number"),
    }
}

fn fmt6(v: f64) -> String {
    // Avoid "-0.000000" wobble in rendered tables.
    let v = if v.abs() < 5e-7 { 0.0 } else { v };
    format!("{v:.6}")
}

fn constraint_label(c: &ConstraintId) -> (&'static str, usize) {
    match c {
        ConstraintId::LineForward(id) => ("line_forward", *id),
        ConstraintId::LineReverse(id) => ("line_reverse", *id),
        ConstraintId::GenMax(id) => ("gen_max", *id),
        ConstraintId::GenMin(id) => ("gen_min", *id),
    }
}

fn dispatch_rows(out: &mut String, section: &str, net: &Network, r: &DispatchResult) {
    let _ = writeln!(out, "{section},cost,{}", fmt6(r.cost));
    let _ = writeln!(out, "{section},objective,{}", fmt6(r.objective));
    let _ = writeln!(out, "{section},emissions,{}", fmt6(r.emissions));
    let _ = writeln!(out, "{section},curtailment,{}", fmt6(r.curtailment));
    let _ = writeln!(out, "{section},total_load,{}", fmt6(r.total_load));
    for (g, p) in net.gens.iter().zip(&r.p_g) {
        let _ = writeln!(out, "{section},gen_{},{}", g.id, fmt6(*p));
    }
    for (b, lmp) in net.buses.iter().zip(&r.lmp) {
        let _ = writeln!(out, "{section},lmp_{},{}", b.id, fmt6(*lmp));
    }
    for (l, f) in net.lines.iter().zip(&r.flows) {
        let _ = writeln!(out, "{section},flow_{},{}", l.id, fmt6(*f));
    }
    for c in &r.binding {
        let (kind, id) = constraint_label(c);
        let _ = writeln!(out, "{section},binding,{kind}_{id}");
    }
}

fn dispatch_csv(net: &Network, r: &DispatchResult) -> String {
    let mut out = String::from("section,key,value\n");
    dispatch_rows(&mut out, "dispatch", net, r);
    out
}

fn signals_csv(net: &Network, s: &EmissionSignals) -> String {
    let mut out = String::from("kind,id,value\n");
    for (b, v) in net.buses.iter().zip(&s.marginal) {
        let _ = writeln!(out, "bus,{},{}", b.id, fmt6(*v));
    }
    for (region, v) in &s.average_by_region {
        let _ = writeln!(out, "region,{region},{}", fmt6(*v));
    }
    out
}

fn plan_rows(out: &mut String, plan: &ShiftPlan) {
    for (bus, d) in plan.dc_buses.iter().zip(&plan.delta_pd) {
        let _ = writeln!(out, "site,{bus},{}", fmt6(*d));
    }
    for t in &plan.transfers {
        let _ = writeln!(out, "transfer,{}->{},{}", t.from_bus, t.to_bus, fmt6(t.mw));
    }
}

fn prediction_rows(out: &mut String, p: &DeltaComparison) {
    let pairs = [
        ("cost", p.predicted_cost, p.actual_cost),
        ("emissions", p.predicted_emissions, p.actual_emissions),
        ("curtailment", p.predicted_curtailment, p.actual_curtailment),
    ];
    for (name, pred, actual) in pairs {
        let _ = writeln!(out, "prediction,delta_{name}_predicted,{}", fmt6(pred));
        let _ = writeln!(out, "prediction,delta_{name}_actual,{}", fmt6(actual));
    }
}

fn shift_csv(o: &ShiftOutput) -> String {
    let mut out = String::from("section,key,value\n");
    let _ = writeln!(out, "run,model,m{}", o.model);
    let _ = writeln!(out, "run,objective,{}", o.objective);
    if let Some(s) = &o.signal {
        let _ = writeln!(out, "run,signal,{s}");
    }
    for (section, r) in [("base", &o.base), ("result", &o.result)] {
        let _ = writeln!(out, "{section},cost,{}", fmt6(r.cost));
        let _ = writeln!(out, "{section},emissions,{}", fmt6(r.emissions));
        let _ = writeln!(out, "{section},curtailment,{}", fmt6(r.curtailment));
    }
    if let Some(v) = o.lp_objective {
        let _ = writeln!(out, "run,lp_objective,{}", fmt6(v));
    }
    if let Some(plan) = &o.plan {
        plan_rows(&mut out, plan);
    }
    if let Some(p) = &o.prediction {
        prediction_rows(&mut out, p);
    }
    out
}

fn pipeline_csv(o: &PipelineOutcome) -> String {
    let mut out = String::from("section,key,value\n");
    for (section, r) in [("base", &o.base), ("shifted", &o.shifted)] {
        let _ = writeln!(out, "{section},cost,{}", fmt6(r.cost));
        let _ = writeln!(out, "{section},emissions,{}", fmt6(r.emissions));
        let _ = writeln!(out, "{section},curtailment,{}", fmt6(r.curtailment));
    }
    for (i, v) in o.signals.marginal.iter().enumerate() {
        let _ = writeln!(out, "signal,marginal_{i},{}", fmt6(*v));
    }
    for (region, v) in &o.signals.average_by_region {
        let _ = writeln!(out, "signal,average_region_{region},{}", fmt6(*v));
    }
    plan_rows(&mut out, &o.plan);
    if let Some(p) = &o.prediction {
        prediction_rows(&mut out, p);
    }
    out
}

#[derive(Serialize)]
struct CompareOutput {
    report: ExperimentReport,
    checks: Vec<OrderingCheck>,
}

fn compare_csv(report: &ExperimentReport, checks: &[OrderingCheck]) -> String {
    let mut out = report.to_csv_string();
    out.push('\n');
    out.push_str("check,lhs,rhs,ok\n");
    for c in checks {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            c.name,
            fmt6(c.lhs),
            fmt6(c.rhs),
            if c.ok { "pass" } else { "fail" }
        );
    }
    out
}
