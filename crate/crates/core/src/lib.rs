//! Market clearing for DC power networks with carbon-aware load shifting.
//!
//! The crate is organised as a pipeline:
//!
//! * [`net`] — network data model (buses, generators, lines, loads),
//!   CSV ingestion and scenario configuration.
//! * [`lp`] — a dense two-phase revised simplex solver that exposes the
//!   optimal basis and dual values, which downstream sensitivity analysis
//!   relies on.
//! * [`dcopf`] — DC optimal power flow built on [`lp`], with cost,
//!   carbon-priced, and emission-only objectives.
//! * [`emissions`] — locational marginal carbon emissions (LMCE) derived
//!   from the optimal basis, plus regional average intensities.
//! * [`shifting`] — three geographical load-shifting models: signal-driven
//!   shifting by flexible consumers (M1), carbon-priced clearing (M2), and
//!   co-optimised clearing of flexibility bids (M3).
//! * [`report`] — experiment harness producing deterministic comparison
//!   reports across models and objectives.

pub mod dcopf;
pub mod emissions;
pub mod lp;
pub mod net;
pub mod report;
pub mod shifting;
pub mod tol;
