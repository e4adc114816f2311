//! Quantifies how cyber intrusions propagating through AV2G communication
//! chains degrade power-grid generation adequacy.
//!
//! The crate combines four pieces:
//! - [`attack_graph`]: chain-rule products and noisy-OR aggregation over a
//!   DAG of compromise stages;
//! - [`fleet`]: generating units, forced outage rates and hourly load;
//! - [`copt`]: capacity outage probability tables with a cyber de-rating
//!   transform;
//! - [`adequacy`] and [`montecarlo`]: analytic LOLP/LOLE/EENS and their
//!   seeded Monte Carlo counterparts under a timed attack window.

pub mod adequacy;
pub mod attack_graph;
pub mod copt;
pub mod fleet;
pub mod montecarlo;

pub use adequacy::{
    eens, expected_lole_mixture, lole_daily_peak, lole_hourly, lolp_at_load, AdequacyError,
    LoleBreakdown, LoleMethod, StateContribution,
};
pub use attack_graph::{
    default_av2g_chain, AttackEdge, AttackGraph, AttackGraphError, AttackNode, Disruption,
};
pub use copt::{Copt, CoptError, CoptState, Rounding};
pub use fleet::{
    Fleet, FleetError, GeneratorUnit, LoadProfile, ProfileError, DAYS_PER_YEAR, HOURS_PER_DAY,
    HOURS_PER_YEAR,
};
pub use montecarlo::{
    availability_series, estimate_lole, lolp_series, run_monte_carlo, simulate_year,
    CyberScenario, HistogramBin, LoleEstimate, McConfig, McError, McOutputs, YearTrace,
};
