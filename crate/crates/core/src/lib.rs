//! Reward mechanics for two-hop relaying in heterogeneous delay-tolerant
//! networks.
//!
//! A fixed source hands message copies to mobile relays it meets; the first
//! relay to reach the destination collects the reward promised to it at
//! hand-off time. The crate provides:
//!
//! * closed-form relay success probabilities under four information-sharing
//!   settings (full, identities-only, count-only, none) for exponential
//!   inter-contact times, plus independent Monte Carlo oracles for each;
//! * the quoting rule that makes a relay's expected net cost zero, and the
//!   setting-independent expected payment it implies for the source;
//! * TTL drop-timer tradeoff algebra (delivery failure vs storage gain);
//! * samplers for inter-contact and residual times over exponential,
//!   hyperexponential, Weibull, and folded-normal families;
//! * a seeded per-message simulation harness that replays the mechanism and
//!   checks the invariance of the source's long-run payment;
//! * a trace pipeline that detects proximity contacts in GPS position logs
//!   and fits per-relay contact rates.
//!
//! Times are hours throughout (trace ingestion converts from seconds).

pub mod dist;
pub mod error;
pub mod mobility;
pub mod model;
pub mod oracle;
pub mod presets;
pub mod reward;
pub mod seeds;
pub mod sim;
pub mod success;
pub mod trace;
pub mod ttl;
pub mod validation;

pub use dist::InterContactDistribution;
pub use error::{Error, Result};
pub use model::{
    validate_profiles, CostParams, EncounterLog, InfoSetting, RelayBaseCost, RelayProfile,
    RelaySet,
};
pub use oracle::{oracle_actual, oracle_setting, OracleEstimate};
pub use reward::{
    min_reward, net_cost, quote, theoretical_expected_payment, NetCost, RewardQuote,
};
pub use sim::{
    run, run_relay_breakeven, run_robustness, run_ttl, run_with_breakeven, BreakevenSeries,
    ExperimentConfig, SimulationReport,
};
pub use success::{
    p_actual, p_actual_all, p_full, p_none, p_partial_anon, p_partial_id, success_estimate,
    AnonVariant, Knowledge, SuccessEstimate,
};
pub use ttl::{epsilon_for_target, failure_prob, tradeoff_curve, ttl_report, TtlReport};
pub use validation::{validate_probabilities, ProbValidationReport, ProbValidationRow};
