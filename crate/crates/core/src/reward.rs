//! Net-cost and reward algebra.
//!
//! A relay accepts a copy when the promised reward offsets its expected net
//! cost, which pins the minimum quote at `c_d + (c_r + c_s E[T_d]) / p`. The
//! source's expected per-message payment is `c_d + sum_i (c_r + c_s E[T_d^i])`
//! regardless of the information setting; the simulator verifies that
//! empirically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CostParams, InfoSetting, RelayBaseCost, RelaySet};
use crate::success::{success_estimate, AnonVariant, Knowledge, SuccessEstimate};

/// Expected net cost of accepting a copy, as estimated by the relay. May be
/// negative (the quote makes it exactly zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetCost {
    pub value: f64,
}

/// `c_r + c_s E[T_d] + (c_d - reward) p`.
pub fn net_cost(costs: &CostParams, mean_residual_dest: f64, p: f64, reward: f64) -> NetCost {
    NetCost {
        value: costs.c_r + costs.c_s * mean_residual_dest + (costs.c_d - reward) * p,
    }
}

/// Minimum reward making the relay's expected net cost zero:
/// `c_d + base / p`. Fails when `p = 0`: no finite reward would be accepted,
/// so the source skips the relay.
pub fn min_reward(costs: &CostParams, base: RelayBaseCost, p: f64) -> Result<f64> {
    if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
        return Err(Error::DomainError(format!(
            "success probability must lie in [0,1], got {p}"
        )));
    }
    if p == 0.0 {
        return Err(Error::ZeroSuccessProbability);
    }
    Ok(costs.c_d + base.value / p)
}

/// The source's theoretical expected per-message payment,
/// `c_d + sum_i (c_r + c_s / mu_i)`, identical under all four settings.
/// Residual destination times enter through the quoting rates `mu_i`.
pub fn theoretical_expected_payment(costs: &CostParams, set: &RelaySet) -> f64 {
    costs.c_d
        + set
            .profiles()
            .iter()
            .map(|p| costs.quoting_base_cost(p.mu).value)
            .sum::<f64>()
}

/// A promised reward, frozen at encounter time together with the success
/// estimate that produced it. Later information never revises it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardQuote {
    pub relay_id: String,
    pub setting: InfoSetting,
    pub s_n: f64,
    pub success_estimate: SuccessEstimate,
    pub reward: f64,
}

/// Composes the setting-matched success probability with the minimum-reward
/// rule. The base cost uses the exponential quoting assumption
/// (`E[T_d] = 1/mu`), matching how rates are carried in the profiles.
pub fn quote(
    set: &RelaySet,
    costs: &CostParams,
    knowledge: &Knowledge,
    variant: AnonVariant,
) -> Result<RewardQuote> {
    let estimate = success_estimate(set, knowledge, variant)?;
    let cand = knowledge.candidate(set)?;
    let base = costs.quoting_base_cost(set.mu(cand));
    let reward = min_reward(costs, base, estimate.value)?;
    Ok(RewardQuote {
        relay_id: set.profile(cand).id.clone(),
        setting: estimate.setting,
        s_n: estimate.s_n,
        success_estimate: estimate,
        reward,
    })
}
