//! TTL tradeoff algebra.
//!
//! Each copy carries an exponential drop timer at rate `epsilon * mu_i`,
//! started at reception. Dropping trades storage for delivery probability:
//! the miss probability is `D = (eps/(1+eps))^N`, the per-relay storage gain
//! is `G = eps/(1+eps)`, and neither depends on the contact rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RelaySet;

/// Probability that no relay delivers before its timer fires:
/// `(eps/(1+eps))^N`.
pub fn failure_prob(epsilon: f64, n: usize) -> f64 {
    debug_assert!(epsilon > 0.0 && n >= 1);
    (epsilon / (1.0 + epsilon)).powi(n as i32)
}

/// Timer-rate multiplier achieving a target failure probability `d`:
/// `d^{1/N} / (1 - d^{1/N})`. Round-trips with [`failure_prob`].
pub fn epsilon_for_target(d: f64, n: usize) -> Result<f64> {
    if !(d.is_finite() && 0.0 < d && d < 1.0) {
        return Err(Error::DomainError(format!(
            "target failure probability must lie in (0,1), got {d}"
        )));
    }
    if n == 0 {
        return Err(Error::DomainError("relay count must be >= 1".into()));
    }
    let root = d.powf(1.0 / n as f64);
    Ok(root / (1.0 - root))
}

/// Failure probability along a storage-gain grid: `D(N, G) = G^N`.
pub fn tradeoff_curve(n: usize, grid: &[f64]) -> Vec<(f64, f64)> {
    grid.iter()
        .map(|&g| (g, g.powi(n as i32)))
        .collect()
}

/// Closed-form summary of a TTL configuration for a relay set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtlReport {
    pub epsilon: f64,
    pub n: usize,
    /// `(eps/(1+eps))^N`.
    pub failure_prob: f64,
    /// `eps/(1+eps)`, the relative storage-cost gain.
    pub gain: f64,
    /// Per-relay mean holding-time reduction `G * E[T_d^i]` (hours), in
    /// relay-set order.
    pub rho: Vec<f64>,
}

pub fn ttl_report(set: &RelaySet, epsilon: f64) -> Result<TtlReport> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::DomainError(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if set.is_empty() {
        return Err(Error::DomainError("relay set is empty".into()));
    }
    let gain = epsilon / (1.0 + epsilon);
    Ok(TtlReport {
        epsilon,
        n: set.len(),
        failure_prob: failure_prob(epsilon, set.len()),
        gain,
        rho: set.profiles().iter().map(|p| gain / p.mu).collect(),
    })
}
