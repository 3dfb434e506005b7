//! Domain types: relay profiles, cost parameters, encounter logs, and the
//! information-sharing settings. All types are immutable after construction.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::InterContactDistribution;
use crate::error::{Error, Result};

/// Relative tolerance for the invariant that `lambda`/`mu` equal the
/// reciprocal of the corresponding distribution mean.
const RATE_CONSISTENCY_TOL: f64 = 1e-3;

/// A relay's identity and its contact processes with the source and the
/// destination. `lambda` and `mu` are the exponential-assumption rates
/// (reciprocal mean inter-contact times) used for quoting even when the
/// distributions themselves are not exponential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayProfile {
    pub id: String,
    pub lambda: f64,
    pub mu: f64,
    pub source_dist: InterContactDistribution,
    pub dest_dist: InterContactDistribution,
}

impl RelayProfile {
    /// Exponential profile with matching rates and distributions.
    pub fn exponential(id: impl Into<String>, lambda: f64, mu: f64) -> Self {
        RelayProfile {
            id: id.into(),
            lambda,
            mu,
            source_dist: InterContactDistribution::Exponential { rate: lambda },
            dest_dist: InterContactDistribution::Exponential { rate: mu },
        }
    }

    fn validate(&self) -> Result<()> {
        for (which, rate, dist) in [
            ("source", self.lambda, &self.source_dist),
            ("destination", self.mu, &self.dest_dist),
        ] {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::NonPositiveRate {
                    id: self.id.clone(),
                    which,
                    value: rate,
                });
            }
            dist.validate()?;
            let mean = dist.mean();
            if ((1.0 / rate) - mean).abs() > RATE_CONSISTENCY_TOL * mean {
                return Err(Error::InconsistentRate {
                    id: self.id.clone(),
                    which,
                    rate,
                    dist_mean: mean,
                });
            }
        }
        Ok(())
    }
}

/// A validated, immutable collection of relay profiles with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaySet {
    profiles: Vec<RelayProfile>,
    index: HashMap<String, usize>,
}

impl RelaySet {
    /// Validates all profile invariants and id uniqueness. An empty set is
    /// allowed (a degenerate experiment where every message fails).
    pub fn new(profiles: Vec<RelayProfile>) -> Result<Self> {
        let mut index = HashMap::with_capacity(profiles.len());
        for (i, p) in profiles.iter().enumerate() {
            p.validate()?;
            if index.insert(p.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(p.id.clone()));
            }
        }
        Ok(RelaySet { profiles, index })
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn profiles(&self) -> &[RelayProfile] {
        &self.profiles
    }

    pub fn profile(&self, idx: usize) -> &RelayProfile {
        &self.profiles[idx]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownRelay(id.to_string()))
    }

    pub fn lambda(&self, idx: usize) -> f64 {
        self.profiles[idx].lambda
    }

    pub fn mu(&self, idx: usize) -> f64 {
        self.profiles[idx].mu
    }

    /// Loads the canonical experiment-input format: a JSON array of
    /// `{id, lambda, mu, source_dist, dest_dist}` objects.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let profiles: Vec<RelayProfile> = serde_json::from_str(s)?;
        RelaySet::new(profiles)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        RelaySet::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.profiles)?)
    }
}

/// Validates a list of profiles and wraps them into a `RelaySet`.
pub fn validate_profiles(profiles: Vec<RelayProfile>) -> Result<RelaySet> {
    RelaySet::new(profiles)
}

/// Energy/storage cost parameters. Units: cost units, with `c_s` per hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Delivery (transmission) cost, paid on a successful hand-off.
    pub c_d: f64,
    /// Reception cost, paid whenever a relay accepts a copy.
    pub c_r: f64,
    /// Storage cost per unit time while carrying a copy.
    pub c_s: f64,
}

impl CostParams {
    pub fn new(c_d: f64, c_r: f64, c_s: f64) -> Result<Self> {
        for (name, v) in [("c_d", c_d), ("c_r", c_r), ("c_s", c_s)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::ConfigError(format!(
                    "cost {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(CostParams { c_d, c_r, c_s })
    }

    /// Base cost `c_r + c_s * E[T_d]` for a relay with the given mean
    /// residual destination inter-contact time.
    pub fn base_cost(&self, mean_residual_dest: f64) -> RelayBaseCost {
        RelayBaseCost {
            value: self.c_r + self.c_s * mean_residual_dest,
        }
    }

    /// Base cost under the exponential quoting assumption, where the
    /// residual mean equals `1/mu`.
    pub fn quoting_base_cost(&self, mu: f64) -> RelayBaseCost {
        self.base_cost(1.0 / mu)
    }
}

/// The per-relay cost of accepting and carrying a copy until the next
/// destination contact: `c_r + c_s * E[T_d]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayBaseCost {
    pub value: f64,
}

/// What the source reveals to a relay at hand-off time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoSetting {
    /// Times and identities of all prior hand-offs.
    Full,
    /// Number and identities of prior holders, but not their times.
    PartialWithIdentities,
    /// Only the number of prior holders.
    PartialWithoutIdentities,
    /// Nothing beyond the relay's own meeting time.
    NoInformation,
}

impl InfoSetting {
    pub const ALL: [InfoSetting; 4] = [
        InfoSetting::Full,
        InfoSetting::PartialWithIdentities,
        InfoSetting::PartialWithoutIdentities,
        InfoSetting::NoInformation,
    ];

    /// Short label used in reports and figures: F, P+, P-, N.
    pub fn label(&self) -> &'static str {
        match self {
            InfoSetting::Full => "F",
            InfoSetting::PartialWithIdentities => "P+",
            InfoSetting::PartialWithoutIdentities => "P-",
            InfoSetting::NoInformation => "N",
        }
    }
}

impl fmt::Display for InfoSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for InfoSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f" | "full" => Ok(InfoSetting::Full),
            "p+" | "partial+" | "partial_with_identities" => {
                Ok(InfoSetting::PartialWithIdentities)
            }
            "p-" | "partial-" | "partial_without_identities" => {
                Ok(InfoSetting::PartialWithoutIdentities)
            }
            "n" | "none" | "no_information" => Ok(InfoSetting::NoInformation),
            other => Err(Error::ConfigError(format!(
                "unknown information setting `{other}` (expected F, P+, P- or N)"
            ))),
        }
    }
}

/// The realized source-meeting times and relay order for one message.
/// Times are strictly increasing; simultaneous contacts are separated by the
/// smallest representable increment at construction time.
#[derive(Debug, Clone, PartialEq)]
pub struct EncounterLog {
    times: Vec<f64>,
    relays: Vec<usize>,
}

impl EncounterLog {
    /// Builds a log from (relay index, meeting time) pairs. Entries are
    /// sorted by time; exact ties are perturbed upward bit-by-bit so the
    /// sequence is strictly increasing.
    pub fn new(entries: Vec<(usize, f64)>, set: &RelaySet) -> Result<Self> {
        if entries.len() > set.len() {
            return Err(Error::InvalidLog(format!(
                "{} entries for a set of {} relays",
                entries.len(),
                set.len()
            )));
        }
        let mut seen = vec![false; set.len()];
        for &(idx, t) in &entries {
            if idx >= set.len() {
                return Err(Error::InvalidLog(format!("relay index {idx} out of range")));
            }
            if seen[idx] {
                return Err(Error::InvalidLog(format!(
                    "relay `{}` appears twice",
                    set.profile(idx).id
                )));
            }
            seen[idx] = true;
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::InvalidLog(format!("meeting time {t} is invalid")));
            }
        }
        let mut entries = entries;
        entries.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut times = Vec::with_capacity(entries.len());
        let mut relays = Vec::with_capacity(entries.len());
        for (idx, mut t) in entries {
            if let Some(&prev) = times.last() {
                if t <= prev {
                    t = f64::next_up(prev);
                }
            }
            times.push(t);
            relays.push(idx);
        }
        Ok(EncounterLog { times, relays })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Meeting times in encounter order.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Relay indices in encounter order.
    pub fn relays(&self) -> &[usize] {
        &self.relays
    }

    /// 1-based position of a relay in the encounter order.
    pub fn position_of(&self, relay: usize) -> Option<usize> {
        self.relays.iter().position(|&r| r == relay).map(|i| i + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::exponential;

    fn two_relays() -> RelaySet {
        RelaySet::new(vec![
            RelayProfile::exponential("a", 1.0, 1.0),
            RelayProfile::exponential("b", 2.0, 0.5),
        ])
        .unwrap()
    }

    #[test]
    fn valid_profiles_pass() {
        assert_eq!(two_relays().len(), 2);
    }

    #[test]
    fn duplicate_id_rejected() {
        let err = RelaySet::new(vec![
            RelayProfile::exponential("a", 1.0, 1.0),
            RelayProfile::exponential("a", 2.0, 0.5),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateId(_)));
    }

    #[test]
    fn zero_rate_rejected() {
        let err = RelaySet::new(vec![RelayProfile::exponential("a", 0.0, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveRate { .. }));
    }

    #[test]
    fn rate_must_match_distribution_mean() {
        let p = RelayProfile {
            id: "a".into(),
            lambda: 1.0,
            mu: 1.0,
            source_dist: exponential(2.0), // mean 0.5, but lambda says 1.0
            dest_dist: exponential(1.0),
        };
        let err = RelaySet::new(vec![p]).unwrap_err();
        assert!(matches!(err, Error::InconsistentRate { .. }));
    }

    #[test]
    fn encounter_log_sorts_and_breaks_ties() {
        let set = two_relays();
        let log = EncounterLog::new(vec![(1, 0.5), (0, 0.5)], &set).unwrap();
        assert_eq!(log.relays().len(), 2);
        assert!(log.times()[0] < log.times()[1]);
        assert!((log.times()[1] - log.times()[0]).abs() < 1e-12);
    }

    #[test]
    fn encounter_log_rejects_repeats() {
        let set = two_relays();
        assert!(EncounterLog::new(vec![(0, 0.1), (0, 0.2)], &set).is_err());
    }

    #[test]
    fn relay_set_json_round_trip() {
        let set = two_relays();
        let s = set.to_json_string().unwrap();
        let back = RelaySet::from_json_str(&s).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn info_setting_labels_parse() {
        for s in InfoSetting::ALL {
            assert_eq!(s.label().parse::<InfoSetting>().unwrap(), s);
        }
    }
}
