//! Built-in relay populations used by the validation experiments.
//!
//! Rates are per hour. The heterogeneous ten-relay set exists in two
//! flavors: all-exponential, and a mixed-family version where the same rates
//! are carried by hyperexponential, Weibull, and folded-normal inter-contact
//! distributions (the rate stays the reciprocal of the distribution mean).
//! The taxi fleet carries rates fitted from city taxi GPS traces against a
//! fixed source/destination pair.

use statrs::function::gamma::gamma;

use crate::dist::InterContactDistribution;
use crate::model::RelayProfile;

/// (lambda, mu) per relay of the heterogeneous ten-relay benchmark.
pub const HETEROGENEOUS_TEN_RATES: [(f64, f64); 10] = [
    (0.6530, 0.7945),
    (0.5296, 0.2824),
    (0.6714, 0.6704),
    (0.6685, 0.6670),
    (0.2483, 0.2492),
    (0.1647, 0.1996),
    (0.2500, 0.2000),
    (0.1999, 0.1991),
    (0.2002, 0.2015),
    (0.1991, 0.2005),
];

/// (lambda, mu) per taxi of the trace-fitted fleet.
pub const TAXI_TEN_RATES: [(f64, f64); 10] = [
    (0.0613, 0.0298),
    (0.0423, 0.0345),
    (0.0616, 0.0382),
    (0.0340, 0.0370),
    (0.0842, 0.0510),
    (0.0691, 0.0513),
    (0.0731, 0.0445),
    (0.0596, 0.0309),
    (0.0452, 0.0322),
    (0.1095, 0.0252),
];

/// Balanced two-phase hyperexponential with mean `1/rate` (phase rates 2r
/// and 2r/3, squared coefficient of variation 1.5).
pub fn hyperexponential_for_rate(rate: f64) -> InterContactDistribution {
    InterContactDistribution::Hyperexponential {
        probs: vec![0.5, 0.5],
        rates: vec![2.0 * rate, 2.0 * rate / 3.0],
    }
}

/// Heavy-tailed Weibull (shape 0.7) with mean `1/rate`.
pub fn weibull_for_rate(rate: f64) -> InterContactDistribution {
    let shape = 0.7;
    InterContactDistribution::Weibull {
        shape,
        scale: 1.0 / (rate * gamma(1.0 + 1.0 / shape)),
    }
}

/// Folded normal with sigma = location/2 and mean `1/rate`. The folded mean
/// scales linearly with the location at fixed sigma/location, so the
/// location solves in closed form from the unit-location mean.
pub fn folded_normal_for_rate(rate: f64) -> InterContactDistribution {
    let unit = InterContactDistribution::FoldedNormal {
        location: 1.0,
        scale: 0.5,
    };
    let location = 1.0 / (rate * unit.mean());
    InterContactDistribution::FoldedNormal {
        location,
        scale: location / 2.0,
    }
}

/// Ten heterogeneous relays, exponential inter-contact times.
pub fn heterogeneous_exponential_ten() -> Vec<RelayProfile> {
    HETEROGENEOUS_TEN_RATES
        .iter()
        .enumerate()
        .map(|(i, &(l, m))| RelayProfile::exponential(format!("r{}", i + 1), l, m))
        .collect()
}

/// Ten heterogeneous relays with mixed families: two exponential, two
/// hyperexponential, three Weibull, three folded normal. The profile rates
/// remain the reciprocal distribution means used for exponential-assumption
/// quoting.
pub fn heterogeneous_mixed_ten() -> Vec<RelayProfile> {
    let family = |i: usize, rate: f64| -> InterContactDistribution {
        match i {
            0 | 1 => InterContactDistribution::Exponential { rate },
            2 | 3 => hyperexponential_for_rate(rate),
            4 | 5 | 6 => weibull_for_rate(rate),
            _ => folded_normal_for_rate(rate),
        }
    };
    HETEROGENEOUS_TEN_RATES
        .iter()
        .enumerate()
        .map(|(i, &(l, m))| RelayProfile {
            id: format!("r{}", i + 1),
            lambda: l,
            mu: m,
            source_dist: family(i, l),
            dest_dist: family(i, m),
        })
        .collect()
}

/// Ten taxis with exponential-assumption rates from trace fitting.
pub fn taxi_fleet_ten() -> Vec<RelayProfile> {
    TAXI_TEN_RATES
        .iter()
        .enumerate()
        .map(|(i, &(l, m))| RelayProfile::exponential(format!("t{}", i + 1), l, m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RelaySet;

    #[test]
    fn presets_pass_validation() {
        RelaySet::new(heterogeneous_exponential_ten()).unwrap();
        RelaySet::new(heterogeneous_mixed_ten()).unwrap();
        RelaySet::new(taxi_fleet_ten()).unwrap();
    }

    #[test]
    fn mixed_families_keep_rate_equal_to_reciprocal_mean() {
        for p in heterogeneous_mixed_ten() {
            let m_s = p.source_dist.mean();
            let m_d = p.dest_dist.mean();
            assert!((p.lambda * m_s - 1.0).abs() < 1e-9, "{}", p.id);
            assert!((p.mu * m_d - 1.0).abs() < 1e-9, "{}", p.id);
        }
    }

    #[test]
    fn mixed_set_is_actually_mixed() {
        let kinds: Vec<bool> = heterogeneous_mixed_ten()
            .iter()
            .map(|p| p.source_dist.is_exponential())
            .collect();
        assert!(kinds.iter().any(|&k| k) && kinds.iter().any(|&k| !k));
    }
}
