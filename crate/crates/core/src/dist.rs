//! Inter-contact time distributions.
//!
//! Four families cover the heterogeneous relay populations used throughout:
//! exponential, two-or-more phase hyperexponential, Weibull, and folded
//! normal. Moments are closed-form so that mean residual life is
//! deterministic; sampling goes through `rand_distr`.

use rand::Rng;
use rand_distr::{Distribution as _, Exp, Normal, Weibull as WeibullDist};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Distribution of the time between two consecutive contacts of a relay with
/// a fixed endpoint (source or destination). Times are in hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterContactDistribution {
    Exponential {
        rate: f64,
    },
    /// Mixture of exponentials: phase `i` is chosen with probability
    /// `probs[i]`, then the gap is Exponential(`rates[i]`).
    Hyperexponential {
        probs: Vec<f64>,
        rates: Vec<f64>,
    },
    Weibull {
        shape: f64,
        scale: f64,
    },
    /// |X| for X ~ Normal(location, scale^2). `location` and `scale` are the
    /// parameters of the underlying normal before folding.
    FoldedNormal {
        location: f64,
        scale: f64,
    },
}

impl InterContactDistribution {
    /// Checks parameter positivity and, for the hyperexponential, that the
    /// phase probabilities form a distribution.
    pub fn validate(&self) -> Result<()> {
        use InterContactDistribution::*;
        let pos = |v: f64| v.is_finite() && v > 0.0;
        match self {
            Exponential { rate } => {
                if !pos(*rate) {
                    return Err(Error::InvalidDistribution(format!(
                        "exponential rate must be positive, got {rate}"
                    )));
                }
            }
            Hyperexponential { probs, rates } => {
                if probs.is_empty() || probs.len() != rates.len() {
                    return Err(Error::InvalidDistribution(
                        "hyperexponential needs matching, nonempty probs and rates".into(),
                    ));
                }
                if probs.iter().any(|p| !pos(*p)) || rates.iter().any(|r| !pos(*r)) {
                    return Err(Error::InvalidDistribution(
                        "hyperexponential phase probabilities and rates must be positive".into(),
                    ));
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidDistribution(format!(
                        "hyperexponential phase probabilities sum to {sum}, expected 1"
                    )));
                }
            }
            Weibull { shape, scale } => {
                if !pos(*shape) || !pos(*scale) {
                    return Err(Error::InvalidDistribution(format!(
                        "weibull shape/scale must be positive, got {shape}/{scale}"
                    )));
                }
            }
            FoldedNormal { location, scale } => {
                if !pos(*location) || !pos(*scale) {
                    return Err(Error::InvalidDistribution(format!(
                        "folded normal location/scale must be positive, got {location}/{scale}"
                    )));
                }
            }
        }
        let m = self.mean();
        if !m.is_finite() || m <= 0.0 {
            return Err(Error::NonFiniteMoment(format!("mean = {m}")));
        }
        Ok(())
    }

    /// E[T].
    pub fn mean(&self) -> f64 {
        use InterContactDistribution::*;
        match self {
            Exponential { rate } => 1.0 / rate,
            Hyperexponential { probs, rates } => {
                probs.iter().zip(rates).map(|(p, r)| p / r).sum()
            }
            Weibull { shape, scale } => scale * gamma(1.0 + 1.0 / shape),
            FoldedNormal { location, scale } => {
                let z = location / scale;
                scale * (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * z * z).exp()
                    + location * erf(z / std::f64::consts::SQRT_2)
            }
        }
    }

    /// E[T^2]. Folding preserves the second moment of the underlying normal.
    pub fn second_moment(&self) -> f64 {
        use InterContactDistribution::*;
        match self {
            Exponential { rate } => 2.0 / (rate * rate),
            Hyperexponential { probs, rates } => {
                probs.iter().zip(rates).map(|(p, r)| 2.0 * p / (r * r)).sum()
            }
            Weibull { shape, scale } => scale * scale * gamma(1.0 + 2.0 / shape),
            FoldedNormal { location, scale } => location * location + scale * scale,
        }
    }

    /// Mean residual life E[T~^2] / (2 E[T~]): the expected forward
    /// recurrence time seen from a random inspection instant.
    pub fn mean_residual(&self) -> Result<f64> {
        let m1 = self.mean();
        let m2 = self.second_moment();
        if !m2.is_finite() || !m1.is_finite() || m1 <= 0.0 {
            return Err(Error::NonFiniteMoment(format!(
                "E[T] = {m1}, E[T^2] = {m2}"
            )));
        }
        Ok(m2 / (2.0 * m1))
    }

    /// Rescales time by `a > 0` (a gap of x becomes a gap of a*x).
    pub fn scale_time(&self, a: f64) -> Self {
        use InterContactDistribution::*;
        match self {
            Exponential { rate } => Exponential { rate: rate / a },
            Hyperexponential { probs, rates } => Hyperexponential {
                probs: probs.clone(),
                rates: rates.iter().map(|r| r / a).collect(),
            },
            Weibull { shape, scale } => Weibull {
                shape: *shape,
                scale: scale * a,
            },
            FoldedNormal { location, scale } => FoldedNormal {
                location: location * a,
                scale: scale * a,
            },
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self, InterContactDistribution::Exponential { .. })
    }

    /// One inter-contact gap.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        use InterContactDistribution::*;
        match self {
            Exponential { rate } => Exp::new(*rate).expect("validated rate").sample(rng),
            Hyperexponential { probs, rates } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut idx = rates.len() - 1;
                for (i, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        idx = i;
                        break;
                    }
                }
                Exp::new(rates[idx]).expect("validated rate").sample(rng)
            }
            Weibull { shape, scale } => WeibullDist::new(*scale, *shape)
                .expect("validated parameters")
                .sample(rng),
            FoldedNormal { location, scale } => Normal::new(*location, *scale)
                .expect("validated parameters")
                .sample(rng)
                .abs(),
        }
    }
}

/// Convenience constructor used throughout tests and presets.
pub fn exponential(rate: f64) -> InterContactDistribution {
    InterContactDistribution::Exponential { rate }
}
