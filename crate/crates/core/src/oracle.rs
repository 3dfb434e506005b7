//! Brute-force Monte Carlo estimators of the success probabilities.
//!
//! These are the ground truth the closed forms are checked against: every
//! quantity the setting hides from the relay is sampled from its conditional
//! law, the delivery race is simulated, and the win fraction is returned.
//! Batches use derived sub-seeds and an integer win-count reduction, so the
//! estimate is bit-identical regardless of thread scheduling.

use rand::Rng;
use rand_distr::{Distribution as _, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EncounterLog, RelaySet};
use crate::seeds::stream_rng;
use crate::success::{Knowledge, MAX_ENUMERATED_RELAYS};

const BATCH: u64 = 1 << 14;

/// A Bernoulli Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl OracleEstimate {
    fn from_wins(wins: u64, samples: u64, seed: u64) -> Self {
        let mean = wins as f64 / samples as f64;
        OracleEstimate {
            mean,
            std_error: (mean * (1.0 - mean) / samples as f64).sqrt(),
            samples,
            seed,
        }
    }

    /// |closed - mean| in units of the standard error (capped at a tiny
    /// absolute floor so degenerate 0/1 estimates stay comparable).
    pub fn z_score(&self, closed_form: f64) -> f64 {
        (closed_form - self.mean).abs() / self.std_error.max(1e-12)
    }
}

fn run_batches<F>(samples: u64, seed: u64, per_sample: F) -> OracleEstimate
where
    F: Fn(&mut rand_chacha::ChaCha12Rng) -> bool + Sync,
{
    let batches = samples.div_ceil(BATCH);
    let wins: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b);
            let count = BATCH.min(samples - b * BATCH);
            let mut w = 0u64;
            for _ in 0..count {
                if per_sample(&mut rng) {
                    w += 1;
                }
            }
            w
        })
        .sum();
    OracleEstimate::from_wins(wins, samples, seed)
}

fn exp_draw<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    Exp::new(rate).expect("positive rate").sample(rng)
}

/// Arrival time of a relay conditioned to have met the source before `s`,
/// by inverse CDF of the truncated exponential (exact, no rejection).
fn truncated_exp_draw<R: Rng + ?Sized>(rng: &mut R, rate: f64, s: f64) -> f64 {
    let u: f64 = rng.gen();
    let cap = -(-rate * s).exp_m1(); // 1 - e^{-rate s}
    -(-u * cap).ln_1p() / rate
}

/// Estimates the win probability of the relay at position `n` (1-based) of a
/// complete log: each holder's delivery time is its meeting time plus an
/// exponential destination delay.
pub fn oracle_actual(
    set: &RelaySet,
    log: &EncounterLog,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<OracleEstimate> {
    if log.len() != set.len() {
        return Err(Error::IncompleteLog {
            got: log.len(),
            expected: set.len(),
        });
    }
    if n == 0 || n > log.len() {
        return Err(Error::IndexOutOfRange { n, len: log.len() });
    }
    if samples == 0 {
        return Err(Error::ConfigError("samples must be >= 1".into()));
    }
    let times = log.times().to_vec();
    let mus: Vec<f64> = log.relays().iter().map(|&r| set.mu(r)).collect();
    let target = n - 1;
    Ok(run_batches(samples, seed, move |rng| {
        let own = times[target] + exp_draw(rng, mus[target]);
        for i in 0..times.len() {
            if i != target && times[i] + exp_draw(rng, mus[i]) <= own {
                return false;
            }
        }
        true
    }))
}

/// Estimates the success probability of a relay given exactly the knowledge
/// its information setting grants, sampling everything else conditionally:
/// prior meeting times from truncated exponentials, unknown prior identities
/// from their arrival posterior, future meetings unconditioned.
pub fn oracle_setting(
    set: &RelaySet,
    knowledge: &Knowledge,
    samples: u64,
    seed: u64,
) -> Result<OracleEstimate> {
    if samples == 0 {
        return Err(Error::ConfigError("samples must be >= 1".into()));
    }
    let cand = knowledge.candidate(set)?;
    let mu_c = set.mu(cand);

    match knowledge {
        Knowledge::Full { log, n } => {
            let n = *n;
            let prior: Vec<(f64, f64)> = (0..n - 1)
                .map(|k| (log.times()[k], set.mu(log.relays()[k])))
                .collect();
            let s_n = log.times()[n - 1];
            let mut met = vec![false; set.len()];
            for &r in &log.relays()[..n] {
                met[r] = true;
            }
            let unmet: Vec<(f64, f64)> = (0..set.len())
                .filter(|&i| !met[i])
                .map(|i| (set.lambda(i), set.mu(i)))
                .collect();
            Ok(run_batches(samples, seed, move |rng| {
                let own = s_n + exp_draw(rng, mu_c);
                for &(s_k, mu_k) in &prior {
                    if s_k + exp_draw(rng, mu_k) <= own {
                        return false;
                    }
                }
                for &(lam, mu) in &unmet {
                    if s_n + exp_draw(rng, lam) + exp_draw(rng, mu) <= own {
                        return false;
                    }
                }
                true
            }))
        }
        Knowledge::PartialWithIdentities {
            s_n,
            candidate: _,
            prior,
        } => {
            let s_n = *s_n;
            if s_n == 0.0 && !prior.is_empty() {
                return Err(Error::DegenerateTime(s_n));
            }
            let mut seen = vec![false; set.len()];
            seen[cand] = true;
            for &p in prior {
                seen[p] = true;
            }
            let prior_rates: Vec<(f64, f64)> =
                prior.iter().map(|&p| (set.lambda(p), set.mu(p))).collect();
            let unmet: Vec<(f64, f64)> = (0..set.len())
                .filter(|&i| !seen[i])
                .map(|i| (set.lambda(i), set.mu(i)))
                .collect();
            Ok(run_batches(samples, seed, move |rng| {
                let own = s_n + exp_draw(rng, mu_c);
                for &(lam, mu) in &prior_rates {
                    let arrival = truncated_exp_draw(rng, lam, s_n);
                    if arrival + exp_draw(rng, mu) <= own {
                        return false;
                    }
                }
                for &(lam, mu) in &unmet {
                    if s_n + exp_draw(rng, lam) + exp_draw(rng, mu) <= own {
                        return false;
                    }
                }
                true
            }))
        }
        Knowledge::PartialWithoutIdentities {
            s_n,
            candidate: _,
            prior_count,
        } => {
            let s_n = *s_n;
            let m = *prior_count;
            if s_n == 0.0 && m > 0 {
                return Err(Error::DegenerateTime(s_n));
            }
            if set.len() > MAX_ENUMERATED_RELAYS {
                return Err(Error::TooManyRelays(set.len(), MAX_ENUMERATED_RELAYS));
            }
            let others: Vec<usize> = (0..set.len()).filter(|&i| i != cand).collect();
            if m > others.len() {
                return Err(Error::IndexOutOfRange {
                    n: m + 1,
                    len: set.len(),
                });
            }
            // Posterior over which m relays arrived before s_n: weight of a
            // subset S is prod_{S} (1-e^{-lambda s}) prod_{rest} e^{-lambda s}.
            let arr: Vec<f64> = others
                .iter()
                .map(|&i| -(-set.lambda(i) * s_n).exp_m1())
                .collect();
            let na: Vec<f64> = others
                .iter()
                .map(|&i| (-set.lambda(i) * s_n).exp())
                .collect();
            let mut subsets: Vec<u32> = Vec::new();
            let mut cum: Vec<f64> = Vec::new();
            let mut total = 0.0f64;
            enumerate_size_subsets(others.len(), m, &mut |mask| {
                let mut w = 1.0;
                for (b, (a, nb)) in arr.iter().zip(&na).enumerate() {
                    w *= if mask >> b & 1 == 1 { *a } else { *nb };
                }
                total += w;
                subsets.push(mask as u32);
                cum.push(total);
            });
            if total <= 0.0 {
                // The observed count is numerically impossible at this s_n.
                return Ok(OracleEstimate::from_wins(0, samples, seed));
            }
            let rates: Vec<(f64, f64)> = others
                .iter()
                .map(|&i| (set.lambda(i), set.mu(i)))
                .collect();
            Ok(run_batches(samples, seed, move |rng| {
                let u: f64 = rng.gen::<f64>() * total;
                let pos = cum.partition_point(|&c| c < u).min(subsets.len() - 1);
                let mask = subsets[pos];
                let own = s_n + exp_draw(rng, mu_c);
                for (b, &(lam, mu)) in rates.iter().enumerate() {
                    let delivery = if mask >> b & 1 == 1 {
                        truncated_exp_draw(rng, lam, s_n) + exp_draw(rng, mu)
                    } else {
                        s_n + exp_draw(rng, lam) + exp_draw(rng, mu)
                    };
                    if delivery <= own {
                        return false;
                    }
                }
                true
            }))
        }
        Knowledge::NoInformation { s, candidate: _ } => {
            let s = *s;
            let rates: Vec<(f64, f64)> = (0..set.len())
                .filter(|&i| i != cand)
                .map(|i| (set.lambda(i), set.mu(i)))
                .collect();
            Ok(run_batches(samples, seed, move |rng| {
                let own = s + exp_draw(rng, mu_c);
                for &(lam, mu) in &rates {
                    if exp_draw(rng, lam) + exp_draw(rng, mu) <= own {
                        return false;
                    }
                }
                true
            }))
        }
    }
}

/// Visits every subset of `{0..n}` with exactly `size` members, in
/// lexicographic order of the member lists.
fn enumerate_size_subsets(n: usize, size: usize, f: &mut impl FnMut(usize)) {
    fn rec(start: usize, n: usize, left: usize, mask: usize, f: &mut impl FnMut(usize)) {
        if left == 0 {
            f(mask);
            return;
        }
        for i in start..=n - left {
            rec(i + 1, n, left - 1, mask | (1 << i), f);
        }
    }
    if size > n {
        return;
    }
    rec(0, n, size, 0, f);
}
