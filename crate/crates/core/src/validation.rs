//! Closed-form vs Monte Carlo oracle comparison sweeps, the machinery behind
//! `validate-prob`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{EncounterLog, RelayProfile, RelaySet};
use crate::oracle::{oracle_actual, oracle_setting};
use crate::seeds::{derive_seed, stream_rng};
use crate::success::{
    p_actual, p_full, p_none, p_partial_anon, p_partial_id, AnonVariant, Knowledge,
};

/// One closed-form/oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbValidationRow {
    /// F, P+, P-, N, or `actual`.
    pub setting: String,
    pub n_relays: usize,
    /// 1-based encounter position of the estimating relay.
    pub n: usize,
    pub s: f64,
    pub closed_form: f64,
    pub oracle_mean: f64,
    pub oracle_se: f64,
    pub z: f64,
    pub within_3se: bool,
    /// The unnormalized count-only evaluator, recorded on P- rows so the
    /// normalization discrepancy stays visible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anon_as_written: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbValidationReport {
    pub n_relays: usize,
    pub draws: u64,
    pub samples: u64,
    pub seed: u64,
    pub rate_range: (f64, f64),
    pub time_range: (f64, f64),
    pub rows: Vec<ProbValidationRow>,
    pub all_within_3se: bool,
    pub max_z: f64,
}

/// Draws random rate/time instances and checks every setting's closed form
/// (plus the all-times win probability) against its conditional oracle.
pub fn validate_probabilities(
    n_relays: usize,
    draws: u64,
    samples: u64,
    seed: u64,
    rate_range: (f64, f64),
    time_range: (f64, f64),
) -> Result<ProbValidationReport> {
    let mut rows = Vec::with_capacity(draws as usize * 5);
    for draw in 0..draws {
        let mut rng = stream_rng(seed, draw);
        let uniform = |rng: &mut rand_chacha::ChaCha12Rng, (lo, hi): (f64, f64)| {
            lo + (hi - lo) * rng.gen::<f64>()
        };
        let profiles: Vec<RelayProfile> = (0..n_relays)
            .map(|i| {
                RelayProfile::exponential(
                    format!("r{}", i + 1),
                    uniform(&mut rng, rate_range),
                    uniform(&mut rng, rate_range),
                )
            })
            .collect();
        let set = RelaySet::new(profiles)?;

        // Random full encounter pattern: shuffled relays on sorted times.
        let mut order: Vec<usize> = (0..n_relays).collect();
        for i in (1..n_relays).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut times: Vec<f64> = (0..n_relays)
            .map(|_| uniform(&mut rng, time_range))
            .collect();
        times.sort_by(f64::total_cmp);
        let log = EncounterLog::new(
            order.iter().copied().zip(times.iter().copied()).collect(),
            &set,
        )?;
        let n = rng.gen_range(1..=n_relays);
        let s_n = log.times()[n - 1];
        let cand = log.relays()[n - 1];
        let prior: Vec<usize> = log.relays()[..n - 1].to_vec();

        let oracle_seed = |row: u64| derive_seed(seed, draw * 8 + row + 1);

        // Full information.
        let closed = p_full(&set, &log, n)?;
        let est = oracle_setting(
            &set,
            &Knowledge::Full {
                log: log.clone(),
                n,
            },
            samples,
            oracle_seed(0),
        )?;
        rows.push(row("F", n_relays, n, s_n, closed, est.mean, est.std_error, samples, None));

        // Partial with identities.
        let closed = p_partial_id(&set, s_n, cand, &prior)?;
        let est = oracle_setting(
            &set,
            &Knowledge::PartialWithIdentities {
                s_n,
                candidate: cand,
                prior: prior.clone(),
            },
            samples,
            oracle_seed(1),
        )?;
        rows.push(row("P+", n_relays, n, s_n, closed, est.mean, est.std_error, samples, None));

        // Partial without identities: normalized is the tested evaluator,
        // the as-written value rides along for the report.
        let closed = p_partial_anon(&set, s_n, cand, n - 1, AnonVariant::Normalized)?;
        let as_written = p_partial_anon(&set, s_n, cand, n - 1, AnonVariant::AsWritten)?;
        let est = oracle_setting(
            &set,
            &Knowledge::PartialWithoutIdentities {
                s_n,
                candidate: cand,
                prior_count: n - 1,
            },
            samples,
            oracle_seed(2),
        )?;
        rows.push(row(
            "P-",
            n_relays,
            n,
            s_n,
            closed,
            est.mean,
            est.std_error,
            samples,
            Some(as_written),
        ));

        // No information.
        let closed = p_none(&set, s_n, cand)?;
        let est = oracle_setting(
            &set,
            &Knowledge::NoInformation { s: s_n, candidate: cand },
            samples,
            oracle_seed(3),
        )?;
        rows.push(row("N", n_relays, n, s_n, closed, est.mean, est.std_error, samples, None));

        // All-times win probability.
        let closed = p_actual(&set, &log, n)?;
        let est = oracle_actual(&set, &log, n, samples, oracle_seed(4))?;
        rows.push(row(
            "actual",
            n_relays,
            n,
            s_n,
            closed,
            est.mean,
            est.std_error,
            samples,
            None,
        ));
    }
    let max_z = rows.iter().map(|r| r.z).fold(0.0, f64::max);
    Ok(ProbValidationReport {
        n_relays,
        draws,
        samples,
        seed,
        rate_range,
        time_range,
        all_within_3se: rows.iter().all(|r| r.within_3se),
        max_z,
        rows,
    })
}

#[allow(clippy::too_many_arguments)]
fn row(
    setting: &str,
    n_relays: usize,
    n: usize,
    s: f64,
    closed_form: f64,
    oracle_mean: f64,
    oracle_se: f64,
    samples: u64,
    anon_as_written: Option<f64>,
) -> ProbValidationRow {
    // Wald SE degenerates when the estimate sits at 0 or 1 (rare-event
    // instances with zero observed wins); the score SE implied by the closed
    // form keeps the comparison meaningful there.
    let se_score = (closed_form.clamp(0.0, 1.0) * (1.0 - closed_form.clamp(0.0, 1.0))
        / samples as f64)
        .sqrt();
    let se = oracle_se.max(se_score).max(1e-12);
    let z = (closed_form - oracle_mean).abs() / se;
    ProbValidationRow {
        setting: setting.to_string(),
        n_relays,
        n,
        s,
        closed_form,
        oracle_mean,
        oracle_se,
        z,
        within_3se: z <= 3.0,
        anon_as_written,
    }
}
