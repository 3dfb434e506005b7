//! Closed-form success probabilities under exponential inter-contact times.
//!
//! A relay that accepts a copy at its source contact wins only if it is the
//! first among all (current and future) holders to meet the destination.
//! Each information setting grants the relay a different view of the prior
//! hand-offs, so its estimate conditions on different things:
//!
//! * `F`  — prior holders' identities and times are known;
//! * `P+` — prior holders' identities are known, their times are not;
//! * `P-` — only the number of prior holders is known;
//! * `N`  — only the relay's own meeting time is known.
//!
//! All estimates share the same "race" tail: from the quote instant onward
//! the system is memoryless, with current holders delivering at their `mu`
//! rates and not-yet-met relays joining at their `lambda` rates. The race is
//! evaluated exactly by a recursion over subsets of the not-yet-met relays;
//! for exchangeable relays it reduces to the familiar nested product-sum
//! form, and in general it is the value the Monte Carlo oracle converges to.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EncounterLog, InfoSetting, RelaySet};

/// Hard cap on subset enumeration (and race-table width). `C(19, 9)` terms
/// and a 2^20-entry table are fine; beyond this the oracle should be used.
pub const MAX_ENUMERATED_RELAYS: usize = 20;

/// Relative tolerance for switching `psi` to its equal-rates branch.
const RATE_EQUALITY_TOL: f64 = 1e-9;

/// A success-probability estimate together with the context it was computed
/// in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub setting: InfoSetting,
    /// 1-based position in the encounter order (the count of holders
    /// including the estimating relay), where the setting reveals it.
    pub relay_index_n: usize,
    /// The relay's own source-meeting time.
    pub s_n: f64,
    pub value: f64,
}

/// Which evaluator to use for the `P-` setting. The count-only estimate sums
/// over candidate prior-holder subsets; `Normalized` divides by the total
/// posterior weight of the observed count (the variant that matches the
/// Monte Carlo oracle and preserves the first-relay boundary identity),
/// `AsWritten` keeps the raw joint-probability sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnonVariant {
    #[default]
    Normalized,
    AsWritten,
}

/// The information available to a relay at quote time, by setting.
#[derive(Debug, Clone, PartialEq)]
pub enum Knowledge {
    /// The encounter log up to and including the candidate at position `n`.
    Full { log: EncounterLog, n: usize },
    PartialWithIdentities {
        s_n: f64,
        candidate: usize,
        prior: Vec<usize>,
    },
    PartialWithoutIdentities {
        s_n: f64,
        candidate: usize,
        prior_count: usize,
    },
    NoInformation { s: f64, candidate: usize },
}

impl Knowledge {
    pub fn setting(&self) -> InfoSetting {
        match self {
            Knowledge::Full { .. } => InfoSetting::Full,
            Knowledge::PartialWithIdentities { .. } => InfoSetting::PartialWithIdentities,
            Knowledge::PartialWithoutIdentities { .. } => InfoSetting::PartialWithoutIdentities,
            Knowledge::NoInformation { .. } => InfoSetting::NoInformation,
        }
    }

    /// 1-based holder count as seen by the relay (N/A for the no-information
    /// setting, which reports 1).
    pub fn position(&self) -> usize {
        match self {
            Knowledge::Full { n, .. } => *n,
            Knowledge::PartialWithIdentities { prior, .. } => prior.len() + 1,
            Knowledge::PartialWithoutIdentities { prior_count, .. } => prior_count + 1,
            Knowledge::NoInformation { .. } => 1,
        }
    }

    pub fn candidate(&self, set: &RelaySet) -> Result<usize> {
        match self {
            Knowledge::Full { log, n } => {
                if *n == 0 || *n > log.len() {
                    return Err(Error::IndexOutOfRange {
                        n: *n,
                        len: log.len(),
                    });
                }
                Ok(log.relays()[*n - 1])
            }
            Knowledge::PartialWithIdentities { candidate, .. }
            | Knowledge::PartialWithoutIdentities { candidate, .. }
            | Knowledge::NoInformation { candidate, .. } => {
                check_relay(set, *candidate)?;
                Ok(*candidate)
            }
        }
    }

    pub fn meeting_time(&self) -> f64 {
        match self {
            Knowledge::Full { log, n } => log.times()[n.saturating_sub(1).min(log.len() - 1)],
            Knowledge::PartialWithIdentities { s_n, .. }
            | Knowledge::PartialWithoutIdentities { s_n, .. } => *s_n,
            Knowledge::NoInformation { s, .. } => *s,
        }
    }
}

fn check_relay(set: &RelaySet, idx: usize) -> Result<()> {
    if idx >= set.len() {
        return Err(Error::UnknownRelay(format!("#{idx}")));
    }
    Ok(())
}

fn check_time(s: f64) -> Result<()> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::DomainError(format!(
            "meeting time must be finite and >= 0, got {s}"
        )));
    }
    Ok(())
}

/// `psi(lambda, mu, s)`: the time-averaged non-delivery factor of a prior
/// holder whose arrival is an Exponential(lambda) conditioned below `s`,
/// excluding the leading `lambda` multiplier. Two branches depending on
/// whether the rates coincide; continuous across the switch.
pub fn psi(lambda: f64, mu: f64, s: f64) -> f64 {
    let denom = -(-lambda * s).exp_m1(); // 1 - e^{-lambda s}
    if (lambda - mu).abs() < RATE_EQUALITY_TOL * lambda.max(mu) {
        s * (-lambda * s).exp() / denom
    } else {
        // (e^{-mu s} - e^{-lambda s})/(lambda - mu), written via expm1 so the
        // near-equal-rates regime stays accurate.
        (-lambda * s).exp() * ((lambda - mu) * s).exp_m1() / ((lambda - mu) * denom)
    }
}

/// P(a prior holder has not delivered by `s` | it met the source before `s`)
/// = `lambda * psi`.
pub(crate) fn prior_survival(lambda: f64, mu: f64, s: f64) -> f64 {
    lambda * psi(lambda, mu, s)
}

/// P(a relay met the source before `s` AND has not delivered by `s`),
/// unconditioned: the joint factor used by the count-free settings.
fn joint_arrive_survive(lambda: f64, mu: f64, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    if (lambda - mu).abs() < RATE_EQUALITY_TOL * lambda.max(mu) {
        lambda * s * (-lambda * s).exp()
    } else {
        lambda * (-lambda * s).exp() * ((lambda - mu) * s).exp_m1() / (lambda - mu)
    }
}

/// Exact delivery-race win probabilities, indexed by the subset of relays
/// that have not yet met the source.
///
/// `table[mask]` = P(the candidate is the first holder to reach the
/// destination | unmet = relays of `mask`, holders = candidate + the fixed
/// prior holders + the unmet-complement), under memoryless dynamics where
/// unmet relay `b` joins at rate `lambda_b` and every holder delivers at its
/// `mu`. Entry `(1 << k) - 1` is the "nobody else has the message yet beyond
/// the priors" state.
fn race_table(cand_mu: f64, prior_mu_sum: f64, unmet: &[(f64, f64)]) -> Result<Vec<f64>> {
    let k = unmet.len();
    if k > MAX_ENUMERATED_RELAYS {
        return Err(Error::TooManyRelays(k, MAX_ENUMERATED_RELAYS));
    }
    let size = 1usize << k;
    let mut lam_sum = vec![0.0f64; size];
    let mut mu_sum = vec![0.0f64; size];
    let mut win = vec![0.0f64; size];
    let total_unmet_mu: f64 = unmet.iter().map(|u| u.1).sum();
    for mask in 0..size {
        if mask > 0 {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            lam_sum[mask] = lam_sum[rest] + unmet[low].0;
            mu_sum[mask] = mu_sum[rest] + unmet[low].1;
        }
        // Holders: candidate, priors, and unmet relays outside `mask`.
        let holder_mu = cand_mu + prior_mu_sum + (total_unmet_mu - mu_sum[mask]);
        let mut num = cand_mu;
        let mut m = mask;
        while m != 0 {
            let b = m.trailing_zeros() as usize;
            num += unmet[b].0 * win[mask & !(1usize << b)];
            m &= m - 1;
        }
        win[mask] = num / (lam_sum[mask] + holder_mu);
    }
    Ok(win)
}

/// Race win probability when the unmet set is fixed (no subset enumeration
/// needed afterwards).
fn race_win(cand_mu: f64, prior_mu_sum: f64, unmet: &[(f64, f64)]) -> Result<f64> {
    let table = race_table(cand_mu, prior_mu_sum, unmet)?;
    Ok(table[table.len() - 1])
}

fn rates_of(set: &RelaySet, idx: usize) -> (f64, f64) {
    (set.lambda(idx), set.mu(idx))
}

/// Full-information estimate for the relay at position `n` (1-based) of the
/// log: the probability that none of the prior holders has already delivered,
/// times the exact forward race. Relays beyond position `n` in the log are
/// ignored; the unmet set is the complement of the first `n` entries in the
/// full relay set.
pub fn p_full(set: &RelaySet, log: &EncounterLog, n: usize) -> Result<f64> {
    if n == 0 || n > log.len() {
        return Err(Error::IndexOutOfRange { n, len: log.len() });
    }
    let s_n = log.times()[n - 1];
    let cand = log.relays()[n - 1];
    let mut survival = 0.0f64;
    let mut prior_mu = 0.0f64;
    for k in 0..n - 1 {
        let mu_k = set.mu(log.relays()[k]);
        survival -= mu_k * (s_n - log.times()[k]);
        prior_mu += mu_k;
    }
    let mut met = vec![false; set.len()];
    for &r in &log.relays()[..n] {
        met[r] = true;
    }
    let unmet: Vec<(f64, f64)> = (0..set.len())
        .filter(|&i| !met[i])
        .map(|i| rates_of(set, i))
        .collect();
    Ok(survival.exp() * race_win(set.mu(cand), prior_mu, &unmet)?)
}

/// Partial-information (identities, no times) estimate: the candidate knows
/// which relays hold copies but not when they received them. Prior arrival
/// times are integrated out as truncated exponentials below `s_n`.
pub fn p_partial_id(set: &RelaySet, s_n: f64, candidate: usize, prior: &[usize]) -> Result<f64> {
    check_relay(set, candidate)?;
    check_time(s_n)?;
    if s_n == 0.0 && !prior.is_empty() {
        return Err(Error::DegenerateTime(s_n));
    }
    let mut seen = vec![false; set.len()];
    seen[candidate] = true;
    let mut survival = 1.0f64;
    let mut prior_mu = 0.0f64;
    for &p in prior {
        check_relay(set, p)?;
        if seen[p] {
            return Err(Error::InvalidLog(format!(
                "prior holder #{p} repeats or equals the candidate"
            )));
        }
        seen[p] = true;
        let (lam, mu) = rates_of(set, p);
        survival *= prior_survival(lam, mu, s_n);
        prior_mu += mu;
    }
    let unmet: Vec<(f64, f64)> = (0..set.len())
        .filter(|&i| !seen[i])
        .map(|i| rates_of(set, i))
        .collect();
    Ok(survival * race_win(set.mu(candidate), prior_mu, &unmet)?)
}

/// Count-only estimate: `prior_count` relays hold copies but the candidate
/// knows neither who they are nor when they received them. Sums over all
/// candidate prior subsets; see [`AnonVariant`] for the two evaluators.
pub fn p_partial_anon(
    set: &RelaySet,
    s_n: f64,
    candidate: usize,
    prior_count: usize,
    variant: AnonVariant,
) -> Result<f64> {
    check_relay(set, candidate)?;
    check_time(s_n)?;
    let n_relays = set.len();
    if n_relays > MAX_ENUMERATED_RELAYS {
        return Err(Error::TooManyRelays(n_relays, MAX_ENUMERATED_RELAYS));
    }
    if prior_count + 1 > n_relays {
        return Err(Error::IndexOutOfRange {
            n: prior_count + 1,
            len: n_relays,
        });
    }
    if s_n == 0.0 && prior_count > 0 {
        return Err(Error::DegenerateTime(s_n));
    }
    let others: Vec<usize> = (0..n_relays).filter(|&i| i != candidate).collect();
    let rates: Vec<(f64, f64)> = others.iter().map(|&i| rates_of(set, i)).collect();
    let win = race_table(set.mu(candidate), 0.0, &rates)?;

    // Per-relay factors at s_n: arrival probability, non-arrival probability
    // and conditional survival.
    let arr: Vec<f64> = rates.iter().map(|r| -(-r.0 * s_n).exp_m1()).collect();
    let na: Vec<f64> = rates.iter().map(|r| (-r.0 * s_n).exp()).collect();
    let surv: Vec<f64> = rates
        .iter()
        .map(|r| {
            if s_n == 0.0 {
                1.0
            } else {
                prior_survival(r.0, r.1, s_n)
            }
        })
        .collect();

    let k = others.len();
    let full_mask = (1usize << k) - 1;
    let mut num = 0.0f64; // sum of subset weights * conditional values
    let mut den = 0.0f64; // sum of subset weights (posterior normalizer)
    let mut raw = 0.0f64; // as-written sum

    // Lexicographic subset walk with incremental products. `mask` holds the
    // relays assumed still unmet.
    fn walk(
        pos: usize,
        remaining: usize,
        surv_acc: f64,
        w_acc: f64,
        raw_acc: f64,
        mask: usize,
        k: usize,
        arr: &[f64],
        na: &[f64],
        surv: &[f64],
        win: &[f64],
        num: &mut f64,
        den: &mut f64,
        raw: &mut f64,
    ) {
        if remaining == 0 {
            let mut rest_mask = mask;
            let mut w = w_acc;
            let mut r = raw_acc;
            for b in pos..k {
                rest_mask |= 1 << b;
                w *= na[b];
                r *= na[b];
            }
            *num += w * surv_acc * win[rest_mask];
            *den += w;
            *raw += r * surv_acc * win[rest_mask];
            return;
        }
        if k - pos < remaining {
            return;
        }
        // `pos` is a prior holder.
        walk(
            pos + 1,
            remaining - 1,
            surv_acc * surv[pos],
            w_acc * arr[pos],
            raw_acc,
            mask,
            k,
            arr,
            na,
            surv,
            win,
            num,
            den,
            raw,
        );
        // `pos` has not met the source yet.
        walk(
            pos + 1,
            remaining,
            surv_acc,
            w_acc * na[pos],
            raw_acc * na[pos],
            mask | (1 << pos),
            k,
            arr,
            na,
            surv,
            win,
            num,
            den,
            raw,
        );
    }

    if prior_count == 0 {
        // Single empty subset; both variants share the race value but only
        // the normalized one drops the spurious non-arrival weight.
        num = win[full_mask];
        den = 1.0;
        raw = na.iter().product::<f64>() * win[full_mask];
    } else {
        walk(
            0,
            prior_count,
            1.0,
            1.0,
            1.0,
            0,
            k,
            &arr,
            &na,
            &surv,
            &win,
            &mut num,
            &mut den,
            &mut raw,
        );
    }

    match variant {
        AnonVariant::Normalized => {
            if den <= 0.0 {
                // The observed count has zero posterior weight at this s_n
                // (numerical underflow at extreme times).
                return Ok(0.0);
            }
            Ok(num / den)
        }
        AnonVariant::AsWritten => Ok(raw),
    }
}

/// No-information estimate: the relay knows only its own meeting time `s`.
/// Marginalizes over every possible prior-holder subset of the other relays.
pub fn p_none(set: &RelaySet, s: f64, candidate: usize) -> Result<f64> {
    check_relay(set, candidate)?;
    check_time(s)?;
    let n_relays = set.len();
    if n_relays > MAX_ENUMERATED_RELAYS {
        return Err(Error::TooManyRelays(n_relays, MAX_ENUMERATED_RELAYS));
    }
    let others: Vec<usize> = (0..n_relays).filter(|&i| i != candidate).collect();
    let rates: Vec<(f64, f64)> = others.iter().map(|&i| rates_of(set, i)).collect();
    let win = race_table(set.mu(candidate), 0.0, &rates)?;
    let joint: Vec<f64> = rates
        .iter()
        .map(|r| joint_arrive_survive(r.0, r.1, s))
        .collect();
    let na: Vec<f64> = rates.iter().map(|r| (-r.0 * s).exp()).collect();

    let k = others.len();
    fn walk(
        pos: usize,
        acc: f64,
        mask: usize,
        k: usize,
        joint: &[f64],
        na: &[f64],
        win: &[f64],
        total: &mut f64,
    ) {
        if pos == k {
            *total += acc * win[mask];
            return;
        }
        // Arrived before s and still holding.
        walk(pos + 1, acc * joint[pos], mask, k, joint, na, win, total);
        // Not arrived yet.
        walk(
            pos + 1,
            acc * na[pos],
            mask | (1 << pos),
            k,
            joint,
            na,
            win,
            total,
        );
    }
    let mut total = 0.0;
    walk(0, 1.0, 0, k, &joint, &na, &win, &mut total);
    Ok(total)
}

/// Win probabilities for every position of a race among the given holders:
/// `times` are their (sorted, strictly increasing) reception instants and
/// `mus` their delivery rates. Decomposes over the interval containing the
/// first delivery; holders' non-delivery decays at their `mu` over elapsed
/// holding time. O(len) after the prefix pass.
pub fn actual_win_weights(times: &[f64], mus: &[f64]) -> Vec<f64> {
    let n = times.len();
    debug_assert_eq!(mus.len(), n);
    if n == 0 {
        return Vec::new();
    }
    // mu_cum[i] = total delivery rate of holders after the i-th hand-off.
    let mut mu_cum = vec![0.0f64; n];
    let mut acc = 0.0;
    for i in 0..n {
        acc += mus[i];
        mu_cum[i] = acc;
    }
    // surv[i] = P(no delivery by s_i).
    let mut surv = vec![1.0f64; n];
    for i in 1..n {
        surv[i] = surv[i - 1] * (-(mu_cum[i - 1]) * (times[i] - times[i - 1])).exp();
    }
    // term[i] = P(first delivery lands in (s_i, s_{i+1}]) / mu_cum[i], so a
    // holder at position p wins interval i with probability mu_p * term[i].
    let mut suffix = vec![0.0f64; n + 1];
    for i in (0..n).rev() {
        let within = if i + 1 < n {
            -(-(mu_cum[i]) * (times[i + 1] - times[i])).exp_m1()
        } else {
            1.0
        };
        suffix[i] = suffix[i + 1] + surv[i] * within / mu_cum[i];
    }
    (0..n).map(|p| mus[p] * suffix[p]).collect()
}

/// Win probabilities for every position of a complete encounter log, given
/// all meeting times.
pub fn p_actual_all(set: &RelaySet, log: &EncounterLog) -> Result<Vec<f64>> {
    if log.len() != set.len() {
        return Err(Error::IncompleteLog {
            got: log.len(),
            expected: set.len(),
        });
    }
    let mus: Vec<f64> = log.relays().iter().map(|&r| set.mu(r)).collect();
    Ok(actual_win_weights(log.times(), &mus))
}

/// Win probability of the relay at position `n` (1-based) of a complete log.
pub fn p_actual(set: &RelaySet, log: &EncounterLog, n: usize) -> Result<f64> {
    if n == 0 || n > log.len() {
        return Err(Error::IndexOutOfRange { n, len: log.len() });
    }
    Ok(p_actual_all(set, log)?[n - 1])
}

/// Evaluates the estimate matching the knowledge granted by a setting.
pub fn success_estimate(
    set: &RelaySet,
    knowledge: &Knowledge,
    variant: AnonVariant,
) -> Result<SuccessEstimate> {
    let value = match knowledge {
        Knowledge::Full { log, n } => p_full(set, log, *n)?,
        Knowledge::PartialWithIdentities {
            s_n,
            candidate,
            prior,
        } => p_partial_id(set, *s_n, *candidate, prior)?,
        Knowledge::PartialWithoutIdentities {
            s_n,
            candidate,
            prior_count,
        } => p_partial_anon(set, *s_n, *candidate, *prior_count, variant)?,
        Knowledge::NoInformation { s, candidate } => p_none(set, *s, *candidate)?,
    };
    Ok(SuccessEstimate {
        setting: knowledge.setting(),
        relay_index_n: knowledge.position(),
        s_n: knowledge.meeting_time(),
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RelayProfile;

    fn set_of(rates: &[(f64, f64)]) -> RelaySet {
        RelaySet::new(
            rates
                .iter()
                .enumerate()
                .map(|(i, &(l, m))| RelayProfile::exponential(format!("r{}", i + 1), l, m))
                .collect(),
        )
        .unwrap()
    }

    fn log_of(set: &RelaySet, entries: &[(usize, f64)]) -> EncounterLog {
        EncounterLog::new(entries.to_vec(), set).unwrap()
    }

    #[test]
    fn sole_relay_always_succeeds() {
        let set = set_of(&[(0.7, 1.3)]);
        let log = log_of(&set, &[(0, 2.0)]);
        assert!((p_full(&set, &log, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((p_none(&set, 5.0, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((p_partial_anon(&set, 5.0, 0, 0, AnonVariant::Normalized).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_pair_first_relay() {
        // One copy out, one relay unmet, all rates 1: 1 - 1/2 * 1/2.
        let set = set_of(&[(1.0, 1.0), (1.0, 1.0)]);
        let log = log_of(&set, &[(0, 0.0)]);
        assert!((p_full(&set, &log, 1).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn partial_id_two_relays_frozen_value() {
        // lambda = mu = 1, n = 2, s = 1: prior survival e^{-1}/(1-e^{-1}),
        // race mu/(mu_prior + mu_cand) = 1/2.
        let set = set_of(&[(1.0, 1.0), (1.0, 1.0)]);
        let e = std::f64::consts::E;
        let expect = (1.0 / e) / (1.0 - 1.0 / e) * 0.5;
        let got = p_partial_id(&set, 1.0, 1, &[0]).unwrap();
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn psi_is_continuous_across_the_equal_rates_switch() {
        for s in [0.3, 1.0, 4.0] {
            let a = psi(1.0, 1.0, s);
            let b = psi(1.0 + 1e-6, 1.0, s);
            assert!((a - b).abs() < 1e-4, "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn degenerate_time_rejected_with_priors() {
        let set = set_of(&[(1.0, 1.0), (1.0, 2.0)]);
        assert!(matches!(
            p_partial_id(&set, 0.0, 1, &[0]),
            Err(Error::DegenerateTime(_))
        ));
        assert!(matches!(
            p_partial_anon(&set, 0.0, 1, 1, AnonVariant::Normalized),
            Err(Error::DegenerateTime(_))
        ));
    }

    #[test]
    fn anon_equals_id_for_homogeneous_relays() {
        let set = set_of(&[(0.8, 0.5); 4]);
        for prior_count in 0..=2usize {
            let prior: Vec<usize> = (1..=prior_count).collect();
            let a = p_partial_anon(&set, 1.7, 0, prior_count, AnonVariant::Normalized).unwrap();
            let b = p_partial_id(&set, 1.7, 0, &prior).unwrap();
            assert!((a - b).abs() < 1e-12, "count {prior_count}: {a} vs {b}");
        }
    }

    #[test]
    fn first_position_boundary_identities() {
        // P+ and P- with no priors coincide exactly with F at n = 1.
        let set = set_of(&[(0.65, 0.79), (0.53, 0.28), (0.67, 0.67)]);
        for s in [0.05, 0.4, 2.3] {
            let log = log_of(&set, &[(1, s)]);
            let f = p_full(&set, &log, 1).unwrap();
            let pid = p_partial_id(&set, s, 1, &[]).unwrap();
            let anon = p_partial_anon(&set, s, 1, 0, AnonVariant::Normalized).unwrap();
            assert!((f - pid).abs() <= 1e-10 * f);
            assert!((f - anon).abs() <= 1e-10 * f);
        }
    }

    #[test]
    fn last_position_matches_actual() {
        let set = set_of(&[(0.65, 0.79), (0.53, 0.28), (0.67, 0.67)]);
        let log = log_of(&set, &[(2, 0.2), (0, 0.5), (1, 1.4)]);
        let f = p_full(&set, &log, 3).unwrap();
        let a = p_actual(&set, &log, 3).unwrap();
        assert!((f - a).abs() <= 1e-10 * a, "{f} vs {a}");
    }

    #[test]
    fn none_at_zero_time_matches_first_arrival_full() {
        let set = set_of(&[(0.65, 0.79), (0.53, 0.28), (0.67, 0.67)]);
        let log = log_of(&set, &[(1, 0.0)]);
        let f = p_full(&set, &log, 1).unwrap();
        let n0 = p_none(&set, 1e-12, 1).unwrap();
        assert!((f - n0).abs() < 1e-9, "{f} vs {n0}");
    }

    #[test]
    fn actual_probabilities_sum_to_one() {
        let set = set_of(&[(0.65, 0.79), (0.53, 0.28), (0.67, 0.67), (0.2, 1.1)]);
        let log = log_of(&set, &[(0, 0.3), (1, 0.9), (2, 1.0), (3, 4.2)]);
        let all = p_actual_all(&set, &log).unwrap();
        let sum: f64 = all.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12, "sum = {sum}");
    }

    #[test]
    fn actual_symmetric_simultaneous_pair() {
        let set = set_of(&[(1.0, 1.0), (1.0, 1.0)]);
        let log = log_of(&set, &[(0, 0.0), (1, 0.0)]);
        let all = p_actual_all(&set, &log).unwrap();
        assert!((all[0] - 0.5).abs() < 1e-9);
        assert!((all[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn full_estimate_decreases_with_elapsed_holding_time() {
        // Moving a prior contact earlier (more decay) cannot raise the
        // leading survival product.
        let set = set_of(&[(0.65, 0.79), (0.53, 0.28), (0.67, 0.67)]);
        let late = log_of(&set, &[(0, 0.9), (1, 1.0)]);
        let early = log_of(&set, &[(0, 0.1), (1, 1.0)]);
        assert!(p_full(&set, &early, 2).unwrap() <= p_full(&set, &late, 2).unwrap());
    }

    #[test]
    fn incomplete_log_rejected_by_actual() {
        let set = set_of(&[(1.0, 1.0), (1.0, 1.0)]);
        let log = log_of(&set, &[(0, 0.1)]);
        assert!(matches!(
            p_actual(&set, &log, 1),
            Err(Error::IncompleteLog { .. })
        ));
    }

    #[test]
    fn relay_cap_enforced() {
        let rates: Vec<(f64, f64)> = (0..21).map(|i| (0.5 + i as f64 * 0.01, 0.6)).collect();
        let set = set_of(&rates);
        assert!(matches!(
            p_none(&set, 1.0, 0),
            Err(Error::TooManyRelays(21, _))
        ));
    }
}
