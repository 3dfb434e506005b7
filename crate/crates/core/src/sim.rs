//! Per-message Monte Carlo experiment driver.
//!
//! Each time-slot carries one independent message: an encounter log and
//! destination delays are synthesized, every relay is quoted under the
//! configured information setting (with exponential-assumption rates), the
//! delivery race runs (optionally gated by TTL timers), and the winner is
//! paid its frozen quote.
//!
//! Two payment series are recorded per message:
//!
//! * `payment` — the realized settlement: the winner's frozen quote. Quotes
//!   scale with the reciprocal success estimate, so this series is extremely
//!   heavy-tailed (late-arriving winners collect rare, huge rewards) and its
//!   running average converges too slowly to be a useful check.
//! * `expected_payment` — `sum_i w_i R_i`, the payment averaged over the
//!   delivery race and over the prior hand-off times each relay's estimate
//!   marginalizes, given the realized encounter log (under the same rate
//!   model used for quoting). Its mean equals the realized mean whenever the
//!   success estimates are calibrated, with bounded per-message values;
//!   this is the series the invariance check and the convergence figures
//!   use.

use rand_distr::{Distribution as _, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobility::synthesize_encounter_log;
use crate::model::{CostParams, InfoSetting, RelayProfile, RelaySet};
use crate::reward::{min_reward, theoretical_expected_payment};
use crate::seeds::stream_rng;
use crate::success::{
    actual_win_weights, p_full, p_none, p_partial_anon, p_partial_id, prior_survival, AnonVariant,
};
use crate::ttl::failure_prob;

/// Rate model used to turn success estimates into quotes. Only the
/// exponential assumption (rates = reciprocal mean inter-contact times) is
/// defined; the field exists so configs state it explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuoteAssumption {
    #[default]
    Exponential,
}

/// One experiment: profiles, costs, setting, and horizon. One message is
/// generated per time-slot and messages never interact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub relays: Vec<RelayProfile>,
    pub costs: CostParams,
    pub setting: InfoSetting,
    pub messages: u64,
    /// TTL timer-rate multiplier; copies drop at rate `epsilon * mu_i`.
    #[serde(default)]
    pub ttl_epsilon: Option<f64>,
    pub seed: u64,
    /// When set, relays whose source contact happens after the message was
    /// already delivered never receive a copy (affects relay ledgers only;
    /// the winner and the payment are unchanged by construction).
    #[serde(default)]
    pub truncate_at_delivery: bool,
    #[serde(default)]
    pub anon_variant: AnonVariant,
    #[serde(default)]
    pub quote_assumption: QuoteAssumption,
}

impl ExperimentConfig {
    pub fn new(
        relays: Vec<RelayProfile>,
        costs: CostParams,
        setting: InfoSetting,
        messages: u64,
        seed: u64,
    ) -> Self {
        ExperimentConfig {
            relays,
            costs,
            setting,
            messages,
            ttl_epsilon: None,
            seed,
            truncate_at_delivery: false,
            anon_variant: AnonVariant::default(),
            quote_assumption: QuoteAssumption::default(),
        }
    }

    fn validate(&self) -> Result<RelaySet> {
        if self.messages == 0 {
            return Err(Error::ConfigError("messages must be >= 1".into()));
        }
        if let Some(eps) = self.ttl_epsilon {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::ConfigError(format!(
                    "ttl_epsilon must be positive, got {eps}"
                )));
            }
            if self
                .relays
                .iter()
                .any(|p| !p.source_dist.is_exponential() || !p.dest_dist.is_exponential())
            {
                return Err(Error::ConfigError(
                    "TTL runs require exponential inter-contact profiles".into(),
                ));
            }
        }
        RelaySet::new(self.relays.clone())
    }
}

/// Outcome of one message for one relay.
#[derive(Debug, Clone, Copy)]
struct RelayOutcome {
    relay: usize,
    skipped: bool,
    participated: bool,
    quote: f64,
    estimate: f64,
    win: bool,
    /// Time the copy occupied the buffer (delivery or TTL drop).
    holding: f64,
    /// Conditional win probability given the log (0 under TTL).
    win_weight: f64,
    /// Destination delay draw, used by the expected storage term.
    dest_delay: f64,
}

#[derive(Debug, Clone)]
struct MessageOutcome {
    winner: Option<usize>,
    realized_payment: Option<f64>,
    expected_payment: Option<f64>,
    relays: Vec<RelayOutcome>,
}

/// Cumulative per-relay accounting over a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayLedger {
    pub id: String,
    /// Messages the relay accepted a copy of.
    pub receptions: u64,
    /// Messages where the success estimate was zero and the relay declined.
    pub skipped: u64,
    pub wins: u64,
    /// Realized rewards received (winner quotes).
    pub reward_total: f64,
    /// Realized incurred costs: c_r per reception + c_s * holding + c_d on wins.
    pub cost_total: f64,
    /// Race-averaged reward: quote * win weight, summed.
    pub expected_reward_total: f64,
    /// Race-averaged cost: c_r + c_s * dest delay + c_d * win weight, summed.
    pub expected_cost_total: f64,
    pub holding_time_total: f64,
}

/// Per-slot record mirrored into the series CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub slot: u64,
    pub winner: Option<String>,
    /// Realized payment (None when the message was never delivered).
    pub payment: Option<f64>,
    /// Race-averaged payment given the meeting times (None under TTL).
    pub expected_payment: Option<f64>,
}

/// Empirical TTL statistics against the closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtlSummary {
    pub epsilon: f64,
    pub empirical_failure_fraction: f64,
    pub predicted_failure_prob: f64,
    /// Per relay: (id, mean holding time, predicted 1/(mu (1+eps))).
    pub holding_means: Vec<(String, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub setting: InfoSetting,
    pub messages: u64,
    pub seed: u64,
    pub theoretical_payment: f64,
    pub per_message: Vec<MessageRecord>,
    /// Mean realized payment over all slots (failures count as zero).
    pub mean_realized_payment: f64,
    pub realized_payment_std_error: f64,
    /// Mean race-averaged payment (absent under TTL).
    pub mean_expected_payment: Option<f64>,
    pub expected_payment_std_error: Option<f64>,
    pub delivery_failures: u64,
    pub skipped_quotes: u64,
    /// Mean success estimate and mean quote of accepting relays, by
    /// encounter position (1-based). Late positions see more circulating
    /// copies, hence smaller estimates and larger quotes under informative
    /// settings.
    pub estimate_mean_by_position: Vec<f64>,
    pub quote_mean_by_position: Vec<f64>,
    pub relays: Vec<RelayLedger>,
    pub ttl: Option<TtlSummary>,
    /// True when any profile carries a non-exponential distribution while
    /// quotes assume exponential rates.
    pub robustness_mismatch: bool,
    pub truncate_at_delivery: bool,
    pub notes: Vec<String>,
}

impl SimulationReport {
    /// Running average of the convergence series: expected payments when
    /// available, realized otherwise, with undelivered slots contributing 0.
    pub fn running_average(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.per_message.len());
        let mut acc = 0.0;
        for (i, rec) in self.per_message.iter().enumerate() {
            let v = rec
                .expected_payment
                .or(rec.payment)
                .unwrap_or(0.0);
            acc += v;
            out.push(acc / (i + 1) as f64);
        }
        out
    }

    /// Writes the `slot,payment,running_avg,theoretical` series.
    pub fn write_series_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "slot,payment,running_avg,theoretical")?;
        let avg = self.running_average();
        for (rec, ra) in self.per_message.iter().zip(&avg) {
            let v = rec.expected_payment.or(rec.payment).unwrap_or(0.0);
            writeln!(w, "{},{},{},{}", rec.slot, v, ra, self.theoretical_payment)?;
        }
        Ok(())
    }
}

/// Cumulative-average reward and cost series of one tagged relay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakevenSeries {
    pub relay_id: String,
    /// Cumulative averages of the race-averaged reward/cost per slot.
    pub avg_reward: Vec<f64>,
    pub avg_cost: Vec<f64>,
    /// Cumulative averages of the realized ledgers.
    pub avg_reward_realized: Vec<f64>,
    pub avg_cost_realized: Vec<f64>,
}

impl BreakevenSeries {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "slot,avg_reward,avg_cost,avg_reward_realized,avg_cost_realized")?;
        for i in 0..self.avg_reward.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                i + 1,
                self.avg_reward[i],
                self.avg_cost[i],
                self.avg_reward_realized[i],
                self.avg_cost_realized[i]
            )?;
        }
        Ok(())
    }
}

fn simulate_message(
    set: &RelaySet,
    config: &ExperimentConfig,
    slot: u64,
) -> Result<MessageOutcome> {
    let mut rng = stream_rng(config.seed, slot);
    let enc = synthesize_encounter_log(set, &mut rng)?;
    let n = enc.log.len();
    let times = enc.log.times();
    let relays = enc.log.relays();

    // TTL drop delays, drawn after the log in fixed relay order.
    let ttl_delay: Option<Vec<f64>> = config.ttl_epsilon.map(|eps| {
        (0..n)
            .map(|pos| {
                let mu = set.mu(relays[pos]);
                Exp::new(eps * mu).expect("positive rate").sample(&mut rng)
            })
            .collect()
    });

    // Quote every position under the configured setting.
    let mut quoted: Vec<Option<(f64, f64)>> = Vec::with_capacity(n); // (estimate, quote)
    for pos in 1..=n {
        let cand = relays[pos - 1];
        let estimate = match config.setting {
            InfoSetting::Full => p_full(set, &enc.log, pos)?,
            InfoSetting::PartialWithIdentities => {
                p_partial_id(set, times[pos - 1], cand, &relays[..pos - 1])?
            }
            InfoSetting::PartialWithoutIdentities => p_partial_anon(
                set,
                times[pos - 1],
                cand,
                pos - 1,
                config.anon_variant,
            )?,
            InfoSetting::NoInformation => p_none(set, times[pos - 1], cand)?,
        };
        if estimate <= 0.0 {
            quoted.push(None);
        } else {
            let base = config.costs.quoting_base_cost(set.mu(cand));
            let reward = min_reward(&config.costs, base, estimate)?;
            quoted.push(Some((estimate, reward)));
        }
    }

    // Delivery race among accepting relays.
    let mut winner_pos: Option<usize> = None;
    let mut delivery_instant = f64::INFINITY;
    for pos in 0..n {
        if quoted[pos].is_none() {
            continue;
        }
        let d = enc.dest_delays[pos];
        if let Some(ttl) = &ttl_delay {
            if d >= ttl[pos] {
                continue; // copy dropped before reaching the destination
            }
        }
        let t = times[pos] + d;
        if t < delivery_instant {
            delivery_instant = t;
            winner_pos = Some(pos);
        }
    }

    // Race-averaged payout weights over the quoted relays (TTL races are
    // settled by realized draws only). Each relay's weight is its win
    // probability with the prior hand-off times averaged out exactly as its
    // own estimate averages them (realized times under F, truncated
    // exponentials otherwise), while later arrivals stay at their realized
    // times. The marginalized survival factors then cancel against the
    // quote under every setting, keeping the per-message payment bounded;
    // its mean still equals the realized-payment mean because the weight's
    // conditional expectation given the quote's information is the true win
    // probability exactly when the closed forms are calibrated.
    let mut win_weight = vec![0.0f64; n];
    let mut expected_payment = None;
    if ttl_delay.is_none() {
        let sub_pos: Vec<usize> = (0..n).filter(|&p| quoted[p].is_some()).collect();
        if !sub_pos.is_empty() {
            let mut total = 0.0;
            let mut race_times = Vec::with_capacity(sub_pos.len());
            let mut race_mus = Vec::with_capacity(sub_pos.len());
            for (q, &pos) in sub_pos.iter().enumerate() {
                let s_q = times[pos];
                let mut survival = 1.0f64;
                for &pp in &sub_pos[..q] {
                    let (lam_p, mu_p) = (set.lambda(relays[pp]), set.mu(relays[pp]));
                    survival *= if config.setting == InfoSetting::Full {
                        (-(mu_p) * (s_q - times[pp])).exp()
                    } else {
                        prior_survival(lam_p, mu_p, s_q)
                    };
                }
                // Race from s_q: surviving priors and the candidate hold
                // memoryless copies, later relays join at realized times.
                race_times.clear();
                race_mus.clear();
                for &pp in &sub_pos[..=q] {
                    race_times.push(s_q);
                    race_mus.push(set.mu(relays[pp]));
                }
                for &pf in &sub_pos[q + 1..] {
                    race_times.push(times[pf]);
                    race_mus.push(set.mu(relays[pf]));
                }
                let race = actual_win_weights(&race_times, &race_mus)[q];
                win_weight[pos] = survival * race;
                total += win_weight[pos] * quoted[pos].expect("quoted").1;
            }
            expected_payment = Some(total);
        }
    }

    let mut outcomes = Vec::with_capacity(n);
    for pos in 0..n {
        let relay = relays[pos];
        match quoted[pos] {
            None => outcomes.push(RelayOutcome {
                relay,
                skipped: true,
                participated: false,
                quote: 0.0,
                estimate: 0.0,
                win: false,
                holding: 0.0,
                win_weight: 0.0,
                dest_delay: enc.dest_delays[pos],
            }),
            Some((estimate, quote)) => {
                let participated =
                    !config.truncate_at_delivery || times[pos] <= delivery_instant;
                let win = winner_pos == Some(pos);
                let holding = if participated {
                    match &ttl_delay {
                        Some(ttl) => enc.dest_delays[pos].min(ttl[pos]),
                        None => enc.dest_delays[pos],
                    }
                } else {
                    0.0
                };
                outcomes.push(RelayOutcome {
                    relay,
                    skipped: false,
                    participated,
                    quote,
                    estimate,
                    win,
                    holding,
                    win_weight: win_weight[pos],
                    dest_delay: enc.dest_delays[pos],
                });
            }
        }
    }

    Ok(MessageOutcome {
        winner: winner_pos.map(|pos| relays[pos]),
        realized_payment: winner_pos.map(|pos| quoted[pos].expect("winner quoted").1),
        expected_payment,
        relays: outcomes,
    })
}

fn run_outcomes(config: &ExperimentConfig) -> Result<(RelaySet, Vec<MessageOutcome>)> {
    let set = config.validate()?;
    let outcomes: Vec<MessageOutcome> = (0..config.messages)
        .into_par_iter()
        .map(|slot| simulate_message(&set, config, slot))
        .collect::<Result<Vec<_>>>()?;
    Ok((set, outcomes))
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn reduce(
    config: &ExperimentConfig,
    set: &RelaySet,
    outcomes: &[MessageOutcome],
) -> SimulationReport {
    let costs = &config.costs;
    let mut ledgers: Vec<RelayLedger> = set
        .profiles()
        .iter()
        .map(|p| RelayLedger {
            id: p.id.clone(),
            receptions: 0,
            skipped: 0,
            wins: 0,
            reward_total: 0.0,
            cost_total: 0.0,
            expected_reward_total: 0.0,
            expected_cost_total: 0.0,
            holding_time_total: 0.0,
        })
        .collect();
    let mut per_message = Vec::with_capacity(outcomes.len());
    let mut failures = 0u64;
    let mut skipped_quotes = 0u64;
    let mut pos_estimate_sum = vec![0.0f64; set.len()];
    let mut pos_quote_sum = vec![0.0f64; set.len()];
    let mut pos_count = vec![0u64; set.len()];
    for (i, out) in outcomes.iter().enumerate() {
        if out.winner.is_none() {
            failures += 1;
        }
        per_message.push(MessageRecord {
            slot: i as u64 + 1,
            winner: out.winner.map(|r| set.profile(r).id.clone()),
            payment: out.realized_payment,
            expected_payment: out.expected_payment,
        });
        for (pos, r) in out.relays.iter().enumerate() {
            let ledger = &mut ledgers[r.relay];
            if r.skipped {
                ledger.skipped += 1;
                skipped_quotes += 1;
                continue;
            }
            pos_estimate_sum[pos] += r.estimate;
            pos_quote_sum[pos] += r.quote;
            pos_count[pos] += 1;
            if r.participated {
                ledger.receptions += 1;
                ledger.holding_time_total += r.holding;
                ledger.cost_total +=
                    costs.c_r + costs.c_s * r.holding + if r.win { costs.c_d } else { 0.0 };
            }
            if r.win {
                ledger.wins += 1;
                ledger.reward_total += r.quote;
            }
            ledger.expected_reward_total += r.quote * r.win_weight;
            ledger.expected_cost_total +=
                costs.c_r + costs.c_s * r.dest_delay + costs.c_d * r.win_weight;
        }
    }

    let n = outcomes.len() as u64;
    let (mean_realized, se_realized) = mean_and_se(
        per_message.iter().map(|m| m.payment.unwrap_or(0.0)),
        n,
    );
    let has_expected = per_message.iter().any(|m| m.expected_payment.is_some());
    let (mean_expected, se_expected) = if has_expected {
        let (m, s) = mean_and_se(
            per_message
                .iter()
                .map(|m| m.expected_payment.unwrap_or(0.0)),
            n,
        );
        (Some(m), Some(s))
    } else {
        (None, None)
    };

    let ttl = config.ttl_epsilon.map(|eps| TtlSummary {
        epsilon: eps,
        empirical_failure_fraction: failures as f64 / n.max(1) as f64,
        predicted_failure_prob: if set.is_empty() {
            1.0
        } else {
            failure_prob(eps, set.len())
        },
        holding_means: ledgers
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let mean = if l.receptions > 0 {
                    l.holding_time_total / l.receptions as f64
                } else {
                    0.0
                };
                (l.id.clone(), mean, 1.0 / (set.mu(i) * (1.0 + eps)))
            })
            .collect(),
    });

    let robustness_mismatch = set
        .profiles()
        .iter()
        .any(|p| !p.source_dist.is_exponential() || !p.dest_dist.is_exponential());

    let mut notes = Vec::new();
    if config.ttl_epsilon.is_some() {
        notes.push(
            "quotes do not account for the relay's own TTL timer; the drop risk is \
             borne by the relay"
                .to_string(),
        );
    }
    if config.truncate_at_delivery {
        notes.push(
            "relay ledgers exclude copies the source withheld after delivery; the \
             payment series is unaffected by truncation"
                .to_string(),
        );
    }

    SimulationReport {
        setting: config.setting,
        messages: config.messages,
        seed: config.seed,
        theoretical_payment: theoretical_expected_payment(costs, set),
        per_message,
        mean_realized_payment: mean_realized,
        realized_payment_std_error: se_realized,
        mean_expected_payment: mean_expected,
        expected_payment_std_error: se_expected,
        delivery_failures: failures,
        skipped_quotes,
        estimate_mean_by_position: pos_estimate_sum
            .iter()
            .zip(&pos_count)
            .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect(),
        quote_mean_by_position: pos_quote_sum
            .iter()
            .zip(&pos_count)
            .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect(),
        relays: ledgers,
        ttl,
        robustness_mismatch,
        truncate_at_delivery: config.truncate_at_delivery,
        notes,
    }
}

/// Runs the experiment and accumulates the report.
pub fn run(config: &ExperimentConfig) -> Result<SimulationReport> {
    let (set, outcomes) = run_outcomes(config)?;
    Ok(reduce(config, &set, &outcomes))
}

/// Runs the experiment and additionally extracts one relay's cumulative
/// reward/cost series.
pub fn run_with_breakeven(
    config: &ExperimentConfig,
    relay_id: &str,
) -> Result<(SimulationReport, BreakevenSeries)> {
    let (set, outcomes) = run_outcomes(config)?;
    let tagged = set.require(relay_id)?;
    let m = outcomes.len();
    let mut series = BreakevenSeries {
        relay_id: relay_id.to_string(),
        avg_reward: Vec::with_capacity(m),
        avg_cost: Vec::with_capacity(m),
        avg_reward_realized: Vec::with_capacity(m),
        avg_cost_realized: Vec::with_capacity(m),
    };
    let costs = &config.costs;
    let (mut rew, mut cost, mut rew_r, mut cost_r) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (i, out) in outcomes.iter().enumerate() {
        if let Some(r) = out.relays.iter().find(|r| r.relay == tagged) {
            if !r.skipped {
                rew += r.quote * r.win_weight;
                cost += costs.c_r + costs.c_s * r.dest_delay + costs.c_d * r.win_weight;
                if r.participated {
                    cost_r += costs.c_r
                        + costs.c_s * r.holding
                        + if r.win { costs.c_d } else { 0.0 };
                }
                if r.win {
                    rew_r += r.quote;
                }
            }
        }
        let t = (i + 1) as f64;
        series.avg_reward.push(rew / t);
        series.avg_cost.push(cost / t);
        series.avg_reward_realized.push(rew_r / t);
        series.avg_cost_realized.push(cost_r / t);
    }
    Ok((reduce(config, &set, &outcomes), series))
}

/// Tagged-relay reward/cost convergence (the break-even property).
pub fn run_relay_breakeven(config: &ExperimentConfig, relay_id: &str) -> Result<BreakevenSeries> {
    Ok(run_with_breakeven(config, relay_id)?.1)
}

/// Robustness run: the logs are synthesized from the true (non-exponential)
/// distributions while quoting keeps the exponential closed forms.
pub fn run_robustness(config: &ExperimentConfig) -> Result<SimulationReport> {
    if config
        .relays
        .iter()
        .all(|p| p.source_dist.is_exponential() && p.dest_dist.is_exponential())
    {
        return Err(Error::ConfigError(
            "robustness runs need at least one non-exponential profile".into(),
        ));
    }
    run(config)
}

/// TTL run: per-copy exponential drop timers at rate `epsilon * mu_i`.
pub fn run_ttl(config: &ExperimentConfig) -> Result<SimulationReport> {
    if config.ttl_epsilon.is_none() {
        return Err(Error::ConfigError("ttl_epsilon is required".into()));
    }
    run(config)
}
