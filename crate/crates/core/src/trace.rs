//! Trace ingestion: GPS position logs or contact logs, proximity-based
//! contact detection against fixed source/destination anchors, inter-contact
//! extraction, and rate fitting.
//!
//! Input CSVs are headerless. Positions: `time_s,node_id,x_m,y_m` (planar
//! meters; project lat/lon first, see [`project_equirectangular`]). Contact
//! logs: `t_start_s,t_end_s,node_a,node_b`. Both paths converge on
//! [`ContactInterval`]; contact durations are discarded after detection and
//! the start instant is the contact event.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RelayProfile;

/// Node id used for the source anchor in detected contacts.
pub const SOURCE_ANCHOR: &str = "source";
/// Node id used for the destination anchor in detected contacts.
pub const DEST_ANCHOR: &str = "dest";

/// Interpolation across a gap longer than this many fix periods is broken.
const MAX_GAP_PERIODS: f64 = 10.0;

const SECONDS_PER_HOUR: f64 = 3600.0;

/// One GPS fix in a planar projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionRecord {
    pub time_s: f64,
    pub node_id: String,
    pub x_m: f64,
    pub y_m: f64,
}

/// A maximal interval during which two nodes were within transmission range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactInterval {
    pub node_a: String,
    pub node_b: String,
    pub t_start: f64,
    pub t_end: f64,
}

impl ContactInterval {
    fn involves(&self, node: &str, anchor: &str) -> bool {
        (self.node_a == node && self.node_b == anchor)
            || (self.node_a == anchor && self.node_b == node)
    }
}

/// Reads headerless `time_s,node_id,x_m,y_m` records.
pub fn read_positions_csv<R: Read>(reader: R) -> Result<Vec<PositionRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.push(PositionRecord {
            time_s: parse_field(&rec, 0)?,
            node_id: rec
                .get(1)
                .ok_or_else(|| Error::DomainError("missing node_id column".into()))?
                .to_string(),
            x_m: parse_field(&rec, 2)?,
            y_m: parse_field(&rec, 3)?,
        });
    }
    Ok(out)
}

/// Reads headerless `t_start_s,t_end_s,node_a,node_b` records.
pub fn read_contacts_csv<R: Read>(reader: R) -> Result<Vec<ContactInterval>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let interval = ContactInterval {
            t_start: parse_field(&rec, 0)?,
            t_end: parse_field(&rec, 1)?,
            node_a: field(&rec, 2)?.to_string(),
            node_b: field(&rec, 3)?.to_string(),
        };
        if interval.t_start >= interval.t_end {
            return Err(Error::DomainError(format!(
                "contact interval must have t_start < t_end, got {} >= {}",
                interval.t_start, interval.t_end
            )));
        }
        out.push(interval);
    }
    Ok(out)
}

fn field<'a>(rec: &'a csv::StringRecord, i: usize) -> Result<&'a str> {
    rec.get(i)
        .ok_or_else(|| Error::DomainError(format!("missing column {i}")))
}

fn parse_field(rec: &csv::StringRecord, i: usize) -> Result<f64> {
    let raw = field(rec, i)?;
    raw.parse::<f64>()
        .map_err(|_| Error::DomainError(format!("cannot parse `{raw}` as a number")))
}

/// Projects WGS84 degrees to planar meters with an equirectangular
/// approximation anchored at (`lat0`, `lon0`). Distortion is below 0.1% at
/// city scale (tens of kilometers).
pub fn project_equirectangular(lat: f64, lon: f64, lat0: f64, lon0: f64) -> (f64, f64) {
    const EARTH_RADIUS_M: f64 = 6_371_000.0;
    let x = EARTH_RADIUS_M * (lon - lon0).to_radians() * lat0.to_radians().cos();
    let y = EARTH_RADIUS_M * (lat - lat0).to_radians();
    (x, y)
}

/// Detects maximal intervals during which each node's linearly interpolated
/// position is within `range_m` of the source or destination anchor. Gaps
/// longer than ten fix periods break interpolation.
pub fn detect_contacts(
    positions: &[PositionRecord],
    source_xy: (f64, f64),
    dest_xy: (f64, f64),
    range_m: f64,
) -> Result<Vec<ContactInterval>> {
    if positions.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if !(range_m.is_finite() && range_m > 0.0) {
        return Err(Error::DomainError(format!(
            "range must be positive, got {range_m}"
        )));
    }
    let mut by_node: BTreeMap<&str, Vec<&PositionRecord>> = BTreeMap::new();
    for p in positions {
        by_node.entry(&p.node_id).or_default().push(p);
    }
    let mut out = Vec::new();
    for (node, fixes) in by_node {
        if fixes.windows(2).any(|w| w[1].time_s < w[0].time_s) {
            return Err(Error::UnsortedInput(node.to_string()));
        }
        let period = fix_period(&fixes);
        for (anchor_id, anchor) in [(SOURCE_ANCHOR, source_xy), (DEST_ANCHOR, dest_xy)] {
            let mut intervals = Vec::new();
            for w in fixes.windows(2) {
                let dt = w[1].time_s - w[0].time_s;
                if dt <= 0.0 || dt > MAX_GAP_PERIODS * period {
                    continue;
                }
                if let Some((a, b)) = segment_in_disk(w[0], w[1], anchor, range_m) {
                    intervals.push((a, b));
                }
            }
            for (t_start, t_end) in merge_intervals(intervals) {
                if t_end > t_start {
                    out.push(ContactInterval {
                        node_a: node.to_string(),
                        node_b: anchor_id.to_string(),
                        t_start,
                        t_end,
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.t_start
            .total_cmp(&b.t_start)
            .then_with(|| a.node_a.cmp(&b.node_a))
    });
    Ok(out)
}

/// Median positive inter-fix gap; falls back to 1 s for single-fix traces.
fn fix_period(fixes: &[&PositionRecord]) -> f64 {
    let mut gaps: Vec<f64> = fixes
        .windows(2)
        .map(|w| w[1].time_s - w[0].time_s)
        .filter(|&g| g > 0.0)
        .collect();
    if gaps.is_empty() {
        return 1.0;
    }
    gaps.sort_by(f64::total_cmp);
    gaps[gaps.len() / 2]
}

/// Sub-interval of the segment between two fixes during which the
/// interpolated position lies within the disk.
fn segment_in_disk(
    p0: &PositionRecord,
    p1: &PositionRecord,
    anchor: (f64, f64),
    range_m: f64,
) -> Option<(f64, f64)> {
    let (wx, wy) = (p0.x_m - anchor.0, p0.y_m - anchor.1);
    let (vx, vy) = (p1.x_m - p0.x_m, p1.y_m - p0.y_m);
    let a = vx * vx + vy * vy;
    let b = 2.0 * (wx * vx + wy * vy);
    let c = wx * wx + wy * wy - range_m * range_m;
    let dt = p1.time_s - p0.time_s;
    if a == 0.0 {
        // Stationary over the segment.
        return (c <= 0.0).then_some((p0.time_s, p1.time_s));
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let tau1 = ((-b - sq) / (2.0 * a)).max(0.0);
    let tau2 = ((-b + sq) / (2.0 * a)).min(1.0);
    (tau2 > tau1).then_some((p0.time_s + tau1 * dt, p0.time_s + tau2 * dt))
}

fn merge_intervals(mut intervals: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    const MERGE_EPS: f64 = 1e-6;
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (s, e) in intervals {
        match out.last_mut() {
            Some(last) if s <= last.1 + MERGE_EPS => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}

/// Gaps between the start of each contact and the end of the previous
/// contact of `node` with `anchor`, in trace seconds.
pub fn extract_intercontacts(
    contacts: &[ContactInterval],
    node: &str,
    anchor: &str,
) -> Result<Vec<f64>> {
    let mut mine: Vec<&ContactInterval> = contacts
        .iter()
        .filter(|c| c.involves(node, anchor))
        .collect();
    mine.sort_by(|a, b| a.t_start.total_cmp(&b.t_start));
    if mine.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "node `{node}` has {} contact(s) with `{anchor}`; need at least 2",
            mine.len()
        )));
    }
    Ok(mine
        .windows(2)
        .map(|w| w[1].t_start - w[0].t_end)
        .collect())
}

/// Inter-contact samples of one node against both anchors, in hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSamples {
    pub node: String,
    pub source_gaps_h: Vec<f64>,
    pub dest_gaps_h: Vec<f64>,
}

/// Equal-width histogram summary used for the density comparison figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn of(samples: &[f64], bins: usize) -> Histogram {
        let max = samples.iter().copied().fold(0.0f64, f64::max).max(1e-12);
        let width = max / bins as f64;
        let mut counts = vec![0u64; bins];
        for &s in samples {
            let b = ((s / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        Histogram {
            bin_edges: (0..=bins).map(|i| i as f64 * width).collect(),
            counts,
        }
    }
}

/// One node's fitted exponential-assumption rates (1/hour).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub node: String,
    pub lambda_hat: f64,
    pub mu_hat: f64,
    pub lambda_samples: usize,
    pub mu_samples: usize,
    pub source_histogram: Histogram,
    pub dest_histogram: Histogram,
}

/// Fitted rates for a fleet, plus the nodes that lacked enough contacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedRates {
    pub relays: Vec<RateFit>,
    pub skipped: Vec<String>,
}

impl FittedRates {
    /// The relay-input view: exponential profiles carrying the fitted rates,
    /// directly loadable by the simulator.
    pub fn to_relay_profiles(&self) -> Vec<RelayProfile> {
        self.relays
            .iter()
            .map(|f| RelayProfile::exponential(&f.node, f.lambda_hat, f.mu_hat))
            .collect()
    }
}

/// Fits `rate = 1/mean(gaps)` per node per anchor. Every node needs at least
/// two samples per fitted rate.
pub fn fit_rates(samples: &[NodeSamples]) -> Result<FittedRates> {
    let mut relays = Vec::with_capacity(samples.len());
    for s in samples {
        for (which, gaps) in [("source", &s.source_gaps_h), ("destination", &s.dest_gaps_h)] {
            if gaps.len() < 2 {
                return Err(Error::InsufficientData(format!(
                    "node `{}` has {} {which} gap sample(s); need at least 2",
                    s.node,
                    gaps.len()
                )));
            }
            if gaps.iter().any(|&g| g <= 0.0) {
                return Err(Error::DomainError(format!(
                    "node `{}` has a non-positive {which} gap",
                    s.node
                )));
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        relays.push(RateFit {
            node: s.node.clone(),
            lambda_hat: 1.0 / mean(&s.source_gaps_h),
            mu_hat: 1.0 / mean(&s.dest_gaps_h),
            lambda_samples: s.source_gaps_h.len(),
            mu_samples: s.dest_gaps_h.len(),
            source_histogram: Histogram::of(&s.source_gaps_h, 20),
            dest_histogram: Histogram::of(&s.dest_gaps_h, 20),
        });
    }
    Ok(FittedRates {
        relays,
        skipped: Vec::new(),
    })
}

/// Full pipeline from positions: detect contacts against both anchors,
/// extract inter-contact gaps, and fit rates. Nodes without enough contacts
/// on either anchor are reported in `skipped` rather than failing the fit.
pub fn fit_from_positions(
    positions: &[PositionRecord],
    source_xy: (f64, f64),
    dest_xy: (f64, f64),
    range_m: f64,
) -> Result<FittedRates> {
    let contacts = detect_contacts(positions, source_xy, dest_xy, range_m)?;
    let mut nodes: Vec<String> = positions.iter().map(|p| p.node_id.clone()).collect();
    nodes.sort();
    nodes.dedup();
    fit_nodes(&contacts, &nodes, SOURCE_ANCHOR, DEST_ANCHOR)
}

/// Full pipeline from an external contact log, with caller-named anchors.
pub fn fit_from_contacts(
    contacts: &[ContactInterval],
    source_id: &str,
    dest_id: &str,
) -> Result<FittedRates> {
    let mut nodes: Vec<String> = contacts
        .iter()
        .flat_map(|c| [c.node_a.clone(), c.node_b.clone()])
        .filter(|n| n != source_id && n != dest_id)
        .collect();
    nodes.sort();
    nodes.dedup();
    fit_nodes(contacts, &nodes, source_id, dest_id)
}

fn fit_nodes(
    contacts: &[ContactInterval],
    nodes: &[String],
    source_id: &str,
    dest_id: &str,
) -> Result<FittedRates> {
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for node in nodes {
        let src = extract_intercontacts(contacts, node, source_id);
        let dst = extract_intercontacts(contacts, node, dest_id);
        match (src, dst) {
            (Ok(s), Ok(d)) => samples.push(NodeSamples {
                node: node.clone(),
                source_gaps_h: s.iter().map(|g| g / SECONDS_PER_HOUR).collect(),
                dest_gaps_h: d.iter().map(|g| g / SECONDS_PER_HOUR).collect(),
            }),
            _ => skipped.push(node.clone()),
        }
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "no node has enough contacts with both anchors".into(),
        ));
    }
    let mut fitted = fit_rates(&samples)?;
    fitted.skipped = skipped;
    Ok(fitted)
}
