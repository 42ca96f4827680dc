//! Scenario configuration (TOML) and the simulation loop.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    AgentError, BroadcastChannel, ChannelStats, Family, ObserverAgent, Polygon, RejectReason,
    SimClock, SimRng, Track, UaAgent, UssService, Verdict, Waypoint, DEFAULT_TAU_S, MICROS,
};
use crate::algebra::{measure, CurveId, OpCounts};
use crate::wire::ModeTag;

pub const SCENARIO_SCHEMA: u32 = 1;
const STEP_US: u64 = 50_000;

fn default_tau() -> u32 {
    DEFAULT_TAU_S
}

fn default_rate() -> u32 {
    1
}

fn default_latency() -> u64 {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub seed: u64,
    pub duration_s: u32,
    #[serde(default = "default_tau")]
    pub tau_s: u32,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub adversary: AdversaryConfig,
    pub groups: Vec<GroupConfig>,
    pub drones: Vec<DroneConfig>,
    pub observers: Vec<ObserverConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default)]
    pub loss_rate: f64,
    #[serde(default = "default_latency")]
    pub latency_ms: u64,
    /// Observer clock offset against the drones, seconds.
    #[serde(default)]
    pub drift_s: i64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            loss_rate: 0.0,
            latency_ms: default_latency(),
            drift_s: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    /// Probability of re-broadcasting a delivered frame after `replay_delay_s`.
    #[serde(default)]
    pub replay_rate: f64,
    #[serde(default)]
    pub replay_delay_s: f64,
    /// Probability of injecting a copy with one random payload bit flipped.
    #[serde(default)]
    pub bit_flip_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub id: u32,
    pub scheme: Family,
    #[serde(default)]
    pub curve: Option<CurveId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroneConfig {
    pub name: String,
    pub group: u32,
    pub scheme: ModeTag,
    #[serde(default = "default_rate")]
    pub rate: u32,
    #[serde(default)]
    pub precompute: bool,
    /// Store size in seconds of flight; defaults to the scenario duration.
    #[serde(default)]
    pub precompute_s: Option<u32>,
    /// `[t, lat, lon, alt]` rows.
    pub track: Vec<[f64; 4]>,
    #[serde(default)]
    pub gcs: Option<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverConfig {
    pub name: String,
    /// `[lat, lon]` vertices.
    #[serde(default)]
    pub zone: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config: {0}")]
    Config(String),
    #[error("config parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

fn bad(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Config(msg.into())
}

fn unit(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(bad(format!(
                "unsupported schema {}, expected {SCENARIO_SCHEMA}",
                self.schema
            )));
        }
        if self.duration_s == 0 {
            return Err(bad("duration_s must be positive"));
        }
        if !unit(self.channel.loss_rate)
            || !unit(self.adversary.replay_rate)
            || !unit(self.adversary.bit_flip_rate)
        {
            return Err(bad("rates must lie in [0, 1]"));
        }
        if self.adversary.replay_delay_s < 0.0 {
            return Err(bad("replay_delay_s must be non-negative"));
        }
        let mut groups = BTreeMap::new();
        for g in &self.groups {
            if groups.insert(g.id, g.scheme).is_some() {
                return Err(bad(format!("duplicate group id {}", g.id)));
            }
            if g.scheme == Family::Ds && g.curve == Some(CurveId::TypeA) {
                return Err(bad(format!("group {}: ds needs an asymmetric curve", g.id)));
            }
        }
        let mut names = BTreeSet::new();
        for d in &self.drones {
            if !names.insert(&d.name) {
                return Err(bad(format!("duplicate drone name {:?}", d.name)));
            }
            let family = groups
                .get(&d.group)
                .ok_or_else(|| bad(format!("drone {:?}: unknown group {}", d.name, d.group)))?;
            if *family != Family::of(d.scheme) {
                return Err(bad(format!(
                    "drone {:?}: scheme {} does not match group {}",
                    d.name, d.scheme, family
                )));
            }
            if d.rate < 1 {
                return Err(bad(format!("drone {:?}: minimum rate is 1 msg/s", d.name)));
            }
            if d.track.is_empty() || d.track.windows(2).any(|w| w[1][0] < w[0][0]) {
                return Err(bad(format!(
                    "drone {:?}: track needs time-ordered waypoints",
                    d.name
                )));
            }
            if d.precompute && d.scheme == ModeTag::Cs {
                return Err(bad(format!(
                    "drone {:?}: cs has no pre-computation",
                    d.name
                )));
            }
        }
        let mut names = BTreeSet::new();
        for o in &self.observers {
            if !names.insert(&o.name) {
                return Err(bad(format!("duplicate observer name {:?}", o.name)));
            }
            if o.zone.as_ref().is_some_and(|z| z.len() < 3) {
                return Err(bad(format!(
                    "observer {:?}: zone needs at least 3 vertices",
                    o.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SchemeStats {
    pub sent: u64,
    pub emission_failures: u64,
    pub lost: u64,
    /// Honest frames as seen by all observers together.
    pub received: u64,
    pub accepted: u64,
    pub rejected: BTreeMap<String, u64>,
    pub invasions: u64,
    pub sign_ops: OpCounts,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InjectedStats {
    pub received: u64,
    pub accepted: u64,
    pub rejected: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisclosureRow {
    pub case_id: u64,
    pub observer: String,
    pub verified: bool,
    /// Whether the audit log names the drone that produced the frame.
    pub resolved_correctly: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub min_ms: f64,
    pub mean_ms: f64,
    pub max_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema: u32,
    pub seed: u64,
    pub duration_s: u32,
    pub tau_s: u32,
    pub observers: usize,
    pub schemes: BTreeMap<String, SchemeStats>,
    pub injected: InjectedStats,
    pub channel: ChannelStats,
    pub invasions: u64,
    pub disclosures: Vec<DisclosureRow>,
    pub delivery_latency: LatencyStats,
    pub precompute_bytes: BTreeMap<String, u64>,
    pub observer_network_calls: u64,
}

impl ScenarioReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn flip_random_bit(frame: &[u8], rng: &mut SimRng) -> Vec<u8> {
    let mut f = frame.to_vec();
    // header (32 B) and FCS stay intact so the frame reaches payload checks
    let start = crate::wire::HEADER_BYTES;
    let end = f.len() - crate::wire::FCS_BYTES;
    let bit = rng.gen_range(start * 8..end * 8);
    f[bit / 8] ^= 1 << (bit % 8);
    let sum = crate::wire::fcs(&f[..end]);
    f[end..].copy_from_slice(&sum.to_be_bytes());
    f
}

/// Runs the whole scenario. Deterministic for a given config.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport, ScenarioError> {
    run_scenario_traced(cfg).map(|(report, _)| report)
}

/// As [`run_scenario`], also returning every delivered frame with its
/// delivery time in microseconds.
pub fn run_scenario_traced(
    cfg: &ScenarioConfig,
) -> Result<(ScenarioReport, Vec<(u64, Vec<u8>)>), ScenarioError> {
    cfg.validate()?;
    let mut trace = Vec::new();
    let mut rng = SimRng::seed_from_u64(cfg.seed);
    let uss = UssService::new();
    for g in &cfg.groups {
        uss.create_group(
            g.id,
            g.scheme,
            g.curve.unwrap_or(g.scheme.default_curve()),
            &mut rng,
        )?;
    }

    let mut drones = Vec::new();
    let mut precompute_bytes = BTreeMap::new();
    for d in &cfg.drones {
        let mut signer = uss.join(d.group, &d.name, d.scheme, &mut rng)?;
        if d.precompute {
            let count = d.precompute_s.unwrap_or(cfg.duration_s) as usize * d.rate as usize;
            let bytes = signer
                .precompute(count, &mut rng)
                .map_err(AgentError::from)?;
            precompute_bytes.insert(d.name.clone(), bytes as u64);
        }
        let waypoints: Vec<Waypoint> = d
            .track
            .iter()
            .map(|&[t, lat, lon, alt]| Waypoint { t, lat, lon, alt })
            .collect();
        let [glat, glon, galt] = d.gcs.unwrap_or([waypoints[0].lat, waypoints[0].lon, 0.0]);
        let track = Track {
            gcs: Waypoint {
                t: 0.0,
                lat: glat,
                lon: glon,
                alt: galt,
            },
            waypoints,
        };
        drones.push(UaAgent::new(
            d.name.clone(),
            d.group,
            signer,
            track,
            d.rate,
        )?);
    }

    let mut observers: Vec<ObserverAgent> = cfg
        .observers
        .iter()
        .map(|o| {
            let zone = o.zone.clone().map(|vertices| Polygon { vertices });
            ObserverAgent::bootstrap(o.name.clone(), &uss.pbir, cfg.tau_s, zone)
        })
        .collect();

    let mut channel = BroadcastChannel::new(
        cfg.channel.loss_rate,
        cfg.channel.latency_ms * 1000,
        SimRng::seed_from_u64(rng.gen()),
    );
    let mut adversary_rng = SimRng::seed_from_u64(rng.gen());
    let mut schemes: BTreeMap<String, SchemeStats> = BTreeMap::new();
    for d in &drones {
        schemes.entry(d.mode().name().to_string()).or_default();
    }
    let mut injected = InjectedStats::default();
    let mut disclosures = Vec::new();
    let mut latencies = Vec::new();
    let replay_delay_us = (cfg.adversary.replay_delay_s * MICROS as f64) as u64;

    let mut clock = SimClock::new();
    let end_us = cfg.duration_s as u64 * MICROS;
    let mut t = 0;
    loop {
        clock.advance_to(t);
        if t < end_us {
            for (i, d) in drones.iter_mut().enumerate() {
                let failures_before = d.failures.len();
                let (emissions, ops) = measure(|| d.tick(&clock, &mut rng));
                let stats = schemes.get_mut(d.mode().name()).expect("scheme registered");
                stats.sign_ops = add_ops(stats.sign_ops, ops);
                stats.emission_failures += (d.failures.len() - failures_before) as u64;
                for e in emissions {
                    stats.sent += 1;
                    if !channel.send(i, e.frame, e.at_us) {
                        stats.lost += 1;
                    }
                }
            }
        }
        for delivery in channel.deliver_due(clock.now_us()) {
            trace.push((delivery.at_us, delivery.frame.clone()));
            latencies.push((delivery.at_us - delivery.sent_us) as f64 / 1000.0);
            let observed_us =
                (delivery.at_us as i64 + cfg.channel.drift_s * MICROS as i64).max(0) as u64;
            let scheme = drones[delivery.sender].mode().name();
            for o in observers.iter_mut() {
                let before = o.invasions.len();
                let verdict = o.receive(&delivery.frame, observed_us);
                let (received, accepted, rejected) = if delivery.injected {
                    (
                        &mut injected.received,
                        &mut injected.accepted,
                        &mut injected.rejected,
                    )
                } else {
                    let s = schemes.get_mut(scheme).expect("scheme registered");
                    if verdict == (Verdict::Accepted { invasion: true }) {
                        s.invasions += 1;
                    }
                    (&mut s.received, &mut s.accepted, &mut s.rejected)
                };
                *received += 1;
                match verdict {
                    Verdict::Accepted { .. } => *accepted += 1,
                    Verdict::Rejected(r) => *rejected.entry(reason_key(r)).or_default() += 1,
                }
                for report in o.invasions[before..].to_vec() {
                    let ack = uss.disclose(&report);
                    let audit = uss.audit_log();
                    let named = audit
                        .iter()
                        .find(|a| a.case_id == ack.case_id)
                        .and_then(|a| a.member.clone());
                    disclosures.push(DisclosureRow {
                        case_id: ack.case_id,
                        observer: o.name.clone(),
                        verified: ack.verified,
                        resolved_correctly: named.as_deref()
                            == Some(drones[delivery.sender].name.as_str()),
                    });
                }
            }
            if !delivery.injected {
                if cfg.adversary.replay_rate > 0.0
                    && adversary_rng.gen_bool(cfg.adversary.replay_rate)
                {
                    channel.inject(
                        delivery.sender,
                        delivery.frame.clone(),
                        delivery.at_us + replay_delay_us,
                    );
                }
                if cfg.adversary.bit_flip_rate > 0.0
                    && adversary_rng.gen_bool(cfg.adversary.bit_flip_rate)
                {
                    let tampered = flip_random_bit(&delivery.frame, &mut adversary_rng);
                    channel.inject(delivery.sender, tampered, delivery.at_us);
                }
            }
        }
        if t >= end_us && channel.is_empty() {
            break;
        }
        t = if t < end_us {
            t + STEP_US
        } else {
            channel.next_delivery_us().unwrap_or(t).max(t)
        };
    }

    let delivery_latency = if latencies.is_empty() {
        LatencyStats::default()
    } else {
        LatencyStats {
            min_ms: latencies.iter().copied().fold(f64::INFINITY, f64::min),
            mean_ms: latencies.iter().sum::<f64>() / latencies.len() as f64,
            max_ms: latencies.iter().copied().fold(0.0, f64::max),
        }
    };
    let report = ScenarioReport {
        schema: SCENARIO_SCHEMA,
        seed: cfg.seed,
        duration_s: cfg.duration_s,
        tau_s: cfg.tau_s,
        observers: observers.len(),
        invasions: schemes.values().map(|s| s.invasions).sum(),
        schemes,
        injected,
        channel: channel.stats,
        disclosures,
        delivery_latency,
        precompute_bytes,
        observer_network_calls: observers.iter().map(|o| o.network_calls()).sum(),
    };
    Ok((report, trace))
}

fn reason_key(r: RejectReason) -> String {
    r.name().to_string()
}

fn add_ops(a: OpCounts, b: OpCounts) -> OpCounts {
    OpCounts {
        pairings: a.pairings + b.pairings,
        scalar_mults: a.scalar_mults + b.scalar_mults,
        gt_exps: a.gt_exps + b.gt_exps,
        hashes: a.hashes + b.hashes,
    }
}
