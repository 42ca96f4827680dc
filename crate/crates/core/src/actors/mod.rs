//! Drones, observers and the authority over a simulated broadcast channel.
//!
//! Everything runs on one logical clock in microseconds. Drones emit signed
//! frames on schedule, the channel delivers them (possibly lost, delayed,
//! duplicated or tampered with), observers verify offline against group keys
//! fetched once from the public registry, and in-zone frames are forwarded to
//! the authority, which opens them and answers with an identity-free ack.

mod channel;
mod scenario;
pub mod suite;

pub use channel::{BroadcastChannel, ChannelStats, Delivery};
pub use scenario::{
    run_scenario, run_scenario_traced, AdversaryConfig, ChannelConfig, DisclosureRow, DroneConfig,
    GroupConfig, ObserverConfig, ScenarioConfig, ScenarioError, ScenarioReport, SchemeStats,
    SCENARIO_SCHEMA,
};
pub use suite::{
    Family, GroupAuthority, GroupVerifier, MemberSigner, MemberSignerClone, SimRng, SuiteError,
};

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::CurveId;
use crate::wire::{
    decode_frame, decode_payload, deg_to_fixed, encode_frame, encode_payload, ModeTag, RidFrame,
    Telemetry,
};

pub const DEFAULT_TAU_S: u32 = 5;
const MICROS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimClock {
    now_us: u64,
}

impl SimClock {
    pub fn new() -> Self {
        SimClock::default()
    }

    pub fn now_us(&self) -> u64 {
        self.now_us
    }

    pub fn now_secs(&self) -> u64 {
        self.now_us / MICROS
    }

    /// Moves forward; never backwards.
    pub fn advance_to(&mut self, t_us: u64) {
        self.now_us = self.now_us.max(t_us);
    }
}

/// A timed position on a scripted track.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    pub alt: f64,
}

/// Piecewise-linear flight path plus a fixed ground station.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub waypoints: Vec<Waypoint>,
    pub gcs: Waypoint,
}

const EARTH_RADIUS_M: f64 = 6_371_000.0;

impl Track {
    /// Holds the first waypoint before the track starts and the last after
    /// it ends.
    pub fn position(&self, t: f64) -> (Waypoint, f64, f64) {
        let w = &self.waypoints;
        let (first, last) = (w[0], w[w.len() - 1]);
        if t <= first.t {
            return (Waypoint { t, ..first }, 0.0, 0.0);
        }
        if t >= last.t {
            return (Waypoint { t, ..last }, 0.0, 0.0);
        }
        let i = w
            .windows(2)
            .position(|p| p[0].t <= t && t < p[1].t)
            .expect("t lies inside the track");
        let (a, b) = (w[i], w[i + 1]);
        let f = (t - a.t) / (b.t - a.t);
        let lerp = |x: f64, y: f64| x + (y - x) * f;
        let p = Waypoint {
            t,
            lat: lerp(a.lat, b.lat),
            lon: lerp(a.lon, b.lon),
            alt: lerp(a.alt, b.alt),
        };
        let north = (b.lat - a.lat).to_radians() * EARTH_RADIUS_M;
        let east = (b.lon - a.lon).to_radians() * EARTH_RADIUS_M * a.lat.to_radians().cos();
        let speed = north.hypot(east) / (b.t - a.t);
        let course = east.atan2(north).to_degrees().rem_euclid(360.0);
        (p, speed, course)
    }

    pub fn telemetry(&self, group_id: u32, t: f64, timestamp: u32) -> Telemetry {
        let (p, speed, course) = self.position(t);
        Telemetry {
            group_id,
            drone_lat: deg_to_fixed(p.lat),
            drone_lon: deg_to_fixed(p.lon),
            drone_alt: (p.alt * 100.0).round() as i32,
            drone_speed: (speed * 100.0).round() as u32,
            drone_cog: ((course * 100.0).round() as u32) % 36_000,
            gcs_lat: deg_to_fixed(self.gcs.lat),
            gcs_lon: deg_to_fixed(self.gcs.lon),
            gcs_alt: (self.gcs.alt * 100.0).round() as i32,
            timestamp,
            emergency: 0,
        }
    }
}

/// Planar no-fly zone in (lat, lon) degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
}

impl Polygon {
    /// Even-odd rule; altitude is ignored.
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        let v = &self.vertices;
        let mut inside = false;
        let mut j = v.len().wrapping_sub(1);
        for i in 0..v.len() {
            let ([yi, xi], [yj, xj]) = (v[i], v[j]);
            if (yi > lat) != (yj > lat) && lon < (xj - xi) * (lat - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    }
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("emit rate must be at least 1 msg/s, got {0}")]
    Rate(u32),
    #[error("track needs at least one waypoint")]
    EmptyTrack,
    #[error("unknown group {0}")]
    UnknownGroup(u32),
    #[error("group {0} already exists")]
    DuplicateGroup(u32),
    #[error("member name {0:?} already registered")]
    DuplicateMember(String),
    #[error(transparent)]
    Suite(#[from] SuiteError),
}

/// One frame on the air.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Emission {
    pub at_us: u64,
    pub timestamp: u32,
    pub frame: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmitFailure {
    pub at_us: u64,
    pub reason: String,
}

pub struct UaAgent {
    pub name: String,
    pub group_id: u32,
    pub signer: Box<dyn MemberSignerClone>,
    pub track: Track,
    pub rate: u32,
    pub addr3: [u8; 6],
    /// Added to the clock's seconds to form message timestamps.
    pub epoch_s: u32,
    next_emit_us: u64,
    seq: u16,
    pub failures: Vec<EmitFailure>,
}

impl UaAgent {
    pub fn new(
        name: impl Into<String>,
        group_id: u32,
        signer: Box<dyn MemberSignerClone>,
        track: Track,
        rate: u32,
    ) -> Result<Self, AgentError> {
        if rate < 1 {
            return Err(AgentError::Rate(rate));
        }
        if track.waypoints.is_empty() {
            return Err(AgentError::EmptyTrack);
        }
        let name = name.into();
        let mut addr3 = [0x02, 0, 0, 0, 0, 0];
        addr3[2..].copy_from_slice(&crate::algebra::fingerprint(name.as_bytes()));
        Ok(UaAgent {
            name,
            group_id,
            signer,
            track,
            rate,
            addr3,
            epoch_s: 0,
            next_emit_us: 0,
            seq: 0,
            failures: Vec::new(),
        })
    }

    pub fn mode(&self) -> ModeTag {
        self.signer.mode()
    }

    fn interval_us(&self) -> u64 {
        MICROS / self.rate as u64
    }

    /// Emits every frame due up to `clock`. A failed signature is recorded and
    /// the schedule moves on.
    pub fn tick(&mut self, clock: &SimClock, rng: &mut SimRng) -> Vec<Emission> {
        let mut out = Vec::new();
        while self.next_emit_us <= clock.now_us() {
            let at_us = self.next_emit_us;
            self.next_emit_us += self.interval_us();
            let timestamp = self.epoch_s.wrapping_add((at_us / MICROS) as u32);
            let t = self
                .track
                .telemetry(self.group_id, at_us as f64 / MICROS as f64, timestamp);
            let m = t.to_bytes();
            let frame = self
                .signer
                .sign(&m, rng)
                .map_err(|e| e.to_string())
                .and_then(|sig| encode_payload(&t, &sig).map_err(|e| e.to_string()))
                .and_then(|payload| {
                    encode_frame(&RidFrame {
                        addr3: self.addr3,
                        seq_ctl: self.seq << 4,
                        addr4: [0; 6],
                        payload,
                    })
                    .map_err(|e| e.to_string())
                });
            match frame {
                Ok(frame) => {
                    self.seq = (self.seq + 1) & 0x0fff;
                    out.push(Emission {
                        at_us,
                        timestamp,
                        frame,
                    });
                }
                Err(reason) => self.failures.push(EmitFailure { at_us, reason }),
            }
        }
        out
    }
}

/// Public information registry: group id to group public key.
#[derive(Default)]
pub struct Pbir {
    entries: RwLock<BTreeMap<u32, Arc<dyn GroupVerifier>>>,
    fetches: AtomicU64,
}

impl Pbir {
    pub fn publish(&self, group_id: u32, verifier: Arc<dyn GroupVerifier>) {
        self.entries
            .write()
            .expect("pbir lock")
            .insert(group_id, verifier);
    }

    /// One network round trip returning every published key.
    pub fn fetch_all(&self) -> BTreeMap<u32, Arc<dyn GroupVerifier>> {
        self.fetches.fetch_add(1, Ordering::Relaxed);
        self.entries.read().expect("pbir lock").clone()
    }

    pub fn fetches(&self) -> u64 {
        self.fetches.load(Ordering::Relaxed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    Decode,
    Replay,
    UnknownGroup,
    Signature,
}

impl RejectReason {
    pub fn name(self) -> &'static str {
        match self {
            RejectReason::Decode => "decode",
            RejectReason::Replay => "replay",
            RejectReason::UnknownGroup => "unknown-group",
            RejectReason::Signature => "signature",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Accepted { invasion: bool },
    Rejected(RejectReason),
}

/// An in-zone frame as forwarded to the authority.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvasionReport {
    pub observer: String,
    pub received_at: u64,
    pub frame: Vec<u8>,
}

pub struct ObserverAgent {
    pub name: String,
    pub tau_s: u32,
    pub zone: Option<Polygon>,
    keys: HashMap<u32, Arc<dyn GroupVerifier>>,
    network_calls: u64,
    pub log: Vec<(u64, Verdict)>,
    pub invasions: Vec<InvasionReport>,
}

impl ObserverAgent {
    /// Fetches group keys once; nothing after this touches the network.
    pub fn bootstrap(
        name: impl Into<String>,
        pbir: &Pbir,
        tau_s: u32,
        zone: Option<Polygon>,
    ) -> Self {
        ObserverAgent {
            name: name.into(),
            tau_s,
            zone,
            keys: pbir.fetch_all().into_iter().collect(),
            network_calls: 1,
            log: Vec::new(),
            invasions: Vec::new(),
        }
    }

    pub fn from_keys(
        name: impl Into<String>,
        keys: HashMap<u32, Arc<dyn GroupVerifier>>,
        tau_s: u32,
        zone: Option<Polygon>,
    ) -> Self {
        ObserverAgent {
            name: name.into(),
            tau_s,
            zone,
            keys,
            network_calls: 0,
            log: Vec::new(),
            invasions: Vec::new(),
        }
    }

    pub fn network_calls(&self) -> u64 {
        self.network_calls
    }

    /// Decode, replay window, group lookup, signature, zone.
    pub fn receive(&mut self, frame: &[u8], now_us: u64) -> Verdict {
        let v = self.check(frame, now_us);
        if v == (Verdict::Accepted { invasion: true }) {
            self.invasions.push(InvasionReport {
                observer: self.name.clone(),
                received_at: now_us,
                frame: frame.to_vec(),
            });
        }
        self.log.push((now_us, v));
        v
    }

    fn check(&self, frame: &[u8], now_us: u64) -> Verdict {
        let Ok(payload) =
            decode_frame(frame).and_then(|f| decode_payload(&f.payload).map(|p| (f, p)))
        else {
            return Verdict::Rejected(RejectReason::Decode);
        };
        let (f, p) = payload;
        let now = (now_us / MICROS) as i64;
        if (p.telemetry.timestamp as i64 - now).abs() > self.tau_s as i64 {
            return Verdict::Rejected(RejectReason::Replay);
        }
        let Some(key) = self.keys.get(&p.telemetry.group_id) else {
            return Verdict::Rejected(RejectReason::UnknownGroup);
        };
        let family_ok = key.family() == Family::of(p.signature.mode);
        if !family_ok
            || key.fingerprint() != p.signature.fingerprint
            || !key.verify(&f.payload[..41], &p.signature)
        {
            return Verdict::Rejected(RejectReason::Signature);
        }
        let invasion = self
            .zone
            .as_ref()
            .is_some_and(|z| z.contains(p.telemetry.lat_deg(), p.telemetry.lon_deg()));
        Verdict::Accepted { invasion }
    }
}

/// The only thing an observer learns from a disclosure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub verified: bool,
    pub case_id: u64,
}

impl Ack {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub case_id: u64,
    pub observer: String,
    pub group_id: Option<u32>,
    pub verified: bool,
    pub member: Option<String>,
    pub outcome: String,
}

struct UssGroup {
    authority: Box<dyn GroupAuthority>,
    names: Vec<String>,
}

/// Group manager, opener and public registry host.
pub struct UssService {
    groups: RwLock<BTreeMap<u32, UssGroup>>,
    pub pbir: Arc<Pbir>,
    audit: Mutex<Vec<AuditRecord>>,
    next_case: AtomicU64,
}

impl Default for UssService {
    fn default() -> Self {
        UssService {
            groups: RwLock::default(),
            pbir: Arc::default(),
            audit: Mutex::default(),
            next_case: AtomicU64::new(1),
        }
    }
}

impl UssService {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_group(
        &self,
        group_id: u32,
        family: Family,
        curve: CurveId,
        rng: &mut SimRng,
    ) -> Result<(), AgentError> {
        let authority = suite::new_authority(family, curve, rng)?;
        self.add_group(group_id, authority, Vec::new())
    }

    /// Adopts an existing authority, e.g. one loaded from key files.
    pub fn add_group(
        &self,
        group_id: u32,
        authority: Box<dyn GroupAuthority>,
        names: Vec<String>,
    ) -> Result<(), AgentError> {
        let mut groups = self.groups.write().expect("uss lock");
        if groups.contains_key(&group_id) {
            return Err(AgentError::DuplicateGroup(group_id));
        }
        self.pbir.publish(group_id, authority.verifier());
        groups.insert(group_id, UssGroup { authority, names });
        Ok(())
    }

    pub fn join(
        &self,
        group_id: u32,
        name: &str,
        mode: ModeTag,
        rng: &mut SimRng,
    ) -> Result<Box<dyn MemberSignerClone>, AgentError> {
        let mut groups = self.groups.write().expect("uss lock");
        let g = groups
            .get_mut(&group_id)
            .ok_or(AgentError::UnknownGroup(group_id))?;
        if g.names.iter().any(|n| n == name) {
            return Err(AgentError::DuplicateMember(name.to_string()));
        }
        let joined = g.authority.join(mode, rng)?;
        g.names.push(name.to_string());
        Ok(joined.signer)
    }

    /// Verifies and opens a forwarded frame. The audit log gets the member;
    /// the returned ack does not.
    pub fn disclose(&self, report: &InvasionReport) -> Ack {
        let case_id = self.next_case.fetch_add(1, Ordering::Relaxed);
        let mut rec = AuditRecord {
            case_id,
            observer: report.observer.clone(),
            group_id: None,
            verified: false,
            member: None,
            outcome: String::new(),
        };
        let decoded =
            decode_frame(&report.frame).and_then(|f| decode_payload(&f.payload).map(|p| (f, p)));
        match decoded {
            Err(e) => rec.outcome = format!("undecodable: {e}"),
            Ok((f, p)) => {
                let gid = p.telemetry.group_id;
                rec.group_id = Some(gid);
                let groups = self.groups.read().expect("uss lock");
                match groups.get(&gid) {
                    None => rec.outcome = "unknown group".into(),
                    Some(g) => {
                        let m = &f.payload[..41];
                        let v = g.authority.verifier();
                        if Family::of(p.signature.mode) != g.authority.family()
                            || v.fingerprint() != p.signature.fingerprint
                            || !v.verify(m, &p.signature)
                        {
                            rec.outcome = "verification failed".into();
                        } else {
                            rec.verified = true;
                            match g.authority.open(m, &p.signature) {
                                Ok(i) => {
                                    rec.member = g.names.get(i).cloned().or(Some(format!("#{i}")));
                                    rec.outcome = "opened".into();
                                }
                                Err(e) => rec.outcome = format!("anomaly: {e}"),
                            }
                        }
                    }
                }
            }
        }
        let ack = Ack {
            verified: rec.verified,
            case_id,
        };
        self.audit.lock().expect("audit lock").push(rec);
        ack
    }

    /// Continues case numbering after `last`, e.g. from a persisted log.
    pub fn resume_cases(&self, last: u64) {
        self.next_case.store(last + 1, Ordering::Relaxed);
    }

    pub fn audit_log(&self) -> Vec<AuditRecord> {
        self.audit.lock().expect("audit lock").clone()
    }

    /// Member names and registry entry bytes; the material that must not
    /// reach observers.
    pub fn identity_records(&self) -> Vec<Vec<u8>> {
        let groups = self.groups.read().expect("uss lock");
        let mut out = Vec::new();
        for g in groups.values() {
            for (i, n) in g.names.iter().enumerate() {
                out.push(n.as_bytes().to_vec());
                out.push(g.authority.record(i));
            }
        }
        out
    }

    pub fn with_group<T>(
        &self,
        group_id: u32,
        f: impl FnOnce(&dyn GroupAuthority, &[String]) -> T,
    ) -> Option<T> {
        let groups = self.groups.read().expect("uss lock");
        groups
            .get(&group_id)
            .map(|g| f(g.authority.as_ref(), &g.names))
    }
}
