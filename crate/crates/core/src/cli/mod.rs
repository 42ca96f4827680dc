//! Command-line front end.
//!
//! Every command writes one JSON document to its output. Failures map to
//! exit codes by class: [`EXIT_IO`], [`EXIT_CONFIG`], [`EXIT_CRYPTO`] and
//! [`EXIT_VERIFY`].

pub mod bench;
pub mod keystore;

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::actors::suite::{self, Family};
use crate::actors::{
    run_scenario_traced, InvasionReport, ObserverAgent, Polygon, ScenarioConfig, SimClock, SimRng,
    Track, UaAgent, UssService, Verdict, Waypoint, DEFAULT_TAU_S,
};
use crate::algebra::CurveId;
use crate::ds::{read_header, DsMode};
use crate::wire::{self, decode_frame, decode_payload, ModeTag};
use crate::{Bn254, ToyCurve, TypeA512};
use bench::{BenchReport, MIN_RUNS, WARMUP};
use keystore::{GroupMeta, Keystore, MemberMeta, HOME_ENV};

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CRYPTO: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Crypto(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn crypto(e: impl std::fmt::Display) -> Self {
        CliError::Crypto(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Crypto(_) => EXIT_CRYPTO,
            CliError::Verification(_) => EXIT_VERIFY,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "a2rid",
    version,
    about = "Anonymous group signatures for drone RemoteID"
)]
pub struct Cli {
    /// Keystore root.
    #[arg(long, env = HOME_ENV, default_value = ".a2rid", global = true)]
    pub home: PathBuf,
    /// Seed for every random choice; fresh entropy when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a group and export its public key.
    Setup(SetupArgs),
    /// Enroll a member and write its key file.
    Join(JoinArgs),
    /// Emit a signed flight into a frames file.
    Fly(FlyArgs),
    /// Verify a frames file offline.
    Observe(ObserveArgs),
    /// Open invasion reports on the authority side.
    Disclose(DiscloseArgs),
    /// Build or inspect a pre-computation store.
    Precompute(PrecomputeArgs),
    /// Time every operation.
    Bench(BenchArgs),
    /// Run a scenario file.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct SetupArgs {
    /// cs, ds, ds-cca2 or ds-cpa; both DS modes share one group.
    #[arg(long, value_parser = parse_family)]
    pub scheme: Family,
    #[arg(long)]
    pub curve: Option<CurveId>,
    /// Defaults to 1 for CS and 2 for DS.
    #[arg(long)]
    pub group_id: Option<u32>,
    /// Replace an existing group of the same scheme.
    #[arg(long)]
    pub force: bool,
    /// Also copy the public key here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JoinArgs {
    pub name: String,
    #[arg(long)]
    pub scheme: ModeTag,
}

#[derive(Debug, Args)]
pub struct FlyArgs {
    pub member: String,
    /// TOML with `waypoints = [[t, lat, lon, alt], ...]` and optional `gcs`.
    #[arg(long)]
    pub track: PathBuf,
    #[arg(long)]
    pub duration: u32,
    #[arg(long, default_value_t = 1)]
    pub rate: u32,
    /// Fill a store for the whole flight before take-off.
    #[arg(long, conflicts_with = "store")]
    pub precompute: bool,
    /// Sign from this store file; the used cursor is written back.
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// Unix time of the first frame; now when absent.
    #[arg(long)]
    pub start: Option<u32>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub pcap: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ObserveArgs {
    #[arg(long)]
    pub frames: PathBuf,
    /// TOML with `vertices = [[lat, lon], ...]`.
    #[arg(long)]
    pub zone: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TAU_S)]
    pub tau: u32,
    /// Unix time at which the first frame is heard; now when absent.
    #[arg(long)]
    pub now: Option<u64>,
    /// Directory of exported group keys; the keystore's when absent.
    #[arg(long)]
    pub pbir: Option<PathBuf>,
    /// Where invasion reports are written.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "observer")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct DiscloseArgs {
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PrecomputeArgs {
    #[arg(required_unless_present = "inspect")]
    pub member: Option<String>,
    #[arg(long, default_value_t = 60)]
    pub seconds: u32,
    #[arg(long, default_value_t = 1)]
    pub rate: u32,
    #[arg(long, required_unless_present = "inspect")]
    pub out: Option<PathBuf>,
    /// Report the header of an existing store instead.
    #[arg(long, conflicts_with = "member")]
    pub inspect: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Repeat to pick several; all three when absent.
    #[arg(long)]
    pub scheme: Vec<ModeTag>,
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    /// Also time signing from a pre-computation store.
    #[arg(long)]
    pub precompute: bool,
    /// Overrides the scheme's default curve.
    #[arg(long)]
    pub curve: Option<CurveId>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Mirror delivered frames to a pcap file.
    #[arg(long)]
    pub pcap: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    match s {
        "cs" => Ok(Family::Cs),
        "ds" | "ds-cca2" | "ds-cpa" => Ok(Family::Ds),
        _ => Err(format!(
            "unknown scheme {s:?}; expected cs, ds, ds-cca2 or ds-cpa"
        )),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrackFile {
    waypoints: Vec<[f64; 4]>,
    gcs: Option<[f64; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZoneFile {
    vertices: Vec<[f64; 2]>,
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn rng_for(seed: Option<u64>) -> SimRng {
    match seed {
        Some(s) => SimRng::seed_from_u64(s),
        None => SimRng::from_entropy(),
    }
}

fn emit(out: &mut dyn Write, value: &serde_json::Value) -> Result<(), CliError> {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(value).expect("json value")
    )
    .map_err(|e| CliError::Io(e.to_string()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    keystore::write_public(path, bytes)
}

/// Runs one parsed command, writing its JSON result to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let store = Keystore::open(&cli.home);
    let mut rng = rng_for(cli.seed);
    match cli.command {
        Command::Setup(a) => cmd_setup(&store, a, &mut rng, out),
        Command::Join(a) => cmd_join(&store, a, &mut rng, out),
        Command::Fly(a) => cmd_fly(&store, a, &mut rng, out),
        Command::Observe(a) => cmd_observe(&store, a, out),
        Command::Disclose(a) => cmd_disclose(&store, a, out),
        Command::Precompute(a) => cmd_precompute(&store, a, &mut rng, out),
        Command::Bench(a) => cmd_bench(a, &mut rng, out),
        Command::Simulate(a) => cmd_simulate(a, cli.seed, out),
    }
}

fn cmd_setup(
    store: &Keystore,
    a: SetupArgs,
    rng: &mut SimRng,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let _lock = store.lock()?;
    let family = a.scheme;
    if store.has_group(family) && !a.force {
        return Err(CliError::Config(format!(
            "a {family} group already exists in {}; pass --force to replace it",
            store.root.display()
        )));
    }
    let curve = a.curve.unwrap_or(family.default_curve());
    let group_id = a.group_id.unwrap_or(match family {
        Family::Cs => 1,
        Family::Ds => 2,
    });
    let other = match family {
        Family::Cs => Family::Ds,
        Family::Ds => Family::Cs,
    };
    if store
        .group_meta(other)
        .is_ok_and(|m| m.group_id == group_id)
    {
        return Err(CliError::Config(format!(
            "group id {group_id} is taken by the {other} group"
        )));
    }
    let authority = suite::new_authority(family, curve, rng).map_err(|e| match e {
        suite::SuiteError::Ds(crate::ds::DsError::SymmetricCurve(_)) => CliError::Config(format!(
            "{family} needs an asymmetric pairing; {curve} is symmetric"
        )),
        e => CliError::crypto(e),
    })?;
    if let Ok(old) = store.group_meta(family) {
        retire_group(store, &old)?;
    }
    let meta = GroupMeta {
        group_id,
        family,
        curve,
        members: Vec::new(),
    };
    let files = authority.files();
    store.save_group(&meta, &files)?;
    if let Some(path) = &a.out {
        write_file(path, &files.gpk)?;
    }
    emit(
        out,
        &json!({
            "scheme": family,
            "curve": curve,
            "group_id": group_id,
            "dir": store.group_dir(family),
            "gpk_bytes": files.gpk.len(),
            "fingerprint": hex(&authority.verifier().fingerprint()),
        }),
    )
}

/// Drops member files and the exported key of a replaced group.
fn retire_group(store: &Keystore, old: &GroupMeta) -> Result<(), CliError> {
    for name in &old.members {
        let base = store.member_path(name)?;
        for ext in ["key", "json"] {
            let _ = std::fs::remove_file(base.with_extension(ext));
        }
    }
    let _ = std::fs::remove_file(store.pbir_dir().join(format!("{}.gpk", old.group_id)));
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn cmd_join(
    store: &Keystore,
    a: JoinArgs,
    rng: &mut SimRng,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let _lock = store.lock()?;
    let family = Family::of(a.scheme);
    let base = store.member_path(&a.name)?;
    if base.with_extension("json").exists() {
        return Err(CliError::Config(format!(
            "member {:?} already exists",
            a.name
        )));
    }
    let (mut meta, mut authority) = store.load_group(family)?;
    let joined = authority.join(a.scheme, rng).map_err(CliError::crypto)?;
    let mut signer = joined.signer;
    let probe = b"join self-check";
    let sig = signer.sign(probe, rng).map_err(CliError::crypto)?;
    if !authority.verifier().verify(probe, &sig) {
        return Err(CliError::Crypto(
            "fresh member key failed its self-check".into(),
        ));
    }
    meta.members.push(a.name.clone());
    let files = authority.files();
    store.save_member(
        &MemberMeta {
            name: a.name.clone(),
            group_id: meta.group_id,
            scheme: a.scheme,
        },
        &signer.key_bytes(),
    )?;
    store.save_group(&meta, &files)?;
    emit(
        out,
        &json!({
            "member": a.name,
            "scheme": a.scheme,
            "group_id": meta.group_id,
            "index": joined.index,
            "key_file": base.with_extension("key"),
        }),
    )
}

fn load_track(path: &Path) -> Result<Track, CliError> {
    let t: TrackFile = read_toml(path)?;
    if t.waypoints.is_empty() {
        return Err(CliError::Config(format!(
            "{}: track has no waypoints",
            path.display()
        )));
    }
    let waypoints: Vec<Waypoint> = t
        .waypoints
        .iter()
        .map(|&[t, lat, lon, alt]| Waypoint { t, lat, lon, alt })
        .collect();
    let [lat, lon, alt] = t.gcs.unwrap_or([waypoints[0].lat, waypoints[0].lon, 0.0]);
    Ok(Track {
        gcs: Waypoint {
            t: 0.0,
            lat,
            lon,
            alt,
        },
        waypoints,
    })
}

fn cmd_fly(
    store: &Keystore,
    a: FlyArgs,
    rng: &mut SimRng,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (meta, mut signer) = store.load_member(&a.member)?;
    let track = load_track(&a.track)?;
    let count = a.duration as usize * a.rate as usize;
    let mut store_bytes = None;
    if a.precompute {
        let bytes = signer.precompute(count, rng).map_err(CliError::crypto)?;
        store_bytes = Some(bytes);
    }
    if let Some(path) = &a.store {
        signer
            .attach_store(&keystore::read(path)?)
            .map_err(CliError::crypto)?;
    }
    let mut ua = UaAgent::new(&a.member, meta.group_id, signer, track, a.rate)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let start = a.start.unwrap_or(unix_now() as u32);
    ua.epoch_s = start;
    let mut clock = SimClock::new();
    let end_us = a.duration as u64 * 1_000_000;
    if end_us > 0 {
        clock.advance_to(end_us - 1);
    }
    let emissions = ua.tick(&clock, rng);
    let frames: Vec<Vec<u8>> = emissions.iter().map(|e| e.frame.clone()).collect();
    let f = std::fs::File::create(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    wire::write_frames_file(std::io::BufWriter::new(f), &frames)
        .map_err(|e| CliError::io(&a.out, e))?;
    if let Some(path) = &a.pcap {
        let times: Vec<u64> = emissions
            .iter()
            .map(|e| start as u64 * 1_000_000 + e.at_us)
            .collect();
        let f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        wire::write_pcap(std::io::BufWriter::new(f), &frames, &times)
            .map_err(|e| CliError::io(path, e))?;
    }
    if let Some(path) = &a.store {
        if let Some(bytes) = ua.signer.store_bytes() {
            keystore::write_secret(path, &bytes)?;
        }
    }
    emit(
        out,
        &json!({
            "member": a.member,
            "scheme": meta.scheme,
            "frames": frames.len(),
            "failures": ua.failures.len(),
            "start": start,
            "precompute_bytes": store_bytes,
            "store_remaining": ua.signer.store_capacity(),
            "out": a.out,
        }),
    )?;
    match ua.failures.first() {
        None => Ok(()),
        Some(first) => Err(CliError::Crypto(format!(
            "{} of {count} frames not signed: {}",
            ua.failures.len(),
            first.reason
        ))),
    }
}

#[derive(Debug, Serialize)]
struct FrameVerdict {
    index: usize,
    timestamp: Option<u32>,
    verdict: String,
}

fn verdict_name(v: Verdict) -> String {
    match v {
        Verdict::Accepted { invasion: false } => "accepted".into(),
        Verdict::Accepted { invasion: true } => "invasion".into(),
        Verdict::Rejected(r) => r.name().into(),
    }
}

fn frame_timestamp(frame: &[u8]) -> Option<u32> {
    let f = decode_frame(frame).ok()?;
    decode_payload(&f.payload)
        .ok()
        .map(|p| p.telemetry.timestamp)
}

/// Plays the capture back as if its first frame were heard at `--now`, with
/// the gaps between frames taken from their timestamps.
fn cmd_observe(store: &Keystore, a: ObserveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let pbir = a.pbir.clone().unwrap_or(store.pbir_dir());
    let mut keys = HashMap::new();
    let dir = std::fs::read_dir(&pbir).map_err(|e| CliError::io(&pbir, e))?;
    for entry in dir {
        let path = entry.map_err(|e| CliError::io(&pbir, e))?.path();
        if path.extension().is_none_or(|e| e != "gpk") {
            continue;
        }
        let Some(id) = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse::<u32>().ok())
        else {
            return Err(CliError::Config(format!(
                "{}: name must be <group id>.gpk",
                path.display()
            )));
        };
        let verifier = suite::load_verifier(&keystore::read(&path)?).map_err(CliError::crypto)?;
        keys.insert(id, verifier);
    }
    let zone = match &a.zone {
        Some(p) => {
            let z: ZoneFile = read_toml(p)?;
            if z.vertices.len() < 3 {
                return Err(CliError::Config(format!(
                    "{}: a zone needs at least 3 vertices",
                    p.display()
                )));
            }
            Some(Polygon {
                vertices: z.vertices,
            })
        }
        None => None,
    };
    let f = std::fs::File::open(&a.frames).map_err(|e| CliError::io(&a.frames, e))?;
    let frames = wire::read_frames_file(std::io::BufReader::new(f))
        .map_err(|e| CliError::Config(format!("{}: {e}", a.frames.display())))?;
    let mut obs = ObserverAgent::from_keys(&a.name, keys, a.tau, zone);
    let now = a.now.unwrap_or_else(unix_now);
    let first = frames.iter().find_map(|f| frame_timestamp(f));
    let mut verdicts = Vec::new();
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for (index, frame) in frames.iter().enumerate() {
        let ts = frame_timestamp(frame);
        let offset = match (ts, first) {
            (Some(t), Some(f0)) => t.saturating_sub(f0) as u64,
            _ => 0,
        };
        let v = obs.receive(frame, (now + offset) * 1_000_000);
        let name = verdict_name(v);
        *counts.entry(name.clone()).or_default() += 1;
        verdicts.push(FrameVerdict {
            index,
            timestamp: ts,
            verdict: name,
        });
    }
    let mut report_files = Vec::new();
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (i, r) in obs.invasions.iter().enumerate() {
            let path = dir.join(format!("{}-{i}.json", a.name));
            write_file(
                &path,
                serde_json::to_string(r).expect("plain data").as_bytes(),
            )?;
            report_files.push(path);
        }
    }
    let rejected = verdicts
        .iter()
        .filter(|v| v.verdict != "accepted" && v.verdict != "invasion")
        .count();
    emit(
        out,
        &json!({
            "observer": a.name,
            "frames": frames.len(),
            "counts": counts,
            "invasions": obs.invasions.len(),
            "reports": report_files,
            "verdicts": verdicts,
        }),
    )?;
    if rejected > 0 {
        return Err(CliError::Verification(format!(
            "{rejected} of {} frames rejected",
            frames.len()
        )));
    }
    Ok(())
}

fn cmd_disclose(store: &Keystore, a: DiscloseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let _lock = store.lock()?;
    let uss = UssService::new();
    for (meta, authority) in store.load_groups()? {
        uss.add_group(meta.group_id, authority, meta.members)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let previous = store.audit_log()?;
    uss.resume_cases(previous.iter().map(|r| r.case_id).max().unwrap_or(0));
    let mut acks = Vec::new();
    for path in &a.reports {
        let bytes = keystore::read(path)?;
        let report: InvasionReport = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let ack = uss.disclose(&report);
        let rec = uss
            .audit_log()
            .into_iter()
            .find(|r| r.case_id == ack.case_id)
            .expect("disclose logs every case");
        store.append_audit(&rec)?;
        acks.push(ack);
    }
    emit(out, &serde_json::to_value(&acks).expect("plain data"))?;
    let failed = acks.iter().filter(|a| !a.verified).count();
    if failed > 0 {
        return Err(CliError::Verification(format!(
            "{failed} of {} reports did not verify",
            acks.len()
        )));
    }
    Ok(())
}

fn cmd_precompute(
    store: &Keystore,
    a: PrecomputeArgs,
    rng: &mut SimRng,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if let Some(path) = &a.inspect {
        let bytes = keystore::read(path)?;
        let h = read_header(&bytes).map_err(CliError::crypto)?;
        return emit(
            out,
            &json!({
                "mode": ModeTag::from(h.mode),
                "curve": CurveId::from_u8(h.curve).map(|c| c.name()).unwrap_or("unknown"),
                "bundles": h.count,
                "used": h.next,
                "remaining": h.count - h.next,
                "bundle_bytes": h.bundle_len,
                "file_bytes": bytes.len(),
            }),
        );
    }
    let name = a.member.expect("required by clap");
    let path = a.out.expect("required by clap");
    let (meta, mut signer) = store.load_member(&name)?;
    if meta.scheme.ds_mode().is_none() {
        return Err(CliError::Config(format!(
            "{} signs without pre-computation",
            meta.scheme
        )));
    }
    if a.rate < 1 {
        return Err(CliError::Config(
            "minimum rate is 1 message per second".into(),
        ));
    }
    let count = a.seconds as usize * a.rate as usize;
    let total = signer.precompute(count, rng).map_err(CliError::crypto)?;
    let bytes = signer.store_bytes().expect("store just built");
    keystore::write_secret(&path, &bytes)?;
    emit(
        out,
        &json!({
            "member": name,
            "mode": meta.scheme,
            "bundles": count,
            "bundle_bytes": if count == 0 { 0 } else { (total - crate::ds::STORE_HEADER_BYTES) / count },
            "file_bytes": total,
            "out": path,
        }),
    )
}

/// Runs the selected benchmarks; `runs` below [`MIN_RUNS`] is rejected.
pub fn run_bench(
    modes: &[ModeTag],
    runs: usize,
    precompute: bool,
    curve: Option<CurveId>,
    rng: &mut SimRng,
) -> Result<BenchReport, CliError> {
    if runs < MIN_RUNS {
        return Err(CliError::Config(format!(
            "--runs must be at least {MIN_RUNS}"
        )));
    }
    let mut ops = Vec::new();
    if modes.contains(&ModeTag::Cs) {
        ops.extend(match curve.unwrap_or(Family::Cs.default_curve()) {
            CurveId::TypeA => bench::bench_cs::<TypeA512, _>(runs, runs, rng),
            CurveId::Bn254 => bench::bench_cs::<Bn254, _>(runs, runs, rng),
            CurveId::Toy => bench::bench_cs::<ToyCurve, _>(runs, runs, rng),
        });
    }
    let ds_modes: Vec<DsMode> = modes.iter().filter_map(|m| m.ds_mode()).collect();
    if !ds_modes.is_empty() {
        ops.extend(match curve.unwrap_or(Family::Ds.default_curve()) {
            CurveId::Bn254 => bench::bench_ds::<Bn254, _>(&ds_modes, runs, runs, precompute, rng),
            CurveId::Toy => bench::bench_ds::<ToyCurve, _>(&ds_modes, runs, runs, precompute, rng),
            CurveId::TypeA => {
                return Err(CliError::Config(
                    "ds needs an asymmetric pairing; type-a is symmetric".into(),
                ));
            }
        });
    }
    Ok(BenchReport {
        runs,
        warmup: WARMUP,
        ops,
    })
}

fn cmd_bench(a: BenchArgs, rng: &mut SimRng, out: &mut dyn Write) -> Result<(), CliError> {
    let modes = if a.scheme.is_empty() {
        vec![ModeTag::Cs, ModeTag::DsCca2, ModeTag::DsCpa]
    } else {
        a.scheme
    };
    let report = run_bench(&modes, a.runs, a.precompute, a.curve, rng)?;
    for s in &report.ops {
        eprintln!(
            "{:<22} mean {:>9.4} ms  ±{:>8.4}  min {:>9.4}  max {:>9.4}  pairings {}",
            s.op, s.mean_ms, s.ci95_ms, s.min_ms, s.max_ms, s.ops.pairings
        );
    }
    let text = report.to_json();
    if let Some(path) = &a.out {
        write_file(path, text.as_bytes())?;
    }
    writeln!(out, "{text}").map_err(|e| CliError::Io(e.to_string()))?;
    let slow = report.over_bound();
    if !slow.is_empty() {
        let names: Vec<_> = slow.iter().map(|s| s.op.as_str()).collect();
        return Err(CliError::Verification(format!(
            "signing exceeded {} ms: {}",
            bench::SIGN_BOUND_MS,
            names.join(", ")
        )));
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs, seed: Option<u64>, out: &mut dyn Write) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.config).map_err(|e| CliError::io(&a.config, e))?;
    let mut cfg = ScenarioConfig::from_toml(&text).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let (report, trace) = run_scenario_traced(&cfg).map_err(|e| match e {
        crate::actors::ScenarioError::Agent(e) => CliError::crypto(e),
        e => CliError::Config(e.to_string()),
    })?;
    let json = report.to_json();
    if let Some(path) = &a.out {
        write_file(path, json.as_bytes())?;
    }
    if let Some(path) = &a.pcap {
        let (times, frames): (Vec<u64>, Vec<Vec<u8>>) = trace.into_iter().unzip();
        let f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        wire::write_pcap(std::io::BufWriter::new(f), &frames, &times)
            .map_err(|e| CliError::io(path, e))?;
    }
    writeln!(out, "{json}").map_err(|e| CliError::Io(e.to_string()))
}
