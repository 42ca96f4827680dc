use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use a2rid::actors::{InvasionReport, Polygon, Track, Waypoint};
use a2rid::cli::{EXIT_CONFIG, EXIT_CRYPTO, EXIT_VERIFY};
use a2rid::wire::{decode_frame, decode_payload, fcs, read_frames_file, FCS_BYTES, HEADER_BYTES};
use serde_json::Value;

struct Env {
    dir: tempfile::TempDir,
}

impl Env {
    fn new() -> Self {
        Env {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn home(&self) -> PathBuf {
        self.path("ks")
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_a2rid"))
            .env("A2RID_HOME", self.home())
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> Value {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        serde_json::from_slice(&out.stdout).unwrap()
    }

    fn code(&self, args: &[&str]) -> i32 {
        self.run(args).status.code().unwrap()
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }
}

fn frames(path: &Path) -> Vec<Vec<u8>> {
    read_frames_file(fs::File::open(path).unwrap()).unwrap()
}

const TRACK: &str = "waypoints = [[0, 45.0, 9.0, 100], [60, 45.03, 9.0, 120]]\n";

#[cfg(unix)]
fn mode_of(p: &Path) -> u32 {
    use std::os::unix::fs::PermissionsExt;
    fs::metadata(p).unwrap().permissions().mode() & 0o777
}

#[test]
fn setup_writes_keys_and_guards_conflicts() {
    let env = Env::new();
    let v = env.ok(&["--seed", "1", "setup", "--scheme", "cs"]);
    assert_eq!(v["curve"], "type-a");
    let dir = env.home().join("cs");
    let mut keys: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".key"))
        .collect();
    keys.sort();
    assert_eq!(keys, ["gpk.key", "isk.key", "ok.key", "registry.key"]);
    #[cfg(unix)]
    {
        assert_eq!(mode_of(&dir.join("isk.key")), 0o600);
        assert_eq!(mode_of(&dir.join("ok.key")), 0o600);
    }
    assert_eq!(
        fs::read(dir.join("gpk.key")).unwrap(),
        fs::read(env.home().join("pbir/1.gpk")).unwrap()
    );

    assert_eq!(env.code(&["setup", "--scheme", "cs"]), EXIT_CONFIG);
    let v2 = env.ok(&["--seed", "2", "setup", "--scheme", "cs", "--force"]);
    assert_ne!(v2["fingerprint"], v["fingerprint"]);

    assert_eq!(
        env.code(&["setup", "--scheme", "ds", "--curve", "type-a"]),
        EXIT_CONFIG
    );
    assert!(!env.home().join("ds").exists());
    assert_eq!(
        env.code(&["setup", "--scheme", "ds", "--group-id", "1"]),
        EXIT_CONFIG
    );
    assert_eq!(env.code(&["setup", "--scheme", "bogus"]), EXIT_CONFIG);

    fs::write(env.home().join(".lock"), "1").unwrap();
    assert_eq!(env.code(&["setup", "--scheme", "ds"]), EXIT_CONFIG);
    fs::remove_file(env.home().join(".lock")).unwrap();
    env.ok(&["setup", "--scheme", "ds"]);
    assert!(!env.home().join(".lock").exists());
}

#[test]
fn join_rules() {
    let env = Env::new();
    assert_eq!(env.code(&["join", "a", "--scheme", "ds-cpa"]), EXIT_CONFIG);
    env.ok(&["--seed", "3", "setup", "--scheme", "ds"]);
    let v = env.ok(&["--seed", "4", "join", "a", "--scheme", "ds-cpa"]);
    assert_eq!(v["index"], 0);
    let v = env.ok(&["--seed", "5", "join", "b", "--scheme", "ds-cca2"]);
    assert_eq!(v["index"], 1);
    assert_eq!(env.code(&["join", "a", "--scheme", "ds-cca2"]), EXIT_CONFIG);
    assert_eq!(
        env.code(&["join", "../x", "--scheme", "ds-cca2"]),
        EXIT_CONFIG
    );
    assert_eq!(env.code(&["join", "c", "--scheme", "cs"]), EXIT_CONFIG);
    #[cfg(unix)]
    assert_eq!(mode_of(&env.home().join("members/a.key")), 0o600);
    let group: Value =
        serde_json::from_slice(&fs::read(env.home().join("ds/group.json")).unwrap()).unwrap();
    assert_eq!(group["members"], serde_json::json!(["a", "b"]));
}

fn frame_oracle_positions(n: usize) -> Vec<(f64, f64)> {
    // linear leg from (45.0, 9.0) to (45.03, 9.0) over 60 s, one frame per second
    (0..n)
        .map(|t| (45.0 + 0.03 * t as f64 / 60.0, 9.0))
        .collect()
}

#[test]
fn flight_observation_and_disclosure() {
    let env = Env::new();
    env.ok(&["--seed", "10", "setup", "--scheme", "ds"]);
    env.ok(&["--seed", "11", "join", "ua-1", "--scheme", "ds-cca2"]);
    env.ok(&["--seed", "12", "join", "ua-2", "--scheme", "ds-cca2"]);
    let track = env.write("track.toml", TRACK);
    let out = env.s("f.bin");
    let v = env.ok(&[
        "--seed",
        "13",
        "fly",
        "ua-2",
        "--track",
        &track,
        "--duration",
        "60",
        "--precompute",
        "--start",
        "1700000000",
        "--out",
        &out,
        "--pcap",
        &env.s("f.pcap"),
    ]);
    assert_eq!(v["frames"], 60);
    assert_eq!(v["precompute_bytes"], 20 + 60 * 608);
    let fs_ = frames(Path::new(&out));
    assert_eq!(fs_.len(), 60);
    assert_eq!(
        fs::read(env.path("f.pcap")).unwrap().len(),
        24 + fs_.iter().map(|f| 16 + f.len()).sum::<usize>()
    );

    let clean = env.ok(&["observe", "--frames", &out, "--now", "1700000000"]);
    assert_eq!(clean["counts"]["accepted"], 60);
    let stale = env.run(&["observe", "--frames", &out, "--now", "1700000100"]);
    assert_eq!(stale.status.code(), Some(EXIT_VERIFY));
    let stale: Value = serde_json::from_slice(&stale.stdout).unwrap();
    assert_eq!(stale["counts"]["replay"], 60);

    let zone = [
        [45.0101, 8.99],
        [45.0101, 9.01],
        [45.0202, 9.01],
        [45.0202, 8.99],
    ];
    let ztext = format!("vertices = {}\n", serde_json::to_string(&zone).unwrap());
    let zpath = env.write("zone.toml", &ztext);
    let reports = env.s("reports");
    let v = env.ok(&[
        "observe",
        "--frames",
        &out,
        "--zone",
        &zpath,
        "--now",
        "1700000000",
        "--out",
        &reports,
        "--name",
        "tower",
    ]);
    let expected: Vec<usize> = frame_oracle_positions(60)
        .iter()
        .enumerate()
        .filter(|(_, (lat, lon))| *lat > 45.0101 && *lat < 45.0202 && *lon > 8.99 && *lon < 9.01)
        .map(|(i, _)| i)
        .collect();
    let got: Vec<usize> = v["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|x| x["verdict"] == "invasion")
        .map(|x| x["index"].as_u64().unwrap() as usize)
        .collect();
    assert_eq!(got, expected);
    assert_eq!(v["reports"].as_array().unwrap().len(), expected.len());

    let r0 = format!("{reports}/tower-0.json");
    let acks = env.ok(&["disclose", &r0]);
    assert_eq!(acks, serde_json::json!([{"verified": true, "case_id": 1}]));
    let audit = fs::read_to_string(env.home().join("audit.jsonl")).unwrap();
    assert!(audit.contains("\"member\":\"ua-2\""));
    #[cfg(unix)]
    assert_eq!(mode_of(&env.home().join("audit.jsonl")), 0o600);

    let mut forged: InvasionReport = serde_json::from_slice(&fs::read(&r0).unwrap()).unwrap();
    forged.frame[HEADER_BYTES + 30] ^= 0x10;
    let n = forged.frame.len() - FCS_BYTES;
    let sum = fcs(&forged.frame[..n]);
    forged.frame[n..].copy_from_slice(&sum.to_be_bytes());
    let fpath = env.write("forged.json", &serde_json::to_string(&forged).unwrap());
    let out = env.run(&["disclose", &fpath]);
    assert_eq!(out.status.code(), Some(EXIT_VERIFY));
    let acks: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(acks, serde_json::json!([{"verified": false, "case_id": 2}]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(!stdout.contains("ua-"));
}

#[test]
fn cs_group_end_to_end() {
    let env = Env::new();
    env.ok(&[
        "--seed",
        "20",
        "setup",
        "--scheme",
        "cs",
        "--out",
        &env.s("exported.gpk"),
    ]);
    env.ok(&["--seed", "21", "join", "alpha", "--scheme", "cs"]);
    env.ok(&["--seed", "22", "join", "beta", "--scheme", "cs"]);
    let track = env.write("track.toml", TRACK);
    let out = env.s("cs.bin");
    env.ok(&[
        "--seed",
        "23",
        "fly",
        "alpha",
        "--track",
        &track,
        "--duration",
        "3",
        "--rate",
        "2",
        "--start",
        "500",
        "--out",
        &out,
    ]);
    let fs_ = frames(Path::new(&out));
    assert_eq!(fs_.len(), 6);
    for f in &fs_ {
        let p = decode_payload(&decode_frame(f).unwrap().payload).unwrap();
        assert!((1343..=1347).contains(&p.signature.to_base58().len()));
    }

    // an observer with only the exported key
    let pbir = env.path("observer-pbir");
    fs::create_dir_all(&pbir).unwrap();
    fs::copy(env.path("exported.gpk"), pbir.join("1.gpk")).unwrap();
    let zone = env.write(
        "zone.toml",
        "vertices = [[44, 8], [46, 8], [46, 10], [44, 10]]\n",
    );
    let reports = env.s("r");
    let v = env.ok(&[
        "observe",
        "--frames",
        &out,
        "--now",
        "500",
        "--pbir",
        pbir.to_str().unwrap(),
        "--zone",
        &zone,
        "--out",
        &reports,
    ]);
    assert_eq!(v["counts"]["invasion"], 6);
    let acks = env.ok(&[
        "disclose",
        &format!("{reports}/observer-0.json"),
        &format!("{reports}/observer-5.json"),
    ]);
    assert_eq!(acks.as_array().unwrap().len(), 2);
    let audit = fs::read_to_string(env.home().join("audit.jsonl")).unwrap();
    assert_eq!(audit.matches("\"member\":\"alpha\"").count(), 2);

    assert_eq!(
        env.code(&[
            "fly",
            "alpha",
            "--track",
            &track,
            "--duration",
            "1",
            "--rate",
            "0",
            "--out",
            &out
        ]),
        EXIT_CONFIG
    );
    assert_eq!(
        env.code(&[
            "fly",
            "nobody",
            "--track",
            &track,
            "--duration",
            "1",
            "--out",
            &out
        ]),
        EXIT_CONFIG
    );
    assert_eq!(
        env.code(&["precompute", "alpha", "--out", &env.s("x.store")]),
        EXIT_CONFIG
    );
}

#[test]
fn store_files_and_underrun() {
    let env = Env::new();
    env.ok(&["--seed", "30", "setup", "--scheme", "ds"]);
    env.ok(&["--seed", "31", "join", "u", "--scheme", "ds-cpa"]);
    let store = env.s("u.store");
    let v = env.ok(&[
        "--seed",
        "32",
        "precompute",
        "u",
        "--seconds",
        "8",
        "--out",
        &store,
    ]);
    assert_eq!(v["file_bytes"], 20 + 8 * 288);
    assert_eq!(v["bundle_bytes"], 288);
    assert_eq!(fs::metadata(&store).unwrap().len(), 20 + 8 * 288);

    let track = env.write("track.toml", TRACK);
    let out = env.s("a.bin");
    env.ok(&[
        "--seed",
        "33",
        "fly",
        "u",
        "--track",
        &track,
        "--duration",
        "5",
        "--store",
        &store,
        "--start",
        "0",
        "--out",
        &out,
    ]);
    let v = env.ok(&["precompute", "--inspect", &store]);
    assert_eq!(
        (
            v["bundles"].as_u64(),
            v["used"].as_u64(),
            v["remaining"].as_u64()
        ),
        (Some(8), Some(5), Some(3))
    );
    assert_eq!(v["mode"], "ds-cpa");
    assert_eq!(v["curve"], "bn254");

    let out2 = env.s("b.bin");
    let r = env.run(&[
        "--seed",
        "34",
        "fly",
        "u",
        "--track",
        &track,
        "--duration",
        "5",
        "--store",
        &store,
        "--start",
        "5",
        "--out",
        &out2,
    ]);
    assert_eq!(r.status.code(), Some(EXIT_CRYPTO));
    assert_eq!(frames(Path::new(&out2)).len(), 3);
    let v = env.ok(&["precompute", "--inspect", &store]);
    assert_eq!(v["remaining"], 0);

    // both flights observed as one capture: every frame distinct and valid
    let mut all = frames(Path::new(&out));
    all.extend(frames(Path::new(&out2)));
    let mut sorted = all.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), 8);
    let joined = env.path("all.bin");
    a2rid::wire::write_frames_file(fs::File::create(&joined).unwrap(), &all).unwrap();
    let v = env.ok(&[
        "observe",
        "--frames",
        joined.to_str().unwrap(),
        "--now",
        "0",
    ]);
    assert_eq!(v["counts"]["accepted"], 8);
}

#[test]
fn bench_reports_and_validates_runs() {
    let env = Env::new();
    assert_eq!(env.code(&["bench", "--runs", "99"]), EXIT_CONFIG);
    let v = env.ok(&[
        "--seed", "1", "bench", "--runs", "100", "--scheme", "cs", "--curve", "toy",
    ]);
    let ops: Vec<_> = v["ops"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["op"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ops, ["cs_sign", "cs_verify", "cs_open"]);
    assert_eq!(v["warmup"], 10);
    for o in v["ops"].as_array().unwrap() {
        assert_eq!(o["runs"], 100);
        let (mean, min, max) = (
            o["mean_ms"].as_f64().unwrap(),
            o["min_ms"].as_f64().unwrap(),
            o["max_ms"].as_f64().unwrap(),
        );
        assert!(min <= mean && mean <= max && o["ci95_ms"].as_f64().unwrap() >= 0.0);
    }
    let v = env.ok(&[
        "--seed",
        "1",
        "bench",
        "--runs",
        "100",
        "--scheme",
        "ds-cpa",
        "--precompute",
    ]);
    let pre = v["ops"]
        .as_array()
        .unwrap()
        .iter()
        .find(|o| o["op"] == "ds_sign_cpa_pre")
        .unwrap();
    assert_eq!(pre["ops"]["pairings"], 0);
    assert_eq!(pre["ops"]["scalar_mults"], 0);
    assert_eq!(
        env.code(&["bench", "--runs", "100", "--scheme", "ds-cpa", "--curve", "type-a"]),
        EXIT_CONFIG
    );
}

#[test]
fn simulate_is_deterministic() {
    let env = Env::new();
    let cfg = env.write(
        "s.toml",
        r#"
schema = 1
seed = 5
duration_s = 12

[adversary]
replay_rate = 1.0
replay_delay_s = 10.0

[[groups]]
id = 2
scheme = "ds"

[[drones]]
name = "d1"
group = 2
scheme = "ds-cpa"
track = [[0, 45.0, 9.0, 50], [12, 45.01, 9.0, 50]]

[[drones]]
name = "d2"
group = 2
scheme = "ds-cca2"
track = [[0, 45.0, 9.1, 50], [12, 45.01, 9.1, 50]]

[[observers]]
name = "o"
"#,
    );
    let a = env.run(&["simulate", &cfg, "--pcap", &env.s("sim.pcap")]);
    let b = env.run(&["simulate", &cfg]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = env.run(&["--seed", "6", "simulate", &cfg]);
    assert_ne!(a.stdout, c.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schemes"]["ds-cpa"]["accepted"], 12);
    assert_eq!(v["schemes"]["ds-cca2"]["accepted"], 12);
    assert_eq!(v["injected"]["rejected"]["replay"], 24);
    assert!(fs::metadata(env.path("sim.pcap")).unwrap().len() > 24);
    assert_eq!(
        env.code(&["simulate", &env.write("bad.toml", "schema = 1\n")]),
        EXIT_CONFIG
    );
}

#[test]
fn track_file_matches_library_track() {
    // The oracle positions above assume the CLI interpolates as the library does.
    let t = Track {
        waypoints: vec![
            Waypoint {
                t: 0.0,
                lat: 45.0,
                lon: 9.0,
                alt: 100.0,
            },
            Waypoint {
                t: 60.0,
                lat: 45.03,
                lon: 9.0,
                alt: 120.0,
            },
        ],
        gcs: Waypoint {
            t: 0.0,
            lat: 45.0,
            lon: 9.0,
            alt: 0.0,
        },
    };
    for (i, (lat, _)) in frame_oracle_positions(60).iter().enumerate() {
        assert!((t.position(i as f64).0.lat - lat).abs() < 1e-12);
    }
    let z = Polygon {
        vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]],
    };
    assert!(z.contains(0.5, 0.5));
}
