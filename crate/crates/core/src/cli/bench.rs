//! Per-operation latency statistics.
//!
//! Each operation is run `WARMUP` times unmeasured, then `runs` times with a
//! monotonic clock around every single call. Precomputed signing draws from a
//! store filled before timing starts.

use std::hint::black_box;
use std::time::Instant;

use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::algebra::{measure, BilinearContext, Engine, OpCounts};
use crate::cs::{self, CsGroupPublicKey, CsMemberKey, CsOpeningKey, CsRegistry};
use crate::ds::{
    self, DsAuthorityKeys, DsGroupPublicKey, DsMemberKey, DsMode, DsRegistry, PrecomputeStore,
};
use crate::primitives::dsig::dsig_keygen;

pub const WARMUP: usize = 10;
pub const MIN_RUNS: usize = 100;
/// Members enrolled before opening, so lookups scan a real registry.
pub const BENCH_MEMBERS: usize = 5;
/// Signing must fit between two broadcasts at the minimum rate.
pub const SIGN_BOUND_MS: f64 = 1000.0;

const MSG: &[u8] = b"\x00\x00\x00\x01bench telemetry of forty-one bytes.";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpStats {
    pub op: String,
    pub runs: usize,
    pub mean_ms: f64,
    /// Half-width of the 95% confidence interval of the mean.
    pub ci95_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    /// Counted on one extra call outside the timed runs.
    pub ops: OpCounts,
}

impl OpStats {
    pub fn from_samples(op: &str, samples_ms: &[f64], ops: OpCounts) -> Self {
        let n = samples_ms.len();
        assert!(n >= 2, "need at least two samples");
        let mean = samples_ms.iter().sum::<f64>() / n as f64;
        let var = samples_ms.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("n >= 2")
            .inverse_cdf(0.975);
        OpStats {
            op: op.to_string(),
            runs: n,
            mean_ms: mean,
            ci95_ms: t * (var / n as f64).sqrt(),
            min_ms: samples_ms.iter().copied().fold(f64::INFINITY, f64::min),
            max_ms: samples_ms.iter().copied().fold(0.0, f64::max),
            ops,
        }
    }

    pub fn is_sign(&self) -> bool {
        self.op.contains("_sign")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub runs: usize,
    pub warmup: usize,
    pub ops: Vec<OpStats>,
}

impl BenchReport {
    pub fn get(&self, op: &str) -> Option<&OpStats> {
        self.ops.iter().find(|s| s.op == op)
    }

    /// Signing operations whose slowest run reached the bound.
    pub fn over_bound(&self) -> Vec<&OpStats> {
        self.ops
            .iter()
            .filter(|s| s.is_sign() && s.max_ms >= SIGN_BOUND_MS)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

/// Times `f` over `runs` calls after the warm-up. `f` gets the call index.
pub fn time_op<T>(op: &str, runs: usize, mut f: impl FnMut(usize) -> T) -> OpStats {
    let mut f = |i: usize| {
        black_box(f(i));
    };
    time_interleaved(vec![(op.to_string(), &mut f)], runs).remove(0)
}

type Op<'a> = (String, &'a mut dyn FnMut(usize));

/// Times several operations round-robin, so slow drift in the host (clock
/// scaling, cache state) lands on all of them alike.
pub fn time_interleaved(mut ops: Vec<Op<'_>>, runs: usize) -> Vec<OpStats> {
    for i in 0..WARMUP {
        for (_, f) in ops.iter_mut() {
            f(i);
        }
    }
    let mut samples = vec![Vec::with_capacity(runs); ops.len()];
    for i in 0..runs {
        for ((_, f), s) in ops.iter_mut().zip(samples.iter_mut()) {
            let start = Instant::now();
            f(WARMUP + i);
            s.push(start.elapsed().as_secs_f64() * 1e3);
        }
    }
    ops.into_iter()
        .zip(samples)
        .map(|((name, f), s)| {
            let (_, counts) = measure(|| f(WARMUP + runs));
            OpStats::from_samples(&name, &s, counts)
        })
        .collect()
}

struct CsFixture<E: Engine> {
    ctx: BilinearContext<E>,
    gpk: CsGroupPublicKey<E>,
    ok: CsOpeningKey<E>,
    reg: CsRegistry<E>,
    key: CsMemberKey<E>,
}

fn cs_fixture<E: Engine, R: RngCore + CryptoRng>(rng: &mut R) -> CsFixture<E> {
    let ctx = BilinearContext::<E>::default_for_engine();
    let (gpk, ik, ok, mut reg) = cs::cs_setup(&ctx, rng);
    let mut key = None;
    for _ in 0..BENCH_MEMBERS {
        let (state, req) = cs::cs_join_request(&ctx, rng);
        let cert = cs::cs_join_issue(&ctx, &ik, &req, &mut reg, rng).expect("honest join");
        key = Some(cs::cs_join_finalize(&ctx, &gpk, &state, &cert).expect("honest join"));
    }
    CsFixture {
        ctx,
        gpk,
        ok,
        reg,
        key: key.expect("members > 0"),
    }
}

/// `cs_sign` over `runs`, then `cs_verify` and `cs_open` (which verifies
/// first) over `aux_runs`.
pub fn bench_cs<E: Engine, R: RngCore + CryptoRng>(
    runs: usize,
    aux_runs: usize,
    rng: &mut R,
) -> Vec<OpStats> {
    let f = cs_fixture::<E, R>(rng);
    let sign = time_op("cs_sign", runs, |_| {
        cs::cs_sign(&f.ctx, &f.gpk, &f.key, MSG, rng)
    });
    let sigs: Vec<_> = (0..aux_runs.min(50))
        .map(|_| cs::cs_sign(&f.ctx, &f.gpk, &f.key, MSG, rng))
        .collect();
    let verify = time_op("cs_verify", aux_runs, |i| {
        assert!(cs::cs_verify(&f.ctx, &f.gpk, MSG, &sigs[i % sigs.len()]))
    });
    let open = time_op("cs_open", aux_runs, |i| {
        cs::cs_open(&f.ctx, &f.gpk, &f.ok, &f.reg, MSG, &sigs[i % sigs.len()])
            .expect("honest signature")
    });
    vec![sign, verify, open]
}

struct DsFixture<E: Engine> {
    ctx: BilinearContext<E>,
    gpk: DsGroupPublicKey<E>,
    keys: DsAuthorityKeys<E>,
    reg: DsRegistry<E>,
    key: DsMemberKey<E>,
}

fn ds_fixture<E: Engine, R: RngCore + CryptoRng>(rng: &mut R) -> DsFixture<E> {
    let ctx = BilinearContext::<E>::default_for_engine();
    let (gpk, keys) = ds::ds_setup(&ctx, rng).expect("asymmetric curve");
    let mut reg = DsRegistry::default();
    let mut key = None;
    for _ in 0..BENCH_MEMBERS {
        let ua = dsig_keygen::<E, _>(&ctx, rng);
        let (state, req) = ds::ds_join_request(&ctx, &gpk, &ua.sk, rng);
        let issued =
            ds::ds_join_issue(&ctx, &keys, &gpk, &mut reg, &req, &ua.pk, rng).expect("honest join");
        key = Some(
            ds::ds_join_finalize(&ctx, &gpk, &state, &req, &ua.pk, &issued).expect("honest join"),
        );
    }
    DsFixture {
        ctx,
        gpk,
        keys,
        reg,
        key: key.expect("members > 0"),
    }
}

/// Plain signing per mode, plus precomputed signing when `precompute` is
/// set, over `runs`; the modes are timed side by side. Verification and
/// opening run `aux_runs` times.
pub fn bench_ds<E: Engine, R: RngCore + CryptoRng>(
    modes: &[DsMode],
    runs: usize,
    aux_runs: usize,
    precompute: bool,
    rng: &mut R,
) -> Vec<OpStats> {
    let f = ds_fixture::<E, R>(rng);
    let mut rngs: Vec<ChaCha20Rng> = modes
        .iter()
        .map(|_| ChaCha20Rng::from_rng(&mut *rng).expect("rng"))
        .collect();
    let mut out = Vec::new();

    let mut plain: Vec<_> = modes
        .iter()
        .zip(rngs.iter_mut())
        .map(|(&mode, r)| {
            let f = &f;
            move |_: usize| {
                black_box(ds::ds_sign(&f.ctx, &f.gpk, &f.key, mode, MSG, r));
            }
        })
        .collect();
    out.extend(time_interleaved(
        modes
            .iter()
            .zip(plain.iter_mut())
            .map(|(&m, c)| (sign_name(m), c as &mut dyn FnMut(usize)))
            .collect(),
        runs,
    ));

    if precompute {
        let mut stores: Vec<PrecomputeStore<E>> = modes
            .iter()
            .map(|&mode| {
                ds::precompute_generate(&f.ctx, &f.key, mode, (WARMUP + runs + 1) as u32, 1, rng)
            })
            .collect();
        let mut pre: Vec<_> = modes
            .iter()
            .zip(stores.iter_mut())
            .map(|(&mode, store)| {
                let f = &f;
                move |_: usize| {
                    black_box(
                        ds::ds_sign_precomputed(&f.ctx, &f.gpk, store, mode, MSG)
                            .expect("store sized for the run"),
                    );
                }
            })
            .collect();
        out.extend(time_interleaved(
            modes
                .iter()
                .zip(pre.iter_mut())
                .map(|(&m, c)| (format!("{}_pre", sign_name(m)), c as &mut dyn FnMut(usize)))
                .collect(),
            runs,
        ));
    }

    for &mode in modes {
        let sigs: Vec<_> = (0..aux_runs.min(50))
            .map(|_| ds::ds_sign(&f.ctx, &f.gpk, &f.key, mode, MSG, rng))
            .collect();
        out.push(time_op(
            &format!("ds_verify_{}", mode_suffix(mode)),
            aux_runs,
            |i| assert!(ds::ds_verify(&f.ctx, &f.gpk, MSG, &sigs[i % sigs.len()])),
        ));
        out.push(time_op(
            &format!("ds_open_{}", mode_suffix(mode)),
            aux_runs,
            |i| {
                ds::ds_open(&f.ctx, &f.keys, &f.reg, &sigs[i % sigs.len()])
                    .expect("honest signature")
            },
        ));
    }
    out
}

pub fn sign_name(mode: DsMode) -> String {
    format!("ds_sign_{}", mode_suffix(mode))
}

fn mode_suffix(mode: DsMode) -> &'static str {
    match mode {
        DsMode::Cca2 => "cca2",
        DsMode::Cpa => "cpa",
    }
}
