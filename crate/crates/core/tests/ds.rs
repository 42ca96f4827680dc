mod common;

use a2rid::algebra::{measure, Scalar};
use a2rid::ds::*;
use a2rid::primitives::dsig::{dsig_keygen, dsig_sign, DsigKeys};
use a2rid::{BilinearContext, Bn254, Engine, ToyCurve, TypeA512};
use ark_ec::CurveGroup;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use common::{oracle, scalar_u64 as val};

type B = Bn254;
type T = ToyCurve;

struct Group<E: Engine> {
    ctx: BilinearContext<E>,
    gpk: DsGroupPublicKey<E>,
    keys: DsAuthorityKeys<E>,
    reg: DsRegistry<E>,
}

fn group<E: Engine>(rng: &mut ChaCha20Rng) -> Group<E> {
    let ctx = BilinearContext::<E>::default_for_engine();
    let (gpk, keys) = ds_setup(&ctx, rng).unwrap();
    Group {
        ctx,
        gpk,
        keys,
        reg: DsRegistry::default(),
    }
}

fn join<E: Engine>(g: &mut Group<E>, rng: &mut ChaCha20Rng) -> DsMemberKey<E> {
    let ua: DsigKeys<E> = dsig_keygen(&g.ctx, rng);
    let (state, req) = ds_join_request(&g.ctx, &g.gpk, &ua.sk, rng);
    let issued = ds_join_issue(&g.ctx, &g.keys, &g.gpk, &mut g.reg, &req, &ua.pk, rng).unwrap();
    ds_join_finalize(&g.ctx, &g.gpk, &state, &req, &ua.pk, &issued).unwrap()
}

#[test]
fn setup_key_relations_and_curve_gate() {
    let mut rng = ChaCha20Rng::seed_from_u64(200);
    let g = group::<B>(&mut rng);
    assert!(g.keys.matches(&g.ctx, &g.gpk));
    assert_eq!(g.gpk.pk_r.len(), 2);
    assert!(g.gpk.crs_j != g.gpk.crs_o && g.gpk.crs_o != g.gpk.crs_s);
    let ct = a2rid::primitives::pke::pke_encrypt(&g.ctx, &g.gpk.pk_o, b"witness", &mut rng);
    assert_eq!(
        a2rid::primitives::pke::pke_decrypt(&g.keys.ok, &ct).unwrap(),
        b"witness"
    );

    let ctx = BilinearContext::<TypeA512>::default_for_engine();
    assert!(matches!(
        ds_setup(&ctx, &mut rng),
        Err(DsError::SymmetricCurve(_))
    ));

    let t = group::<T>(&mut rng);
    let o = oracle();
    assert_eq!(o.log_g1(&t.gpk.pk_r[0]), val(&t.keys.ik[0]));
    assert_eq!(o.log_g1(&t.gpk.pk_r[1]), val(&t.keys.ik[1]));
}

#[test]
fn join_rejections_leave_registry_unchanged() {
    let mut rng = ChaCha20Rng::seed_from_u64(201);
    let mut g = group::<B>(&mut rng);
    let ua: DsigKeys<B> = dsig_keygen(&g.ctx, &mut rng);
    let other: DsigKeys<B> = dsig_keygen(&g.ctx, &mut rng);
    let (_, req) = ds_join_request(&g.ctx, &g.gpk, &ua.sk, &mut rng);
    let (_, req2) = ds_join_request(&g.ctx, &g.gpk, &ua.sk, &mut rng);

    let mut bad = req.clone();
    bad.sigma_j = dsig_sign::<B>(&other.sk, &bad.c_hat);
    assert_eq!(
        ds_join_issue(&g.ctx, &g.keys, &g.gpk, &mut g.reg, &bad, &ua.pk, &mut rng),
        Err(DsError::WitnessSignature)
    );

    let mut swapped = req.clone();
    swapped.c_hat = req2.c_hat.clone();
    swapped.sigma_j = req2.sigma_j;
    assert_eq!(
        ds_join_issue(&g.ctx, &g.keys, &g.gpk, &mut g.reg, &swapped, &ua.pk, &mut rng),
        Err(DsError::ProofFailure)
    );

    let mut garbled = req.clone();
    garbled.c_hat[40] ^= 1;
    assert!(matches!(
        ds_join_issue(&g.ctx, &g.keys, &g.gpk, &mut g.reg, &garbled, &ua.pk, &mut rng),
        Err(DsError::Pke(_))
    ));

    let mut wrong_q = req.clone();
    wrong_q.q += Scalar::<B>::from(1u64);
    assert_eq!(
        ds_join_issue(&g.ctx, &g.keys, &g.gpk, &mut g.reg, &wrong_q, &ua.pk, &mut rng),
        Err(DsError::StatementMismatch)
    );
    assert!(g.reg.is_empty());

    ds_join_issue(&g.ctx, &g.keys, &g.gpk, &mut g.reg, &req, &ua.pk, &mut rng).unwrap();
    assert_eq!(g.reg.len(), 1);
}

#[test]
fn member_aborts_on_bad_issuance() {
    let mut rng = ChaCha20Rng::seed_from_u64(202);
    let mut g = group::<B>(&mut rng);
    let ua: DsigKeys<B> = dsig_keygen(&g.ctx, &mut rng);
    let (state, req) = ds_join_request(&g.ctx, &g.gpk, &ua.sk, &mut rng);
    let issued =
        ds_join_issue(&g.ctx, &g.keys, &g.gpk, &mut g.reg, &req, &ua.pk, &mut rng).unwrap();

    let (state2, req2) = ds_join_request(&g.ctx, &g.gpk, &ua.sk, &mut rng);
    let issued2 =
        ds_join_issue(&g.ctx, &g.keys, &g.gpk, &mut g.reg, &req2, &ua.pk, &mut rng).unwrap();
    let mixed = DsIssued {
        sigma_prime: issued2.sigma_prime,
        credential: issued.credential,
    };
    assert_eq!(
        ds_join_finalize(&g.ctx, &g.gpk, &state, &req, &ua.pk, &mixed),
        Err(DsError::JoinAbort(JoinCheck::IssuedSignature))
    );
    let mixed = DsIssued {
        sigma_prime: issued.sigma_prime,
        credential: issued2.credential,
    };
    assert_eq!(
        ds_join_finalize(&g.ctx, &g.gpk, &state, &req, &ua.pk, &mixed),
        Err(DsError::JoinAbort(JoinCheck::Credential))
    );
    assert_eq!(
        ds_join_finalize(&g.ctx, &g.gpk, &state2, &req, &ua.pk, &issued),
        Err(DsError::JoinAbort(JoinCheck::Proof))
    );
    let other: DsigKeys<B> = dsig_keygen(&g.ctx, &mut rng);
    assert_eq!(
        ds_join_finalize(&g.ctx, &g.gpk, &state, &req, &other.pk, &issued),
        Err(DsError::JoinAbort(JoinCheck::WitnessSignature))
    );
    let key = ds_join_finalize(&g.ctx, &g.gpk, &state, &req, &ua.pk, &issued).unwrap();
    assert_eq!(key.r_pt, g.ctx.g1_mul(&state.r).into_affine());
}

#[test]
fn toy_transcript_oracle() {
    common::toy::ds_transcript();
}

#[test]
fn toy_open_relation_is_exact() {
    common::toy::ds_open_relation();
}

#[test]
fn sign_verify_both_modes_and_rejections() {
    let mut rng = ChaCha20Rng::seed_from_u64(203);
    let mut g = group::<B>(&mut rng);
    let member = join(&mut g, &mut rng);
    let m = b"lat=45.0 lon=9.0 alt=120";
    for mode in [DsMode::Cca2, DsMode::Cpa] {
        let sig = ds_sign(&g.ctx, &g.gpk, &member, mode, m, &mut rng);
        assert_eq!(sig.mode(), mode);
        let bytes = sig.to_bytes();
        assert_eq!(bytes.len(), DsSignature::<B>::encoded_len(mode));
        assert!(ds_verify(&g.ctx, &g.gpk, m, &sig));
        assert!(ds_verify_bytes(&g.ctx, &g.gpk, mode, m, &bytes));
        assert!(!ds_verify(
            &g.ctx,
            &g.gpk,
            b"lat=45.0 lon=9.0 alt=121",
            &sig
        ));

        let mut bad = sig.clone();
        bad.sigma1.sigma.y = (bad.sigma1.sigma.y + g.ctx.g1).into_affine();
        assert!(!ds_verify(&g.ctx, &g.gpk, m, &bad));

        let other = if mode == DsMode::Cca2 {
            DsMode::Cpa
        } else {
            DsMode::Cca2
        };
        assert!(!ds_verify_bytes(&g.ctx, &g.gpk, other, m, &bytes));
    }
    assert_eq!(DsSignature::<B>::encoded_len(DsMode::Cca2), 416);
    assert_eq!(DsSignature::<B>::encoded_len(DsMode::Cpa), 256);

    // a CPA body reinterpreted with a CCA2 challenge layout must not verify
    let cca = ds_sign(&g.ctx, &g.gpk, &member, DsMode::Cca2, m, &mut rng);
    let DsSok::Cca2 { c, z1, .. } = cca.sigma2 else {
        unreachable!()
    };
    let forged = DsSignature {
        sigma1: cca.sigma1,
        sigma2: DsSok::Cpa { c, z: z1 },
    };
    assert!(!ds_verify(&g.ctx, &g.gpk, m, &forged));
}

#[test]
fn signing_computes_no_pairings() {
    let mut rng = ChaCha20Rng::seed_from_u64(204);
    let mut g = group::<B>(&mut rng);
    let member = join(&mut g, &mut rng);
    for mode in [DsMode::Cca2, DsMode::Cpa] {
        let (_, ops) = measure(|| ds_sign(&g.ctx, &g.gpk, &member, mode, b"m", &mut rng));
        assert_eq!(ops.pairings, 0);
        assert!(ops.scalar_mults > 0);
        let mut store = precompute_generate(&g.ctx, &member, mode, 2, 1, &mut rng);
        let (sig, ops) =
            measure(|| ds_sign_precomputed(&g.ctx, &g.gpk, &mut store, mode, b"m").unwrap());
        assert_eq!(ops.pairings, 0);
        assert_eq!(ops.scalar_mults, 0);
        assert_eq!(ops.hashes, 1);
        assert!(ds_verify(&g.ctx, &g.gpk, b"m", &sig));
    }
}

#[test]
fn bundle_and_rng_paths_are_byte_identical() {
    let mut rng = ChaCha20Rng::seed_from_u64(205);
    let mut g = group::<B>(&mut rng);
    let member = join(&mut g, &mut rng);
    for mode in [DsMode::Cca2, DsMode::Cpa] {
        let seed: u64 = rng.gen();
        let mut a = ChaCha20Rng::seed_from_u64(seed);
        let mut b = ChaCha20Rng::seed_from_u64(seed);
        let mut store = precompute_generate(&g.ctx, &member, mode, 3, 1, &mut a);
        for i in 0..3u8 {
            let m = [i; 9];
            let plain = ds_sign(&g.ctx, &g.gpk, &member, mode, &m, &mut b);
            let pre = ds_sign_precomputed(&g.ctx, &g.gpk, &mut store, mode, &m).unwrap();
            assert_eq!(plain.to_bytes(), pre.to_bytes());
        }
    }
}

#[test]
fn store_capacity_exhaustion_and_file_format() {
    let mut rng = ChaCha20Rng::seed_from_u64(206);
    let mut g = group::<B>(&mut rng);
    let member = join(&mut g, &mut rng);
    let mut store = precompute_generate(&g.ctx, &member, DsMode::Cpa, 4, 1, &mut rng);
    assert_eq!(store.capacity(), 4);
    assert_eq!(
        ds_sign_precomputed(&g.ctx, &g.gpk, &mut store, DsMode::Cca2, b"m").unwrap_err(),
        DsError::ModeMismatch {
            expected: DsMode::Cpa,
            actual: DsMode::Cca2
        }
    );
    ds_sign_precomputed(&g.ctx, &g.gpk, &mut store, DsMode::Cpa, b"m").unwrap();
    assert_eq!(store.capacity(), 3);

    let bytes = store.to_bytes();
    assert_eq!(bytes.len(), store.total_bytes());
    let h = read_header(&bytes).unwrap();
    assert_eq!(
        (h.mode, h.count, h.next, h.bundle_len),
        (DsMode::Cpa, 4, 1, 288)
    );
    let mut reloaded = PrecomputeStore::<B>::from_bytes(&bytes).unwrap();
    assert_eq!(reloaded.capacity(), 3);
    for _ in 0..3 {
        let sig = ds_sign_precomputed(&g.ctx, &g.gpk, &mut reloaded, DsMode::Cpa, b"m").unwrap();
        assert!(ds_verify(&g.ctx, &g.gpk, b"m", &sig));
    }
    assert_eq!(
        ds_sign_precomputed(&g.ctx, &g.gpk, &mut reloaded, DsMode::Cpa, b"m").unwrap_err(),
        DsError::StoreExhausted
    );

    assert!(PrecomputeStore::<B>::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    assert!(PrecomputeStore::<T>::from_bytes(&bytes).is_err());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(PrecomputeStore::<B>::from_bytes(&bad).is_err());
}

#[test]
fn store_sizes_follow_bundle_layout() {
    // CPA bundle: rho, v (2 x 32) + R', P', Z, Y (4 x 32) + Y^ (64) + N (32)
    assert_eq!(Bundle::<B>::encoded_len(DsMode::Cpa), 288);
    // CCA2 adds u, eta (2 x 32) and four G2 points (4 x 64)
    assert_eq!(Bundle::<B>::encoded_len(DsMode::Cca2), 608);
    assert_eq!(STORE_HEADER_BYTES, 20);
    assert_eq!(PrecomputeStore::<B>::file_len(DsMode::Cpa, 60), 17_300);
    assert_eq!(PrecomputeStore::<B>::file_len(DsMode::Cca2, 60), 36_500);
    assert!(
        PrecomputeStore::<B>::file_len(DsMode::Cpa, 420)
            < PrecomputeStore::<B>::file_len(DsMode::Cca2, 420)
    );
}

#[test]
fn open_finds_signer_among_members() {
    let mut rng = ChaCha20Rng::seed_from_u64(207);
    let mut g = group::<B>(&mut rng);
    let members: Vec<_> = (0..5).map(|_| join(&mut g, &mut rng)).collect();
    for (i, member) in members.iter().enumerate() {
        let mode = if i % 2 == 0 {
            DsMode::Cca2
        } else {
            DsMode::Cpa
        };
        let sig = ds_sign(&g.ctx, &g.gpk, member, mode, b"m", &mut rng);
        assert_eq!(ds_open(&g.ctx, &g.keys, &g.reg, &sig), Ok(i));
    }
    let mut other = group::<B>(&mut rng);
    let stranger = join(&mut other, &mut rng);
    let sig = ds_sign(
        &other.ctx,
        &other.gpk,
        &stranger,
        DsMode::Cpa,
        b"m",
        &mut rng,
    );
    assert_eq!(
        ds_open(&g.ctx, &g.keys, &g.reg, &sig),
        Err(DsError::UnknownMember)
    );

    let mut dup = g.reg.clone();
    dup.entries.push(dup.entries[1].clone());
    let sig = ds_sign(&g.ctx, &g.gpk, &members[1], DsMode::Cpa, b"m", &mut rng);
    assert_eq!(
        ds_open(&g.ctx, &g.keys, &dup, &sig),
        Err(DsError::RegistryCorruption(2))
    );
}

#[test]
fn sigma1_differs_across_signatures() {
    let mut rng = ChaCha20Rng::seed_from_u64(208);
    let mut g = group::<B>(&mut rng);
    let member = join(&mut g, &mut rng);
    let mut seen = std::collections::HashSet::new();
    for _ in 0..30 {
        let sig = ds_sign(&g.ctx, &g.gpk, &member, DsMode::Cpa, b"same", &mut rng);
        let mut s1 = Vec::new();
        sig.sigma1.write(&mut s1);
        assert!(seen.insert(s1));
    }
}

#[test]
fn key_files_roundtrip() {
    let mut rng = ChaCha20Rng::seed_from_u64(209);
    let mut g = group::<B>(&mut rng);
    let member = join(&mut g, &mut rng);
    assert_eq!(
        DsGroupPublicKey::<B>::from_keyfile(&g.gpk.to_keyfile()).unwrap(),
        g.gpk
    );
    assert_eq!(
        DsAuthorityKeys::<B>::from_keyfile(&g.keys.to_keyfile()).unwrap(),
        g.keys
    );
    assert_eq!(
        DsMemberKey::<B>::from_keyfile(&member.to_keyfile()).unwrap(),
        member
    );
    assert_eq!(
        DsRegistry::<B>::from_keyfile(&g.reg.to_keyfile()).unwrap(),
        g.reg
    );
    let sk = g.keys.ik[0];
    assert_eq!(
        dsig_key_from_keyfile::<B>(&dsig_key_to_keyfile::<B>(&sk)).unwrap(),
        sk
    );
    assert!(DsGroupPublicKey::<T>::from_keyfile(&g.gpk.to_keyfile()).is_err());
    assert!(DsMemberKey::<B>::from_keyfile(&g.gpk.to_keyfile()).is_err());
}
