//! Pinned-randomness transcripts on the toy curve, shared by the protocol
//! tests and the acceptance run.

use a2rid::algebra::{FixedNonces, Scalar};
use a2rid::cs::*;
use a2rid::ds::*;
use a2rid::primitives::csc::CSC_ALPHA_LABEL;
use a2rid::primitives::nizk::NIZK_LABEL;
use a2rid::{BilinearContext, ToyCurve};
use ark_ec::CurveGroup;
use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use hkdf::Hkdf;
use sha2::{Digest, Sha256};

use super::{add, cat, inv, mul, oracle, scalar_bytes, scalar_u64 as val, sub, var};

type T = ToyCurve;

/// Sign, verify and open on the toy curve with pinned randomness; every
/// group element is checked through its discrete log.
pub fn cs_transcript() {
    let ctx = BilinearContext::<T>::default_for_engine();
    let o = oracle();
    let h0 = 29;
    let (x, y) = (3, 4);
    let (x1, x2, x3, x4, x5) = (11, 13, 17, 19, 23);
    let (gpk, ik, ok) = cs_setup_with(
        &ctx,
        o.gt(h0),
        &mut FixedNonces::new(&[x, y, x1, x2, x3, x4, x5]),
    );
    let k = 5;
    let (state, req) = cs_join_request_with(&ctx, &mut FixedNonces::new(&[k, 3]));
    let mut reg = CsRegistry::default();
    let cert = cs_join_issue_with(&ctx, &ik, &req, &mut reg, &mut FixedNonces::new(&[2])).unwrap();
    let gsk = cs_join_finalize(&ctx, &gpk, &state, &cert).unwrap();
    let (a, b, c_cert) = (2, 8, 126);

    let m = b"telemetry";
    let (u, r, r2, rho, mu, nu) = (6, 7, 8, 9, 10, 12);
    let (sig, commitments) = cs_sign_with(
        &ctx,
        &gpk,
        &gsk,
        m,
        &mut FixedNonces::new(&[u, r, r2, rho, mu, nu]),
    );

    // public key in exponents of gT
    let y1 = add(x1, mul(h0, x2));
    let y2 = add(x3, mul(h0, x4));
    let y3 = x5;

    let t1 = u;
    let t2 = mul(h0, u);
    let t3 = add(mul(y1, u), k);
    let hh = super::hash(
        CSC_ALPHA_LABEL,
        &cat(&[o.gt_bytes(t1), o.gt_bytes(t2), o.gt_bytes(t3)]),
    );
    let t4 = add(mul(y2, u), mul(y3, mul(u, hh)));
    let t5 = mul(a, r2);
    let t6 = mul(b, r2);
    let t7 = mul(c_cert, mul(r2, r));

    let big_r = [
        sub(mul(t7, rho), mul(mul(t6, x), mu)),
        nu,
        mul(h0, nu),
        add(mul(y1, nu), mu),
        add(mul(y2, nu), mul(y3, mul(nu, hh))),
    ];
    for (i, ri) in big_r.iter().enumerate() {
        assert_eq!(o.log_gt(&commitments.0[i]), *ri, "R{}", i + 1);
    }

    let mut input = Vec::new();
    for ri in big_r {
        input.extend_from_slice(o.gt_bytes(ri));
    }
    for part in [
        o.g1_bytes(1),
        o.gt_bytes(1),
        o.g1_bytes(x),
        o.gt_bytes(y),
        o.gt_bytes(h0),
        o.gt_bytes(y1),
        o.gt_bytes(y2),
        o.gt_bytes(y3),
    ] {
        input.extend_from_slice(part);
    }
    input.extend_from_slice(&var(m));
    let c = super::hash(CHALLENGE_LABEL, &input);
    let s_rho = add(mul(c, inv(r)), rho);
    let s_mu = add(mul(c, k), mu);
    let s_nu = add(mul(c, u), nu);

    let mut expect = Vec::new();
    for s in [s_rho, s_mu, s_nu] {
        expect.extend_from_slice(&super::scalar_bytes(s));
    }
    for t in [t1, t2, t3, t4] {
        expect.extend_from_slice(o.gt_bytes(t));
    }
    for p in [t5, t6, t7] {
        expect.extend_from_slice(o.g1_bytes(p));
    }
    expect.extend_from_slice(&super::scalar_bytes(c));
    assert_eq!(sig.to_bytes(), expect);

    // verifier side, evaluated from the reconciled equations
    let r_prime = [
        sub(
            sub(mul(t7, s_rho), mul(mul(t6, x), s_mu)),
            mul(mul(t5, x), c),
        ),
        sub(s_nu, mul(t1, c)),
        sub(mul(h0, s_nu), mul(t2, c)),
        sub(add(mul(y1, s_nu), s_mu), mul(t3, c)),
        sub(mul(add(y2, mul(y3, hh)), s_nu), mul(t4, c)),
    ];
    assert_eq!(r_prime, big_r);
    let recomputed = cs_recompute_commitments(&ctx, &gpk, &sig);
    for (i, ri) in r_prime.iter().enumerate() {
        assert_eq!(o.log_gt(&recomputed.0[i]), *ri, "R{}'", i + 1);
    }
    // e(T5, Y^) = e(T6, g) in exponents
    assert_eq!(mul(t5, y), t6);
    assert!(cs_verify(&ctx, &gpk, m, &sig));

    // opener: T4 check and P2 = T3 / (T1^x1 T2^x2)
    assert_eq!(t4, add(mul(t1, add(x3, mul(x5, hh))), mul(t2, x4)));
    assert_eq!(sub(sub(t3, mul(t1, x1)), mul(t2, x2)), k);
    assert_eq!(o.log_gt(&cs_decrypt_token(&ctx, &ok, &sig).unwrap()), k);
    assert_eq!(cs_open(&ctx, &gpk, &ok, &reg, m, &sig), Ok(0));
}

fn crs_oracle(label: &str) -> Vec<u8> {
    Sha256::new()
        .chain_update([label.len() as u8])
        .chain_update(label)
        .chain_update([0u8; 32])
        .finalize()
        .to_vec()
}

/// Join and sign on the toy curve with every random choice pinned, checked
/// against values computed from discrete logs alone.
pub fn ds_transcript() {
    let o = oracle();
    let ctx = BilinearContext::<T>::default_for_engine();
    let g = |k: u64| o.g1_bytes(k).to_vec();
    let (x1, x2, sk_o) = (2, 3, 7);
    let (gpk, keys) =
        ds_setup_with(&ctx, [0u8; 32], &mut FixedNonces::new(&[x1, x2, sk_o])).unwrap();
    assert_eq!(gpk.crs_s.to_vec(), crs_oracle("a2rid/ds/crs-s"));
    assert_eq!(o.log_g1(&gpk.pk_o.0), sk_o);

    // join request: q, r, ECIES ephemeral e, proof nonce chi
    let (q, r, e, chi, sk_i) = (3, 5, 11, 13, 17u64);
    let (state, req) = ds_join_request_with(
        &ctx,
        &gpk,
        &Scalar::<T>::from(sk_i),
        &mut FixedNonces::new(&[q, r, e, chi]),
    );
    assert_eq!(o.log_g1(&state.q_pt), q);
    assert_eq!(o.log_g1(&req.u_pt), 15);

    let hk = Hkdf::<Sha256>::new(Some(&g(e)), &g(mul(sk_o, e)));
    let mut key = [0u8; 32];
    hk.expand(b"a2rid/ecies/chacha20poly1305", &mut key)
        .unwrap();
    let body = ChaCha20Poly1305::new(Key::from_slice(&key))
        .encrypt(Nonce::from_slice(&[0; 12]), g(r).as_slice())
        .unwrap();
    assert_eq!(req.c_hat, cat(&[&g(e), &body]));

    let bind = cat(&[&gpk.crs_j, &req.c_hat]);
    let c_join = super::hash(
        NIZK_LABEL,
        &cat(&[
            &g(q),
            &g(mul(q, r)),
            &g(1),
            &var(&bind),
            &g(mul(chi, q)),
            &g(chi),
        ]),
    );
    assert_eq!(val(&req.proof.c), c_join);
    assert_eq!(val(&req.proof.s), sub(chi, mul(c_join, r)));

    // issuance: SPS-EQ randomizer y, then ChgRep randomizer psi with mu = q^-1
    let (y, psi) = (6, 9);
    let pk_i = ctx.g2_mul(&Scalar::<T>::from(sk_i)).into_affine();
    let mut reg = DsRegistry::default();
    let issued = ds_join_issue_with(
        &ctx,
        &keys,
        &gpk,
        &mut reg,
        &req,
        &pk_i,
        &mut FixedNonces::new(&[y, psi]),
    )
    .unwrap();
    let z_prime = mul(y, add(mul(x1, 15), mul(x2, q)));
    assert_eq!(o.log_g1(&issued.sigma_prime.z), z_prime);
    assert_eq!(o.log_g1(&issued.sigma_prime.y), inv(y));
    let z_cred = mul(mul(psi, inv(q)), z_prime);
    assert_eq!(z_cred, mul(mul(psi, y), add(mul(x1, r), x2)));
    assert_eq!(o.log_g1(&issued.credential.z), z_cred);
    assert_eq!(o.log_g1(&issued.credential.y), inv(mul(psi, y)));
    assert_eq!(o.log_g1(&issued.credential.y_hat), inv(mul(psi, y)));

    let member = ds_join_finalize(&ctx, &gpk, &state, &req, &pk_i, &issued).unwrap();
    assert_eq!(o.log_g1(&member.r_pt), r);

    let m = b"toy telemetry";
    let (rho, phi, u, v, eta) = (4, 8, 10, 12, 14);
    let y_inv = inv(mul(mul(phi, psi), y));
    let sigma1 = cat(&[
        &g(mul(rho, r)),
        &g(rho),
        &g(mul(mul(phi, rho), z_cred)),
        &g(y_inv),
        &g(y_inv),
    ]);

    let sig = ds_sign_with(
        &ctx,
        &gpk,
        &member,
        DsMode::Cca2,
        m,
        &mut FixedNonces::new(&[rho, phi, u, v, eta]),
    );
    let c = super::hash(
        SOK_LABEL,
        &cat(&[
            &[1],
            &gpk.crs_s,
            &g(v),
            &g(mul(eta, y_inv)),
            &g(add(v, eta)),
            &sigma1,
            &var(m),
        ]),
    );
    let expected = cat(&[
        &sigma1,
        &g(mul(u, y_inv)),
        &g(add(rho, u)),
        &scalar_bytes(c),
        &scalar_bytes(add(v, mul(c, rho))),
        &scalar_bytes(add(eta, mul(c, u))),
    ]);
    assert_eq!(sig.to_bytes(), expected);
    assert!(ds_verify(&ctx, &gpk, m, &sig));

    let sig = ds_sign_with(
        &ctx,
        &gpk,
        &member,
        DsMode::Cpa,
        m,
        &mut FixedNonces::new(&[rho, phi, v]),
    );
    let c = super::hash(
        SOK_LABEL,
        &cat(&[&[2], &gpk.crs_s, &g(v), &sigma1, &var(m)]),
    );
    let expected = cat(&[
        &sigma1,
        &scalar_bytes(c),
        &scalar_bytes(add(v, mul(c, rho))),
    ]);
    assert_eq!(sig.to_bytes(), expected);
    assert!(ds_verify(&ctx, &gpk, m, &sig));
    assert_eq!(ds_open(&ctx, &keys, &reg, &sig), Ok(0));
}

/// `e(rho*R, P^) = e(rho*P, R^_j)` holds exactly when `r_j = r`.
pub fn ds_open_relation() {
    let o = oracle();
    let ctx = BilinearContext::<T>::default_for_engine();
    for rho in [1, 2, 77, 65520] {
        for r in 1..30 {
            let lhs = ctx.pairing(&o.g1(mul(rho, r)), &ctx.g2);
            for rj in 1..30 {
                assert_eq!(lhs == ctx.pairing(&o.g1(rho), &o.g1(rj)), r == rj);
            }
        }
    }
}
