//! CS group signatures: Camenisch-Lysyanskaya certificates, a Cramer-Shoup
//! encryption of the signer's registration token, and a Fiat-Shamir proof
//! tying the two together.
//!
//! Group elements of `G` live in G1. Where the symmetric setting pairs two
//! elements of `G`, the second argument is the G2 twin: `X^ = x*g2` and
//! `Y^ = y*g2` are published next to `X` and `Y`. On a Type-1 curve the twins
//! coincide with the G1 values.
//!
//! Target-group arithmetic is additive in code: `y1^u * P2` is `y1 * u + p2`.

use std::fmt;

use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{Field, Zero};
use ark_serialize::Valid;
use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::algebra::{
    gt_pow, random_gt, smul, AlgebraError, BilinearContext, CurveId, Engine, Gt, NonceSource,
    Reader, RngNonces,
};
use crate::primitives::csc::{csc_alpha, CscCiphertext, CscPublicKey, CscSecretKey};
use crate::primitives::keyfile::{field_err, KeyFile, KeyFileError};

pub const JOIN_LABEL: &str = "a2rid/cs/join";
pub const CHALLENGE_LABEL: &str = "a2rid/cs/challenge";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CsError {
    #[error("join proof does not verify")]
    ProofFailure,
    #[error("member token is not a valid group element")]
    InvalidPoint,
    #[error("member token already registered")]
    DuplicateMember,
    #[error("issued certificate failed the member-side check")]
    BadCertificate,
    #[error("signature does not verify")]
    InvalidSignature,
    #[error("ciphertext consistency check failed")]
    CiphertextCheck,
    #[error("no registered member matches")]
    UnknownMember,
    #[error(transparent)]
    Encoding(#[from] AlgebraError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsGroupPublicKey<E: Engine> {
    pub x: E::G1Affine,
    pub x_hat: E::G2Affine,
    pub y: Gt<E>,
    pub y_hat: E::G2Affine,
    pub h: Gt<E>,
    pub y1: Gt<E>,
    pub y2: Gt<E>,
    pub y3: Gt<E>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsIssuingKey<E: Engine> {
    pub x: E::ScalarField,
    pub y: E::ScalarField,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsOpeningKey<E: Engine> {
    pub x1: E::ScalarField,
    pub x2: E::ScalarField,
    pub x3: E::ScalarField,
    pub x4: E::ScalarField,
    pub x5: E::ScalarField,
}

/// `gsk_i`. `p2 = gT^k` is cached so signing needs no pairing for it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsMemberKey<E: Engine> {
    pub k: E::ScalarField,
    pub a: E::G1Affine,
    pub b: E::G1Affine,
    pub c: E::G1Affine,
    pub p2: Gt<E>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsRegistrationEntry<E: Engine> {
    pub p1: E::G1Affine,
    pub p2: Gt<E>,
}

/// Registration list. A member's index is its position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsRegistry<E: Engine> {
    pub entries: Vec<CsRegistrationEntry<E>>,
}

impl<E: Engine> Default for CsRegistry<E> {
    fn default() -> Self {
        CsRegistry {
            entries: Vec::new(),
        }
    }
}

impl<E: Engine> CsRegistry<E> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn find(&self, p2: &Gt<E>) -> Option<usize> {
        self.entries.iter().position(|e| e.p2 == *p2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsJoinState<E: Engine> {
    pub k: E::ScalarField,
    pub p1: E::G1Affine,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsJoinRequest<E: Engine> {
    pub eta1: E::ScalarField,
    pub sk: E::ScalarField,
    pub p1: E::G1Affine,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsCertificate<E: Engine> {
    pub a: E::G1Affine,
    pub b: E::G1Affine,
    pub c: E::G1Affine,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsSignature<E: Engine> {
    pub s_rho: E::ScalarField,
    pub s_mu: E::ScalarField,
    pub s_nu: E::ScalarField,
    pub t1: Gt<E>,
    pub t2: Gt<E>,
    pub t3: Gt<E>,
    pub t4: Gt<E>,
    pub t5: E::G1Affine,
    pub t6: E::G1Affine,
    pub t7: E::G1Affine,
    pub c: E::ScalarField,
}

/// The commitments `R1..R5` hashed into the challenge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsCommitments<E: Engine>(pub [Gt<E>; 5]);

impl<E: Engine> fmt::Display for CsRegistrationEntry<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut b = Vec::new();
        E::write_g1(&self.p1, &mut b);
        for byte in &b[..8.min(b.len())] {
            write!(f, "{byte:02x}")?;
        }
        Ok(())
    }
}

pub fn cs_setup<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    rng: &mut R,
) -> (
    CsGroupPublicKey<E>,
    CsIssuingKey<E>,
    CsOpeningKey<E>,
    CsRegistry<E>,
) {
    let h = random_gt(ctx, rng);
    let (gpk, ik, ok) = cs_setup_with(ctx, h, &mut RngNonces(rng));
    (gpk, ik, ok, CsRegistry::default())
}

/// Setup for a given `h`; draws `x, y, x1..x5` in that order.
pub fn cs_setup_with<E: Engine>(
    ctx: &BilinearContext<E>,
    h: Gt<E>,
    nonces: &mut impl NonceSource,
) -> (CsGroupPublicKey<E>, CsIssuingKey<E>, CsOpeningKey<E>) {
    let ik = CsIssuingKey {
        x: nonces.nonce(),
        y: nonces.nonce(),
    };
    let ok = CsOpeningKey {
        x1: nonces.nonce(),
        x2: nonces.nonce(),
        x3: nonces.nonce(),
        x4: nonces.nonce(),
        x5: nonces.nonce(),
    };
    let gpk = CsGroupPublicKey {
        x: ctx.g1_mul(&ik.x).into_affine(),
        x_hat: ctx.g2_mul(&ik.x).into_affine(),
        y: ctx.gt_pow(&ik.y),
        y_hat: ctx.g2_mul(&ik.y).into_affine(),
        h,
        y1: ctx.gt_pow(&ok.x1) + gt_pow::<E>(&h, &ok.x2),
        y2: ctx.gt_pow(&ok.x3) + gt_pow::<E>(&h, &ok.x4),
        y3: ctx.gt_pow(&ok.x5),
    };
    (gpk, ik, ok)
}

impl<E: Engine> CsOpeningKey<E> {
    /// Checks `y1 = gT^x1 h^x2`, `y2 = gT^x3 h^x4`, `y3 = gT^x5`.
    pub fn matches(&self, ctx: &BilinearContext<E>, gpk: &CsGroupPublicKey<E>) -> bool {
        gpk.y1 == ctx.gt * self.x1 + gpk.h * self.x2
            && gpk.y2 == ctx.gt * self.x3 + gpk.h * self.x4
            && gpk.y3 == ctx.gt * self.x5
    }

    /// The same key viewed as a Cramer-Shoup secret key over GT.
    pub fn as_csc_secret(&self) -> CscSecretKey<E> {
        CscSecretKey {
            x1: self.x3,
            x2: self.x4,
            y1: self.x5,
            y2: E::ScalarField::zero(),
            z1: self.x1,
            z2: self.x2,
        }
    }
}

impl<E: Engine> CsGroupPublicKey<E> {
    pub fn as_csc_public(&self, ctx: &BilinearContext<E>) -> CscPublicKey<E> {
        CscPublicKey {
            g1: ctx.gt,
            g2: self.h,
            c: self.y2,
            d: self.y3,
            h: self.y1,
        }
    }
}

impl<E: Engine> CsIssuingKey<E> {
    pub fn matches(&self, ctx: &BilinearContext<E>, gpk: &CsGroupPublicKey<E>) -> bool {
        gpk.x == ctx.g1_mul(&self.x).into_affine()
            && gpk.y == ctx.gt_pow(&self.y)
            && gpk.x_hat == ctx.g2_mul(&self.x).into_affine()
            && gpk.y_hat == ctx.g2_mul(&self.y).into_affine()
    }
}

fn join_hash<E: Engine>(ctx: &BilinearContext<E>, r: &E::G1Affine) -> E::ScalarField {
    ctx.transcript(JOIN_LABEL).g1(&ctx.g1).g1(r).finish()
}

pub fn cs_join_request<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    rng: &mut R,
) -> (CsJoinState<E>, CsJoinRequest<E>) {
    cs_join_request_with(ctx, &mut RngNonces(rng))
}

/// Draws `k_i` then `rk`.
pub fn cs_join_request_with<E: Engine>(
    ctx: &BilinearContext<E>,
    nonces: &mut impl NonceSource,
) -> (CsJoinState<E>, CsJoinRequest<E>) {
    let k: E::ScalarField = nonces.nonce();
    let rk: E::ScalarField = nonces.nonce();
    let p1 = ctx.g1_mul(&k).into_affine();
    let r = ctx.g1_mul(&rk).into_affine();
    let eta1 = join_hash(ctx, &r);
    (
        CsJoinState { k, p1 },
        CsJoinRequest {
            eta1,
            sk: eta1 * k + rk,
            p1,
        },
    )
}

/// `gamma = g^Sk / P^eta1`; the proof holds iff `H(g, gamma) = eta1`.
pub fn cs_join_check<E: Engine>(ctx: &BilinearContext<E>, req: &CsJoinRequest<E>) -> bool {
    let gamma = (ctx.g1_mul(&req.sk) - smul(&req.p1, &req.eta1)).into_affine();
    join_hash(ctx, &gamma) == req.eta1
}

pub fn cs_join_issue<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    ik: &CsIssuingKey<E>,
    req: &CsJoinRequest<E>,
    reg: &mut CsRegistry<E>,
    rng: &mut R,
) -> Result<CsCertificate<E>, CsError> {
    cs_join_issue_with(ctx, ik, req, reg, &mut RngNonces(rng))
}

/// Issues a certificate with `r` drawn from `nonces`. The registry is left
/// untouched on every error path.
pub fn cs_join_issue_with<E: Engine>(
    ctx: &BilinearContext<E>,
    ik: &CsIssuingKey<E>,
    req: &CsJoinRequest<E>,
    reg: &mut CsRegistry<E>,
    nonces: &mut impl NonceSource,
) -> Result<CsCertificate<E>, CsError> {
    if req.p1.is_zero() || req.p1.check().is_err() {
        return Err(CsError::InvalidPoint);
    }
    if !cs_join_check(ctx, req) {
        return Err(CsError::ProofFailure);
    }
    if reg.entries.iter().any(|e| e.p1 == req.p1) {
        return Err(CsError::DuplicateMember);
    }
    let r: E::ScalarField = nonces.nonce();
    let a = ctx.g1_mul(&r).into_affine();
    let b = smul(&a, &ik.y).into_affine();
    let c = (smul(&a, &ik.x) + smul(&req.p1, &(r * ik.x * ik.y))).into_affine();
    let p2 = ctx.pairing(&req.p1, &ctx.g2);
    reg.entries.push(CsRegistrationEntry { p1: req.p1, p2 });
    Ok(CsCertificate { a, b, c })
}

/// Member-side acceptance: `e(a, Y^) = e(b, g2)` and
/// `e(c, g2) = e(a + k*b, X^)`, i.e. a valid certificate on `k`.
pub fn cs_join_finalize<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &CsGroupPublicKey<E>,
    state: &CsJoinState<E>,
    cert: &CsCertificate<E>,
) -> Result<CsMemberKey<E>, CsError> {
    if cert.a.is_zero() {
        return Err(CsError::BadCertificate);
    }
    let neg_b = (-cert.b.into_group()).into_affine();
    if !ctx
        .multi_pairing(&[(cert.a, gpk.y_hat), (neg_b, ctx.g2)])
        .is_zero()
    {
        return Err(CsError::BadCertificate);
    }
    let lhs = (-(cert.a.into_group() + smul(&cert.b, &state.k))).into_affine();
    if !ctx
        .multi_pairing(&[(cert.c, ctx.g2), (lhs, gpk.x_hat)])
        .is_zero()
    {
        return Err(CsError::BadCertificate);
    }
    Ok(CsMemberKey {
        k: state.k,
        a: cert.a,
        b: cert.b,
        c: cert.c,
        p2: ctx.gt_pow(&state.k),
    })
}

fn challenge<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &CsGroupPublicKey<E>,
    r: &CsCommitments<E>,
    m: &[u8],
) -> E::ScalarField {
    let mut t = ctx.transcript(CHALLENGE_LABEL);
    for ri in &r.0 {
        t = t.gt(ri);
    }
    t.g1(&ctx.g1)
        .gt(&ctx.gt)
        .g1(&gpk.x)
        .gt(&gpk.y)
        .gt(&gpk.h)
        .gt(&gpk.y1)
        .gt(&gpk.y2)
        .gt(&gpk.y3)
        .bytes(m)
        .finish()
}

pub fn cs_sign<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    gpk: &CsGroupPublicKey<E>,
    gsk: &CsMemberKey<E>,
    m: &[u8],
    rng: &mut R,
) -> CsSignature<E> {
    cs_sign_with(ctx, gpk, gsk, m, &mut RngNonces(rng)).0
}

/// Signs with nonces drawn in the order `u, r, r', rho, mu, nu`, returning
/// the commitments alongside the signature.
pub fn cs_sign_with<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &CsGroupPublicKey<E>,
    gsk: &CsMemberKey<E>,
    m: &[u8],
    nonces: &mut impl NonceSource,
) -> (CsSignature<E>, CsCommitments<E>) {
    let u: E::ScalarField = nonces.nonce();
    let r: E::ScalarField = nonces.nonce();
    let r2: E::ScalarField = nonces.nonce();
    let rho: E::ScalarField = nonces.nonce();
    let mu: E::ScalarField = nonces.nonce();
    let nu: E::ScalarField = nonces.nonce();

    let t1 = ctx.gt_pow(&u);
    let t2 = gt_pow::<E>(&gpk.h, &u);
    let t3 = gt_pow::<E>(&gpk.y1, &u) + gsk.p2;
    let hh = csc_alpha(ctx, &t1, &t2, &t3);
    let t4 = gt_pow::<E>(&gpk.y2, &u) + gt_pow::<E>(&gpk.y3, &(u * hh));

    let t5 = smul(&gsk.a, &r2).into_affine();
    let t6 = smul(&gsk.b, &r2).into_affine();
    let t7 = smul(&gsk.c, &(r2 * r)).into_affine();

    let r1 = ctx.multi_pairing(&[
        (smul(&t7, &rho).into_affine(), ctx.g2),
        ((-smul(&t6, &mu)).into_affine(), gpk.x_hat),
    ]);
    let commitments = CsCommitments([
        r1,
        ctx.gt_pow(&nu),
        gt_pow::<E>(&gpk.h, &nu),
        gt_pow::<E>(&gpk.y1, &nu) + ctx.gt_pow(&mu),
        gt_pow::<E>(&gpk.y2, &nu) + gt_pow::<E>(&gpk.y3, &(nu * hh)),
    ]);
    let c = challenge(ctx, gpk, &commitments, m);
    let r_inv = r.inverse().expect("nonces are non-zero");
    let sig = CsSignature {
        s_rho: c * r_inv + rho,
        s_mu: c * gsk.k + mu,
        s_nu: c * u + nu,
        t1,
        t2,
        t3,
        t4,
        t5,
        t6,
        t7,
        c,
    };
    (sig, commitments)
}

/// Recomputes `R1'..R5'` from a signature.
pub fn cs_recompute_commitments<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &CsGroupPublicKey<E>,
    sig: &CsSignature<E>,
) -> CsCommitments<E> {
    let hh = csc_alpha(ctx, &sig.t1, &sig.t2, &sig.t3);
    let c = sig.c;
    let x_side = smul(&sig.t6, &sig.s_mu) + smul(&sig.t5, &c);
    let r1 = ctx.multi_pairing(&[
        (smul(&sig.t7, &sig.s_rho).into_affine(), ctx.g2),
        ((-x_side).into_affine(), gpk.x_hat),
    ]);
    let r2 = ctx.gt_pow(&sig.s_nu) - gt_pow::<E>(&sig.t1, &c);
    let r3 = gt_pow::<E>(&gpk.h, &sig.s_nu) - gt_pow::<E>(&sig.t2, &c);
    let r4 = gt_pow::<E>(&gpk.y1, &sig.s_nu) + ctx.gt_pow(&sig.s_mu) - gt_pow::<E>(&sig.t3, &c);
    let r5 =
        gt_pow::<E>(&(gpk.y2 + gt_pow::<E>(&gpk.y3, &hh)), &sig.s_nu) - gt_pow::<E>(&sig.t4, &c);
    CsCommitments([r1, r2, r3, r4, r5])
}

/// Accepts iff the recomputed challenge matches and `e(T5, Y^) = e(T6, g2)`.
/// Needs nothing beyond the group public key.
pub fn cs_verify<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &CsGroupPublicKey<E>,
    m: &[u8],
    sig: &CsSignature<E>,
) -> bool {
    if sig.t5.is_zero() {
        return false;
    }
    let neg_t6 = (-sig.t6.into_group()).into_affine();
    if !ctx
        .multi_pairing(&[(sig.t5, gpk.y_hat), (neg_t6, ctx.g2)])
        .is_zero()
    {
        return false;
    }
    let r = cs_recompute_commitments(ctx, gpk, sig);
    challenge(ctx, gpk, &r, m) == sig.c
}

/// Parses and verifies; malformed bytes are a rejection.
pub fn cs_verify_bytes<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &CsGroupPublicKey<E>,
    m: &[u8],
    sig: &[u8],
) -> bool {
    CsSignature::<E>::from_bytes(sig).is_ok_and(|s| cs_verify(ctx, gpk, m, &s))
}

/// Verifies, checks `T4 = T1^(x3 + x5 H) T2^x4`, decrypts
/// `P2 = T3 / (T1^x1 T2^x2)` and returns the matching registry index.
pub fn cs_open<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &CsGroupPublicKey<E>,
    ok: &CsOpeningKey<E>,
    reg: &CsRegistry<E>,
    m: &[u8],
    sig: &CsSignature<E>,
) -> Result<usize, CsError> {
    if !cs_verify(ctx, gpk, m, sig) {
        return Err(CsError::InvalidSignature);
    }
    let p2 = cs_decrypt_token(ctx, ok, sig)?;
    reg.find(&p2).ok_or(CsError::UnknownMember)
}

/// The opener's half of [`cs_open`], without signature verification.
pub fn cs_decrypt_token<E: Engine>(
    ctx: &BilinearContext<E>,
    ok: &CsOpeningKey<E>,
    sig: &CsSignature<E>,
) -> Result<Gt<E>, CsError> {
    let hh = csc_alpha(ctx, &sig.t1, &sig.t2, &sig.t3);
    let expect = gt_pow::<E>(&sig.t1, &(ok.x3 + ok.x5 * hh)) + gt_pow::<E>(&sig.t2, &ok.x4);
    if expect != sig.t4 {
        return Err(CsError::CiphertextCheck);
    }
    Ok(sig.t3 - gt_pow::<E>(&sig.t1, &ok.x1) - gt_pow::<E>(&sig.t2, &ok.x2))
}

impl<E: Engine> CsSignature<E> {
    pub fn encoded_len() -> usize {
        4 * E::scalar_bytes() + 4 * E::gt_bytes() + 3 * E::g1_bytes()
    }

    /// `S_rho, S_mu, S_nu, T1..T7, c` in canonical encodings.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::encoded_len());
        for s in [&self.s_rho, &self.s_mu, &self.s_nu] {
            E::write_scalar(s, &mut out);
        }
        for t in [&self.t1, &self.t2, &self.t3, &self.t4] {
            E::write_gt(t, &mut out);
        }
        for p in [&self.t5, &self.t6, &self.t7] {
            E::write_g1(p, &mut out);
        }
        E::write_scalar(&self.c, &mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AlgebraError> {
        let mut r = Reader::new(bytes);
        let sig = CsSignature {
            s_rho: r.scalar::<E>()?,
            s_mu: r.scalar::<E>()?,
            s_nu: r.scalar::<E>()?,
            t1: r.gt::<E>()?,
            t2: r.gt::<E>()?,
            t3: r.gt::<E>()?,
            t4: r.gt::<E>()?,
            t5: r.g1::<E>()?,
            t6: r.g1::<E>()?,
            t7: r.g1::<E>()?,
            c: r.scalar::<E>()?,
        };
        r.finish()?;
        Ok(sig)
    }

    /// `(T1, T2, T3, T4)` as a Cramer-Shoup ciphertext under
    /// [`CsGroupPublicKey::as_csc_public`].
    pub fn ciphertext(&self) -> CscCiphertext<E> {
        CscCiphertext {
            u1: self.t1,
            u2: self.t2,
            e: self.t3,
            psi: self.t4,
        }
    }
}

// ---- key files ----

pub const TAG_GPK: [u8; 4] = *b"CGPK";
pub const TAG_IK: [u8; 4] = *b"CISK";
pub const TAG_OK: [u8; 4] = *b"COPK";
pub const TAG_MEMBER: [u8; 4] = *b"CMEM";
pub const TAG_REGISTRY: [u8; 4] = *b"CREG";

fn curve_field<E: Engine>() -> Vec<u8> {
    vec![E::CURVE as u8]
}

fn check_curve<E: Engine>(field: &[u8]) -> Result<(), KeyFileError> {
    match field {
        [id] if CurveId::from_u8(*id) == Some(E::CURVE) => Ok(()),
        _ => Err(field_err(0, format!("key is not for curve {}", E::CURVE))),
    }
}

fn enc_g1<E: Engine>(p: &E::G1Affine) -> Vec<u8> {
    let mut v = Vec::new();
    E::write_g1(p, &mut v);
    v
}

fn enc_g2<E: Engine>(p: &E::G2Affine) -> Vec<u8> {
    let mut v = Vec::new();
    E::write_g2(p, &mut v);
    v
}

fn enc_gt<E: Engine>(t: &Gt<E>) -> Vec<u8> {
    let mut v = Vec::new();
    E::write_gt(t, &mut v);
    v
}

fn enc_scalar<E: Engine>(s: &E::ScalarField) -> Vec<u8> {
    let mut v = Vec::new();
    E::write_scalar(s, &mut v);
    v
}

/// Reads the curve id of a CS key file without decoding the rest.
pub fn keyfile_curve(bytes: &[u8]) -> Result<CurveId, KeyFileError> {
    let kf = KeyFile::decode(bytes)?;
    kf.fields
        .first()
        .and_then(|f| f.first())
        .and_then(|id| CurveId::from_u8(*id))
        .ok_or_else(|| field_err(0, "unknown curve id"))
}

impl<E: Engine> CsGroupPublicKey<E> {
    pub fn to_keyfile(&self) -> Vec<u8> {
        let mut kf = KeyFile::new(TAG_GPK);
        kf.push(curve_field::<E>())
            .push(enc_g1::<E>(&self.x))
            .push(enc_g2::<E>(&self.x_hat))
            .push(enc_gt::<E>(&self.y))
            .push(enc_g2::<E>(&self.y_hat));
        for t in [&self.h, &self.y1, &self.y2, &self.y3] {
            kf.push(enc_gt::<E>(t));
        }
        kf.encode()
    }

    pub fn from_keyfile(bytes: &[u8]) -> Result<Self, KeyFileError> {
        let kf = KeyFile::decode_expect(bytes, TAG_GPK, 9)?;
        check_curve::<E>(kf.field(0))?;
        let gt = |i: usize| E::read_gt(kf.field(i)).map_err(|e| field_err(i, e));
        Ok(CsGroupPublicKey {
            x: E::read_g1(kf.field(1)).map_err(|e| field_err(1, e))?,
            x_hat: E::read_g2(kf.field(2)).map_err(|e| field_err(2, e))?,
            y: gt(3)?,
            y_hat: E::read_g2(kf.field(4)).map_err(|e| field_err(4, e))?,
            h: gt(5)?,
            y1: gt(6)?,
            y2: gt(7)?,
            y3: gt(8)?,
        })
    }

    /// First four bytes of SHA-256 over the key file; names the group on the wire.
    pub fn fingerprint(&self) -> [u8; 4] {
        crate::algebra::fingerprint(&self.to_keyfile())
    }
}

fn scalars_to_keyfile<E: Engine>(tag: [u8; 4], scalars: &[&E::ScalarField]) -> Vec<u8> {
    let mut kf = KeyFile::new(tag);
    kf.push(curve_field::<E>());
    for s in scalars {
        kf.push(enc_scalar::<E>(s));
    }
    kf.encode()
}

fn scalars_from_keyfile<E: Engine>(
    bytes: &[u8],
    tag: [u8; 4],
    n: usize,
) -> Result<Vec<E::ScalarField>, KeyFileError> {
    let kf = KeyFile::decode_expect(bytes, tag, n + 1)?;
    check_curve::<E>(kf.field(0))?;
    (1..=n)
        .map(|i| E::read_scalar(kf.field(i)).map_err(|e| field_err(i, e)))
        .collect()
}

impl<E: Engine> CsIssuingKey<E> {
    pub fn to_keyfile(&self) -> Vec<u8> {
        scalars_to_keyfile::<E>(TAG_IK, &[&self.x, &self.y])
    }

    pub fn from_keyfile(bytes: &[u8]) -> Result<Self, KeyFileError> {
        let s = scalars_from_keyfile::<E>(bytes, TAG_IK, 2)?;
        Ok(CsIssuingKey { x: s[0], y: s[1] })
    }
}

impl<E: Engine> CsOpeningKey<E> {
    pub fn to_keyfile(&self) -> Vec<u8> {
        scalars_to_keyfile::<E>(TAG_OK, &[&self.x1, &self.x2, &self.x3, &self.x4, &self.x5])
    }

    pub fn from_keyfile(bytes: &[u8]) -> Result<Self, KeyFileError> {
        let s = scalars_from_keyfile::<E>(bytes, TAG_OK, 5)?;
        Ok(CsOpeningKey {
            x1: s[0],
            x2: s[1],
            x3: s[2],
            x4: s[3],
            x5: s[4],
        })
    }
}

impl<E: Engine> CsMemberKey<E> {
    pub fn to_keyfile(&self) -> Vec<u8> {
        let mut kf = KeyFile::new(TAG_MEMBER);
        kf.push(curve_field::<E>())
            .push(enc_scalar::<E>(&self.k))
            .push(enc_g1::<E>(&self.a))
            .push(enc_g1::<E>(&self.b))
            .push(enc_g1::<E>(&self.c));
        kf.encode()
    }

    pub fn from_keyfile(ctx: &BilinearContext<E>, bytes: &[u8]) -> Result<Self, KeyFileError> {
        let kf = KeyFile::decode_expect(bytes, TAG_MEMBER, 5)?;
        check_curve::<E>(kf.field(0))?;
        let g1 = |i: usize| E::read_g1(kf.field(i)).map_err(|e| field_err(i, e));
        let k = E::read_scalar(kf.field(1)).map_err(|e| field_err(1, e))?;
        Ok(CsMemberKey {
            k,
            a: g1(2)?,
            b: g1(3)?,
            c: g1(4)?,
            p2: ctx.gt_pow(&k),
        })
    }
}

impl<E: Engine> CsRegistry<E> {
    pub fn to_keyfile(&self) -> Vec<u8> {
        let mut kf = KeyFile::new(TAG_REGISTRY);
        kf.push(curve_field::<E>());
        for e in &self.entries {
            let mut v = enc_g1::<E>(&e.p1);
            E::write_gt(&e.p2, &mut v);
            kf.push(v);
        }
        kf.encode()
    }

    pub fn from_keyfile(bytes: &[u8]) -> Result<Self, KeyFileError> {
        let kf = KeyFile::decode(bytes)?;
        if kf.tag != TAG_REGISTRY || kf.fields.is_empty() {
            return Err(field_err(0, "not a CS registry"));
        }
        check_curve::<E>(kf.field(0))?;
        let entries = kf.fields[1..]
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let parse = || -> Result<_, AlgebraError> {
                    let mut r = Reader::new(f);
                    let p1 = r.g1::<E>()?;
                    let p2 = r.gt::<E>()?;
                    r.finish()?;
                    Ok(CsRegistrationEntry { p1, p2 })
                };
                parse().map_err(|e| field_err(i + 1, e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CsRegistry { entries })
    }
}
