//! DS group signatures: SPS-EQ credentials on `(r*P, P)` with pairing-free
//! online signing.
//!
//! Each online signature re-randomizes the credential to a fresh
//! representative `(rho*R, rho*P)` and attaches a signature of knowledge of
//! `rho`. The CCA2 flavour also encrypts `rho` in the exponent under the
//! re-randomized `Y^`, which makes signatures non-malleable; the CPA flavour
//! drops that part and is cheaper.

mod precompute;

pub use precompute::{
    precompute_generate, precompute_generate_with, read_header, Bundle, Cca2Parts, PrecomputeStore,
    StoreError, StoreHeader, STORE_HEADER_BYTES,
};

use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{Field, Zero};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::{
    smul, AlgebraError, BilinearContext, CurveId, Engine, NonceSource, PairingType, Reader,
    RngNonces,
};
use crate::primitives::dsig::{dsig_sign, dsig_verify};
use crate::primitives::keyfile::{field_err, KeyFile, KeyFileError};
use crate::primitives::nizk::{nizk_prove, nizk_verify, NizkProof};
use crate::primitives::pke::{
    pke_ciphertext_len, pke_decrypt, pke_encrypt_with, PkeError, PkePublicKey, PkeSecretKey,
};
use crate::primitives::spseq::{
    spseq_chgrep_unchecked, spseq_keys_from_secret, spseq_sign_with, spseq_verify, SpseqError,
    SpseqSignature,
};

pub const SOK_LABEL: &str = "a2rid/ds/sok";

/// Online signing flavour. The discriminant is the wire mode byte.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
#[repr(u8)]
pub enum DsMode {
    Cca2 = 1,
    Cpa = 2,
}

impl DsMode {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            1 => Some(DsMode::Cca2),
            2 => Some(DsMode::Cpa),
            _ => None,
        }
    }
}

/// Which member-side join check failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JoinCheck {
    Proof,
    WitnessSignature,
    IssuedSignature,
    Credential,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DsError {
    #[error("DS needs an asymmetric pairing; {0} is symmetric")]
    SymmetricCurve(CurveId),
    #[error("witness decryption failed: {0}")]
    Pke(#[from] PkeError),
    #[error("join proof does not verify")]
    ProofFailure,
    #[error("witness signature does not verify")]
    WitnessSignature,
    #[error("join statement is inconsistent")]
    StatementMismatch,
    #[error("join aborted: {0:?} check failed")]
    JoinAbort(JoinCheck),
    #[error("pre-computation store exhausted")]
    StoreExhausted,
    #[error("bundle was prepared for {expected:?}, requested {actual:?}")]
    ModeMismatch { expected: DsMode, actual: DsMode },
    #[error("no registered member matches")]
    UnknownMember,
    #[error("{0} registry entries match one signature")]
    RegistryCorruption(usize),
    #[error(transparent)]
    Spseq(#[from] SpseqError),
    #[error(transparent)]
    Encoding(#[from] AlgebraError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsGroupPublicKey<E: Engine> {
    pub pk_r: Vec<E::G2Affine>,
    pub pk_o: PkePublicKey<E>,
    pub crs_j: [u8; 32],
    pub crs_o: [u8; 32],
    pub crs_s: [u8; 32],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsAuthorityKeys<E: Engine> {
    /// `ik = sk_R`
    pub ik: Vec<E::ScalarField>,
    /// `ok = sk_O`
    pub ok: PkeSecretKey<E>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsJoinState<E: Engine> {
    pub q: E::ScalarField,
    pub r: E::ScalarField,
    pub q_pt: E::G1Affine,
    pub u_pt: E::G1Affine,
}

/// `M_j = ((U, Q), C_j, sigma_j, pi_j)` plus the scalar `q` from `st`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsJoinRequest<E: Engine> {
    pub u_pt: E::G1Affine,
    pub q_pt: E::G1Affine,
    pub c_hat: Vec<u8>,
    pub sigma_j: E::G1Affine,
    pub proof: NizkProof<E>,
    pub q: E::ScalarField,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsRegistrationEntry<E: Engine> {
    pub c_hat: Vec<u8>,
    pub sigma_j: E::G1Affine,
    pub pk_i: E::G2Affine,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsRegistry<E: Engine> {
    pub entries: Vec<DsRegistrationEntry<E>>,
}

impl<E: Engine> Default for DsRegistry<E> {
    fn default() -> Self {
        DsRegistry {
            entries: Vec::new(),
        }
    }
}

impl<E: Engine> DsRegistry<E> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// What the USS sends back: `sigma'` on `(U, Q)` and the credential on
/// `(R, P) = q^-1 * (U, Q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsIssued<E: Engine> {
    pub sigma_prime: SpseqSignature<E>,
    pub credential: SpseqSignature<E>,
}

/// `gsk_i = ((R, P), sigma)`. `P` is the G1 generator and is not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsMemberKey<E: Engine> {
    pub r_pt: E::G1Affine,
    pub sigma: SpseqSignature<E>,
}

/// `sigma1 = ((R', P'), (Z, Y, Y^))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomizedCredential<E: Engine> {
    pub r_prime: E::G1Affine,
    pub p_prime: E::G1Affine,
    pub sigma: SpseqSignature<E>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DsSok<E: Engine> {
    Cca2 {
        c1_hat: E::G2Affine,
        c2_hat: E::G2Affine,
        c: E::ScalarField,
        z1: E::ScalarField,
        z2: E::ScalarField,
    },
    Cpa {
        c: E::ScalarField,
        z: E::ScalarField,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsSignature<E: Engine> {
    pub sigma1: RandomizedCredential<E>,
    pub sigma2: DsSok<E>,
}

fn crs(label: &str, seed: &[u8; 32]) -> [u8; 32] {
    Sha256::new()
        .chain_update([label.len() as u8])
        .chain_update(label)
        .chain_update(seed)
        .finalize()
        .into()
}

pub fn ds_setup<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    rng: &mut R,
) -> Result<(DsGroupPublicKey<E>, DsAuthorityKeys<E>), DsError> {
    let mut seed = [0u8; 32];
    rng.fill_bytes(&mut seed);
    ds_setup_with(ctx, seed, &mut RngNonces(rng))
}

/// Setup drawing `x1, x2, sk_O` from `nonces`. Symmetric production curves
/// are refused; the toy curve is allowed so exponent oracles can run.
pub fn ds_setup_with<E: Engine>(
    ctx: &BilinearContext<E>,
    seed: [u8; 32],
    nonces: &mut impl NonceSource,
) -> Result<(DsGroupPublicKey<E>, DsAuthorityKeys<E>), DsError> {
    if ctx.pairing_type == PairingType::Type1Symmetric && ctx.curve != CurveId::Toy {
        return Err(DsError::SymmetricCurve(ctx.curve));
    }
    let sk_r = vec![nonces.nonce(), nonces.nonce()];
    let spseq = spseq_keys_from_secret(ctx, sk_r);
    let sk_o: E::ScalarField = nonces.nonce();
    let gpk = DsGroupPublicKey {
        pk_r: spseq.pk,
        pk_o: PkePublicKey(ctx.g1_mul(&sk_o).into_affine()),
        crs_j: crs("a2rid/ds/crs-j", &seed),
        crs_o: crs("a2rid/ds/crs-o", &seed),
        crs_s: crs("a2rid/ds/crs-s", &seed),
    };
    Ok((
        gpk,
        DsAuthorityKeys {
            ik: spseq.sk,
            ok: PkeSecretKey(sk_o),
        },
    ))
}

impl<E: Engine> DsAuthorityKeys<E> {
    /// `spseq_vkey(ik, pk_R)` and the PKE pair.
    pub fn matches(&self, ctx: &BilinearContext<E>, gpk: &DsGroupPublicKey<E>) -> bool {
        crate::primitives::spseq::spseq_vkey(ctx, &self.ik, &gpk.pk_r)
            && ctx.g1_mul(&self.ok.0).into_affine() == gpk.pk_o.0
    }
}

fn nizk_bind<E: Engine>(gpk: &DsGroupPublicKey<E>, c_hat: &[u8]) -> Vec<u8> {
    let mut bind = gpk.crs_j.to_vec();
    bind.extend_from_slice(c_hat);
    bind
}

pub fn ds_join_request<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    gpk: &DsGroupPublicKey<E>,
    sk_i: &E::ScalarField,
    rng: &mut R,
) -> (DsJoinState<E>, DsJoinRequest<E>) {
    ds_join_request_with(ctx, gpk, sk_i, &mut RngNonces(rng))
}

/// Draws `q, r`, the PKE ephemeral key, then the proof nonce `chi`.
pub fn ds_join_request_with<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &DsGroupPublicKey<E>,
    sk_i: &E::ScalarField,
    nonces: &mut impl NonceSource,
) -> (DsJoinState<E>, DsJoinRequest<E>) {
    let q: E::ScalarField = nonces.nonce();
    let r: E::ScalarField = nonces.nonce();
    let q_pt = ctx.g1_mul(&q).into_affine();
    let u_pt = smul(&q_pt, &r).into_affine();
    let r_hat = ctx.g2_mul(&r).into_affine();
    let mut witness = Vec::with_capacity(E::g2_bytes());
    E::write_g2(&r_hat, &mut witness);
    let c_hat = pke_encrypt_with(ctx, &gpk.pk_o, &witness, nonces);
    let sigma_j = dsig_sign::<E>(sk_i, &c_hat);
    let proof = nizk_prove(ctx, &q_pt, &u_pt, &r, &nizk_bind(gpk, &c_hat), nonces);
    (
        DsJoinState { q, r, q_pt, u_pt },
        DsJoinRequest {
            u_pt,
            q_pt,
            c_hat,
            sigma_j,
            proof,
            q,
        },
    )
}

fn decrypt_witness<E: Engine>(ok: &PkeSecretKey<E>, c_hat: &[u8]) -> Result<E::G2Affine, DsError> {
    let bytes = pke_decrypt(ok, c_hat)?;
    Ok(E::read_g2(&bytes)?)
}

pub fn ds_join_issue<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    keys: &DsAuthorityKeys<E>,
    gpk: &DsGroupPublicKey<E>,
    reg: &mut DsRegistry<E>,
    req: &DsJoinRequest<E>,
    pk_i: &E::G2Affine,
    rng: &mut R,
) -> Result<DsIssued<E>, DsError> {
    ds_join_issue_with(ctx, keys, gpk, reg, req, pk_i, &mut RngNonces(rng))
}

/// Checks the request, signs `(U, Q)` with `y`, moves the signature to
/// `(R, P)` with `q^-1` and randomizer `psi` (drawn in that order), and
/// records `(C_j, sigma_j)`. The registry is untouched on error.
pub fn ds_join_issue_with<E: Engine>(
    ctx: &BilinearContext<E>,
    keys: &DsAuthorityKeys<E>,
    gpk: &DsGroupPublicKey<E>,
    reg: &mut DsRegistry<E>,
    req: &DsJoinRequest<E>,
    pk_i: &E::G2Affine,
    nonces: &mut impl NonceSource,
) -> Result<DsIssued<E>, DsError> {
    if req.q.is_zero() || ctx.g1_mul(&req.q).into_affine() != req.q_pt || req.u_pt.is_zero() {
        return Err(DsError::StatementMismatch);
    }
    let r_hat = decrypt_witness(&keys.ok, &req.c_hat)?;
    let bind = nizk_bind(gpk, &req.c_hat);
    if !nizk_verify(ctx, &req.q_pt, &req.u_pt, &r_hat, &req.proof, &bind) {
        return Err(DsError::ProofFailure);
    }
    if !dsig_verify(ctx, pk_i, &req.c_hat, &req.sigma_j) {
        return Err(DsError::WitnessSignature);
    }
    let m = [req.u_pt, req.q_pt];
    let sigma_prime = spseq_sign_with(ctx, &keys.ik, &m, nonces)?;
    let q_inv = req.q.inverse().expect("q checked non-zero");
    let psi: E::ScalarField = nonces.nonce();
    let (_, credential) = spseq_chgrep_unchecked(&m, &sigma_prime, &q_inv, &psi);
    reg.entries.push(DsRegistrationEntry {
        c_hat: req.c_hat.clone(),
        sigma_j: req.sigma_j,
        pk_i: *pk_i,
    });
    Ok(DsIssued {
        sigma_prime,
        credential,
    })
}

/// Member-side checks on the issued material: the join proof, the witness
/// signature, `sigma'` on `(U, Q)` and the credential on `(r*P, P)`.
pub fn ds_join_finalize<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &DsGroupPublicKey<E>,
    state: &DsJoinState<E>,
    req: &DsJoinRequest<E>,
    pk_i: &E::G2Affine,
    issued: &DsIssued<E>,
) -> Result<DsMemberKey<E>, DsError> {
    let r_hat = ctx.g2_mul(&state.r).into_affine();
    let bind = nizk_bind(gpk, &req.c_hat);
    if !nizk_verify(ctx, &state.q_pt, &state.u_pt, &r_hat, &req.proof, &bind) {
        return Err(DsError::JoinAbort(JoinCheck::Proof));
    }
    if !dsig_verify(ctx, pk_i, &req.c_hat, &req.sigma_j) {
        return Err(DsError::JoinAbort(JoinCheck::WitnessSignature));
    }
    if !spseq_verify(
        ctx,
        &[state.u_pt, state.q_pt],
        &issued.sigma_prime,
        &gpk.pk_r,
    ) {
        return Err(DsError::JoinAbort(JoinCheck::IssuedSignature));
    }
    let r_pt = ctx.g1_mul(&state.r).into_affine();
    if !spseq_verify(ctx, &[r_pt, ctx.g1], &issued.credential, &gpk.pk_r) {
        return Err(DsError::JoinAbort(JoinCheck::Credential));
    }
    Ok(DsMemberKey {
        r_pt,
        sigma: issued.credential,
    })
}

impl<E: Engine> RandomizedCredential<E> {
    pub fn encoded_len() -> usize {
        2 * E::g1_bytes() + SpseqSignature::<E>::encoded_len()
    }

    pub fn write(&self, out: &mut Vec<u8>) {
        E::write_g1(&self.r_prime, out);
        E::write_g1(&self.p_prime, out);
        self.sigma.write(out);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, AlgebraError> {
        Ok(RandomizedCredential {
            r_prime: r.g1::<E>()?,
            p_prime: r.g1::<E>()?,
            sigma: SpseqSignature::read(r)?,
        })
    }
}

/// `ChgRep((R, P), sigma, rho)` with randomizer `phi`; no pairings.
pub fn randomize_credential<E: Engine>(
    ctx: &BilinearContext<E>,
    member: &DsMemberKey<E>,
    rho: &E::ScalarField,
    phi: &E::ScalarField,
) -> RandomizedCredential<E> {
    let (m, sigma) = spseq_chgrep_unchecked(&[member.r_pt, ctx.g1], &member.sigma, rho, phi);
    RandomizedCredential {
        r_prime: m[0],
        p_prime: m[1],
        sigma,
    }
}

pub(crate) fn sok_challenge<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &DsGroupPublicKey<E>,
    mode: DsMode,
    commitments: &[&E::G2Affine],
    n: &E::G1Affine,
    sigma1: &RandomizedCredential<E>,
    m: &[u8],
) -> E::ScalarField {
    let mut s1 = Vec::with_capacity(RandomizedCredential::<E>::encoded_len());
    sigma1.write(&mut s1);
    let mut t = ctx
        .transcript(SOK_LABEL)
        .raw(&[mode as u8])
        .raw(&gpk.crs_s)
        .g1(n);
    for c in commitments {
        t = t.g2(c);
    }
    t.raw(&s1).bytes(m).finish()
}

/// Signs along the RNG path. Nonces are drawn as in
/// [`precompute_generate_with`]: `rho, phi, u, v, eta` for CCA2 and
/// `rho, phi, v` for CPA.
pub fn ds_sign_with<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &DsGroupPublicKey<E>,
    member: &DsMemberKey<E>,
    mode: DsMode,
    m: &[u8],
    nonces: &mut impl NonceSource,
) -> DsSignature<E> {
    let bundle = Bundle::prepare(ctx, member, mode, nonces);
    bundle.finish(ctx, gpk, m)
}

pub fn ds_sign<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    gpk: &DsGroupPublicKey<E>,
    member: &DsMemberKey<E>,
    mode: DsMode,
    m: &[u8],
    rng: &mut R,
) -> DsSignature<E> {
    ds_sign_with(ctx, gpk, member, mode, m, &mut RngNonces(rng))
}

pub fn ds_sign_cca2<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    gpk: &DsGroupPublicKey<E>,
    member: &DsMemberKey<E>,
    m: &[u8],
    rng: &mut R,
) -> DsSignature<E> {
    ds_sign(ctx, gpk, member, DsMode::Cca2, m, rng)
}

pub fn ds_sign_cpa<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    gpk: &DsGroupPublicKey<E>,
    member: &DsMemberKey<E>,
    m: &[u8],
    rng: &mut R,
) -> DsSignature<E> {
    ds_sign(ctx, gpk, member, DsMode::Cpa, m, rng)
}

/// Signs with the next unused bundle of `store`.
pub fn ds_sign_precomputed<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &DsGroupPublicKey<E>,
    store: &mut PrecomputeStore<E>,
    mode: DsMode,
    m: &[u8],
) -> Result<DsSignature<E>, DsError> {
    if store.mode != mode {
        return Err(DsError::ModeMismatch {
            expected: store.mode,
            actual: mode,
        });
    }
    Ok(store.take()?.finish(ctx, gpk, m))
}

/// The commitments `N', M1', M2'` rebuilt by a verifier.
pub fn ds_recompute_commitments<E: Engine>(
    ctx: &BilinearContext<E>,
    sig: &DsSignature<E>,
) -> (E::G1Affine, Option<(E::G2Affine, E::G2Affine)>) {
    let s1 = &sig.sigma1;
    match &sig.sigma2 {
        DsSok::Cca2 {
            c1_hat,
            c2_hat,
            c,
            z1,
            z2,
        } => {
            let n = (ctx.g1_mul(z1) - smul(&s1.p_prime, c)).into_affine();
            let m1 = (smul(&s1.sigma.y_hat, z2) - smul(c1_hat, c)).into_affine();
            let m2 = (ctx.g2_mul(&(*z1 + z2)) - smul(c2_hat, c)).into_affine();
            (n, Some((m1, m2)))
        }
        DsSok::Cpa { c, z } => ((ctx.g1_mul(z) - smul(&s1.p_prime, c)).into_affine(), None),
    }
}

/// Accepts iff `sigma1` verifies under `pk_R` and the recomputed challenge
/// equals `c`. Offline; needs only `gpk`.
pub fn ds_verify<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &DsGroupPublicKey<E>,
    m: &[u8],
    sig: &DsSignature<E>,
) -> bool {
    let s1 = &sig.sigma1;
    if s1.p_prime.is_zero() || !spseq_verify(ctx, &[s1.r_prime, s1.p_prime], &s1.sigma, &gpk.pk_r) {
        return false;
    }
    let (n, ms) = ds_recompute_commitments(ctx, sig);
    let (mode, c) = match &sig.sigma2 {
        DsSok::Cca2 { c, .. } => (DsMode::Cca2, c),
        DsSok::Cpa { c, .. } => (DsMode::Cpa, c),
    };
    let c2 = match &ms {
        Some((m1, m2)) => sok_challenge(ctx, gpk, mode, &[m1, m2], &n, s1, m),
        None => sok_challenge(ctx, gpk, mode, &[], &n, s1, m),
    };
    c2 == *c
}

pub fn ds_verify_bytes<E: Engine>(
    ctx: &BilinearContext<E>,
    gpk: &DsGroupPublicKey<E>,
    mode: DsMode,
    m: &[u8],
    sig: &[u8],
) -> bool {
    DsSignature::<E>::from_bytes(mode, sig).is_ok_and(|s| ds_verify(ctx, gpk, m, &s))
}

/// Finds the registry entry whose witness `R^` satisfies
/// `e(R', P^) = e(P', R^)`. The caller verifies the signature first.
pub fn ds_open<E: Engine>(
    ctx: &BilinearContext<E>,
    keys: &DsAuthorityKeys<E>,
    reg: &DsRegistry<E>,
    sig: &DsSignature<E>,
) -> Result<usize, DsError> {
    let s1 = &sig.sigma1;
    let neg_p = (-s1.p_prime.into_group()).into_affine();
    let mut found = Vec::new();
    for (i, entry) in reg.entries.iter().enumerate() {
        let Ok(r_hat) = decrypt_witness(&keys.ok, &entry.c_hat) else {
            continue;
        };
        if ctx
            .multi_pairing(&[(s1.r_prime, ctx.g2), (neg_p, r_hat)])
            .is_zero()
        {
            found.push(i);
        }
    }
    match found.as_slice() {
        [] => Err(DsError::UnknownMember),
        [i] => Ok(*i),
        many => Err(DsError::RegistryCorruption(many.len())),
    }
}

impl<E: Engine> DsSignature<E> {
    pub fn mode(&self) -> DsMode {
        match self.sigma2 {
            DsSok::Cca2 { .. } => DsMode::Cca2,
            DsSok::Cpa { .. } => DsMode::Cpa,
        }
    }

    pub fn encoded_len(mode: DsMode) -> usize {
        RandomizedCredential::<E>::encoded_len()
            + match mode {
                DsMode::Cca2 => 2 * E::g2_bytes() + 3 * E::scalar_bytes(),
                DsMode::Cpa => 2 * E::scalar_bytes(),
            }
    }

    /// `sigma1` then `C1^, C2^, c, z1, z2` (CCA2) or `c, z` (CPA). The mode
    /// travels outside the body.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::encoded_len(self.mode()));
        self.sigma1.write(&mut out);
        match &self.sigma2 {
            DsSok::Cca2 {
                c1_hat,
                c2_hat,
                c,
                z1,
                z2,
            } => {
                E::write_g2(c1_hat, &mut out);
                E::write_g2(c2_hat, &mut out);
                for s in [c, z1, z2] {
                    E::write_scalar(s, &mut out);
                }
            }
            DsSok::Cpa { c, z } => {
                E::write_scalar(c, &mut out);
                E::write_scalar(z, &mut out);
            }
        }
        out
    }

    pub fn from_bytes(mode: DsMode, bytes: &[u8]) -> Result<Self, AlgebraError> {
        let mut r = Reader::new(bytes);
        let sigma1 = RandomizedCredential::read(&mut r)?;
        let sigma2 = match mode {
            DsMode::Cca2 => DsSok::Cca2 {
                c1_hat: r.g2::<E>()?,
                c2_hat: r.g2::<E>()?,
                c: r.scalar::<E>()?,
                z1: r.scalar::<E>()?,
                z2: r.scalar::<E>()?,
            },
            DsMode::Cpa => DsSok::Cpa {
                c: r.scalar::<E>()?,
                z: r.scalar::<E>()?,
            },
        };
        r.finish()?;
        Ok(DsSignature { sigma1, sigma2 })
    }
}

// ---- key files ----

pub const TAG_GPK: [u8; 4] = *b"DGPK";
pub const TAG_AUTHORITY: [u8; 4] = *b"DAUK";
pub const TAG_MEMBER: [u8; 4] = *b"DMEM";
pub const TAG_REGISTRY: [u8; 4] = *b"DREG";
pub const TAG_DSIG: [u8; 4] = *b"DSIG";

fn check_curve<E: Engine>(field: &[u8]) -> Result<(), KeyFileError> {
    match field {
        [id] if CurveId::from_u8(*id) == Some(E::CURVE) => Ok(()),
        _ => Err(field_err(0, format!("key is not for curve {}", E::CURVE))),
    }
}

fn g1_field<E: Engine>(kf: &KeyFile, i: usize) -> Result<E::G1Affine, KeyFileError> {
    E::read_g1(kf.field(i)).map_err(|e| field_err(i, e))
}

fn g2_field<E: Engine>(kf: &KeyFile, i: usize) -> Result<E::G2Affine, KeyFileError> {
    E::read_g2(kf.field(i)).map_err(|e| field_err(i, e))
}

fn scalar_field<E: Engine>(kf: &KeyFile, i: usize) -> Result<E::ScalarField, KeyFileError> {
    E::read_scalar(kf.field(i)).map_err(|e| field_err(i, e))
}

fn crs_field(kf: &KeyFile, i: usize) -> Result<[u8; 32], KeyFileError> {
    kf.field(i)
        .try_into()
        .map_err(|_| field_err(i, "crs must be 32 bytes"))
}

fn enc(f: impl FnOnce(&mut Vec<u8>)) -> Vec<u8> {
    let mut v = Vec::new();
    f(&mut v);
    v
}

impl<E: Engine> DsGroupPublicKey<E> {
    pub fn to_keyfile(&self) -> Vec<u8> {
        let mut kf = KeyFile::new(TAG_GPK);
        kf.push(vec![E::CURVE as u8]);
        for p in &self.pk_r {
            kf.push(enc(|v| E::write_g2(p, v)));
        }
        kf.push(enc(|v| E::write_g1(&self.pk_o.0, v)))
            .push(self.crs_j.to_vec())
            .push(self.crs_o.to_vec())
            .push(self.crs_s.to_vec());
        kf.encode()
    }

    pub fn from_keyfile(bytes: &[u8]) -> Result<Self, KeyFileError> {
        let kf = KeyFile::decode_expect(bytes, TAG_GPK, 7)?;
        check_curve::<E>(kf.field(0))?;
        Ok(DsGroupPublicKey {
            pk_r: vec![g2_field::<E>(&kf, 1)?, g2_field::<E>(&kf, 2)?],
            pk_o: PkePublicKey(g1_field::<E>(&kf, 3)?),
            crs_j: crs_field(&kf, 4)?,
            crs_o: crs_field(&kf, 5)?,
            crs_s: crs_field(&kf, 6)?,
        })
    }

    pub fn fingerprint(&self) -> [u8; 4] {
        crate::algebra::fingerprint(&self.to_keyfile())
    }
}

impl<E: Engine> DsAuthorityKeys<E> {
    pub fn to_keyfile(&self) -> Vec<u8> {
        let mut kf = KeyFile::new(TAG_AUTHORITY);
        kf.push(vec![E::CURVE as u8]);
        for s in self.ik.iter().chain([&self.ok.0]) {
            kf.push(enc(|v| E::write_scalar(s, v)));
        }
        kf.encode()
    }

    pub fn from_keyfile(bytes: &[u8]) -> Result<Self, KeyFileError> {
        let kf = KeyFile::decode_expect(bytes, TAG_AUTHORITY, 4)?;
        check_curve::<E>(kf.field(0))?;
        Ok(DsAuthorityKeys {
            ik: vec![scalar_field::<E>(&kf, 1)?, scalar_field::<E>(&kf, 2)?],
            ok: PkeSecretKey(scalar_field::<E>(&kf, 3)?),
        })
    }
}

impl<E: Engine> DsMemberKey<E> {
    pub fn to_keyfile(&self) -> Vec<u8> {
        let mut kf = KeyFile::new(TAG_MEMBER);
        kf.push(vec![E::CURVE as u8])
            .push(enc(|v| E::write_g1(&self.r_pt, v)))
            .push(self.sigma.to_bytes());
        kf.encode()
    }

    pub fn from_keyfile(bytes: &[u8]) -> Result<Self, KeyFileError> {
        let kf = KeyFile::decode_expect(bytes, TAG_MEMBER, 3)?;
        check_curve::<E>(kf.field(0))?;
        let mut r = Reader::new(kf.field(2));
        let sigma = SpseqSignature::read(&mut r)
            .and_then(|s| r.finish().map(|_| s))
            .map_err(|e| field_err(2, e))?;
        Ok(DsMemberKey {
            r_pt: g1_field::<E>(&kf, 1)?,
            sigma,
        })
    }
}

/// A drone's long-term signing key for join witnesses.
pub fn dsig_key_to_keyfile<E: Engine>(sk: &E::ScalarField) -> Vec<u8> {
    let mut kf = KeyFile::new(TAG_DSIG);
    kf.push(vec![E::CURVE as u8])
        .push(enc(|v| E::write_scalar(sk, v)));
    kf.encode()
}

pub fn dsig_key_from_keyfile<E: Engine>(bytes: &[u8]) -> Result<E::ScalarField, KeyFileError> {
    let kf = KeyFile::decode_expect(bytes, TAG_DSIG, 2)?;
    check_curve::<E>(kf.field(0))?;
    scalar_field::<E>(&kf, 1)
}

impl<E: Engine> DsRegistry<E> {
    pub fn to_keyfile(&self) -> Vec<u8> {
        let mut kf = KeyFile::new(TAG_REGISTRY);
        kf.push(vec![E::CURVE as u8]);
        for e in &self.entries {
            let mut v = e.c_hat.clone();
            E::write_g1(&e.sigma_j, &mut v);
            E::write_g2(&e.pk_i, &mut v);
            kf.push(v);
        }
        kf.encode()
    }

    pub fn from_keyfile(bytes: &[u8]) -> Result<Self, KeyFileError> {
        let kf = KeyFile::decode(bytes)?;
        if kf.tag != TAG_REGISTRY || kf.fields.is_empty() {
            return Err(field_err(0, "not a DS registry"));
        }
        check_curve::<E>(kf.field(0))?;
        let ct_len = pke_ciphertext_len::<E>(E::g2_bytes());
        let entries = kf.fields[1..]
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let parse = || -> Result<_, AlgebraError> {
                    let mut r = Reader::new(f);
                    let c_hat = r.take(ct_len)?.to_vec();
                    let sigma_j = r.g1::<E>()?;
                    let pk_i = r.g2::<E>()?;
                    r.finish()?;
                    Ok(DsRegistrationEntry {
                        c_hat,
                        sigma_j,
                        pk_i,
                    })
                };
                parse().map_err(|e| field_err(i + 1, e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DsRegistry { entries })
    }
}
