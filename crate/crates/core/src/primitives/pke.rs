//! Elliptic-curve integrated encryption over G1.
//!
//! A fresh ephemeral key `k` gives `K = k*P` and the shared point `k*pk`.
//! HKDF-SHA256 over the shared point (salted with `K`) yields a one-time
//! ChaCha20-Poly1305 key; the nonce is fixed at zero because every key is
//! used once. Ciphertext layout: `K || aead(payload) || tag`.

use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use hkdf::Hkdf;
use rand::{CryptoRng, RngCore};
use sha2::Sha256;
use thiserror::Error;

use ark_ec::CurveGroup;

use crate::algebra::{smul, AlgebraError, BilinearContext, Engine, NonceSource, RngNonces};

const KDF_INFO: &[u8] = b"a2rid/ecies/chacha20poly1305";
const TAG_BYTES: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PkeError {
    #[error("ciphertext too short")]
    Truncated,
    #[error("malformed ephemeral key: {0}")]
    Ephemeral(#[from] AlgebraError),
    #[error("authentication failed")]
    Authentication,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PkePublicKey<E: Engine>(pub E::G1Affine);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PkeSecretKey<E: Engine>(pub E::ScalarField);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PkeKeys<E: Engine> {
    pub pk: PkePublicKey<E>,
    pub sk: PkeSecretKey<E>,
}

/// Ciphertext length for a payload of `len` bytes.
pub fn pke_ciphertext_len<E: Engine>(len: usize) -> usize {
    E::g1_bytes() + len + TAG_BYTES
}

pub fn pke_keygen<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    rng: &mut R,
) -> PkeKeys<E> {
    let sk = ctx.random_scalar(rng);
    PkeKeys {
        pk: PkePublicKey(ctx.g1_mul(&sk).into_affine()),
        sk: PkeSecretKey(sk),
    }
}

fn cipher<E: Engine>(shared: &E::G1Affine, ephemeral: &[u8]) -> ChaCha20Poly1305 {
    let mut ikm = Vec::with_capacity(E::g1_bytes());
    E::write_g1(shared, &mut ikm);
    let hk = Hkdf::<Sha256>::new(Some(ephemeral), &ikm);
    let mut key = [0u8; 32];
    hk.expand(KDF_INFO, &mut key)
        .expect("32 bytes is a valid length");
    ChaCha20Poly1305::new(Key::from_slice(&key))
}

pub fn pke_encrypt<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    pk: &PkePublicKey<E>,
    payload: &[u8],
    rng: &mut R,
) -> Vec<u8> {
    pke_encrypt_with(ctx, pk, payload, &mut RngNonces(rng))
}

pub fn pke_encrypt_with<E: Engine>(
    ctx: &BilinearContext<E>,
    pk: &PkePublicKey<E>,
    payload: &[u8],
    nonces: &mut impl NonceSource,
) -> Vec<u8> {
    let k: E::ScalarField = nonces.nonce();
    let ephemeral = ctx.g1_mul(&k).into_affine();
    let shared = smul(&pk.0, &k).into_affine();
    let mut out = Vec::with_capacity(pke_ciphertext_len::<E>(payload.len()));
    E::write_g1(&ephemeral, &mut out);
    let body = cipher::<E>(&shared, &out)
        .encrypt(Nonce::from_slice(&[0u8; 12]), payload)
        .expect("in-memory encryption cannot fail");
    out.extend_from_slice(&body);
    out
}

pub fn pke_decrypt<E: Engine>(
    sk: &PkeSecretKey<E>,
    ciphertext: &[u8],
) -> Result<Vec<u8>, PkeError> {
    let w = E::g1_bytes();
    if ciphertext.len() < w + TAG_BYTES {
        return Err(PkeError::Truncated);
    }
    let (eph_bytes, body) = ciphertext.split_at(w);
    let ephemeral = E::read_g1(eph_bytes)?;
    let shared = smul(&ephemeral, &sk.0).into_affine();
    cipher::<E>(&shared, eph_bytes)
        .decrypt(Nonce::from_slice(&[0u8; 12]), body)
        .map_err(|_| PkeError::Authentication)
}
