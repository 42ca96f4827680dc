//! Short signatures: `sigma = sk * H(m)` in G1, `pk = sk * P^` in G2,
//! accepted iff `e(sigma, P^) = e(H(m), pk)`.

use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::Zero;
use rand::{CryptoRng, RngCore};

use crate::algebra::{smul, AlgebraError, BilinearContext, Engine};

const HASH_LABEL: &[u8] = b"a2rid/dsig";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsigKeys<E: Engine> {
    pub sk: E::ScalarField,
    pub pk: E::G2Affine,
}

pub fn dsig_keygen<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    rng: &mut R,
) -> DsigKeys<E> {
    let sk = ctx.random_scalar(rng);
    dsig_keys_from_secret(ctx, sk)
}

pub fn dsig_keys_from_secret<E: Engine>(
    ctx: &BilinearContext<E>,
    sk: E::ScalarField,
) -> DsigKeys<E> {
    DsigKeys {
        sk,
        pk: ctx.g2_mul(&sk).into_affine(),
    }
}

pub fn dsig_hash<E: Engine>(m: &[u8]) -> E::G1Affine {
    E::hash_to_g1(HASH_LABEL, m)
}

pub fn dsig_sign<E: Engine>(sk: &E::ScalarField, m: &[u8]) -> E::G1Affine {
    smul(&dsig_hash::<E>(m), sk).into_affine()
}

pub fn dsig_verify<E: Engine>(
    ctx: &BilinearContext<E>,
    pk: &E::G2Affine,
    m: &[u8],
    sigma: &E::G1Affine,
) -> bool {
    if sigma.is_zero() || pk.is_zero() {
        return false;
    }
    let h = dsig_hash::<E>(m);
    let neg = (-sigma.into_group()).into_affine();
    ctx.multi_pairing(&[(neg, ctx.g2), (h, *pk)]).is_zero()
}

/// Parses a signature and verifies it; malformed bytes are rejected before
/// any pairing is evaluated.
pub fn dsig_verify_bytes<E: Engine>(
    ctx: &BilinearContext<E>,
    pk: &E::G2Affine,
    m: &[u8],
    sigma: &[u8],
) -> Result<bool, AlgebraError> {
    let sigma = E::read_g1(sigma)?;
    Ok(dsig_verify(ctx, pk, m, &sigma))
}
