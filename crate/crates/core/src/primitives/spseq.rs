//! Structure-preserving signatures on equivalence classes of G1 vectors.
//!
//! For `sk = (x_i)` and `pk = (x_i * P^)`, a signature on `M` is
//! `Z = y * sum(x_i * M_i)`, `Y = P / y`, `Y^ = P^ / y`. Any scalar multiple
//! `rho * M` can be re-signed without the secret key by [`spseq_chgrep`].

use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{Field, Zero};
use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::algebra::{smul, AlgebraError, BilinearContext, Engine, NonceSource, Reader, RngNonces};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpseqError {
    #[error("message has {actual} components, key expects {expected}")]
    Length { expected: usize, actual: usize },
    #[error("message component is the identity")]
    IdentityComponent,
    #[error("input signature does not verify")]
    InvalidSignature,
    #[error("representative scalar is zero")]
    ZeroScalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpseqKeys<E: Engine> {
    pub sk: Vec<E::ScalarField>,
    pub pk: Vec<E::G2Affine>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpseqSignature<E: Engine> {
    pub z: E::G1Affine,
    pub y: E::G1Affine,
    pub y_hat: E::G2Affine,
}

impl<E: Engine> SpseqSignature<E> {
    pub fn encoded_len() -> usize {
        2 * E::g1_bytes() + E::g2_bytes()
    }

    pub fn write(&self, out: &mut Vec<u8>) {
        E::write_g1(&self.z, out);
        E::write_g1(&self.y, out);
        E::write_g2(&self.y_hat, out);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::encoded_len());
        self.write(&mut out);
        out
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, AlgebraError> {
        Ok(SpseqSignature {
            z: r.g1::<E>()?,
            y: r.g1::<E>()?,
            y_hat: r.g2::<E>()?,
        })
    }
}

pub fn spseq_keygen<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    len: usize,
    rng: &mut R,
) -> SpseqKeys<E> {
    let sk: Vec<E::ScalarField> = (0..len).map(|_| ctx.random_scalar(rng)).collect();
    spseq_keys_from_secret(ctx, sk)
}

pub fn spseq_keys_from_secret<E: Engine>(
    ctx: &BilinearContext<E>,
    sk: Vec<E::ScalarField>,
) -> SpseqKeys<E> {
    let pk = sk.iter().map(|x| ctx.g2_mul(x).into_affine()).collect();
    SpseqKeys { sk, pk }
}

pub fn spseq_sign<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    sk: &[E::ScalarField],
    m: &[E::G1Affine],
    rng: &mut R,
) -> Result<SpseqSignature<E>, SpseqError> {
    spseq_sign_with(ctx, sk, m, &mut RngNonces(rng))
}

/// Signs with the randomizer `y` taken from `nonces`.
pub fn spseq_sign_with<E: Engine>(
    ctx: &BilinearContext<E>,
    sk: &[E::ScalarField],
    m: &[E::G1Affine],
    nonces: &mut impl NonceSource,
) -> Result<SpseqSignature<E>, SpseqError> {
    if m.len() != sk.len() {
        return Err(SpseqError::Length {
            expected: sk.len(),
            actual: m.len(),
        });
    }
    if m.iter().any(|p| p.is_zero()) {
        return Err(SpseqError::IdentityComponent);
    }
    let y: E::ScalarField = nonces.nonce();
    let y_inv = y.inverse().expect("nonces are non-zero");
    let mut acc = E::G1::zero();
    for (x, p) in sk.iter().zip(m) {
        acc += smul(p, &(*x * y));
    }
    Ok(SpseqSignature {
        z: acc.into_affine(),
        y: ctx.g1_mul(&y_inv).into_affine(),
        y_hat: ctx.g2_mul(&y_inv).into_affine(),
    })
}

/// Moves `(m, sigma)` to the representative `rho * m`, re-randomizing the
/// signature with `psi`. Performs no pairing and no validity check.
pub fn spseq_chgrep_unchecked<E: Engine>(
    m: &[E::G1Affine],
    sigma: &SpseqSignature<E>,
    rho: &E::ScalarField,
    psi: &E::ScalarField,
) -> (Vec<E::G1Affine>, SpseqSignature<E>) {
    let psi_inv = psi.inverse().expect("psi is non-zero");
    let m2 = m.iter().map(|p| smul(p, rho).into_affine()).collect();
    let sigma2 = SpseqSignature {
        z: smul(&sigma.z, &(*psi * rho)).into_affine(),
        y: smul(&sigma.y, &psi_inv).into_affine(),
        y_hat: smul(&sigma.y_hat, &psi_inv).into_affine(),
    };
    (m2, sigma2)
}

pub fn spseq_chgrep<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    m: &[E::G1Affine],
    sigma: &SpseqSignature<E>,
    rho: &E::ScalarField,
    pk: &[E::G2Affine],
    rng: &mut R,
) -> Result<(Vec<E::G1Affine>, SpseqSignature<E>), SpseqError> {
    spseq_chgrep_with(ctx, m, sigma, rho, pk, &mut RngNonces(rng))
}

/// Checked change of representative; `psi` comes from `nonces`.
pub fn spseq_chgrep_with<E: Engine>(
    ctx: &BilinearContext<E>,
    m: &[E::G1Affine],
    sigma: &SpseqSignature<E>,
    rho: &E::ScalarField,
    pk: &[E::G2Affine],
    nonces: &mut impl NonceSource,
) -> Result<(Vec<E::G1Affine>, SpseqSignature<E>), SpseqError> {
    if rho.is_zero() {
        return Err(SpseqError::ZeroScalar);
    }
    if !spseq_verify(ctx, m, sigma, pk) {
        return Err(SpseqError::InvalidSignature);
    }
    let psi: E::ScalarField = nonces.nonce();
    Ok(spseq_chgrep_unchecked(m, sigma, rho, &psi))
}

/// Checks `prod e(M_i, X^_i) = e(Z, Y^)` and `e(Y, P^) = e(P, Y^)`.
pub fn spseq_verify<E: Engine>(
    ctx: &BilinearContext<E>,
    m: &[E::G1Affine],
    sigma: &SpseqSignature<E>,
    pk: &[E::G2Affine],
) -> bool {
    if m.len() != pk.len() || m.iter().any(|p| p.is_zero()) || sigma.y_hat.is_zero() {
        return false;
    }
    let mut pairs: Vec<_> = m.iter().copied().zip(pk.iter().copied()).collect();
    pairs.push(((-sigma.z.into_group()).into_affine(), sigma.y_hat));
    if !ctx.multi_pairing(&pairs).is_zero() {
        return false;
    }
    let neg_p = (-ctx.g1.into_group()).into_affine();
    ctx.multi_pairing(&[(sigma.y, ctx.g2), (neg_p, sigma.y_hat)])
        .is_zero()
}

pub fn spseq_vkey<E: Engine>(
    ctx: &BilinearContext<E>,
    sk: &[E::ScalarField],
    pk: &[E::G2Affine],
) -> bool {
    sk.len() == pk.len()
        && sk
            .iter()
            .zip(pk)
            .all(|(x, p)| ctx.g2_mul(x).into_affine() == *p)
}
