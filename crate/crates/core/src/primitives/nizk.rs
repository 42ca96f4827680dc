//! Fiat-Shamir proof that `U = r*Q` and `R^ = r*P^` share the witness `r`.
//!
//! The prover commits `A = chi*Q`, `B = chi*P^`, hashes
//! `(Q, U, P^, bind, A, B)` to `c` and answers `s = chi - c*r`. The verifier
//! needs `R^` to rebuild `B`; during a join the USS gets it by decrypting
//! the member's encrypted witness.

use ark_ec::{AffineRepr, CurveGroup};

use crate::algebra::{smul, AlgebraError, BilinearContext, Engine, NonceSource, Reader};

pub const NIZK_LABEL: &str = "a2rid/ds/join-nizk";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NizkProof<E: Engine> {
    pub c: E::ScalarField,
    pub s: E::ScalarField,
}

impl<E: Engine> NizkProof<E> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 * E::scalar_bytes());
        E::write_scalar(&self.c, &mut out);
        E::write_scalar(&self.s, &mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AlgebraError> {
        let mut r = Reader::new(bytes);
        let proof = NizkProof {
            c: r.scalar::<E>()?,
            s: r.scalar::<E>()?,
        };
        r.finish()?;
        Ok(proof)
    }
}

fn challenge<E: Engine>(
    ctx: &BilinearContext<E>,
    q: &E::G1Affine,
    u: &E::G1Affine,
    bind: &[u8],
    a: &E::G1Affine,
    b: &E::G2Affine,
) -> E::ScalarField {
    ctx.transcript(NIZK_LABEL)
        .g1(q)
        .g1(u)
        .g2(&ctx.g2)
        .bytes(bind)
        .g1(a)
        .g2(b)
        .finish()
}

pub fn nizk_prove<E: Engine>(
    ctx: &BilinearContext<E>,
    q: &E::G1Affine,
    u: &E::G1Affine,
    r: &E::ScalarField,
    bind: &[u8],
    nonces: &mut impl NonceSource,
) -> NizkProof<E> {
    let chi: E::ScalarField = nonces.nonce();
    let a = smul(q, &chi).into_affine();
    let b = ctx.g2_mul(&chi).into_affine();
    let c = challenge(ctx, q, u, bind, &a, &b);
    NizkProof { c, s: chi - c * r }
}

pub fn nizk_verify<E: Engine>(
    ctx: &BilinearContext<E>,
    q: &E::G1Affine,
    u: &E::G1Affine,
    r_hat: &E::G2Affine,
    proof: &NizkProof<E>,
    bind: &[u8],
) -> bool {
    let a = (smul(q, &proof.s) + smul(u, &proof.c)).into_affine();
    let b = (ctx.g2_mul(&proof.s) + smul(r_hat, &proof.c)).into_affine();
    !q.is_zero() && challenge(ctx, q, u, bind, &a, &b) == proof.c
}
