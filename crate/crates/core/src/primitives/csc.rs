//! Cramer-Shoup encryption over the target group.
//!
//! The public key is `(g1, g2, c, d, h)` with `c = g1^x1 g2^x2`,
//! `d = g1^y1 g2^y2` and `h = g1^z1 g2^z2`. Key generation sets `z2 = 0`,
//! which gives the textbook scheme; the two-exponent form of `h` lets the
//! CS group opener's key be read as a Cramer-Shoup key directly.
//!
//! The target group is written additively by arkworks, so `a^x` below is
//! `a * x` in code and `a / b` is `a - b`.

use rand::{CryptoRng, RngCore};

use crate::algebra::{
    gt_pow, random_gt, AlgebraError, BilinearContext, Engine, Gt, NonceSource, Reader, RngNonces,
};

/// Hash label for the ciphertext binding scalar `alpha = H(u1 || u2 || e)`.
pub const CSC_ALPHA_LABEL: &str = "a2rid/cs/encrypt-hash";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CscPublicKey<E: Engine> {
    pub g1: Gt<E>,
    pub g2: Gt<E>,
    pub c: Gt<E>,
    pub d: Gt<E>,
    pub h: Gt<E>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CscSecretKey<E: Engine> {
    pub x1: E::ScalarField,
    pub x2: E::ScalarField,
    pub y1: E::ScalarField,
    pub y2: E::ScalarField,
    pub z1: E::ScalarField,
    pub z2: E::ScalarField,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CramerShoupKeys<E: Engine> {
    pub pk: CscPublicKey<E>,
    pub sk: CscSecretKey<E>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CscCiphertext<E: Engine> {
    pub u1: Gt<E>,
    pub u2: Gt<E>,
    pub e: Gt<E>,
    pub psi: Gt<E>,
}

impl<E: Engine> CscPublicKey<E> {
    /// Recomputes `c`, `d`, `h` from the secret exponents.
    pub fn matches(&self, sk: &CscSecretKey<E>) -> bool {
        let combine = |a: &E::ScalarField, b: &E::ScalarField| self.g1 * a + self.g2 * b;
        self.c == combine(&sk.x1, &sk.x2)
            && self.d == combine(&sk.y1, &sk.y2)
            && self.h == combine(&sk.z1, &sk.z2)
    }
}

impl<E: Engine> CscCiphertext<E> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 * E::gt_bytes());
        for t in [&self.u1, &self.u2, &self.e, &self.psi] {
            E::write_gt(t, &mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AlgebraError> {
        let mut r = Reader::new(bytes);
        let ct = CscCiphertext {
            u1: r.gt::<E>()?,
            u2: r.gt::<E>()?,
            e: r.gt::<E>()?,
            psi: r.gt::<E>()?,
        };
        r.finish()?;
        Ok(ct)
    }
}

pub fn csc_keygen<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    rng: &mut R,
) -> CramerShoupKeys<E> {
    let g1 = ctx.gt;
    let g2 = random_gt(ctx, rng);
    csc_keygen_with(ctx, g1, g2, &mut RngNonces(rng))
}

/// Key generation for fixed generators; draws `x1, x2, y1, y2, z1` in order.
pub fn csc_keygen_with<E: Engine>(
    _ctx: &BilinearContext<E>,
    g1: Gt<E>,
    g2: Gt<E>,
    nonces: &mut impl NonceSource,
) -> CramerShoupKeys<E> {
    let sk = CscSecretKey {
        x1: nonces.nonce(),
        x2: nonces.nonce(),
        y1: nonces.nonce(),
        y2: nonces.nonce(),
        z1: nonces.nonce(),
        z2: E::ScalarField::from(0u64),
    };
    let pk = CscPublicKey {
        g1,
        g2,
        c: gt_pow::<E>(&g1, &sk.x1) + gt_pow::<E>(&g2, &sk.x2),
        d: gt_pow::<E>(&g1, &sk.y1) + gt_pow::<E>(&g2, &sk.y2),
        h: gt_pow::<E>(&g1, &sk.z1),
    };
    CramerShoupKeys { pk, sk }
}

pub fn csc_alpha<E: Engine>(
    ctx: &BilinearContext<E>,
    u1: &Gt<E>,
    u2: &Gt<E>,
    e: &Gt<E>,
) -> E::ScalarField {
    ctx.transcript(CSC_ALPHA_LABEL).gt(u1).gt(u2).gt(e).finish()
}

pub fn csc_encrypt<E: Engine>(
    ctx: &BilinearContext<E>,
    pk: &CscPublicKey<E>,
    m: &Gt<E>,
    r: &E::ScalarField,
) -> CscCiphertext<E> {
    let u1 = gt_pow::<E>(&pk.g1, r);
    let u2 = gt_pow::<E>(&pk.g2, r);
    let e = gt_pow::<E>(&pk.h, r) + m;
    let alpha = csc_alpha(ctx, &u1, &u2, &e);
    let psi = gt_pow::<E>(&pk.c, r) + gt_pow::<E>(&pk.d, &(*r * alpha));
    CscCiphertext { u1, u2, e, psi }
}

/// Returns `None` when the validity check on `psi` fails.
pub fn csc_decrypt<E: Engine>(
    ctx: &BilinearContext<E>,
    sk: &CscSecretKey<E>,
    ct: &CscCiphertext<E>,
) -> Option<Gt<E>> {
    let alpha = csc_alpha(ctx, &ct.u1, &ct.u2, &ct.e);
    let check = gt_pow::<E>(&ct.u1, &(sk.x1 + sk.y1 * alpha))
        + gt_pow::<E>(&ct.u2, &(sk.x2 + sk.y2 * alpha));
    if check != ct.psi {
        return None;
    }
    Some(ct.e - gt_pow::<E>(&ct.u1, &sk.z1) - gt_pow::<E>(&ct.u2, &sk.z2))
}

/// Decrypts a serialized ciphertext; malformed bytes decrypt to `None`.
pub fn csc_decrypt_bytes<E: Engine>(
    ctx: &BilinearContext<E>,
    sk: &CscSecretKey<E>,
    bytes: &[u8],
) -> Option<Gt<E>> {
    let ct = CscCiphertext::<E>::from_bytes(bytes).ok()?;
    csc_decrypt(ctx, sk, &ct)
}
