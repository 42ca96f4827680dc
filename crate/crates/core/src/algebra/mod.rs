//! Bilinear groups, scalar arithmetic, canonical encodings and hashing.
//!
//! All protocol code is generic over an [`Engine`]: an arkworks [`Pairing`]
//! extended with the fixed-width encodings and the hash-to-curve map used on
//! the wire. Three engines are provided:
//!
//! | curve | engine | pairing | scalar | G1 | G2 | GT |
//! |-------|--------|---------|--------|----|----|----|
//! | [`CurveId::TypeA`] | [`TypeA<A512>`](type_a::A512) | Type-1 | 20 B | 128 B | 128 B | 128 B |
//! | [`CurveId::Bn254`] | `ark_bn254::Bn254` | Type-3 | 32 B | 32 B | 64 B | 192 B |
//! | [`CurveId::Toy`] | [`TypeA<Toy>`](type_a::Toy) | Type-1 | 2 B | 6 B | 6 B | 6 B |
//!
//! Scalars are big-endian and fixed width. The toy curve has a 16-bit group
//! order and exists for exhaustive oracles in tests.

pub mod bn254;
pub mod counters;
pub mod type_a;

use std::fmt;
use std::str::FromStr;

use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::short_weierstrass::{Affine, SWCurveConfig};
use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{BigInteger, PrimeField};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha1::Sha1;
use sha2::{Digest, Sha512};
use thiserror::Error;

pub use counters::{measure, op_counts, reset_op_counts, OpCounts};
pub use type_a::TypeA;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("unsupported curve {0}")]
    UnsupportedCurve(String),
    #[error("curve {curve} offers {available} bits of security, {requested} requested")]
    InsufficientSecurity {
        curve: CurveId,
        available: u32,
        requested: u32,
    },
    #[error("expected {expected} bytes, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("non-canonical encoding")]
    NonCanonical,
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("element is not in the prime-order subgroup")]
    WrongSubgroup,
}

/// Supported curves. The discriminant is the on-wire curve id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[repr(u8)]
pub enum CurveId {
    /// Supersingular `y^2 = x^3 + x`, 512-bit field, 160-bit order.
    TypeA = 1,
    Bn254 = 2,
    Toy = 0xff,
}

impl CurveId {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            1 => Some(CurveId::TypeA),
            2 => Some(CurveId::Bn254),
            0xff => Some(CurveId::Toy),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CurveId::TypeA => "type-a",
            CurveId::Bn254 => "bn254",
            CurveId::Toy => "toy",
        }
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CurveId {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "type-a" | "typea" | "a" => Ok(CurveId::TypeA),
            "bn254" | "bn-254" => Ok(CurveId::Bn254),
            "toy" => Ok(CurveId::Toy),
            other => Err(AlgebraError::UnsupportedCurve(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairingType {
    Type1Symmetric,
    Type3Asymmetric,
}

/// Digest behind [`BilinearContext::hash_to_scalar`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HashAlg {
    #[default]
    Sha512,
    /// 160-bit digest, kept for reproducing legacy deployments.
    Sha1,
}

pub type Scalar<E> = <E as Pairing>::ScalarField;
pub type G1<E> = <E as Pairing>::G1;
pub type G1Affine<E> = <E as Pairing>::G1Affine;
pub type G2<E> = <E as Pairing>::G2;
pub type G2Affine<E> = <E as Pairing>::G2Affine;
pub type Gt<E> = PairingOutput<E>;

/// A pairing engine with fixed-width canonical encodings.
pub trait Engine: Pairing {
    const CURVE: CurveId;
    const PAIRING_TYPE: PairingType;
    const SECURITY_BITS: u32;

    fn g1_bytes() -> usize;
    fn g2_bytes() -> usize;
    fn gt_bytes() -> usize;
    fn scalar_bytes() -> usize {
        (Self::ScalarField::MODULUS_BIT_SIZE as usize).div_ceil(8)
    }

    fn write_g1(p: &Self::G1Affine, out: &mut Vec<u8>);
    fn read_g1(bytes: &[u8]) -> Result<Self::G1Affine, AlgebraError>;
    fn write_g2(p: &Self::G2Affine, out: &mut Vec<u8>);
    fn read_g2(bytes: &[u8]) -> Result<Self::G2Affine, AlgebraError>;
    fn write_gt(t: &PairingOutput<Self>, out: &mut Vec<u8>);
    fn read_gt(bytes: &[u8]) -> Result<PairingOutput<Self>, AlgebraError>;

    fn write_scalar(s: &Self::ScalarField, out: &mut Vec<u8>) {
        let be = s.into_bigint().to_bytes_be();
        out.extend_from_slice(&be[be.len() - Self::scalar_bytes()..]);
    }

    fn read_scalar(bytes: &[u8]) -> Result<Self::ScalarField, AlgebraError> {
        let width = Self::scalar_bytes();
        if bytes.len() != width {
            return Err(AlgebraError::Length {
                expected: width,
                actual: bytes.len(),
            });
        }
        let s = Self::ScalarField::from_be_bytes_mod_order(bytes);
        // reject values >= order: they reduce to a different encoding
        let mut check = Vec::with_capacity(width);
        Self::write_scalar(&s, &mut check);
        if check != bytes {
            return Err(AlgebraError::NonCanonical);
        }
        Ok(s)
    }

    /// Deterministic, label-separated map from bytes to a non-identity G1 point.
    fn hash_to_g1(label: &[u8], msg: &[u8]) -> Self::G1Affine;
}

/// Try-and-increment hashing onto a short Weierstrass curve, followed by
/// cofactor clearing. Running time depends on the input; use on public data.
pub(crate) fn sw_hash_to_curve<C: SWCurveConfig>(label: &[u8], msg: &[u8]) -> Affine<C>
where
    C::BaseField: PrimeField,
{
    counters::count_hash();
    for ctr in 0u32.. {
        let digest = Sha512::new()
            .chain_update([label.len() as u8])
            .chain_update(label)
            .chain_update((msg.len() as u64).to_be_bytes())
            .chain_update(msg)
            .chain_update(ctr.to_be_bytes())
            .finalize();
        let x = C::BaseField::from_be_bytes_mod_order(&digest[1..]);
        let greatest = digest[0] & 1 == 1;
        if let Some(p) = Affine::<C>::get_point_from_x_unchecked(x, greatest) {
            let p = p.clear_cofactor();
            if !p.is_zero() {
                return p;
            }
        }
    }
    unreachable!("counter space exhausted")
}

/// Scalar multiplication, recorded in the operation counters.
pub fn mul<G: CurveGroup>(base: &G, s: &G::ScalarField) -> G {
    counters::count_scalar_mult();
    *base * s
}

/// Target-group exponentiation (written additively), recorded in the counters.
pub fn gt_pow<E: Pairing>(base: &Gt<E>, s: &E::ScalarField) -> Gt<E> {
    counters::count_gt_exp();
    *base * s
}

/// Scalar multiplication of an affine point, recorded in the counters.
pub fn smul<A: AffineRepr>(base: &A, s: &A::ScalarField) -> A::Group {
    counters::count_scalar_mult();
    *base * s
}

/// Where protocol nonces come from.
///
/// Production code draws from a CSPRNG through [`RngNonces`]; tests replay
/// fixed scalars through [`FixedNonces`] to check transcripts against a
/// hand-evaluated oracle.
pub trait NonceSource {
    /// A scalar in `[1, order)`.
    fn nonce<F: PrimeField>(&mut self) -> F;
}

pub struct RngNonces<'a, R: ?Sized>(pub &'a mut R);

impl<R: RngCore + CryptoRng + ?Sized> NonceSource for RngNonces<'_, R> {
    fn nonce<F: PrimeField>(&mut self) -> F {
        random_nonzero(self.0)
    }
}

/// Replays a fixed list of small scalars. Panics when the list runs out.
#[derive(Clone, Debug, Default)]
pub struct FixedNonces {
    values: Vec<u64>,
    pos: usize,
}

impl FixedNonces {
    pub fn new(values: &[u64]) -> Self {
        FixedNonces {
            values: values.to_vec(),
            pos: 0,
        }
    }

    pub fn used(&self) -> usize {
        self.pos
    }
}

impl NonceSource for FixedNonces {
    fn nonce<F: PrimeField>(&mut self) -> F {
        let v = *self
            .values
            .get(self.pos)
            .expect("fixed nonce list exhausted");
        self.pos += 1;
        F::from(v)
    }
}

/// Uniform scalar in `[1, order)`.
pub fn random_nonzero<F: PrimeField, R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> F {
    loop {
        let s = F::rand(&mut RngAdapter(rng));
        if !s.is_zero() {
            return s;
        }
    }
}

/// Lets `?Sized` RNG handles feed arkworks' `UniformRand`.
struct RngAdapter<'a, R: ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for RngAdapter<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

/// Public parameters of a bilinear group.
///
/// Immutable after construction; clone freely and share across threads.
#[derive(Clone, Debug)]
pub struct BilinearContext<E: Engine> {
    pub curve: CurveId,
    pub pairing_type: PairingType,
    pub security_bits: u32,
    pub g1: E::G1Affine,
    pub g2: E::G2Affine,
    pub gt: Gt<E>,
    pub hash: HashAlg,
}

impl<E: Engine> BilinearContext<E> {
    pub fn new(curve: CurveId, security_bits: u32) -> Result<Self, AlgebraError> {
        if curve != E::CURVE {
            return Err(AlgebraError::UnsupportedCurve(format!(
                "{curve} (engine implements {})",
                E::CURVE
            )));
        }
        if security_bits > E::SECURITY_BITS {
            return Err(AlgebraError::InsufficientSecurity {
                curve,
                available: E::SECURITY_BITS,
                requested: security_bits,
            });
        }
        let g1 = E::G1Affine::generator();
        let g2 = E::G2Affine::generator();
        let gt = E::pairing(g1, g2);
        Ok(BilinearContext {
            curve,
            pairing_type: E::PAIRING_TYPE,
            security_bits,
            g1,
            g2,
            gt,
            hash: HashAlg::default(),
        })
    }

    /// The context at the engine's native security level.
    pub fn default_for_engine() -> Self {
        Self::new(E::CURVE, E::SECURITY_BITS).expect("native parameters are valid")
    }

    pub fn with_hash(mut self, hash: HashAlg) -> Self {
        self.hash = hash;
        self
    }

    /// Group order, as a decimal string.
    pub fn group_order(&self) -> String {
        E::ScalarField::MODULUS.to_string()
    }

    pub fn group_order_bits(&self) -> u32 {
        E::ScalarField::MODULUS_BIT_SIZE
    }

    pub fn pairing(&self, a: &E::G1Affine, b: &E::G2Affine) -> Gt<E> {
        counters::count_pairings(1);
        E::pairing(*a, *b)
    }

    /// Product of pairings, sharing one final exponentiation.
    pub fn multi_pairing(&self, pairs: &[(E::G1Affine, E::G2Affine)]) -> Gt<E> {
        counters::count_pairings(pairs.len() as u64);
        E::multi_pairing(pairs.iter().map(|p| p.0), pairs.iter().map(|p| p.1))
    }

    pub fn g1_mul(&self, s: &E::ScalarField) -> E::G1 {
        mul(&self.g1.into_group(), s)
    }

    pub fn g2_mul(&self, s: &E::ScalarField) -> E::G2 {
        mul(&self.g2.into_group(), s)
    }

    pub fn gt_pow(&self, s: &E::ScalarField) -> Gt<E> {
        gt_pow::<E>(&self.gt, s)
    }

    pub fn random_scalar<R: RngCore + CryptoRng + ?Sized>(&self, rng: &mut R) -> E::ScalarField {
        random_nonzero(rng)
    }

    /// Hashes `bytes` under a domain-separation `label` to a scalar.
    pub fn hash_to_scalar(&self, label: &str, bytes: &[u8]) -> E::ScalarField {
        self.transcript(label).raw(bytes).finish()
    }

    /// Starts a labeled hash over canonical encodings.
    pub fn transcript(&self, label: &str) -> ScalarHasher<'_, E> {
        let mut buf = Vec::with_capacity(256);
        buf.push(label.len() as u8);
        buf.extend_from_slice(label.as_bytes());
        ScalarHasher { ctx: self, buf }
    }
}

/// Accumulates canonical encodings and reduces a digest to a scalar.
pub struct ScalarHasher<'a, E: Engine> {
    ctx: &'a BilinearContext<E>,
    buf: Vec<u8>,
}

impl<E: Engine> ScalarHasher<'_, E> {
    pub fn g1(mut self, p: &E::G1Affine) -> Self {
        E::write_g1(p, &mut self.buf);
        self
    }

    pub fn g2(mut self, p: &E::G2Affine) -> Self {
        E::write_g2(p, &mut self.buf);
        self
    }

    pub fn gt(mut self, t: &Gt<E>) -> Self {
        E::write_gt(t, &mut self.buf);
        self
    }

    pub fn scalar(mut self, s: &E::ScalarField) -> Self {
        E::write_scalar(s, &mut self.buf);
        self
    }

    /// Variable-length input, length-prefixed.
    pub fn bytes(mut self, data: &[u8]) -> Self {
        self.buf
            .extend_from_slice(&(data.len() as u64).to_be_bytes());
        self.buf.extend_from_slice(data);
        self
    }

    /// Appends bytes as-is.
    pub fn raw(mut self, data: &[u8]) -> Self {
        self.buf.extend_from_slice(data);
        self
    }

    pub fn finish(self) -> E::ScalarField {
        counters::count_hash();
        match self.ctx.hash {
            HashAlg::Sha512 => E::ScalarField::from_be_bytes_mod_order(&Sha512::digest(&self.buf)),
            HashAlg::Sha1 => E::ScalarField::from_be_bytes_mod_order(&Sha1::digest(&self.buf)),
        }
    }
}

/// Which group an encoded element belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum GroupTag {
    G1 = 1,
    G2 = 2,
    Gt = 3,
    Scalar = 4,
}

impl GroupTag {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            1 => Some(GroupTag::G1),
            2 => Some(GroupTag::G2),
            3 => Some(GroupTag::Gt),
            4 => Some(GroupTag::Scalar),
            _ => None,
        }
    }
}

/// A group element or scalar tagged with where it lives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Element<E: Engine> {
    G1(E::G1Affine),
    G2(E::G2Affine),
    Gt(Gt<E>),
    Scalar(E::ScalarField),
}

impl<E: Engine> Element<E> {
    pub fn tag(&self) -> GroupTag {
        match self {
            Element::G1(_) => GroupTag::G1,
            Element::G2(_) => GroupTag::G2,
            Element::Gt(_) => GroupTag::Gt,
            Element::Scalar(_) => GroupTag::Scalar,
        }
    }

    pub fn width(tag: GroupTag) -> usize {
        match tag {
            GroupTag::G1 => E::g1_bytes(),
            GroupTag::G2 => E::g2_bytes(),
            GroupTag::Gt => E::gt_bytes(),
            GroupTag::Scalar => E::scalar_bytes(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Element::G1(p) => E::write_g1(p, &mut out),
            Element::G2(p) => E::write_g2(p, &mut out),
            Element::Gt(t) => E::write_gt(t, &mut out),
            Element::Scalar(s) => E::write_scalar(s, &mut out),
        }
        out
    }

    pub fn from_bytes(tag: GroupTag, bytes: &[u8]) -> Result<Self, AlgebraError> {
        Ok(match tag {
            GroupTag::G1 => Element::G1(E::read_g1(bytes)?),
            GroupTag::G2 => Element::G2(E::read_g2(bytes)?),
            GroupTag::Gt => Element::Gt(E::read_gt(bytes)?),
            GroupTag::Scalar => Element::Scalar(E::read_scalar(bytes)?),
        })
    }
}

/// Cursor over a byte string of fixed-width encodings.
pub struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], AlgebraError> {
        if self.bytes.len() - self.pos < n {
            return Err(AlgebraError::Length {
                expected: self.pos + n,
                actual: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn g1<E: Engine>(&mut self) -> Result<E::G1Affine, AlgebraError> {
        E::read_g1(self.take(E::g1_bytes())?)
    }

    pub fn g2<E: Engine>(&mut self) -> Result<E::G2Affine, AlgebraError> {
        E::read_g2(self.take(E::g2_bytes())?)
    }

    pub fn gt<E: Engine>(&mut self) -> Result<Gt<E>, AlgebraError> {
        E::read_gt(self.take(E::gt_bytes())?)
    }

    pub fn scalar<E: Engine>(&mut self) -> Result<E::ScalarField, AlgebraError> {
        E::read_scalar(self.take(E::scalar_bytes())?)
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    /// Errors unless every byte was consumed.
    pub fn finish(self) -> Result<(), AlgebraError> {
        if self.pos != self.bytes.len() {
            return Err(AlgebraError::Length {
                expected: self.pos,
                actual: self.bytes.len(),
            });
        }
        Ok(())
    }
}

/// First four bytes of SHA-256 over `bytes`.
pub fn fingerprint(bytes: &[u8]) -> [u8; 4] {
    let d = sha2::Sha256::digest(bytes);
    [d[0], d[1], d[2], d[3]]
}

/// Uniform random target-group element other than the identity.
pub fn random_gt<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    rng: &mut R,
) -> Gt<E> {
    let s: E::ScalarField = random_nonzero(rng);
    ctx.gt_pow(&s)
}

/// Uniform scalar, possibly zero.
pub fn random_scalar_any<F: PrimeField, R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> F {
    F::rand(&mut RngAdapter(rng))
}
