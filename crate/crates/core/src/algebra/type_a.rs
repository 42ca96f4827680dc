//! Symmetric (Type-1) pairings on supersingular curves `y^2 = x^3 + x` over
//! `F_q` with `q = 3 mod 4`.
//!
//! The curve has `q + 1` points and embedding degree 2. The distortion map
//! `(x, y) -> (-x, i*y)` sends `E(F_q)[r]` to an independent subgroup of
//! `E(F_q^2)[r]`, so the reduced Tate pairing
//! `e(P, Q) = f_{r,P}(psi(Q))^((q^2 - 1) / r)` is a non-degenerate symmetric
//! pairing with `G1 = G2 = E(F_q)[r]` and `GT` the order-`r` subgroup of
//! `F_q^2*`.
//!
//! Two parameter sets are provided: [`A512`] (512-bit base field, 160-bit
//! Solinas group order) and [`Toy`] (a 20-bit field with a 16-bit group order
//! small enough for exhaustive discrete-log oracles).

use std::fmt::Debug;
use std::marker::PhantomData;

use ark_ec::pairing::{MillerLoopOutput, Pairing, PairingOutput};
use ark_ec::short_weierstrass::{Affine, Projective, SWCurveConfig};
use ark_ec::{AffineRepr, CurveConfig};
use ark_ff::fields::{Fp2, Fp2Config, Fp512, Fp64, MontBackend, MontConfig};
use ark_ff::{AdditiveGroup, BigInteger, Field, MontFp, One, PrimeField, Zero};
use ark_serialize::{
    CanonicalDeserialize, CanonicalSerialize, Compress, SerializationError, Valid, Validate,
};
use ark_std::io::{Read, Write};

use super::{AlgebraError, CurveId, Engine, PairingType};

/// Parameters of a Type-A curve.
pub trait TypeAConfig: SWCurveConfig + Copy + Clone + Debug + PartialEq + Eq
where
    Self::BaseField: PrimeField,
{
    type Fq2Config: Fp2Config<Fp = Self::BaseField>;
    const CURVE: CurveId;
    const SECURITY_BITS: u32;
}

/// Pairing engine over a Type-A curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TypeA<C>(PhantomData<C>);

/// Prepared form of a Type-A point; the Miller loop works on affine points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prepared<C: SWCurveConfig>(pub Affine<C>);

impl<C: SWCurveConfig> Default for Prepared<C> {
    fn default() -> Self {
        Prepared(Affine::identity())
    }
}

impl<C: SWCurveConfig> From<Affine<C>> for Prepared<C> {
    fn from(p: Affine<C>) -> Self {
        Prepared(p)
    }
}

impl<C: SWCurveConfig> From<&Affine<C>> for Prepared<C> {
    fn from(p: &Affine<C>) -> Self {
        Prepared(*p)
    }
}

impl<C: SWCurveConfig> From<Projective<C>> for Prepared<C> {
    fn from(p: Projective<C>) -> Self {
        Prepared(p.into())
    }
}

impl<C: SWCurveConfig> From<&Projective<C>> for Prepared<C> {
    fn from(p: &Projective<C>) -> Self {
        Prepared((*p).into())
    }
}

impl<C: SWCurveConfig> CanonicalSerialize for Prepared<C> {
    fn serialize_with_mode<W: Write>(
        &self,
        writer: W,
        compress: Compress,
    ) -> Result<(), SerializationError> {
        self.0.serialize_with_mode(writer, compress)
    }

    fn serialized_size(&self, compress: Compress) -> usize {
        self.0.serialized_size(compress)
    }
}

impl<C: SWCurveConfig> Valid for Prepared<C> {
    fn check(&self) -> Result<(), SerializationError> {
        self.0.check()
    }
}

impl<C: SWCurveConfig> CanonicalDeserialize for Prepared<C> {
    fn deserialize_with_mode<R: Read>(
        reader: R,
        compress: Compress,
        validate: Validate,
    ) -> Result<Self, SerializationError> {
        Affine::deserialize_with_mode(reader, compress, validate).map(Prepared)
    }
}

type Fq2Of<C> = Fp2<<C as TypeAConfig>::Fq2Config>;

/// Miller loop `f_{r,P}` evaluated at the distorted image of `Q`.
///
/// Vertical lines take values in `F_q` and vanish under the final
/// exponentiation, so they are skipped.
fn miller_loop<C: TypeAConfig>(p: &Affine<C>, q: &Affine<C>) -> Fq2Of<C>
where
    C::BaseField: PrimeField,
{
    let one = Fq2Of::<C>::one();
    if p.is_zero() || q.is_zero() {
        return one;
    }
    let (xp, yp) = (p.x, p.y);
    let (xq, yq) = (q.x, q.y);
    let order = C::ScalarField::MODULUS;
    let bits: Vec<bool> = order.to_bits_be().into_iter().skip_while(|b| !b).collect();

    let mut f = one;
    let (mut xt, mut yt) = (xp, yp);
    let mut at_infinity = false;
    let three = C::BaseField::from(3u64);
    for &bit in &bits[1..] {
        if at_infinity {
            break;
        }
        f.square_in_place();
        // tangent at T; T has odd order so y_T != 0
        let lambda = (three * xt.square() + C::COEFF_A) * (yt.double()).inverse().unwrap();
        f *= Fq2Of::<C>::new(lambda * (xq + xt) - yt, yq);
        let x3 = lambda.square() - xt.double();
        yt = lambda * (xt - x3) - yt;
        xt = x3;
        if bit {
            if xt == xp {
                // T = -P: the chord is vertical and T + P is the identity
                at_infinity = true;
                continue;
            }
            let lambda = (yt - yp) * (xt - xp).inverse().unwrap();
            f *= Fq2Of::<C>::new(lambda * (xq + xt) - yt, yq);
            let x3 = lambda.square() - xt - xp;
            yt = lambda * (xt - x3) - yt;
            xt = x3;
        }
    }
    f
}

impl<C: TypeAConfig> Pairing for TypeA<C>
where
    C::BaseField: PrimeField,
{
    type BaseField = C::BaseField;
    type ScalarField = C::ScalarField;
    type G1 = Projective<C>;
    type G1Affine = Affine<C>;
    type G1Prepared = Prepared<C>;
    type G2 = Projective<C>;
    type G2Affine = Affine<C>;
    type G2Prepared = Prepared<C>;
    type TargetField = Fq2Of<C>;

    fn multi_miller_loop(
        a: impl IntoIterator<Item = impl Into<Self::G1Prepared>>,
        b: impl IntoIterator<Item = impl Into<Self::G2Prepared>>,
    ) -> MillerLoopOutput<Self> {
        let mut f = Fq2Of::<C>::one();
        for (p, q) in a.into_iter().zip(b) {
            let (p, q): (Prepared<C>, Prepared<C>) = (p.into(), q.into());
            f *= miller_loop::<C>(&p.0, &q.0);
        }
        MillerLoopOutput(f)
    }

    fn final_exponentiation(mlo: MillerLoopOutput<Self>) -> Option<PairingOutput<Self>> {
        let f = mlo.0;
        if f.is_zero() {
            return None;
        }
        // f^(q-1) via Frobenius (conjugation), then f^((q+1)/r)
        let mut g = f;
        g.conjugate_in_place();
        g *= f.inverse()?;
        Some(PairingOutput(g.pow(C::COFACTOR)))
    }
}

fn field_bytes<F: PrimeField>() -> usize {
    (F::MODULUS_BIT_SIZE as usize).div_ceil(8)
}

fn write_fq<F: PrimeField>(x: &F, out: &mut Vec<u8>) {
    let len = field_bytes::<F>();
    let be = x.into_bigint().to_bytes_be();
    out.extend_from_slice(&be[be.len() - len..]);
}

fn read_fq<F: PrimeField>(bytes: &[u8]) -> Result<F, AlgebraError> {
    let len = field_bytes::<F>();
    if bytes.len() != len {
        return Err(AlgebraError::Length {
            expected: len,
            actual: bytes.len(),
        });
    }
    let mut padded = vec![0u8; F::BigInt::NUM_LIMBS * 8 - len];
    padded.extend_from_slice(bytes);
    let mut limbs = F::BigInt::default();
    for (i, chunk) in padded.rchunks(8).enumerate() {
        let mut word = [0u8; 8];
        word.copy_from_slice(chunk);
        limbs.as_mut()[i] = u64::from_be_bytes(word);
    }
    F::from_bigint(limbs).ok_or(AlgebraError::NonCanonical)
}

impl<C: TypeAConfig> Engine for TypeA<C>
where
    C::BaseField: PrimeField,
{
    const CURVE: CurveId = C::CURVE;
    const PAIRING_TYPE: PairingType = PairingType::Type1Symmetric;
    const SECURITY_BITS: u32 = C::SECURITY_BITS;

    fn g1_bytes() -> usize {
        2 * field_bytes::<C::BaseField>()
    }

    fn g2_bytes() -> usize {
        Self::g1_bytes()
    }

    fn gt_bytes() -> usize {
        2 * field_bytes::<C::BaseField>()
    }

    /// Uncompressed `x || y`, big-endian; the identity is all zeros.
    fn write_g1(p: &Affine<C>, out: &mut Vec<u8>) {
        if p.is_zero() {
            out.extend(std::iter::repeat_n(0u8, Self::g1_bytes()));
        } else {
            write_fq(&p.x, out);
            write_fq(&p.y, out);
        }
    }

    fn read_g1(bytes: &[u8]) -> Result<Affine<C>, AlgebraError> {
        if bytes.len() != Self::g1_bytes() {
            return Err(AlgebraError::Length {
                expected: Self::g1_bytes(),
                actual: bytes.len(),
            });
        }
        if bytes.iter().all(|&b| b == 0) {
            return Ok(Affine::identity());
        }
        let half = bytes.len() / 2;
        let x = read_fq::<C::BaseField>(&bytes[..half])?;
        let y = read_fq::<C::BaseField>(&bytes[half..])?;
        let p = Affine::new_unchecked(x, y);
        if !p.is_on_curve() {
            return Err(AlgebraError::NotOnCurve);
        }
        if !p.is_in_correct_subgroup_assuming_on_curve() {
            return Err(AlgebraError::WrongSubgroup);
        }
        Ok(p)
    }

    fn write_g2(p: &Affine<C>, out: &mut Vec<u8>) {
        Self::write_g1(p, out)
    }

    fn read_g2(bytes: &[u8]) -> Result<Affine<C>, AlgebraError> {
        Self::read_g1(bytes)
    }

    /// `c0 || c1`, big-endian.
    fn write_gt(t: &PairingOutput<Self>, out: &mut Vec<u8>) {
        write_fq(&t.0.c0, out);
        write_fq(&t.0.c1, out);
    }

    fn read_gt(bytes: &[u8]) -> Result<PairingOutput<Self>, AlgebraError> {
        if bytes.len() != Self::gt_bytes() {
            return Err(AlgebraError::Length {
                expected: Self::gt_bytes(),
                actual: bytes.len(),
            });
        }
        let half = bytes.len() / 2;
        let c0 = read_fq::<C::BaseField>(&bytes[..half])?;
        let c1 = read_fq::<C::BaseField>(&bytes[half..])?;
        let f = Fq2Of::<C>::new(c0, c1);
        if f.is_zero() || !f.pow(C::ScalarField::MODULUS).is_one() {
            return Err(AlgebraError::WrongSubgroup);
        }
        Ok(PairingOutput(f))
    }

    fn hash_to_g1(label: &[u8], msg: &[u8]) -> Affine<C> {
        super::sw_hash_to_curve::<C>(label, msg)
    }
}

// ---------------------------------------------------------------------------
// 512-bit field, 160-bit group order (r = 2^159 + 2^107 + 1)

#[derive(MontConfig)]
#[modulus = "8780710799663312522437781984754049815806883199414208211028653399266475630880222957078625179422662221423155858769582317459277713367317481324925129998224791"]
#[generator = "11"]
pub struct A512FqConfig;
pub type A512Fq = Fp512<MontBackend<A512FqConfig, 8>>;

#[derive(MontConfig)]
#[modulus = "730750818665451621361119245571504901405976559617"]
#[generator = "3"]
pub struct A512FrConfig;
pub type A512Fr = ark_ff::Fp192<MontBackend<A512FrConfig, 3>>;

pub struct A512Fq2Config;

impl Fp2Config for A512Fq2Config {
    type Fp = A512Fq;
    const NONRESIDUE: A512Fq = MontFp!("-1");
    const FROBENIUS_COEFF_FP2_C1: &'static [A512Fq] = &[MontFp!("1"), MontFp!("-1")];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct A512;

impl CurveConfig for A512 {
    type BaseField = A512Fq;
    type ScalarField = A512Fr;
    const COFACTOR: &'static [u64] = &[
        0xcf6230c28e284d98,
        0xe2cd28ff9b4f30a3,
        0x85050f93a6344777,
        0x37cc83915f505f0e,
        0xd2bf601bf6b0d471,
        0x14f4e70d1,
    ];
    const COFACTOR_INV: A512Fr = MontFp!("712561458255718233659804051054748798345227613777");
}

impl SWCurveConfig for A512 {
    const COEFF_A: A512Fq = MontFp!("1");
    const COEFF_B: A512Fq = MontFp!("0");
    const GENERATOR: Affine<A512> = Affine::new_unchecked(
        MontFp!("4032234908954603941509092005217967885045773180322702259109548075502343656551755968274079046600427785054065883032137178065053402101319273568671921266196273"),
        MontFp!("7466774988075022437144624707249019607333735256178768042175618742929934931291831332646547016648547881630344461307201600808987129743416551856995401836765891"),
    );
}

impl TypeAConfig for A512 {
    type Fq2Config = A512Fq2Config;
    const CURVE: CurveId = CurveId::TypeA;
    const SECURITY_BITS: u32 = 80;
}

// ---------------------------------------------------------------------------
// Toy parameters: q = 786251 = 12 * 65521 - 1, r = 65521

#[derive(MontConfig)]
#[modulus = "786251"]
#[generator = "2"]
pub struct ToyFqConfig;
pub type ToyFq = Fp64<MontBackend<ToyFqConfig, 1>>;

#[derive(MontConfig)]
#[modulus = "65521"]
#[generator = "17"]
pub struct ToyFrConfig;
pub type ToyFr = Fp64<MontBackend<ToyFrConfig, 1>>;

pub struct ToyFq2Config;

impl Fp2Config for ToyFq2Config {
    type Fp = ToyFq;
    const NONRESIDUE: ToyFq = MontFp!("-1");
    const FROBENIUS_COEFF_FP2_C1: &'static [ToyFq] = &[MontFp!("1"), MontFp!("-1")];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Toy;

impl CurveConfig for Toy {
    type BaseField = ToyFq;
    type ScalarField = ToyFr;
    const COFACTOR: &'static [u64] = &[12];
    const COFACTOR_INV: ToyFr = MontFp!("60061");
}

impl SWCurveConfig for Toy {
    const COEFF_A: ToyFq = MontFp!("1");
    const COEFF_B: ToyFq = MontFp!("0");
    const GENERATOR: Affine<Toy> = Affine::new_unchecked(MontFp!("9723"), MontFp!("164643"));
}

impl TypeAConfig for Toy {
    type Fq2Config = ToyFq2Config;
    const CURVE: CurveId = CurveId::Toy;
    const SECURITY_BITS: u32 = 8;
}
