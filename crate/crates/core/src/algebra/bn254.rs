//! BN254 (Type-3) engine.
//!
//! G1 and G2 use the arkworks compressed encodings (32 and 64 bytes). Target
//! group elements are torus-compressed: a norm-one element `c0 + c1*w` of
//! `F_q^12 = F_q^6[w]/(w^2 - v)` is sent to `a = (1 + c0) / c1` in `F_q^6`
//! and recovered as `(a + w) / (a - w)`. The identity, the only subgroup
//! element with `c1 = 0`, is encoded as `a = 0`.

use ark_bn254::{Bn254, Fq12, Fq6, G1Affine, G2Affine};
use ark_ec::pairing::PairingOutput;
use ark_ff::{AdditiveGroup, Field, One, PrimeField, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};

use super::{AlgebraError, CurveId, Engine, PairingType};

const FQ6_BYTES: usize = 192;

fn nonresidue_v() -> Fq6 {
    Fq6::new(
        ark_bn254::Fq2::zero(),
        ark_bn254::Fq2::one(),
        ark_bn254::Fq2::zero(),
    )
}

pub(crate) fn compress_gt(f: &Fq12) -> Fq6 {
    if f.c1.is_zero() {
        return Fq6::zero();
    }
    (Fq6::one() + f.c0) * f.c1.inverse().expect("non-zero")
}

pub(crate) fn decompress_gt(a: &Fq6) -> Fq12 {
    if a.is_zero() {
        return Fq12::one();
    }
    let a2 = a.square();
    let v = nonresidue_v();
    let denom = (a2 - v).inverse().expect("v is a non-square in F_q^6");
    Fq12::new((a2 + v) * denom, a.double() * denom)
}

impl Engine for Bn254 {
    const CURVE: CurveId = CurveId::Bn254;
    const PAIRING_TYPE: PairingType = PairingType::Type3Asymmetric;
    const SECURITY_BITS: u32 = 128;

    fn g1_bytes() -> usize {
        32
    }

    fn g2_bytes() -> usize {
        64
    }

    fn gt_bytes() -> usize {
        FQ6_BYTES
    }

    fn write_g1(p: &G1Affine, out: &mut Vec<u8>) {
        p.serialize_compressed(&mut *out).expect("vec write");
    }

    fn read_g1(bytes: &[u8]) -> Result<G1Affine, AlgebraError> {
        if bytes.len() != Self::g1_bytes() {
            return Err(AlgebraError::Length {
                expected: Self::g1_bytes(),
                actual: bytes.len(),
            });
        }
        G1Affine::deserialize_compressed(bytes).map_err(|_| AlgebraError::NotOnCurve)
    }

    fn write_g2(p: &G2Affine, out: &mut Vec<u8>) {
        p.serialize_compressed(&mut *out).expect("vec write");
    }

    fn read_g2(bytes: &[u8]) -> Result<G2Affine, AlgebraError> {
        if bytes.len() != Self::g2_bytes() {
            return Err(AlgebraError::Length {
                expected: Self::g2_bytes(),
                actual: bytes.len(),
            });
        }
        G2Affine::deserialize_compressed(bytes).map_err(|_| AlgebraError::NotOnCurve)
    }

    fn write_gt(t: &PairingOutput<Self>, out: &mut Vec<u8>) {
        compress_gt(&t.0)
            .serialize_uncompressed(&mut *out)
            .expect("vec write");
    }

    fn read_gt(bytes: &[u8]) -> Result<PairingOutput<Self>, AlgebraError> {
        if bytes.len() != FQ6_BYTES {
            return Err(AlgebraError::Length {
                expected: FQ6_BYTES,
                actual: bytes.len(),
            });
        }
        let a = Fq6::deserialize_uncompressed(bytes).map_err(|_| AlgebraError::NonCanonical)?;
        let f = decompress_gt(&a);
        if !f.pow(ark_bn254::Fr::MODULUS).is_one() {
            return Err(AlgebraError::WrongSubgroup);
        }
        Ok(PairingOutput(f))
    }

    fn hash_to_g1(label: &[u8], msg: &[u8]) -> G1Affine {
        super::sw_hash_to_curve::<ark_bn254::g1::Config>(label, msg)
    }
}
