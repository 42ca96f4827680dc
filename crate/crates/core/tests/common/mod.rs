//! Independent evaluation on the toy curve.
//!
//! Every G1 and GT element of the toy groups is tabulated by repeated
//! addition from the generators, so discrete logs are plain lookups and the
//! expected value of any transcript can be computed with `u64` arithmetic
//! modulo 65521. Hash outputs are recomputed here from raw SHA-512.

#![allow(dead_code)]

pub mod toy;

use std::collections::HashMap;
use std::sync::OnceLock;

use a2rid::algebra::{Engine, G1Affine, Gt};
use a2rid::{BilinearContext, ToyCurve};
use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{BigInteger, PrimeField, Zero};
use sha2::{Digest, Sha512};

pub type E = ToyCurve;
pub const R: u64 = 65521;

pub struct Oracle {
    g1_bytes: Vec<Vec<u8>>,
    gt_bytes: Vec<Vec<u8>>,
    g1_log: HashMap<Vec<u8>, u64>,
    gt_log: HashMap<Vec<u8>, u64>,
}

pub fn oracle() -> &'static Oracle {
    static ORACLE: OnceLock<Oracle> = OnceLock::new();
    ORACLE.get_or_init(|| {
        let ctx = BilinearContext::<E>::default_for_engine();
        let g = ctx.g1.into_group();
        let mut p = <E as ark_ec::pairing::Pairing>::G1::zero();
        let mut t = Gt::<E>::zero();
        let mut o = Oracle {
            g1_bytes: Vec::with_capacity(R as usize),
            gt_bytes: Vec::with_capacity(R as usize),
            g1_log: HashMap::with_capacity(R as usize),
            gt_log: HashMap::with_capacity(R as usize),
        };
        for k in 0..R {
            let mut b = Vec::new();
            E::write_g1(&p.into_affine(), &mut b);
            o.g1_log.insert(b.clone(), k);
            o.g1_bytes.push(b);
            let mut b = Vec::new();
            E::write_gt(&t, &mut b);
            o.gt_log.insert(b.clone(), k);
            o.gt_bytes.push(b);
            p += g;
            t += ctx.gt;
        }
        assert!(p.into_affine().is_zero(), "generator order is not 65521");
        assert_eq!(o.g1_log.len(), R as usize);
        assert_eq!(o.gt_log.len(), R as usize);
        o
    })
}

impl Oracle {
    pub fn g1_bytes(&self, k: u64) -> &[u8] {
        &self.g1_bytes[(k % R) as usize]
    }

    pub fn gt_bytes(&self, k: u64) -> &[u8] {
        &self.gt_bytes[(k % R) as usize]
    }

    pub fn g1(&self, k: u64) -> G1Affine<E> {
        E::read_g1(self.g1_bytes(k)).unwrap()
    }

    pub fn gt(&self, k: u64) -> Gt<E> {
        E::read_gt(self.gt_bytes(k)).unwrap()
    }

    pub fn log_g1(&self, p: &G1Affine<E>) -> u64 {
        let mut b = Vec::new();
        E::write_g1(p, &mut b);
        self.g1_log[&b]
    }

    pub fn log_gt(&self, t: &Gt<E>) -> u64 {
        let mut b = Vec::new();
        E::write_gt(t, &mut b);
        self.gt_log[&b]
    }
}

pub fn scalar_u64(s: &<E as ark_ec::pairing::Pairing>::ScalarField) -> u64 {
    let bytes = s.into_bigint().to_bytes_be();
    bytes.iter().fold(0u64, |acc, b| (acc << 8) | *b as u64)
}

pub fn scalar_bytes(k: u64) -> Vec<u8> {
    (k % R).to_be_bytes()[6..].to_vec()
}

pub fn add(a: u64, b: u64) -> u64 {
    (a % R + b % R) % R
}

pub fn sub(a: u64, b: u64) -> u64 {
    (a % R + R - b % R) % R
}

pub fn mul(a: u64, b: u64) -> u64 {
    (a % R) * (b % R) % R
}

pub fn pow(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    b %= R;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, b);
        }
        b = mul(b, b);
        e >>= 1;
    }
    acc
}

pub fn inv(a: u64) -> u64 {
    assert_ne!(a % R, 0);
    pow(a, R - 2)
}

/// SHA-512 of `len(label) || label || data`, reduced modulo the toy order.
pub fn hash(label: &str, data: &[u8]) -> u64 {
    let digest = Sha512::new()
        .chain_update([label.len() as u8])
        .chain_update(label.as_bytes())
        .chain_update(data)
        .finalize();
    digest
        .iter()
        .fold(0u64, |acc, b| (acc * 256 + *b as u64) % R)
}

/// Length-prefixed variable data as it appears inside a hash input.
pub fn var(data: &[u8]) -> Vec<u8> {
    let mut out = (data.len() as u64).to_be_bytes().to_vec();
    out.extend_from_slice(data);
    out
}

pub fn cat(parts: &[&[u8]]) -> Vec<u8> {
    parts.concat()
}
