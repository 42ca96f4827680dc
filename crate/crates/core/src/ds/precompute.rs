//! Offline bundles of every message-independent value of an online
//! signature, and the file that holds them.
//!
//! Store layout: `"A2PB" | version u8 | mode u8 | curve u8 | 0 u8 |
//! count u32 | next u32 | bundle_len u32`, then `count` fixed-width bundles.
//! All integers are big-endian. `next` is the index of the first unused
//! bundle, so a partly consumed store can be written back.

use ark_ec::CurveGroup;
use rand::{CryptoRng, RngCore};
use thiserror::Error;

use super::{
    randomize_credential, sok_challenge, DsError, DsGroupPublicKey, DsMemberKey, DsMode,
    DsSignature, DsSok, RandomizedCredential,
};
use crate::algebra::{
    smul, AlgebraError, BilinearContext, CurveId, Engine, NonceSource, Reader, RngNonces,
};

pub const STORE_MAGIC: [u8; 4] = *b"A2PB";
pub const STORE_VERSION: u8 = 1;
pub const STORE_HEADER_BYTES: usize = 20;

/// Values only the CCA2 flavour needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cca2Parts<E: Engine> {
    pub u: E::ScalarField,
    pub eta: E::ScalarField,
    pub c1_hat: E::G2Affine,
    pub c2_hat: E::G2Affine,
    pub m1_hat: E::G2Affine,
    pub m2_hat: E::G2Affine,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bundle<E: Engine> {
    pub rho: E::ScalarField,
    pub v: E::ScalarField,
    pub sigma1: RandomizedCredential<E>,
    pub n: E::G1Affine,
    pub cca2: Option<Cca2Parts<E>>,
}

impl<E: Engine> Bundle<E> {
    /// Draws `rho, phi, u, v, eta` (CCA2) or `rho, phi, v` (CPA).
    pub fn prepare(
        ctx: &BilinearContext<E>,
        member: &DsMemberKey<E>,
        mode: DsMode,
        nonces: &mut impl NonceSource,
    ) -> Self {
        let rho: E::ScalarField = nonces.nonce();
        let phi: E::ScalarField = nonces.nonce();
        let sigma1 = randomize_credential(ctx, member, &rho, &phi);
        let y_hat = sigma1.sigma.y_hat;
        match mode {
            DsMode::Cca2 => {
                let u: E::ScalarField = nonces.nonce();
                let v: E::ScalarField = nonces.nonce();
                let eta: E::ScalarField = nonces.nonce();
                let cca2 = Cca2Parts {
                    u,
                    eta,
                    c1_hat: smul(&y_hat, &u).into_affine(),
                    c2_hat: ctx.g2_mul(&(rho + u)).into_affine(),
                    m1_hat: smul(&y_hat, &eta).into_affine(),
                    m2_hat: ctx.g2_mul(&(v + eta)).into_affine(),
                };
                Bundle {
                    rho,
                    v,
                    sigma1,
                    n: ctx.g1_mul(&v).into_affine(),
                    cca2: Some(cca2),
                }
            }
            DsMode::Cpa => {
                let v: E::ScalarField = nonces.nonce();
                Bundle {
                    rho,
                    v,
                    sigma1,
                    n: ctx.g1_mul(&v).into_affine(),
                    cca2: None,
                }
            }
        }
    }

    pub fn mode(&self) -> DsMode {
        if self.cca2.is_some() {
            DsMode::Cca2
        } else {
            DsMode::Cpa
        }
    }

    /// The online part: one hash and a few scalar products.
    pub fn finish(
        &self,
        ctx: &BilinearContext<E>,
        gpk: &DsGroupPublicKey<E>,
        m: &[u8],
    ) -> DsSignature<E> {
        let sigma2 = match &self.cca2 {
            Some(p) => {
                let c = sok_challenge(
                    ctx,
                    gpk,
                    DsMode::Cca2,
                    &[&p.m1_hat, &p.m2_hat],
                    &self.n,
                    &self.sigma1,
                    m,
                );
                DsSok::Cca2 {
                    c1_hat: p.c1_hat,
                    c2_hat: p.c2_hat,
                    c,
                    z1: self.v + c * self.rho,
                    z2: p.eta + c * p.u,
                }
            }
            None => {
                let c = sok_challenge(ctx, gpk, DsMode::Cpa, &[], &self.n, &self.sigma1, m);
                DsSok::Cpa {
                    c,
                    z: self.v + c * self.rho,
                }
            }
        };
        DsSignature {
            sigma1: self.sigma1,
            sigma2,
        }
    }

    pub fn encoded_len(mode: DsMode) -> usize {
        let cpa = 2 * E::scalar_bytes() + RandomizedCredential::<E>::encoded_len() + E::g1_bytes();
        match mode {
            DsMode::Cpa => cpa,
            DsMode::Cca2 => cpa + 2 * E::scalar_bytes() + 4 * E::g2_bytes(),
        }
    }

    /// `rho, v, R', P', Z, Y, Y^, N`, then `u, eta, C1^, C2^, M1^, M2^` for CCA2.
    pub fn write(&self, out: &mut Vec<u8>) {
        E::write_scalar(&self.rho, out);
        E::write_scalar(&self.v, out);
        self.sigma1.write(out);
        E::write_g1(&self.n, out);
        if let Some(p) = &self.cca2 {
            E::write_scalar(&p.u, out);
            E::write_scalar(&p.eta, out);
            for q in [&p.c1_hat, &p.c2_hat, &p.m1_hat, &p.m2_hat] {
                E::write_g2(q, out);
            }
        }
    }

    pub fn read(mode: DsMode, r: &mut Reader<'_>) -> Result<Self, AlgebraError> {
        let rho = r.scalar::<E>()?;
        let v = r.scalar::<E>()?;
        let sigma1 = RandomizedCredential::read(r)?;
        let n = r.g1::<E>()?;
        let cca2 = match mode {
            DsMode::Cpa => None,
            DsMode::Cca2 => Some(Cca2Parts {
                u: r.scalar::<E>()?,
                eta: r.scalar::<E>()?,
                c1_hat: r.g2::<E>()?,
                c2_hat: r.g2::<E>()?,
                m1_hat: r.g2::<E>()?,
                m2_hat: r.g2::<E>()?,
            }),
        };
        Ok(Bundle {
            rho,
            v,
            sigma1,
            n,
            cca2,
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("store file truncated")]
    Truncated,
    #[error("not a pre-computation store")]
    Magic,
    #[error("unsupported store version {0}")]
    Version(u8),
    #[error("unknown mode byte {0}")]
    Mode(u8),
    #[error("store is for curve {found}, expected {expected}")]
    Curve { expected: CurveId, found: String },
    #[error("bundle length {found} does not match layout length {expected}")]
    BundleLength { expected: usize, found: usize },
    #[error("cursor {next} past bundle count {count}")]
    Cursor { next: usize, count: usize },
    #[error("bundle {index}: {source}")]
    Bundle { index: usize, source: AlgebraError },
}

pub struct PrecomputeStore<E: Engine> {
    pub mode: DsMode,
    bundles: Vec<Bundle<E>>,
    next: usize,
}

impl<E: Engine> PrecomputeStore<E> {
    pub fn new(mode: DsMode, bundles: Vec<Bundle<E>>) -> Self {
        assert!(
            bundles.iter().all(|b| b.mode() == mode),
            "bundle mode mismatch"
        );
        PrecomputeStore {
            mode,
            bundles,
            next: 0,
        }
    }

    /// Bundles left.
    pub fn capacity(&self) -> usize {
        self.bundles.len() - self.next
    }

    pub fn total_bundles(&self) -> usize {
        self.bundles.len()
    }

    pub fn used(&self) -> usize {
        self.next
    }

    pub fn bundle_size_bytes(&self) -> usize {
        Bundle::<E>::encoded_len(self.mode)
    }

    /// Size of the encoded store file.
    pub fn total_bytes(&self) -> usize {
        Self::file_len(self.mode, self.bundles.len())
    }

    pub fn file_len(mode: DsMode, count: usize) -> usize {
        STORE_HEADER_BYTES + count * Bundle::<E>::encoded_len(mode)
    }

    /// Checks out the next bundle. Each bundle is handed out once.
    pub fn take(&mut self) -> Result<&Bundle<E>, DsError> {
        let b = self.bundles.get(self.next).ok_or(DsError::StoreExhausted)?;
        self.next += 1;
        Ok(b)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.total_bytes());
        out.extend_from_slice(&STORE_MAGIC);
        out.extend_from_slice(&[STORE_VERSION, self.mode as u8, E::CURVE as u8, 0]);
        out.extend_from_slice(&(self.bundles.len() as u32).to_be_bytes());
        out.extend_from_slice(&(self.next as u32).to_be_bytes());
        out.extend_from_slice(&(self.bundle_size_bytes() as u32).to_be_bytes());
        for b in &self.bundles {
            b.write(&mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, StoreError> {
        let h = read_header(bytes)?;
        if h.curve != E::CURVE as u8 {
            return Err(StoreError::Curve {
                expected: E::CURVE,
                found: CurveId::from_u8(h.curve).map_or(format!("#{}", h.curve), |c| c.to_string()),
            });
        }
        let expected = Bundle::<E>::encoded_len(h.mode);
        if h.bundle_len != expected {
            return Err(StoreError::BundleLength {
                expected,
                found: h.bundle_len,
            });
        }
        if bytes.len() != STORE_HEADER_BYTES + h.count * expected {
            return Err(StoreError::Truncated);
        }
        let mut r = Reader::new(&bytes[STORE_HEADER_BYTES..]);
        let bundles = (0..h.count)
            .map(|index| {
                Bundle::read(h.mode, &mut r).map_err(|source| StoreError::Bundle { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PrecomputeStore {
            mode: h.mode,
            bundles,
            next: h.next,
        })
    }
}

/// Header fields of a store file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StoreHeader {
    pub mode: DsMode,
    pub curve: u8,
    pub count: usize,
    pub next: usize,
    pub bundle_len: usize,
}

/// Parses the header alone, for memory accounting without decoding bundles.
pub fn read_header(bytes: &[u8]) -> Result<StoreHeader, StoreError> {
    if bytes.len() < STORE_HEADER_BYTES {
        return Err(StoreError::Truncated);
    }
    if bytes[..4] != STORE_MAGIC {
        return Err(StoreError::Magic);
    }
    if bytes[4] != STORE_VERSION {
        return Err(StoreError::Version(bytes[4]));
    }
    let mode = DsMode::from_u8(bytes[5]).ok_or(StoreError::Mode(bytes[5]))?;
    let be = |i: usize| u32::from_be_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
    let (count, next) = (be(8), be(12));
    if next > count {
        return Err(StoreError::Cursor { next, count });
    }
    Ok(StoreHeader {
        mode,
        curve: bytes[6],
        count,
        next,
        bundle_len: be(16),
    })
}

pub fn precompute_generate<E: Engine, R: RngCore + CryptoRng + ?Sized>(
    ctx: &BilinearContext<E>,
    member: &DsMemberKey<E>,
    mode: DsMode,
    flight_seconds: u32,
    rate: u32,
    rng: &mut R,
) -> PrecomputeStore<E> {
    precompute_generate_with(ctx, member, mode, flight_seconds, rate, &mut RngNonces(rng))
}

/// Prepares `flight_seconds * rate` bundles.
pub fn precompute_generate_with<E: Engine>(
    ctx: &BilinearContext<E>,
    member: &DsMemberKey<E>,
    mode: DsMode,
    flight_seconds: u32,
    rate: u32,
    nonces: &mut impl NonceSource,
) -> PrecomputeStore<E> {
    let count = flight_seconds as usize * rate as usize;
    let bundles = (0..count)
        .map(|_| Bundle::prepare(ctx, member, mode, nonces))
        .collect();
    PrecomputeStore::new(mode, bundles)
}
