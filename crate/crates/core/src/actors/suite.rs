//! Curve- and scheme-erased handles over the protocol modules, so agents can
//! mix CS and DS groups on different curves behind one interface.

use std::sync::Arc;

use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::algebra::{BilinearContext, CurveId, Engine};
use crate::cs::{self, CsGroupPublicKey, CsIssuingKey, CsMemberKey, CsOpeningKey, CsRegistry};
use crate::ds::{
    self, DsAuthorityKeys, DsGroupPublicKey, DsMemberKey, DsMode, DsRegistry, PrecomputeStore,
};
use crate::primitives::dsig::dsig_keygen;
use crate::primitives::keyfile::KeyFileError;
use crate::wire::{ModeTag, SignatureField};
use crate::{Bn254, ToyCurve, TypeA512};

pub type SimRng = ChaCha20Rng;

/// Scheme family of a group. A DS group serves both DS modes.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Cs,
    Ds,
}

impl Family {
    pub fn of(mode: ModeTag) -> Family {
        match mode {
            ModeTag::Cs => Family::Cs,
            ModeTag::DsCca2 | ModeTag::DsCpa => Family::Ds,
        }
    }

    pub fn default_curve(self) -> CurveId {
        match self {
            Family::Cs => CurveId::TypeA,
            Family::Ds => CurveId::Bn254,
        }
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("cs: {0}")]
    Cs(#[from] cs::CsError),
    #[error("ds: {0}")]
    Ds(#[from] ds::DsError),
    #[error("key file: {0}")]
    KeyFile(#[from] KeyFileError),
    #[error("store: {0}")]
    Store(#[from] ds::StoreError),
    #[error("{0} members cannot sign in mode {1}")]
    Mode(Family, ModeTag),
    #[error("only DS members keep a pre-computation store")]
    NoStore,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Cs => "cs",
            Family::Ds => "ds",
        })
    }
}

/// What an observer needs: a group public key.
pub trait GroupVerifier: Send + Sync {
    fn family(&self) -> Family;
    fn curve(&self) -> CurveId;
    fn fingerprint(&self) -> [u8; 4];
    fn verify(&self, m: &[u8], sig: &SignatureField) -> bool;
    fn gpk_bytes(&self) -> Vec<u8>;
}

pub trait MemberSigner: Send {
    fn mode(&self) -> ModeTag;
    fn sign(&mut self, m: &[u8], rng: &mut SimRng) -> Result<SignatureField, SuiteError>;
    fn key_bytes(&self) -> Vec<u8>;
    /// Fills a fresh store with `count` bundles; returns its byte size.
    fn precompute(&mut self, count: usize, rng: &mut SimRng) -> Result<usize, SuiteError>;
    fn store_capacity(&self) -> Option<usize>;
    fn store_bytes(&self) -> Option<Vec<u8>>;
    fn attach_store(&mut self, bytes: &[u8]) -> Result<(), SuiteError>;
}

/// Everything a joined member leaves at the authority.
#[derive(Clone, Debug)]
pub struct Joined {
    pub signer: Box<dyn MemberSignerClone>,
    /// Bytes of the registry entry; identity material that must never leave
    /// the authority.
    pub record: Vec<u8>,
    pub index: usize,
}

/// Object-safe clone for boxed signers.
pub trait MemberSignerClone: MemberSigner {
    fn boxed_clone(&self) -> Box<dyn MemberSignerClone>;
}

impl<T: MemberSigner + Clone + 'static> MemberSignerClone for T {
    fn boxed_clone(&self) -> Box<dyn MemberSignerClone> {
        Box::new(self.clone())
    }
}

impl Clone for Box<dyn MemberSignerClone> {
    fn clone(&self) -> Self {
        self.boxed_clone()
    }
}

impl std::fmt::Debug for dyn MemberSignerClone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MemberSigner({})", self.mode())
    }
}

/// Group manager and opener.
pub trait GroupAuthority: Send + Sync {
    fn family(&self) -> Family;
    fn curve(&self) -> CurveId;
    fn verifier(&self) -> Arc<dyn GroupVerifier>;
    fn join(&mut self, mode: ModeTag, rng: &mut SimRng) -> Result<Joined, SuiteError>;
    /// Registry index of the signer. The caller verifies first.
    fn open(&self, m: &[u8], sig: &SignatureField) -> Result<usize, SuiteError>;
    fn members(&self) -> usize;
    fn record(&self, index: usize) -> Vec<u8>;
    /// `(gpk, secret keys, registry)` key files.
    fn files(&self) -> AuthorityFiles;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthorityFiles {
    pub gpk: Vec<u8>,
    pub secrets: Vec<Vec<u8>>,
    pub registry: Vec<u8>,
}

// ---- CS ----

struct CsVerifier<E: Engine> {
    ctx: BilinearContext<E>,
    gpk: CsGroupPublicKey<E>,
}

impl<E: Engine> GroupVerifier for CsVerifier<E> {
    fn family(&self) -> Family {
        Family::Cs
    }

    fn curve(&self) -> CurveId {
        E::CURVE
    }

    fn fingerprint(&self) -> [u8; 4] {
        self.gpk.fingerprint()
    }

    fn verify(&self, m: &[u8], sig: &SignatureField) -> bool {
        sig.to_cs::<E>()
            .is_ok_and(|s| cs::cs_verify(&self.ctx, &self.gpk, m, &s))
    }

    fn gpk_bytes(&self) -> Vec<u8> {
        self.gpk.to_keyfile()
    }
}

#[derive(Clone)]
struct CsSigner<E: Engine> {
    ctx: BilinearContext<E>,
    gpk: CsGroupPublicKey<E>,
    key: CsMemberKey<E>,
}

impl<E: Engine> MemberSigner for CsSigner<E> {
    fn mode(&self) -> ModeTag {
        ModeTag::Cs
    }

    fn sign(&mut self, m: &[u8], rng: &mut SimRng) -> Result<SignatureField, SuiteError> {
        let sig = cs::cs_sign(&self.ctx, &self.gpk, &self.key, m, rng);
        Ok(SignatureField::from_cs(&self.gpk, &sig))
    }

    fn key_bytes(&self) -> Vec<u8> {
        self.key.to_keyfile()
    }

    fn precompute(&mut self, _: usize, _: &mut SimRng) -> Result<usize, SuiteError> {
        Err(SuiteError::NoStore)
    }

    fn store_capacity(&self) -> Option<usize> {
        None
    }

    fn store_bytes(&self) -> Option<Vec<u8>> {
        None
    }

    fn attach_store(&mut self, _: &[u8]) -> Result<(), SuiteError> {
        Err(SuiteError::NoStore)
    }
}

struct CsAuthority<E: Engine> {
    ctx: BilinearContext<E>,
    gpk: CsGroupPublicKey<E>,
    ik: CsIssuingKey<E>,
    ok: CsOpeningKey<E>,
    reg: CsRegistry<E>,
}

impl<E: Engine> GroupAuthority for CsAuthority<E> {
    fn family(&self) -> Family {
        Family::Cs
    }

    fn curve(&self) -> CurveId {
        E::CURVE
    }

    fn verifier(&self) -> Arc<dyn GroupVerifier> {
        Arc::new(CsVerifier {
            ctx: self.ctx.clone(),
            gpk: self.gpk.clone(),
        })
    }

    fn join(&mut self, mode: ModeTag, rng: &mut SimRng) -> Result<Joined, SuiteError> {
        if mode != ModeTag::Cs {
            return Err(SuiteError::Mode(Family::Cs, mode));
        }
        let (state, req) = cs::cs_join_request(&self.ctx, rng);
        let cert = cs::cs_join_issue(&self.ctx, &self.ik, &req, &mut self.reg, rng)?;
        let key = cs::cs_join_finalize(&self.ctx, &self.gpk, &state, &cert)?;
        let index = self.reg.len() - 1;
        Ok(Joined {
            signer: Box::new(CsSigner {
                ctx: self.ctx.clone(),
                gpk: self.gpk.clone(),
                key,
            }),
            record: self.record(index),
            index,
        })
    }

    fn open(&self, m: &[u8], sig: &SignatureField) -> Result<usize, SuiteError> {
        let s = sig.to_cs::<E>().map_err(|e| match e {
            crate::wire::WireError::Body(b) => cs::CsError::Encoding(b),
            _ => cs::CsError::InvalidSignature,
        })?;
        Ok(cs::cs_open(
            &self.ctx, &self.gpk, &self.ok, &self.reg, m, &s,
        )?)
    }

    fn members(&self) -> usize {
        self.reg.len()
    }

    fn record(&self, index: usize) -> Vec<u8> {
        let e = &self.reg.entries[index];
        let mut out = Vec::new();
        E::write_g1(&e.p1, &mut out);
        E::write_gt(&e.p2, &mut out);
        out
    }

    fn files(&self) -> AuthorityFiles {
        AuthorityFiles {
            gpk: self.gpk.to_keyfile(),
            secrets: vec![self.ik.to_keyfile(), self.ok.to_keyfile()],
            registry: self.reg.to_keyfile(),
        }
    }
}

// ---- DS ----

struct DsVerifier<E: Engine> {
    ctx: BilinearContext<E>,
    gpk: DsGroupPublicKey<E>,
}

impl<E: Engine> GroupVerifier for DsVerifier<E> {
    fn family(&self) -> Family {
        Family::Ds
    }

    fn curve(&self) -> CurveId {
        E::CURVE
    }

    fn fingerprint(&self) -> [u8; 4] {
        self.gpk.fingerprint()
    }

    fn verify(&self, m: &[u8], sig: &SignatureField) -> bool {
        sig.to_ds::<E>()
            .is_ok_and(|s| ds::ds_verify(&self.ctx, &self.gpk, m, &s))
    }

    fn gpk_bytes(&self) -> Vec<u8> {
        self.gpk.to_keyfile()
    }
}

struct DsSigner<E: Engine> {
    ctx: BilinearContext<E>,
    gpk: DsGroupPublicKey<E>,
    key: DsMemberKey<E>,
    mode: DsMode,
    store: Option<PrecomputeStore<E>>,
}

impl<E: Engine> Clone for DsSigner<E> {
    fn clone(&self) -> Self {
        DsSigner {
            ctx: self.ctx.clone(),
            gpk: self.gpk.clone(),
            key: self.key.clone(),
            mode: self.mode,
            store: self
                .store
                .as_ref()
                .map(|s| PrecomputeStore::from_bytes(&s.to_bytes()).expect("own encoding")),
        }
    }
}

impl<E: Engine> MemberSigner for DsSigner<E> {
    fn mode(&self) -> ModeTag {
        self.mode.into()
    }

    /// Uses the attached store when there is one; an empty store is an error,
    /// not a fallback to the slow path.
    fn sign(&mut self, m: &[u8], rng: &mut SimRng) -> Result<SignatureField, SuiteError> {
        let sig = match &mut self.store {
            Some(store) => ds::ds_sign_precomputed(&self.ctx, &self.gpk, store, self.mode, m)?,
            None => ds::ds_sign(&self.ctx, &self.gpk, &self.key, self.mode, m, rng),
        };
        Ok(SignatureField::from_ds(&self.gpk, &sig))
    }

    fn key_bytes(&self) -> Vec<u8> {
        self.key.to_keyfile()
    }

    fn precompute(&mut self, count: usize, rng: &mut SimRng) -> Result<usize, SuiteError> {
        let bundles = (0..count)
            .map(|_| {
                ds::Bundle::prepare(
                    &self.ctx,
                    &self.key,
                    self.mode,
                    &mut crate::algebra::RngNonces(&mut *rng),
                )
            })
            .collect();
        let store = PrecomputeStore::new(self.mode, bundles);
        let bytes = store.total_bytes();
        self.store = Some(store);
        Ok(bytes)
    }

    fn store_capacity(&self) -> Option<usize> {
        self.store.as_ref().map(|s| s.capacity())
    }

    fn store_bytes(&self) -> Option<Vec<u8>> {
        self.store.as_ref().map(|s| s.to_bytes())
    }

    fn attach_store(&mut self, bytes: &[u8]) -> Result<(), SuiteError> {
        let store = PrecomputeStore::from_bytes(bytes)?;
        if store.mode != self.mode {
            return Err(ds::DsError::ModeMismatch {
                expected: store.mode,
                actual: self.mode,
            }
            .into());
        }
        self.store = Some(store);
        Ok(())
    }
}

struct DsAuthority<E: Engine> {
    ctx: BilinearContext<E>,
    gpk: DsGroupPublicKey<E>,
    keys: DsAuthorityKeys<E>,
    reg: DsRegistry<E>,
}

impl<E: Engine> GroupAuthority for DsAuthority<E> {
    fn family(&self) -> Family {
        Family::Ds
    }

    fn curve(&self) -> CurveId {
        E::CURVE
    }

    fn verifier(&self) -> Arc<dyn GroupVerifier> {
        Arc::new(DsVerifier {
            ctx: self.ctx.clone(),
            gpk: self.gpk.clone(),
        })
    }

    fn join(&mut self, mode: ModeTag, rng: &mut SimRng) -> Result<Joined, SuiteError> {
        let ds_mode = mode.ds_mode().ok_or(SuiteError::Mode(Family::Ds, mode))?;
        let ua = dsig_keygen::<E, _>(&self.ctx, rng);
        let (state, req) = ds::ds_join_request(&self.ctx, &self.gpk, &ua.sk, rng);
        let issued = ds::ds_join_issue(
            &self.ctx,
            &self.keys,
            &self.gpk,
            &mut self.reg,
            &req,
            &ua.pk,
            rng,
        )?;
        let key = ds::ds_join_finalize(&self.ctx, &self.gpk, &state, &req, &ua.pk, &issued)?;
        let index = self.reg.len() - 1;
        Ok(Joined {
            signer: Box::new(DsSigner {
                ctx: self.ctx.clone(),
                gpk: self.gpk.clone(),
                key,
                mode: ds_mode,
                store: None,
            }),
            record: self.record(index),
            index,
        })
    }

    fn open(&self, _m: &[u8], sig: &SignatureField) -> Result<usize, SuiteError> {
        let s = sig.to_ds::<E>().map_err(|e| match e {
            crate::wire::WireError::Body(b) => ds::DsError::Encoding(b),
            _ => ds::DsError::UnknownMember,
        })?;
        Ok(ds::ds_open(&self.ctx, &self.keys, &self.reg, &s)?)
    }

    fn members(&self) -> usize {
        self.reg.len()
    }

    fn record(&self, index: usize) -> Vec<u8> {
        let e = &self.reg.entries[index];
        let mut out = e.c_hat.clone();
        E::write_g1(&e.sigma_j, &mut out);
        E::write_g2(&e.pk_i, &mut out);
        out
    }

    fn files(&self) -> AuthorityFiles {
        AuthorityFiles {
            gpk: self.gpk.to_keyfile(),
            secrets: vec![self.keys.to_keyfile()],
            registry: self.reg.to_keyfile(),
        }
    }
}

// ---- construction ----

fn new_cs<E: Engine>(rng: &mut SimRng) -> Box<dyn GroupAuthority> {
    let ctx = BilinearContext::<E>::default_for_engine();
    let (gpk, ik, ok, reg) = cs::cs_setup(&ctx, rng);
    Box::new(CsAuthority {
        ctx,
        gpk,
        ik,
        ok,
        reg,
    })
}

fn new_ds<E: Engine>(rng: &mut SimRng) -> Result<Box<dyn GroupAuthority>, SuiteError> {
    let ctx = BilinearContext::<E>::default_for_engine();
    let (gpk, keys) = ds::ds_setup(&ctx, rng)?;
    Ok(Box::new(DsAuthority {
        ctx,
        gpk,
        keys,
        reg: DsRegistry::default(),
    }))
}

/// Runs group setup on `curve`.
pub fn new_authority(
    family: Family,
    curve: CurveId,
    rng: &mut SimRng,
) -> Result<Box<dyn GroupAuthority>, SuiteError> {
    match (family, curve) {
        (Family::Cs, CurveId::TypeA) => Ok(new_cs::<TypeA512>(rng)),
        (Family::Cs, CurveId::Bn254) => Ok(new_cs::<Bn254>(rng)),
        (Family::Cs, CurveId::Toy) => Ok(new_cs::<ToyCurve>(rng)),
        (Family::Ds, CurveId::TypeA) => new_ds::<TypeA512>(rng),
        (Family::Ds, CurveId::Bn254) => new_ds::<Bn254>(rng),
        (Family::Ds, CurveId::Toy) => new_ds::<ToyCurve>(rng),
    }
}

fn load_cs<E: Engine>(f: &AuthorityFiles) -> Result<Box<dyn GroupAuthority>, SuiteError> {
    let [ik, ok] = f.secrets.as_slice() else {
        return Err(KeyFileError::FieldCount {
            expected: 2,
            found: f.secrets.len(),
        }
        .into());
    };
    Ok(Box::new(CsAuthority::<E> {
        ctx: BilinearContext::default_for_engine(),
        gpk: CsGroupPublicKey::from_keyfile(&f.gpk)?,
        ik: CsIssuingKey::from_keyfile(ik)?,
        ok: CsOpeningKey::from_keyfile(ok)?,
        reg: CsRegistry::from_keyfile(&f.registry)?,
    }))
}

fn load_ds<E: Engine>(f: &AuthorityFiles) -> Result<Box<dyn GroupAuthority>, SuiteError> {
    let [keys] = f.secrets.as_slice() else {
        return Err(KeyFileError::FieldCount {
            expected: 1,
            found: f.secrets.len(),
        }
        .into());
    };
    Ok(Box::new(DsAuthority::<E> {
        ctx: BilinearContext::default_for_engine(),
        gpk: DsGroupPublicKey::from_keyfile(&f.gpk)?,
        keys: DsAuthorityKeys::from_keyfile(keys)?,
        reg: DsRegistry::from_keyfile(&f.registry)?,
    }))
}

pub fn load_authority(
    family: Family,
    curve: CurveId,
    files: &AuthorityFiles,
) -> Result<Box<dyn GroupAuthority>, SuiteError> {
    match (family, curve) {
        (Family::Cs, CurveId::TypeA) => load_cs::<TypeA512>(files),
        (Family::Cs, CurveId::Bn254) => load_cs::<Bn254>(files),
        (Family::Cs, CurveId::Toy) => load_cs::<ToyCurve>(files),
        (Family::Ds, CurveId::TypeA) => load_ds::<TypeA512>(files),
        (Family::Ds, CurveId::Bn254) => load_ds::<Bn254>(files),
        (Family::Ds, CurveId::Toy) => load_ds::<ToyCurve>(files),
    }
}

fn load_verifier_as<E: Engine>(
    family: Family,
    gpk: &[u8],
) -> Result<Arc<dyn GroupVerifier>, SuiteError> {
    let ctx = BilinearContext::<E>::default_for_engine();
    Ok(match family {
        Family::Cs => Arc::new(CsVerifier {
            ctx,
            gpk: CsGroupPublicKey::from_keyfile(gpk)?,
        }),
        Family::Ds => Arc::new(DsVerifier {
            ctx,
            gpk: DsGroupPublicKey::from_keyfile(gpk)?,
        }),
    })
}

/// Rebuilds a verifier from an exported group public key file.
pub fn load_verifier(gpk: &[u8]) -> Result<Arc<dyn GroupVerifier>, SuiteError> {
    let kf = crate::primitives::keyfile::KeyFile::decode(gpk)?;
    let family = match &kf.tag {
        t if *t == cs::TAG_GPK => Family::Cs,
        t if *t == ds::TAG_GPK => Family::Ds,
        t => {
            return Err(KeyFileError::Tag {
                expected: "CGPK or DGPK".into(),
                found: String::from_utf8_lossy(t).into_owned(),
            }
            .into())
        }
    };
    match cs::keyfile_curve(gpk)? {
        CurveId::TypeA => load_verifier_as::<TypeA512>(family, gpk),
        CurveId::Bn254 => load_verifier_as::<Bn254>(family, gpk),
        CurveId::Toy => load_verifier_as::<ToyCurve>(family, gpk),
    }
}

fn load_member_as<E: Engine>(
    mode: ModeTag,
    gpk: &[u8],
    key: &[u8],
) -> Result<Box<dyn MemberSignerClone>, SuiteError> {
    let ctx = BilinearContext::<E>::default_for_engine();
    Ok(match mode.ds_mode() {
        None => {
            let key = CsMemberKey::from_keyfile(&ctx, key)?;
            Box::new(CsSigner {
                gpk: CsGroupPublicKey::from_keyfile(gpk)?,
                key,
                ctx,
            })
        }
        Some(m) => Box::new(DsSigner {
            gpk: DsGroupPublicKey::from_keyfile(gpk)?,
            key: DsMemberKey::from_keyfile(key)?,
            mode: m,
            store: None,
            ctx,
        }),
    })
}

/// Rebuilds a signer from its group key and member key files.
pub fn load_member(
    mode: ModeTag,
    gpk: &[u8],
    key: &[u8],
) -> Result<Box<dyn MemberSignerClone>, SuiteError> {
    match cs::keyfile_curve(key)? {
        CurveId::TypeA => load_member_as::<TypeA512>(mode, gpk, key),
        CurveId::Bn254 => load_member_as::<Bn254>(mode, gpk, key),
        CurveId::Toy => load_member_as::<ToyCurve>(mode, gpk, key),
    }
}
