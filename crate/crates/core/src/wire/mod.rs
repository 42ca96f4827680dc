//! RemoteID payload and frame codec.
//!
//! Payload layout, all integers big-endian:
//!
//! | bytes | field |
//! |------:|-------|
//! | 4 | group id |
//! | 4 | drone latitude, 1e-7 degrees, signed |
//! | 4 | drone longitude, 1e-7 degrees, signed |
//! | 4 | drone altitude, cm, signed |
//! | 4 | drone speed, cm/s |
//! | 4 | drone course over ground, 1e-2 degrees |
//! | 4 | ground station latitude |
//! | 4 | ground station longitude |
//! | 4 | ground station altitude |
//! | 4 | timestamp, seconds |
//! | 1 | emergency code |
//! | 2 | signature length `L` |
//! | L | base58 signature field |
//!
//! The first 41 bytes are the signed message. The signature field is the
//! base58 (Bitcoin alphabet) encoding of an 8-byte envelope followed by the
//! scheme's signature body; see [`SignatureField`].

mod capture;
mod frame;

pub use capture::{read_frames_file, write_frames_file, write_pcap, LINKTYPE_USER0};
pub use frame::{
    decode_frame, encode_frame, fcs, RidFrame, BROADCAST, FCS_BYTES, FRAME_CONTROL, HEADER_BYTES,
    MESSAGE_ID,
};

use thiserror::Error;

use crate::algebra::{AlgebraError, CurveId, Engine};
use crate::cs::{CsGroupPublicKey, CsSignature};
use crate::ds::{DsGroupPublicKey, DsMode, DsSignature};

/// Largest frame the link carries unfragmented.
pub const MTU: usize = 2312;
/// Signed telemetry prefix of the payload.
pub const MESSAGE_BYTES: usize = 41;
pub const ENVELOPE_BYTES: usize = 8;
pub const ENVELOPE_VERSION: u8 = 1;
/// Largest payload that still fits a frame within [`MTU`].
pub const MAX_PAYLOAD: usize = MTU - HEADER_BYTES - FCS_BYTES;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error("buffer truncated: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("signature length field says {declared}, {actual} bytes follow")]
    SigLength { declared: usize, actual: usize },
    #[error("signature field is not valid base58")]
    Base58,
    #[error("signature envelope shorter than {ENVELOPE_BYTES} bytes")]
    Envelope,
    #[error("unsupported envelope version {0}")]
    Version(u8),
    #[error("unknown mode tag {0}")]
    UnknownMode(u8),
    #[error("unknown curve id {0}")]
    UnknownCurve(u8),
    #[error("{field} out of range: {value}")]
    OutOfRange { field: &'static str, value: i64 },
    #[error("payload of {0} bytes exceeds the {MAX_PAYLOAD}-byte budget")]
    Oversize(usize),
    #[error("frame check sequence mismatch: computed {computed:#06x}, frame has {found:#06x}")]
    Fcs { computed: u16, found: u16 },
    #[error("receiver address is not broadcast")]
    NotBroadcast,
    #[error("sender address is not zero")]
    Sender,
    #[error("frame control {0:#06x} is not an A2RID frame")]
    FrameControl(u16),
    #[error("message id {0:#06x} is not 0xa21d")]
    MessageId(u16),
    #[error("duration field {declared} does not match payload length {actual}")]
    Duration { declared: usize, actual: usize },
    #[error("signature is for mode {found:?}, expected {expected:?}")]
    ModeMismatch { expected: ModeTag, found: ModeTag },
    #[error("signature is for curve {found}, expected {expected}")]
    CurveMismatch { expected: CurveId, found: CurveId },
    #[error("element count {found} does not match the {expected} of this scheme")]
    ElementCount { expected: u8, found: u8 },
    #[error("signature body: {0}")]
    Body(#[from] AlgebraError),
}

/// Scheme discriminator carried in the signature envelope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
#[repr(u8)]
pub enum ModeTag {
    Cs = 0,
    DsCca2 = 1,
    DsCpa = 2,
}

impl ModeTag {
    pub fn from_u8(v: u8) -> Result<Self, WireError> {
        match v {
            0 => Ok(ModeTag::Cs),
            1 => Ok(ModeTag::DsCca2),
            2 => Ok(ModeTag::DsCpa),
            _ => Err(WireError::UnknownMode(v)),
        }
    }

    pub fn ds_mode(self) -> Option<DsMode> {
        match self {
            ModeTag::Cs => None,
            ModeTag::DsCca2 => Some(DsMode::Cca2),
            ModeTag::DsCpa => Some(DsMode::Cpa),
        }
    }

    /// Group and scalar elements in a signature body of this mode.
    pub fn element_count(self) -> u8 {
        match self {
            // S_rho, S_mu, S_nu, T1..T7, c
            ModeTag::Cs => 11,
            // R', P', Z, Y, Y^, C1^, C2^, c, z1, z2
            ModeTag::DsCca2 => 10,
            // R', P', Z, Y, Y^, c, z
            ModeTag::DsCpa => 7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModeTag::Cs => "cs",
            ModeTag::DsCca2 => "ds-cca2",
            ModeTag::DsCpa => "ds-cpa",
        }
    }
}

impl From<DsMode> for ModeTag {
    fn from(m: DsMode) -> Self {
        match m {
            DsMode::Cca2 => ModeTag::DsCca2,
            DsMode::Cpa => ModeTag::DsCpa,
        }
    }
}

impl std::fmt::Display for ModeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModeTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cs" => Ok(ModeTag::Cs),
            "ds-cca2" => Ok(ModeTag::DsCca2),
            "ds-cpa" => Ok(ModeTag::DsCpa),
            _ => Err(format!(
                "unknown scheme {s:?}; expected cs, ds-cca2 or ds-cpa"
            )),
        }
    }
}

/// Decoded signature field: `version | mode | curve | element count |
/// group key fingerprint[4]` followed by the scheme body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignatureField {
    pub mode: ModeTag,
    pub curve: CurveId,
    pub fingerprint: [u8; 4],
    pub body: Vec<u8>,
}

impl SignatureField {
    pub fn from_cs<E: Engine>(gpk: &CsGroupPublicKey<E>, sig: &CsSignature<E>) -> Self {
        SignatureField {
            mode: ModeTag::Cs,
            curve: E::CURVE,
            fingerprint: gpk.fingerprint(),
            body: sig.to_bytes(),
        }
    }

    pub fn from_ds<E: Engine>(gpk: &DsGroupPublicKey<E>, sig: &DsSignature<E>) -> Self {
        SignatureField {
            mode: sig.mode().into(),
            curve: E::CURVE,
            fingerprint: gpk.fingerprint(),
            body: sig.to_bytes(),
        }
    }

    pub fn raw(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(ENVELOPE_BYTES + self.body.len());
        out.extend_from_slice(&[
            ENVELOPE_VERSION,
            self.mode as u8,
            self.curve as u8,
            self.mode.element_count(),
        ]);
        out.extend_from_slice(&self.fingerprint);
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_raw(raw: &[u8]) -> Result<Self, WireError> {
        if raw.len() < ENVELOPE_BYTES {
            return Err(WireError::Envelope);
        }
        if raw[0] != ENVELOPE_VERSION {
            return Err(WireError::Version(raw[0]));
        }
        let mode = ModeTag::from_u8(raw[1])?;
        let curve = CurveId::from_u8(raw[2]).ok_or(WireError::UnknownCurve(raw[2]))?;
        if raw[3] != mode.element_count() {
            return Err(WireError::ElementCount {
                expected: mode.element_count(),
                found: raw[3],
            });
        }
        Ok(SignatureField {
            mode,
            curve,
            fingerprint: raw[4..8].try_into().expect("4 bytes"),
            body: raw[ENVELOPE_BYTES..].to_vec(),
        })
    }

    pub fn to_base58(&self) -> String {
        bs58::encode(self.raw()).into_string()
    }

    pub fn from_base58(text: &[u8]) -> Result<Self, WireError> {
        let raw = bs58::decode(text)
            .into_vec()
            .map_err(|_| WireError::Base58)?;
        Self::from_raw(&raw)
    }

    fn expect_curve<E: Engine>(&self) -> Result<(), WireError> {
        if self.curve != E::CURVE {
            return Err(WireError::CurveMismatch {
                expected: E::CURVE,
                found: self.curve,
            });
        }
        Ok(())
    }

    pub fn to_cs<E: Engine>(&self) -> Result<CsSignature<E>, WireError> {
        if self.mode != ModeTag::Cs {
            return Err(WireError::ModeMismatch {
                expected: ModeTag::Cs,
                found: self.mode,
            });
        }
        self.expect_curve::<E>()?;
        Ok(CsSignature::from_bytes(&self.body)?)
    }

    pub fn to_ds<E: Engine>(&self) -> Result<DsSignature<E>, WireError> {
        let mode = self.mode.ds_mode().ok_or(WireError::ModeMismatch {
            expected: ModeTag::DsCca2,
            found: self.mode,
        })?;
        self.expect_curve::<E>()?;
        Ok(DsSignature::from_bytes(mode, &self.body)?)
    }
}

/// `m_k`: everything in the payload except the signature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Telemetry {
    pub group_id: u32,
    pub drone_lat: i32,
    pub drone_lon: i32,
    pub drone_alt: i32,
    pub drone_speed: u32,
    pub drone_cog: u32,
    pub gcs_lat: i32,
    pub gcs_lon: i32,
    pub gcs_alt: i32,
    pub timestamp: u32,
    pub emergency: u8,
}

const LAT_LIMIT: i64 = 900_000_000;
const LON_LIMIT: i64 = 1_800_000_000;
const COG_LIMIT: i64 = 36_000;

impl Telemetry {
    pub fn to_bytes(&self) -> [u8; MESSAGE_BYTES] {
        let mut out = [0u8; MESSAGE_BYTES];
        let words = [
            self.group_id,
            self.drone_lat as u32,
            self.drone_lon as u32,
            self.drone_alt as u32,
            self.drone_speed,
            self.drone_cog,
            self.gcs_lat as u32,
            self.gcs_lon as u32,
            self.gcs_alt as u32,
            self.timestamp,
        ];
        for (chunk, w) in out.chunks_exact_mut(4).zip(words) {
            chunk.copy_from_slice(&w.to_be_bytes());
        }
        out[40] = self.emergency;
        out
    }

    pub fn from_bytes(b: &[u8; MESSAGE_BYTES]) -> Result<Self, WireError> {
        let w = |i: usize| u32::from_be_bytes(b[4 * i..4 * i + 4].try_into().expect("4 bytes"));
        let t = Telemetry {
            group_id: w(0),
            drone_lat: w(1) as i32,
            drone_lon: w(2) as i32,
            drone_alt: w(3) as i32,
            drone_speed: w(4),
            drone_cog: w(5),
            gcs_lat: w(6) as i32,
            gcs_lon: w(7) as i32,
            gcs_alt: w(8) as i32,
            timestamp: w(9),
            emergency: b[40],
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), WireError> {
        let checks = [
            ("drone latitude", self.drone_lat as i64, LAT_LIMIT),
            ("drone longitude", self.drone_lon as i64, LON_LIMIT),
            ("ground station latitude", self.gcs_lat as i64, LAT_LIMIT),
            ("ground station longitude", self.gcs_lon as i64, LON_LIMIT),
        ];
        for (field, value, limit) in checks {
            if value.abs() > limit {
                return Err(WireError::OutOfRange { field, value });
            }
        }
        if self.drone_cog as i64 >= COG_LIMIT {
            return Err(WireError::OutOfRange {
                field: "course over ground",
                value: self.drone_cog as i64,
            });
        }
        Ok(())
    }

    pub fn lat_deg(&self) -> f64 {
        self.drone_lat as f64 * 1e-7
    }

    pub fn lon_deg(&self) -> f64 {
        self.drone_lon as f64 * 1e-7
    }
}

/// Degrees to the 1e-7 fixed-point unit.
pub fn deg_to_fixed(deg: f64) -> i32 {
    (deg * 1e7).round() as i32
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RidPayload {
    pub telemetry: Telemetry,
    pub signature: SignatureField,
}

pub fn encode_payload(telemetry: &Telemetry, sig: &SignatureField) -> Result<Vec<u8>, WireError> {
    telemetry.validate()?;
    let text = sig.to_base58();
    let len = MESSAGE_BYTES + 2 + text.len();
    if len > MAX_PAYLOAD {
        return Err(WireError::Oversize(len));
    }
    let mut out = Vec::with_capacity(len);
    out.extend_from_slice(&telemetry.to_bytes());
    out.extend_from_slice(&(text.len() as u16).to_be_bytes());
    out.extend_from_slice(text.as_bytes());
    Ok(out)
}

pub fn decode_payload(bytes: &[u8]) -> Result<RidPayload, WireError> {
    let need = MESSAGE_BYTES + 2;
    if bytes.len() < need {
        return Err(WireError::Truncated {
            need,
            have: bytes.len(),
        });
    }
    if bytes.len() > MAX_PAYLOAD {
        return Err(WireError::Oversize(bytes.len()));
    }
    let telemetry = Telemetry::from_bytes(bytes[..MESSAGE_BYTES].try_into().expect("41 bytes"))?;
    let declared = u16::from_be_bytes([bytes[41], bytes[42]]) as usize;
    let actual = bytes.len() - need;
    if declared != actual {
        return Err(WireError::SigLength { declared, actual });
    }
    let signature = SignatureField::from_base58(&bytes[need..])?;
    Ok(RidPayload {
        telemetry,
        signature,
    })
}

/// The signed message `m_k` of an encoded payload.
pub fn signed_message(payload: &[u8]) -> Option<&[u8]> {
    payload.get(..MESSAGE_BYTES)
}
