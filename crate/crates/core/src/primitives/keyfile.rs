//! Container format shared by every persisted key.
//!
//! ```text
//! tag[4] | version u8 | count u16 | (len u32 | bytes)*count
//! ```
//!
//! All integers are big-endian. Fields are canonical element encodings or
//! small opaque blobs; their meaning depends on the tag.

use thiserror::Error;

pub const KEYFILE_VERSION: u8 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyFileError {
    #[error("key file truncated")]
    Truncated,
    #[error("expected tag {expected:?}, found {found:?}")]
    Tag { expected: String, found: String },
    #[error("unsupported key file version {0}")]
    Version(u8),
    #[error("trailing bytes after last field")]
    Trailing,
    #[error("expected {expected} fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("field {index}: {reason}")]
    Field { index: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyFile {
    pub tag: [u8; 4],
    pub version: u8,
    pub fields: Vec<Vec<u8>>,
}

impl KeyFile {
    pub fn new(tag: [u8; 4]) -> Self {
        KeyFile {
            tag,
            version: KEYFILE_VERSION,
            fields: Vec::new(),
        }
    }

    pub fn push(&mut self, field: Vec<u8>) -> &mut Self {
        self.fields.push(field);
        self
    }

    pub fn encode(&self) -> Vec<u8> {
        let body: usize = self.fields.iter().map(|f| 4 + f.len()).sum();
        let mut out = Vec::with_capacity(7 + body);
        out.extend_from_slice(&self.tag);
        out.push(self.version);
        out.extend_from_slice(&(self.fields.len() as u16).to_be_bytes());
        for f in &self.fields {
            out.extend_from_slice(&(f.len() as u32).to_be_bytes());
            out.extend_from_slice(f);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, KeyFileError> {
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8], KeyFileError> {
            let s = bytes.get(pos..pos + n).ok_or(KeyFileError::Truncated)?;
            pos += n;
            Ok(s)
        };
        let tag: [u8; 4] = take(4)?.try_into().expect("4 bytes");
        let version = take(1)?[0];
        if version != KEYFILE_VERSION {
            return Err(KeyFileError::Version(version));
        }
        let count = u16::from_be_bytes(take(2)?.try_into().expect("2 bytes")) as usize;
        let mut fields = Vec::with_capacity(count.min(64));
        for _ in 0..count {
            let len = u32::from_be_bytes(take(4)?.try_into().expect("4 bytes")) as usize;
            fields.push(take(len)?.to_vec());
        }
        if pos != bytes.len() {
            return Err(KeyFileError::Trailing);
        }
        Ok(KeyFile {
            tag,
            version,
            fields,
        })
    }

    /// Decodes and checks the tag and field count in one go.
    pub fn decode_expect(bytes: &[u8], tag: [u8; 4], count: usize) -> Result<Self, KeyFileError> {
        let kf = Self::decode(bytes)?;
        if kf.tag != tag {
            return Err(KeyFileError::Tag {
                expected: String::from_utf8_lossy(&tag).into_owned(),
                found: String::from_utf8_lossy(&kf.tag).into_owned(),
            });
        }
        if kf.fields.len() != count {
            return Err(KeyFileError::FieldCount {
                expected: count,
                found: kf.fields.len(),
            });
        }
        Ok(kf)
    }

    pub fn field(&self, index: usize) -> &[u8] {
        &self.fields[index]
    }
}

/// Wraps a field-level decoding failure with its index.
pub fn field_err(index: usize, e: impl std::fmt::Display) -> KeyFileError {
    KeyFileError::Field {
        index,
        reason: e.to_string(),
    }
}
