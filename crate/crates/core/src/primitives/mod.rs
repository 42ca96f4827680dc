//! Standalone building blocks: Cramer-Shoup encryption, ECIES, BLS-style
//! signatures, a discrete-log equality proof, SPS-EQ, and the key file
//! container.
//!
//! Signatures of knowledge are not a separate engine here; the DS online
//! signing equations in [`crate::ds`] are the only instantiation.

pub mod csc;
pub mod dsig;
pub mod keyfile;
pub mod nizk;
pub mod pke;
pub mod spseq;

pub use csc::{
    csc_alpha, csc_decrypt, csc_decrypt_bytes, csc_encrypt, csc_keygen, csc_keygen_with,
    CramerShoupKeys, CscCiphertext, CscPublicKey, CscSecretKey,
};
pub use dsig::{
    dsig_keygen, dsig_keys_from_secret, dsig_sign, dsig_verify, dsig_verify_bytes, DsigKeys,
};
pub use keyfile::{KeyFile, KeyFileError};
pub use nizk::{nizk_prove, nizk_verify, NizkProof};
pub use pke::{
    pke_ciphertext_len, pke_decrypt, pke_encrypt, pke_encrypt_with, pke_keygen, PkeError, PkeKeys,
    PkePublicKey, PkeSecretKey,
};
pub use spseq::{
    spseq_chgrep, spseq_chgrep_unchecked, spseq_chgrep_with, spseq_keygen, spseq_keys_from_secret,
    spseq_sign, spseq_sign_with, spseq_verify, spseq_vkey, SpseqError, SpseqKeys, SpseqSignature,
};
