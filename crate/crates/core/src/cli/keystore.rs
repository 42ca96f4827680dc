//! On-disk layout for the command line tools.
//!
//! ```text
//! <root>/.lock                  held while a command mutates the store
//! <root>/<family>/group.json    group id, curve, member names in join order
//! <root>/<family>/gpk.key       group public key
//! <root>/<family>/*.key         authority secrets, mode 0600
//! <root>/<family>/registry.key  registration table
//! <root>/members/<name>.json    group id and scheme of a member
//! <root>/members/<name>.key     member secret, mode 0600
//! <root>/pbir/<group id>.gpk    exported public keys
//! <root>/audit.jsonl            disclosure cases, one per line
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::actors::suite::{self, AuthorityFiles, Family, GroupAuthority, MemberSignerClone};
use crate::actors::AuditRecord;
use crate::algebra::CurveId;
use crate::wire::ModeTag;

pub const HOME_ENV: &str = "A2RID_HOME";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupMeta {
    pub group_id: u32,
    pub family: Family,
    pub curve: CurveId,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberMeta {
    pub name: String,
    pub group_id: u32,
    pub scheme: ModeTag,
}

pub struct Keystore {
    pub root: PathBuf,
}

/// Removes the lockfile when dropped.
pub struct LockGuard {
    path: PathBuf,
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn secret_names(family: Family) -> &'static [&'static str] {
    match family {
        Family::Cs => &["isk.key", "ok.key"],
        Family::Ds => &["authority.key"],
    }
}

fn family_dir(family: Family) -> &'static str {
    match family {
        Family::Cs => "cs",
        Family::Ds => "ds",
    }
}

/// Opens a file readable by the owner only, creating it if needed.
fn open_private(path: &Path, append: bool) -> Result<File, CliError> {
    let mut opts = OpenOptions::new();
    opts.create(true);
    if append {
        opts.append(true);
    } else {
        opts.write(true).truncate(true);
    }
    #[cfg(unix)]
    std::os::unix::fs::OpenOptionsExt::mode(&mut opts, 0o600);
    let f = opts.open(path).map_err(|e| CliError::io(path, e))?;
    // open() leaves the mode of an existing file alone
    #[cfg(unix)]
    f.set_permissions(std::os::unix::fs::PermissionsExt::from_mode(0o600))
        .map_err(|e| CliError::io(path, e))?;
    Ok(f)
}

pub fn write_secret(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    open_private(path, false)?
        .write_all(bytes)
        .map_err(|e| CliError::io(path, e))
}

pub fn write_public(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let bytes = read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_public(
        path,
        serde_json::to_string_pretty(value)
            .expect("plain data")
            .as_bytes(),
    )
}

impl Keystore {
    pub fn open(root: impl Into<PathBuf>) -> Self {
        Keystore { root: root.into() }
    }

    /// Takes the store lock; fails if another command holds it.
    pub fn lock(&self) -> Result<LockGuard, CliError> {
        fs::create_dir_all(&self.root).map_err(|e| CliError::io(&self.root, e))?;
        let path = self.root.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(LockGuard { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(CliError::Config(format!(
                    "keystore {} is locked (remove {} if no command is running)",
                    self.root.display(),
                    path.display()
                )))
            }
            Err(e) => Err(CliError::io(&path, e)),
        }
    }

    pub fn group_dir(&self, family: Family) -> PathBuf {
        self.root.join(family_dir(family))
    }

    pub fn pbir_dir(&self) -> PathBuf {
        self.root.join("pbir")
    }

    pub fn members_dir(&self) -> PathBuf {
        self.root.join("members")
    }

    pub fn audit_path(&self) -> PathBuf {
        self.root.join("audit.jsonl")
    }

    pub fn has_group(&self, family: Family) -> bool {
        self.group_dir(family).join("group.json").exists()
    }

    /// Persists a group, replacing any previous one of the same family.
    pub fn save_group(&self, meta: &GroupMeta, files: &AuthorityFiles) -> Result<(), CliError> {
        let dir = self.group_dir(meta.family);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let names = secret_names(meta.family);
        if names.len() != files.secrets.len() {
            return Err(CliError::Crypto(format!(
                "expected {} secret key files, got {}",
                names.len(),
                files.secrets.len()
            )));
        }
        for (name, bytes) in names.iter().zip(&files.secrets) {
            write_secret(&dir.join(name), bytes)?;
        }
        write_public(&dir.join("gpk.key"), &files.gpk)?;
        write_public(&dir.join("registry.key"), &files.registry)?;
        write_json(&dir.join("group.json"), meta)?;
        let pbir = self.pbir_dir();
        fs::create_dir_all(&pbir).map_err(|e| CliError::io(&pbir, e))?;
        write_public(&pbir.join(format!("{}.gpk", meta.group_id)), &files.gpk)
    }

    pub fn group_meta(&self, family: Family) -> Result<GroupMeta, CliError> {
        if !self.has_group(family) {
            return Err(CliError::Config(format!(
                "no {family} group in {}; run setup first",
                self.root.display()
            )));
        }
        read_json(&self.group_dir(family).join("group.json"))
    }

    pub fn load_group(
        &self,
        family: Family,
    ) -> Result<(GroupMeta, Box<dyn GroupAuthority>), CliError> {
        let meta = self.group_meta(family)?;
        let dir = self.group_dir(family);
        let files = AuthorityFiles {
            gpk: read(&dir.join("gpk.key"))?,
            secrets: secret_names(family)
                .iter()
                .map(|n| read(&dir.join(n)))
                .collect::<Result<_, _>>()?,
            registry: read(&dir.join("registry.key"))?,
        };
        let authority =
            suite::load_authority(family, meta.curve, &files).map_err(CliError::crypto)?;
        if authority.members() != meta.members.len() {
            return Err(CliError::Config(format!(
                "{}: registry has {} entries but {} member names",
                dir.display(),
                authority.members(),
                meta.members.len()
            )));
        }
        Ok((meta, authority))
    }

    /// Every group present, for the authority side.
    pub fn load_groups(&self) -> Result<Vec<(GroupMeta, Box<dyn GroupAuthority>)>, CliError> {
        [Family::Cs, Family::Ds]
            .into_iter()
            .filter(|f| self.has_group(*f))
            .map(|f| self.load_group(f))
            .collect()
    }

    pub fn member_path(&self, name: &str) -> Result<PathBuf, CliError> {
        if name.is_empty()
            || !name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
            || name.starts_with('.')
        {
            return Err(CliError::Config(format!(
                "member name {name:?} must be non-empty ASCII letters, digits, '-', '_' or '.'"
            )));
        }
        Ok(self.members_dir().join(name))
    }

    pub fn save_member(&self, meta: &MemberMeta, key: &[u8]) -> Result<(), CliError> {
        let dir = self.members_dir();
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let base = self.member_path(&meta.name)?;
        write_secret(&base.with_extension("key"), key)?;
        write_json(&base.with_extension("json"), meta)
    }

    pub fn load_member(
        &self,
        name: &str,
    ) -> Result<(MemberMeta, Box<dyn MemberSignerClone>), CliError> {
        let base = self.member_path(name)?;
        let meta_path = base.with_extension("json");
        if !meta_path.exists() {
            return Err(CliError::Config(format!("unknown member {name:?}")));
        }
        let meta: MemberMeta = read_json(&meta_path)?;
        let gpk = read(&self.pbir_dir().join(format!("{}.gpk", meta.group_id)))?;
        let key = read(&base.with_extension("key"))?;
        let signer = suite::load_member(meta.scheme, &gpk, &key).map_err(CliError::crypto)?;
        Ok((meta, signer))
    }

    pub fn audit_log(&self) -> Result<Vec<AuditRecord>, CliError> {
        let path = self.audit_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                serde_json::from_str(l)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
            })
            .collect()
    }

    pub fn append_audit(&self, rec: &AuditRecord) -> Result<(), CliError> {
        let path = self.audit_path();
        let mut f = open_private(&path, true)?;
        writeln!(f, "{}", serde_json::to_string(rec).expect("plain data"))
            .map_err(|e| CliError::io(&path, e))
    }
}
