//! Content-addressed JSON documents on local disk.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Scenario,
    Strategy,
    Run,
    Problems,
}

impl Kind {
    fn dir(self) -> &'static str {
        match self {
            Kind::Scenario => "scenarios",
            Kind::Strategy => "strategies",
            Kind::Run => "runs",
            Kind::Problems => "problems",
        }
    }
}

/// First 16 hex digits of the SHA-256 of `bytes`.
pub fn content_id(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))[..16].to_string()
}

pub struct Store {
    root: PathBuf,
    tmp_counter: AtomicU64,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Store> {
        let root = root.into();
        for kind in [Kind::Scenario, Kind::Strategy, Kind::Run, Kind::Problems] {
            fs::create_dir_all(root.join(kind.dir()))?;
        }
        Ok(Store { root, tmp_counter: AtomicU64::new(0) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, kind: Kind, id: &str) -> Option<PathBuf> {
        // Ids are hex digests; anything else could escape the store.
        (!id.is_empty() && id.bytes().all(|b| b.is_ascii_hexdigit()))
            .then(|| self.root.join(kind.dir()).join(format!("{id}.json")))
    }

    /// Stores `value` under the digest of its canonical JSON and returns the id.
    pub fn put<T: Serialize>(&self, kind: Kind, value: &T) -> io::Result<String> {
        let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        let id = content_id(text.as_bytes());
        self.write(kind, &id, &text)?;
        Ok(id)
    }

    /// Overwrites the document at `id`. Readers see the old or the new
    /// document, never a partial one.
    pub fn put_at<T: Serialize>(&self, kind: Kind, id: &str, value: &T) -> io::Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        self.write(kind, id, &text)
    }

    fn write(&self, kind: Kind, id: &str, text: &str) -> io::Result<()> {
        let path = self.path(kind, id).ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "bad id"))?;
        let n = self.tmp_counter.fetch_add(1, Ordering::Relaxed);
        let tmp = path.with_extension(format!("tmp{}-{n}", std::process::id()));
        fs::write(&tmp, text)?;
        fs::rename(tmp, path)
    }

    pub fn get_text(&self, kind: Kind, id: &str) -> io::Result<Option<String>> {
        let Some(path) = self.path(kind, id) else { return Ok(None) };
        match fs::read_to_string(path) {
            Ok(t) => Ok(Some(t)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn get<T: DeserializeOwned>(&self, kind: Kind, id: &str) -> io::Result<Option<T>> {
        self.get_text(kind, id)?
            .map(|t| serde_json::from_str(&t).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)))
            .transpose()
    }
}
