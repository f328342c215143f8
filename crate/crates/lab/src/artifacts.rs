//! Output directory with a manifest of SHA-256 digests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::LabError;

#[derive(Debug, Serialize)]
struct Entry {
    path: String,
    bytes: usize,
    sha256: String,
}

pub struct Artifacts {
    dir: PathBuf,
    entries: Vec<Entry>,
}

/// Named random stream: the first 8 bytes of `sha256(seed || name)`, so adding a
/// stream never shifts another.
pub fn stream_seed(seed: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, LabError> {
        fs::create_dir_all(dir).map_err(|e| LabError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, data: Vec<u8>) -> Result<(), LabError> {
        let path = self.dir.join(name);
        fs::write(&path, &data).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        self.entries.push(Entry {
            path: name.to_string(),
            bytes: data.len(),
            sha256: hex(&Sha256::digest(&data)),
        });
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), LabError> {
        let mut data = serde_json::to_vec_pretty(value).map_err(|e| LabError::Io(e.to_string()))?;
        data.push(b'\n');
        self.write(name, data)
    }

    /// CSV with a header row; rows are written with shortest round-trip formatting.
    pub fn csv<R>(&mut self, name: &str, header: &[&str], rows: R) -> Result<(), LabError>
    where
        R: IntoIterator,
        R::Item: IntoIterator,
        <R::Item as IntoIterator>::Item: ToString,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            let rec: Vec<String> = row.into_iter().map(|v| v.to_string()).collect();
            w.write_record(&rec)?;
        }
        let data = w.into_inner().map_err(|e| LabError::Io(e.to_string()))?;
        self.write(name, data)
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(mut self, scenario: &str) -> Result<PathBuf, LabError> {
        let entries = std::mem::take(&mut self.entries);
        let manifest = serde_json::json!({ "scenario": scenario, "files": entries });
        self.json("manifest.json", &manifest)?;
        Ok(self.dir)
    }
}
