//! Artifacts are rendered to memory first and then written with
//! temp-file-and-rename, so a failed command never leaves partial files.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

/// A named artifact waiting to be written.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: &str, bytes: Vec<u8>) -> Self {
        Self {
            name: name.to_string(),
            bytes,
        }
    }

    pub fn render(
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> fracvisco_core::Result<()>,
    ) -> fracvisco_core::Result<Self> {
        let mut bytes = Vec::new();
        f(&mut bytes)?;
        Ok(Self::new(name, bytes))
    }
}

/// Writes every artifact into `dir` (created if missing).
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for a in artifacts {
        let target = dir.join(&a.name);
        let mut tmp = NamedTempFile::new_in(dir)?;
        tmp.write_all(&a.bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target).map_err(|e| e.error)?;
        written.push(target);
    }
    Ok(written)
}

/// Writes comma-separated rows with a header, LF line endings.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out.into_bytes()
}
