//! Per-command run manifests: configuration, seed, and SHA-256 digests of
//! every input read and every output written.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const MANIFEST_DIR: &str = "manifests";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// `data:` or `out:` followed by the path relative to that root.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub failures: Vec<String>,
}

pub fn digest_file(root_tag: &str, root: &Path, rel: &Path) -> Result<FileDigest, CliError> {
    let path = root.join(rel);
    let bytes = std::fs::read(&path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(FileDigest {
        path: format!("{root_tag}:{}", slash_path(rel)),
        bytes: bytes.len() as u64,
        sha256: gaitdict::seed::sha256_hex(&bytes),
    })
}

pub fn digest_all(root_tag: &str, root: &Path, rels: &[std::path::PathBuf]) -> Result<Vec<FileDigest>, CliError> {
    use rayon::prelude::*;
    let mut out = rels
        .par_iter()
        .map(|r| digest_file(root_tag, root, r))
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}

fn slash_path(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

impl RunManifest {
    /// Writes `<root>/manifests/<command>.json`.
    pub fn write(&self, root: &Path) -> Result<(), CliError> {
        let path = root.join(MANIFEST_DIR).join(format!("{}.json", self.command));
        let json = serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        gaitdict::render::write_text(&path, &(json + "\n")).map_err(CliError::from)
    }

    pub fn load(root: &Path, command: &str) -> Result<Self, CliError> {
        let path = root.join(MANIFEST_DIR).join(format!("{command}.json"));
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("bad manifest {}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_bytes() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("a")).unwrap();
        std::fs::write(dir.path().join("a/b.txt"), b"abc").unwrap();
        let d = digest_file("out", dir.path(), Path::new("a/b.txt")).unwrap();
        assert_eq!(d.path, "out:a/b.txt");
        assert_eq!(d.bytes, 3);
        assert_eq!(d.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
