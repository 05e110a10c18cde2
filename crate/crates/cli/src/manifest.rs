//! Run manifests and all-or-nothing output writing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// SHA-256 over git-style blob framing (`blob <len>\0<bytes>`) of every input, in order.
pub fn content_hash(inputs: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for bytes in inputs {
        h.update(format!("blob {}\0", bytes.len()).as_bytes());
        h.update(bytes);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Default)]
pub struct Timings {
    stages: Vec<(String, f64)>,
}

impl Timings {
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push((name.to_string(), start.elapsed().as_secs_f64()));
        out
    }
}

#[derive(Debug, Serialize)]
struct StageTime {
    stage: String,
    seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub input_hash: String,
    pub files: Vec<String>,
    stages: Vec<StageTime>,
}

/// Files produced by a command, held in memory until the run has succeeded.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    /// Writes every file and then `manifest.json` into `dir`; returns the written paths.
    pub fn commit(
        self,
        dir: &Path,
        command: &str,
        config: Vec<(String, String)>,
        input_hash: String,
        timings: Timings,
    ) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut names: Vec<String> = self.files.iter().map(|f| f.0.clone()).collect();
        names.push("manifest.json".into());
        let manifest = RunManifest {
            command: command.to_string(),
            config,
            input_hash,
            files: names.clone(),
            stages: timings.stages.into_iter().map(|(stage, seconds)| StageTime { stage, seconds }).collect(),
        };
        let mut written = Vec::new();
        for (name, bytes) in self.files {
            let path = dir.join(&name);
            std::fs::write(&path, bytes)?;
            written.push(path);
        }
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_vec_pretty(&manifest).map_err(std::io::Error::other)?)?;
        written.push(path);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_matches_git_blob_framing() {
        // sha256 of the bytes `blob 0\0`.
        assert_eq!(content_hash(&[b""]), "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813");
        assert_ne!(content_hash(&[b"a", b"b"]), content_hash(&[b"ab"]));
    }

    #[test]
    fn commit_lists_every_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Outputs::default();
        out.add("a.csv", b"x\n1\n".to_vec());
        let mut t = Timings::default();
        t.stage("noop", || ());
        let paths = out.commit(dir.path(), "synth", vec![("seed".into(), "1".into())], "h".into(), t).unwrap();
        assert_eq!(paths.len(), 2);
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["files"][0], "a.csv");
        assert_eq!(manifest["stages"][0]["stage"], "noop");
        assert!(paths.iter().all(|p| p.exists()));
    }
}
