//! Run manifests: a JSON sidecar written when a batch run starts and
//! finalized when it ends. The manifest records the full configuration and
//! master seed (enough to regenerate every output) plus SHA-256 digests of
//! the finished files, so a rerun can prove it reproduced them bit for bit.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::SCHEME_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    /// File name relative to the manifest's directory.
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub experiment: String,
    pub master_seed: u64,
    pub rng_scheme_version: u32,
    /// The experiment's full configuration, mirrored as JSON.
    pub config: serde_json::Value,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
    pub status: RunStatus,
    pub outputs: Vec<OutputDigest>,
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

impl RunManifest {
    pub fn begin<C: Serialize>(experiment: &str, master_seed: u64, config: &C) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        Ok(Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.to_string(),
            master_seed,
            rng_scheme_version: SCHEME_VERSION,
            config,
            started_unix: now_unix(),
            finished_unix: None,
            status: RunStatus::Running,
            outputs: Vec::new(),
        })
    }

    /// Manifest file that accompanies `output`: same stem, extension
    /// `manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        let stem = output
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".to_string());
        output.with_file_name(format!("{stem}.manifest.json"))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }

    /// Record digests for the finished outputs and mark the run complete.
    pub fn finalize(&mut self, outputs: &[PathBuf]) -> Result<()> {
        self.outputs = outputs
            .iter()
            .map(|p| {
                Ok(OutputDigest {
                    file: p
                        .file_name()
                        .ok_or_else(|| {
                            Error::InvalidArgument(format!("output path {p:?} has no file name"))
                        })?
                        .to_string_lossy()
                        .into_owned(),
                    sha256: sha256_hex(p)?,
                })
            })
            .collect::<Result<_>>()?;
        self.finished_unix = Some(now_unix());
        self.status = RunStatus::Complete;
        Ok(())
    }
}

/// Wrap a run: write the manifest up front, run the job, digest whatever
/// files it reports, rewrite the manifest as complete. The manifest lands
/// next to `primary_output`.
pub fn with_manifest<C: Serialize>(
    experiment: &str,
    master_seed: u64,
    config: &C,
    primary_output: &Path,
    run: impl FnOnce() -> Result<Vec<PathBuf>>,
) -> Result<PathBuf> {
    let manifest_path = RunManifest::path_for(primary_output);
    let mut manifest = RunManifest::begin(experiment, master_seed, config)?;
    manifest.write(&manifest_path)?;
    let outputs = run()?;
    manifest.finalize(&outputs)?;
    manifest.write(&manifest_path)?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_matches_known_vector() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("abc.txt");
        std::fs::write(&path, "abc").unwrap();
        assert_eq!(
            sha256_hex(&path).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn lifecycle_round_trips_and_tracks_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("results.csv");
        std::fs::write(&out, "n,value\n1,2\n").unwrap();
        let manifest_path = with_manifest(
            "unit-test",
            42,
            &serde_json::json!({"beta": 0.25}),
            &out,
            || Ok(vec![out.clone()]),
        )
        .unwrap();
        assert_eq!(manifest_path, dir.path().join("results.manifest.json"));
        let loaded: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
        assert_eq!(loaded.status, RunStatus::Complete);
        assert_eq!(loaded.master_seed, 42);
        assert_eq!(loaded.outputs.len(), 1);
        assert_eq!(loaded.outputs[0].file, "results.csv");
        assert_eq!(loaded.outputs[0].sha256, sha256_hex(&out).unwrap());
        assert!(loaded.finished_unix.is_some());
    }

    #[test]
    fn failed_runs_leave_a_running_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("broken.csv");
        let result = with_manifest("unit-test", 7, &serde_json::json!({}), &out, || {
            Err(crate::error::Error::InvalidArgument("boom".into()))
        });
        assert!(result.is_err());
        let manifest_path = RunManifest::path_for(&out);
        let loaded: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(manifest_path).unwrap()).unwrap();
        assert_eq!(loaded.status, RunStatus::Running);
        assert!(loaded.outputs.is_empty());
    }
}
