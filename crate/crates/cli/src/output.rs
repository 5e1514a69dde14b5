use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::ConfigError;

const LOCK: &str = ".adsweyl.lock";
const MANIFEST: &str = "manifest.json";

/// Floats with 17 significant digits.
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn f17_list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|x| f17(*x)).collect();
    format!("[{}]", items.join(", "))
}

/// Output directory held for one run: emitted files are hashed, the manifest goes last.
pub struct OutputDir {
    pub dir: PathBuf,
    files: Vec<(String, String, usize)>,
    started: Instant,
    _lock: Lock,
}

struct Lock(PathBuf);

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

impl OutputDir {
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let lock = dir.join(LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(ConfigError(format!(
                    "output directory {} is locked by another run",
                    dir.display()
                ))
                .into());
            }
            Err(e) => return Err(e).with_context(|| format!("cannot lock {}", dir.display())),
        }
        // a previous manifest would vouch for files this run is about to replace
        let _ = fs::remove_file(dir.join(MANIFEST));
        let _ = fs::remove_file(dir.join("error.json"));
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
            _lock: Lock(lock),
        })
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        let mut f =
            File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        f.write_all(content.as_bytes())?;
        let hash = hex::encode(Sha256::digest(content.as_bytes()));
        self.files.retain(|(n, _, _)| n != name);
        self.files.push((name.to_string(), hash, content.len()));
        Ok(())
    }

    /// Machine-readable failure record; no manifest is written for failed runs.
    pub fn write_error(&self, record: &Value) {
        let _ = fs::write(self.dir.join("error.json"), format!("{record:#}\n"));
    }

    pub fn finish(
        self,
        command: &str,
        seed: u64,
        config: &toml::Value,
        verdicts: Value,
    ) -> Result<()> {
        let files: Vec<Value> = self
            .files
            .iter()
            .map(|(n, h, b)| json!({ "path": n, "sha256": h, "bytes": b }))
            .collect();
        let manifest = json!({
            "command": command,
            "seed": seed,
            "config": config,
            "versions": { "adsweyl": env!("CARGO_PKG_VERSION") },
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "verdicts": verdicts,
            "files": files,
        });
        let tmp = self.dir.join(format!("{MANIFEST}.tmp"));
        fs::write(&tmp, format!("{manifest:#}\n"))?;
        fs::rename(&tmp, self.dir.join(MANIFEST))?;
        Ok(())
    }
}
