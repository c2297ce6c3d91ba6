//! Run manifests: enough to reproduce every output byte for byte.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub seed: u64,
    pub config: C,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
}

pub fn digest_file(path: &Path) -> Result<InputDigest> {
    let mut f = fs::File::open(path).with_context(|| format!("hashing {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(hasher.finalize()),
    })
}

/// Collects output files as they are written, relative to the run directory.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn file(&mut self, name: &str) -> Result<fs::File> {
        let path = self.root.join(name);
        self.written.push(name.to_string());
        fs::File::create(&path).with_context(|| format!("creating {}", path.display()))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        let path = self.root.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn finish<C: Serialize>(
        mut self,
        subcommand: &'static str,
        seed: u64,
        config: C,
        inputs: &[&Path],
    ) -> Result<()> {
        let inputs = inputs.iter().map(|p| digest_file(p)).collect::<Result<Vec<_>>>()?;
        let outputs = std::mem::take(&mut self.written);
        let manifest = Manifest {
            tool: "homonym",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            seed,
            config,
            inputs,
            outputs,
        };
        self.json("manifest.json", &manifest)
    }
}
