//! Per-run manifest: what was read, what was written, with which settings.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    tool_version: &'static str,
    seed: Option<u64>,
    threads: usize,
    config: &'a serde_json::Value,
    config_hash: String,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    timings_ms: Vec<(String, f64)>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?);
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Tracks one subcommand invocation; `finish` writes `<name>.manifest.json`
/// into the output directory.
pub struct Run {
    name: String,
    out: PathBuf,
    seed: Option<u64>,
    config: serde_json::Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<String>,
    timings: Vec<(String, f64)>,
    started: Instant,
}

impl Run {
    pub fn new(name: &str, out: &Path, config: &impl Serialize, seed: Option<u64>) -> Result<Self> {
        std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
        Ok(Run {
            name: name.to_string(),
            out: out.to_path_buf(),
            seed,
            config: serde_json::to_value(config)?,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: Vec::new(),
            started: Instant::now(),
        })
    }

    /// Opens an input file for buffered reading and records it.
    pub fn open(&mut self, path: &Path) -> Result<BufReader<File>> {
        let f = File::open(path).with_context(|| format!("missing input {}", path.display()))?;
        self.inputs.push(path.to_path_buf());
        Ok(BufReader::new(f))
    }

    pub fn record_input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn create(&mut self, file: &str) -> Result<BufWriter<File>> {
        let path = self.out.join(file);
        let f = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        self.outputs.push(file.to_string());
        Ok(BufWriter::new(f))
    }

    /// Records a file written by library code directly into the output directory.
    pub fn record_output(&mut self, file: &str) {
        self.outputs.push(file.to_string());
    }

    pub fn write_json(&mut self, file: &str, value: &impl Serialize) -> Result<()> {
        let mut w = self.create(file)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn time<R>(&mut self, stage: &str, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let r = f();
        self.timings.push((stage.to_string(), t.elapsed().as_secs_f64() * 1e3));
        r
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.timings.push(("total".into(), self.started.elapsed().as_secs_f64() * 1e3));
        let digest = |p: &Path, shown: String| -> Result<FileDigest> {
            Ok(FileDigest {
                path: shown,
                sha256: sha256_file(p)?,
            })
        };
        let inputs = self
            .inputs
            .iter()
            .map(|p| digest(p, p.display().to_string()))
            .collect::<Result<Vec<_>>>()?;
        let outputs = self
            .outputs
            .iter()
            .map(|f| digest(&self.out.join(f), f.clone()))
            .collect::<Result<Vec<_>>>()?;
        let config_hash = hex::encode(Sha256::digest(serde_json::to_vec(&self.config)?));
        let manifest = Manifest {
            subcommand: &self.name,
            tool_version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            threads: rayon::current_num_threads(),
            config: &self.config,
            config_hash,
            inputs,
            outputs,
            timings_ms: std::mem::take(&mut self.timings),
        };
        let path = self.out.join(format!("{}.manifest.json", self.name));
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, &manifest)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(path)
    }
}
