//! Byte-stable dataset writers.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Shortest representation that round-trips to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        ryu::Buffer::new().format_finite(x).to_string()
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// In-memory CSV table with a fixed header.
pub struct Csv {
    writer: csv::Writer<Vec<u8>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Csv { writer }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

/// Files produced by one experiment, held in memory until the run succeeds.
#[derive(Debug, Default)]
pub struct Bundle {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Bundle {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json(&mut self, name: &str, value: &Value) {
        let mut text = serde_json::to_string_pretty(value).expect("serialisable");
        text.push('\n');
        self.add(name, text.into_bytes());
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write every file, then the manifest. Returns the written file names, manifest last.
pub fn write_bundle(dir: &Path, bundle: &Bundle, config_json: &str, build: &str) -> Result<Vec<String>, CliError> {
    let io = |path: &Path, e: std::io::Error| CliError::Io { path: path.to_path_buf(), source: e };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut listing = Vec::new();
    for (name, bytes) in &bundle.files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        listing.push(json!({"name": name, "sha256": sha256_hex(bytes), "bytes": bytes.len()}));
    }
    let manifest = json!({
        "build": build,
        "config_sha256": sha256_hex(config_json.as_bytes()),
        "config": serde_json::from_str::<Value>(config_json).expect("canonical config is valid JSON"),
        "files": listing,
    });
    let path = dir.join(MANIFEST);
    let mut text = serde_json::to_string_pretty(&manifest).expect("serialisable");
    text.push('\n');
    fs::write(&path, text).map_err(|e| io(&path, e))?;
    let mut names: Vec<String> = bundle.files.iter().map(|(n, _)| n.clone()).collect();
    names.push(MANIFEST.to_string());
    Ok(names)
}
