//! Output sinks. `--out csv` streams CSV to stdout; any other value is a file
//! path, written together with a `.manifest.json` sidecar.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    /// JSON records, one per line, on stdout.
    Json,
    Csv,
    File(PathBuf),
}

impl Target {
    pub fn parse(out: Option<&str>) -> Self {
        match out {
            None | Some("json") => Target::Json,
            Some("csv") => Target::Csv,
            Some(p) => Target::File(PathBuf::from(p)),
        }
    }

    fn csv_file(&self) -> bool {
        matches!(self, Target::File(p) if p.extension().is_some_and(|e| e == "csv"))
    }
}

/// Rows collected in memory and rendered once.
pub struct Sink {
    target: Target,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    json: Vec<serde_json::Value>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    parameters: &'a serde_json::Value,
    seed: Option<u64>,
    version: &'static str,
    wall_seconds: f64,
    outputs: Vec<OutputDigest>,
}

#[derive(Serialize)]
struct OutputDigest {
    path: String,
    sha256: String,
    bytes: usize,
}

impl Sink {
    pub fn new(target: Target, header: &[&str]) -> Self {
        Self {
            target,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            json: Vec::new(),
        }
    }

    pub fn row<R: Serialize>(&mut self, fields: Vec<String>, record: &R) {
        self.rows.push(fields);
        self.json.push(serde_json::to_value(record).expect("records serialize"));
    }

    fn render(&self, csv: bool) -> Vec<u8> {
        if csv {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&self.header).expect("in-memory write");
            for r in &self.rows {
                w.write_record(r).expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        } else {
            let mut out = Vec::new();
            for v in &self.json {
                serde_json::to_writer(&mut out, v).expect("in-memory write");
                out.push(b'\n');
            }
            out
        }
    }

    pub fn finish(self, command: &str, parameters: &serde_json::Value, seed: Option<u64>, started: Instant) -> std::io::Result<()> {
        match &self.target {
            Target::Json => std::io::stdout().write_all(&self.render(false)),
            Target::Csv => std::io::stdout().write_all(&self.render(true)),
            Target::File(path) => {
                let bytes = self.render(self.target.csv_file());
                std::fs::write(path, &bytes)?;
                let manifest = Manifest {
                    command,
                    parameters,
                    seed,
                    version: env!("CARGO_PKG_VERSION"),
                    wall_seconds: started.elapsed().as_secs_f64(),
                    outputs: vec![OutputDigest {
                        path: path.display().to_string(),
                        sha256: hex::encode(Sha256::digest(&bytes)),
                        bytes: bytes.len(),
                    }],
                };
                let mut side = path.clone().into_os_string();
                side.push(".manifest.json");
                let mut text = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
                text.push(b'\n');
                std::fs::write(side, text)
            }
        }
    }
}
