//! Run outputs: JSON reports, CSV tables and the run manifest.
//!
//! Every file carries the manifest hash, a SHA-256 over the canonical JSON
//! of `{subcommand, config, seed, version}`. JSON reports hold it in a
//! `manifest_hash` field and CSV tables in a leading `# manifest <hash>` line.
//! Floating-point values are rounded to 12 significant digits.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest text that round-trips the rounded value.
pub fn fmt_num(x: f64) -> String {
    round_sig(x).to_string()
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn manifest_hash(subcommand: &str, config: &Value, seed: u64) -> String {
    // serde_json maps are ordered by key, so this text is canonical
    let canonical = json!({
        "subcommand": subcommand,
        "config": config,
        "seed": seed,
        "version": qadv_core::VERSION,
    })
    .to_string();
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub struct Run {
    dir: PathBuf,
    subcommand: String,
    config: Value,
    seed: u64,
    hash: String,
    outputs: Vec<String>,
}

impl Run {
    pub fn new<C: Serialize>(dir: &Path, subcommand: &str, config: &C, seed: u64) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let config = serde_json::to_value(config).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Run {
            dir: dir.to_path_buf(),
            subcommand: subcommand.to_string(),
            hash: manifest_hash(subcommand, &config, seed),
            config,
            seed,
            outputs: Vec::new(),
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Writes `{"manifest_hash": …, …report}` with rounded numbers.
    pub fn write_json<T: Serialize>(&mut self, name: &str, report: &T) -> Result<(), CliError> {
        let mut v = serde_json::to_value(report).map_err(|e| CliError::Invariant(e.to_string()))?;
        round_value(&mut v);
        let v = match v {
            Value::Object(mut m) => {
                m.insert("manifest_hash".into(), Value::String(self.hash.clone()));
                Value::Object(m)
            }
            other => json!({"manifest_hash": self.hash, "report": other}),
        };
        let mut text = serde_json::to_string_pretty(&v).expect("values serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut buf = format!("# manifest {}\n", self.hash).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let err = |e: csv::Error| CliError::Io(e.to_string());
            w.write_record(header).map_err(err)?;
            for row in rows {
                w.write_record(row).map_err(err)?;
            }
            w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        }
        self.write(name, &buf)
    }

    /// Raw text whose format places the hash itself (e.g. circuit metadata).
    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.write(name, text.as_bytes())
    }

    pub fn finish(self, duration: Duration) -> Result<PathBuf, CliError> {
        let manifest = json!({
            "subcommand": self.subcommand,
            "config": self.config,
            "seed": self.seed,
            "version": qadv_core::VERSION,
            "manifest_hash": self.hash,
            "outputs": self.outputs,
            "duration_seconds": duration.as_secs_f64(),
        });
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).expect("values serialize");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.234_567_890_123_456e-7), 1.234_567_890_12e-7);
        assert_eq!(round_sig(-2.0), -2.0);
        assert_eq!(fmt_num(2.0 / 3.0), "0.666666666667");
    }

    #[test]
    fn hash_depends_on_config_and_seed() {
        let a = manifest_hash("decay", &json!({"n": 8}), 1);
        assert_eq!(a, manifest_hash("decay", &json!({"n": 8}), 1));
        assert_ne!(a, manifest_hash("decay", &json!({"n": 8}), 2));
        assert_ne!(a, manifest_hash("decay", &json!({"n": 6}), 1));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn json_reports_embed_the_hash() {
        let dir = tempfile::tempdir().unwrap();
        let mut run = Run::new(dir.path(), "bell", &json!({"trials": 3}), 0).unwrap();
        run.write_json("r.json", &json!({"x": 1.0 / 3.0})).unwrap();
        run.write_csv("t.csv", &["a"], &[vec!["1".into()]]).unwrap();
        let hash = run.hash().to_string();
        run.finish(Duration::from_millis(5)).unwrap();
        let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
        assert_eq!(r["manifest_hash"], hash);
        assert_eq!(r["x"], 0.333333333333);
        let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert!(csv.starts_with(&format!("# manifest {hash}\n")));
        let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["outputs"], json!(["r.json", "t.csv"]));
    }
}
