//! Per-subcommand settings.
//!
//! Each subcommand has a flag struct (every field optional) and a resolved
//! config with defaults. Resolution layers defaults, then the matching
//! section of the config file, then flags. A run manifest can stand in for
//! the config file, in which case its recorded config is the section.
//!
//! | setting | default |
//! |---|---|
//! | weight cutoff `k` | 1 |
//! | majority copies `ℓ` | 3 |
//! | sampled inputs `s` | 32 |
//! | C_new random depth `L` | 6 · width of C_new |
//! | decay `n`, `L`, trials | 8, 10, 500 |
//! | seed | 0 (decay: 1) |

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

pub const DEFAULT_K: usize = 1;
pub const DEFAULT_COPIES: usize = 3;
pub const DEFAULT_SAMPLES: usize = 32;

/// Loads a TOML config file or a `manifest.json` from an earlier run.
pub fn load_file(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let sub = v.get("subcommand").and_then(Value::as_str);
        let cfg = v.get("config");
        match (sub, cfg) {
            (Some(sub), Some(cfg)) => {
                let mut m = Map::new();
                m.insert(sub.to_string(), cfg.clone());
                Ok(Value::Object(m))
            }
            _ => Err(CliError::Config(format!(
                "{}: not a run manifest (needs \"subcommand\" and \"config\")",
                path.display()
            ))),
        }
    } else {
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::to_value(table).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Defaults, overlaid by `file[section]`, overlaid by the set flags.
pub fn resolve<C, F>(section: &str, file: Option<&Value>, flags: &F) -> Result<C, CliError>
where
    C: DeserializeOwned,
    F: Serialize,
{
    let mut merged = Map::new();
    if let Some(file) = file {
        match file.get(section) {
            Some(Value::Object(m)) => merged.extend(m.clone()),
            Some(_) => return Err(CliError::Config(format!("[{section}] must be a table"))),
            None => {}
        }
    }
    match serde_json::to_value(flags).map_err(|e| CliError::Config(e.to_string()))? {
        Value::Object(m) => merged.extend(m.into_iter().filter(|(_, v)| !v.is_null())),
        _ => unreachable!("flag structs serialize to objects"),
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(format!("[{section}] {e}")))
}

#[derive(Debug, Args, Serialize)]
pub struct DecayFlags {
    /// Qubits (even).
    #[arg(long)]
    pub n: Option<usize>,
    /// Random layers.
    #[arg(long = "L", visible_alias = "layers")]
    pub layers: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub n: usize,
    pub layers: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            n: 8,
            layers: 10,
            trials: 500,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromiseName {
    Flip,
    Idle,
    Rotation,
    EntangledRotation,
}

/// Settings shared by `detect` and `suite` for building C_new.
#[derive(Debug, Args, Serialize)]
pub struct CnewFlags {
    /// Main-register width.
    #[arg(long)]
    pub n: Option<usize>,
    /// Promise-circuit width.
    #[arg(long)]
    pub m: Option<usize>,
    /// Majority-vote copies ℓ (odd).
    #[arg(long, visible_alias = "ell")]
    pub copies: Option<usize>,
    /// Random depth L; defaults to 6 · width of C_new.
    #[arg(long = "L", visible_alias = "depth")]
    pub depth: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct DetectFlags {
    /// Circuit file; when absent a C_new instance is built.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Sampled inputs.
    #[arg(long = "s", visible_alias = "samples")]
    pub samples: Option<usize>,
    /// Weight cutoff.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Estimate the exact side from this many shots instead.
    #[arg(long)]
    pub shots: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub cnew: CnewFlags,
    #[arg(long, value_enum)]
    pub promise: Option<PromiseName>,
    /// Success probability for rotation promises.
    #[arg(long)]
    pub p: Option<f64>,
    /// Seed for the random layers of C_new (defaults to --seed).
    #[arg(long)]
    pub circuit_seed: Option<u64>,
    #[arg(long)]
    pub dense_block_limit: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectConfig {
    pub circuit: Option<PathBuf>,
    pub samples: usize,
    pub k: usize,
    pub seed: u64,
    pub shots: Option<usize>,
    pub n: usize,
    pub m: usize,
    pub copies: usize,
    pub depth: Option<usize>,
    pub promise: PromiseName,
    pub p: f64,
    pub circuit_seed: Option<u64>,
    pub dense_block_limit: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            circuit: None,
            samples: DEFAULT_SAMPLES,
            k: DEFAULT_K,
            seed: 0,
            shots: None,
            n: 6,
            m: 2,
            copies: DEFAULT_COPIES,
            depth: None,
            promise: PromiseName::Flip,
            p: 0.9,
            circuit_seed: None,
            dense_block_limit: 10,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SuiteFlags {
    /// YES instances.
    #[arg(long)]
    pub yes: Option<usize>,
    /// NO instances.
    #[arg(long)]
    pub no: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub cnew: CnewFlags,
    #[arg(long = "s", visible_alias = "samples")]
    pub samples: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub yes: usize,
    pub no: usize,
    pub n: usize,
    pub m: usize,
    pub copies: usize,
    pub depth: Option<usize>,
    pub samples: usize,
    pub k: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            yes: 20,
            no: 20,
            n: 6,
            m: 2,
            copies: DEFAULT_COPIES,
            depth: None,
            samples: DEFAULT_SAMPLES,
            k: DEFAULT_K,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DequantAction {
    /// Build the sum tree and write it out.
    Build,
    /// Draw indices and compare frequencies with the exact distribution.
    Sample,
    /// Estimate inner products by importance sampling.
    Estimate,
}

#[derive(Debug, Args, Serialize)]
pub struct DequantFlags {
    #[arg(value_enum)]
    pub action: Option<DequantAction>,
    /// Vector file (`.bin`: little-endian f64, otherwise text). Random when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Second vector for `estimate`.
    #[arg(long)]
    pub query: Option<PathBuf>,
    /// Dimension of random vectors.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Rescale inputs to unit norm.
    #[arg(long)]
    pub normalize: Option<bool>,
    /// Draws for `sample`.
    #[arg(long)]
    pub draws: Option<usize>,
    /// Draws per estimate (S).
    #[arg(long = "S", visible_alias = "samples")]
    pub samples: Option<usize>,
    /// Random vector pairs for `estimate`.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DequantConfig {
    pub action: DequantAction,
    pub input: Option<PathBuf>,
    pub query: Option<PathBuf>,
    pub dim: usize,
    pub normalize: bool,
    pub draws: usize,
    pub samples: usize,
    pub pairs: usize,
    pub seed: u64,
}

impl Default for DequantConfig {
    fn default() -> Self {
        DequantConfig {
            action: DequantAction::Estimate,
            input: None,
            query: None,
            dim: 4096,
            normalize: true,
            draws: 100_000,
            samples: 10_000,
            pairs: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolName {
    Ghz,
    Separable,
}

#[derive(Debug, Args, Serialize)]
pub struct SenseFlags {
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolName>,
    /// Probe qubits.
    #[arg(long = "N", visible_alias = "probes")]
    pub n: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Channel uses (GHZ).
    #[arg(long = "T", visible_alias = "uses")]
    pub t: Option<usize>,
    /// Repetitions.
    #[arg(long = "K", visible_alias = "reps")]
    pub k: Option<usize>,
    /// Uses per separable shot; defaults to ⌈1/γ⌉.
    #[arg(long = "R")]
    pub r: Option<usize>,
    /// Apply dephasing to the GHZ protocol.
    #[arg(long)]
    pub noisy: Option<bool>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SenseConfig {
    pub protocol: ProtocolName,
    pub n: usize,
    pub theta: f64,
    pub gamma: f64,
    pub t: usize,
    pub k: usize,
    pub r: Option<usize>,
    pub noisy: bool,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SenseConfig {
    fn default() -> Self {
        SenseConfig {
            protocol: ProtocolName::Separable,
            n: 1,
            theta: 0.05,
            gamma: 0.2,
            t: 1,
            k: 1,
            r: None,
            noisy: true,
            trials: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SweepFlags {
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolName>,
    #[arg(long = "N", visible_alias = "probes", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,
    #[arg(long = "T", visible_alias = "uses", value_delimiter = ',')]
    pub t: Option<Vec<usize>>,
    #[arg(long = "K", visible_alias = "reps", value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    #[arg(long = "R")]
    pub r: Option<usize>,
    #[arg(long)]
    pub noisy: Option<bool>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// The grid is the Cartesian product of the listed values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub protocol: ProtocolName,
    pub n: Vec<usize>,
    pub theta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub t: Vec<usize>,
    pub k: Vec<usize>,
    pub r: Option<usize>,
    pub noisy: bool,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            protocol: ProtocolName::Ghz,
            n: vec![2, 4, 8],
            theta: vec![0.01],
            gamma: vec![0.0],
            t: vec![10, 20, 40, 80, 160],
            k: vec![1],
            r: None,
            noisy: false,
            trials: 20_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BellFlags {
    /// Socks-game trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Measurement angles a0,a1,b0,b1 (radians).
    #[arg(long, value_delimiter = ',', num_args = 4, allow_hyphen_values = true)]
    pub angles: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BellConfig {
    pub trials: usize,
    pub angles: Vec<f64>,
    pub seed: u64,
}

impl Default for BellConfig {
    fn default() -> Self {
        BellConfig {
            trials: 100_000,
            angles: qadv_core::bell::OPTIMAL_ANGLES.to_vec(),
            seed: 0,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct OracleFlags {
    /// Random circuits.
    #[arg(long)]
    pub circuits: Option<usize>,
    #[arg(long)]
    pub max_n: Option<usize>,
    #[arg(long)]
    pub max_layers: Option<usize>,
    /// Agreement tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub circuits: usize,
    pub max_n: usize,
    pub max_layers: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            circuits: 100,
            max_n: 6,
            max_layers: 8,
            tolerance: 1e-9,
            seed: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flags_override_file_over_defaults() {
        let file = json!({"decay": {"n": 4, "trials": 7}});
        let flags = DecayFlags {
            n: None,
            layers: None,
            trials: Some(9),
            seed: None,
        };
        let c: DecayConfig = resolve("decay", Some(&file), &flags).unwrap();
        assert_eq!((c.n, c.layers, c.trials, c.seed), (4, 10, 9, 1));
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let file = json!({"decay": {"qubits": 4}});
        let flags = DecayFlags {
            n: None,
            layers: None,
            trials: None,
            seed: None,
        };
        let r: Result<DecayConfig, _> = resolve("decay", Some(&file), &flags);
        assert!(matches!(r, Err(CliError::Config(_))));
    }
}
