//! JSON circuit files.
//!
//! ```json
//! { "version": 1, "n_qubits": 2, "endianness": "q1-msb",
//!   "registers": [{"name": "main", "start": 0, "len": 2}],
//!   "layers": [
//!     {"type": "elementary", "gates": [{"kind": "h", "targets": [0]}]},
//!     {"type": "block", "name": "b", "control": 0, "targets": [1],
//!      "circuit": { ...nested circuit, same schema... }}],
//!   "metadata": {"seed": 7} }
//! ```
//!
//! Targets are zero-based; qubit 0 is the most significant amplitude bit.
//! Explicit matrices are rows of `[re, im]` pairs and are re-validated for
//! unitarity on load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Block, Circuit, Gate, GateKind, Layer, Metadata, Register};
use crate::error::{Error, Result};
use crate::pauli::{Matrix, C64};

pub const FORMAT_VERSION: u32 = 1;
const ENDIANNESS: &str = "q1-msb";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    version: Option<u32>,
    n_qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    endianness: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    registers: Vec<Register>,
    layers: Vec<LayerFile>,
    #[serde(default)]
    metadata: Metadata,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum LayerFile {
    Elementary {
        gates: Vec<GateFile>,
    },
    Block {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        control: Option<usize>,
        targets: Vec<usize>,
        circuit: Box<CircuitFile>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateFile {
    kind: String,
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    permutation: Option<Vec<usize>>,
}

fn gate_to_file(g: &Gate) -> GateFile {
    let mut f = GateFile {
        kind: g.kind().name().to_string(),
        targets: g.targets().to_vec(),
        params: Vec::new(),
        matrix: None,
        permutation: None,
    };
    match g.kind() {
        GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) => f.params = vec![*a],
        GateKind::Unitary(u) => {
            f.matrix = Some(
                (0..u.nrows())
                    .map(|i| (0..u.ncols()).map(|j| [u[(i, j)].re, u[(i, j)].im]).collect())
                    .collect(),
            )
        }
        GateKind::Permutation(p) => f.permutation = Some(p.clone()),
        _ => {}
    }
    f
}

fn circuit_to_file(c: &Circuit, top: bool) -> CircuitFile {
    CircuitFile {
        version: top.then_some(FORMAT_VERSION),
        n_qubits: c.n_qubits(),
        endianness: top.then(|| ENDIANNESS.to_string()),
        registers: c.registers().to_vec(),
        layers: c
            .layers()
            .iter()
            .map(|l| match l {
                Layer::Elementary(gates) => LayerFile::Elementary {
                    gates: gates.iter().map(gate_to_file).collect(),
                },
                Layer::Block(b) => LayerFile::Block {
                    name: b.name.clone(),
                    control: b.control,
                    targets: b.targets.clone(),
                    circuit: Box::new(circuit_to_file(&b.body, false)),
                },
            })
            .collect(),
        metadata: c.metadata.clone(),
    }
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Schema { path: inner, message } => Error::schema(format!("{path}{inner}"), message),
        other => Error::schema(path, other.to_string()),
    }
}

fn gate_from_file(g: GateFile, path: &str) -> Result<Gate> {
    let one_param = |g: &GateFile| -> Result<f64> {
        match g.params.as_slice() {
            [a] => Ok(*a),
            _ => Err(Error::schema(
                format!("{path}.params"),
                format!("{} takes exactly one angle", g.kind),
            )),
        }
    };
    let kind = match g.kind.as_str() {
        "i" => GateKind::I,
        "x" => GateKind::X,
        "y" => GateKind::Y,
        "z" => GateKind::Z,
        "h" => GateKind::H,
        "s" => GateKind::S,
        "sdg" => GateKind::Sdg,
        "t" => GateKind::T,
        "tdg" => GateKind::Tdg,
        "rx" => GateKind::Rx(one_param(&g)?),
        "ry" => GateKind::Ry(one_param(&g)?),
        "rz" => GateKind::Rz(one_param(&g)?),
        "cnot" => GateKind::Cnot,
        "cz" => GateKind::Cz,
        "swap" => GateKind::Swap,
        "toffoli" => GateKind::Toffoli,
        "unitary" => {
            let rows = g
                .matrix
                .as_ref()
                .ok_or_else(|| Error::schema(format!("{path}.matrix"), "missing matrix"))?;
            let d = rows.len();
            if rows.iter().any(|r| r.len() != d) {
                return Err(Error::schema(format!("{path}.matrix"), "matrix is not square"));
            }
            GateKind::Unitary(Matrix::from_fn(d, d, |i, j| {
                C64::new(rows[i][j][0], rows[i][j][1])
            }))
        }
        "permutation" => GateKind::Permutation(g.permutation.clone().ok_or_else(|| {
            Error::schema(format!("{path}.permutation"), "missing permutation")
        })?),
        other => {
            return Err(Error::schema(
                format!("{path}.kind"),
                format!("unknown gate kind {other:?}"),
            ))
        }
    };
    Gate::new(kind, g.targets).map_err(|e| at(path, e))
}

fn circuit_from_file(f: CircuitFile, path: &str, top: bool) -> Result<Circuit> {
    if top {
        match f.version {
            Some(FORMAT_VERSION) => {}
            Some(v) => {
                return Err(Error::schema(
                    format!("{path}.version"),
                    format!("unsupported version {v}"),
                ))
            }
            None => return Err(Error::schema(format!("{path}.version"), "missing version")),
        }
    }
    if let Some(e) = &f.endianness {
        if e != ENDIANNESS {
            return Err(Error::schema(
                format!("{path}.endianness"),
                format!("expected {ENDIANNESS:?}, got {e:?}"),
            ));
        }
    }
    let mut c = Circuit::new(f.n_qubits).map_err(|e| at(&format!("{path}.n_qubits"), e))?;
    for (i, layer) in f.layers.into_iter().enumerate() {
        let lpath = format!("{path}.layers[{i}]");
        let layer = match layer {
            LayerFile::Elementary { gates } => Layer::Elementary(
                gates
                    .into_iter()
                    .enumerate()
                    .map(|(j, g)| gate_from_file(g, &format!("{lpath}.gates[{j}]")))
                    .collect::<Result<_>>()?,
            ),
            LayerFile::Block {
                name,
                control,
                targets,
                circuit,
            } => {
                let body = circuit_from_file(*circuit, &format!("{lpath}.circuit"), false)?;
                Layer::Block(Block::new(name, control, targets, body).map_err(|e| at(&lpath, e))?)
            }
        };
        c.push(layer).map_err(|e| at(&lpath, e))?;
    }
    c.set_registers(f.registers)
        .map_err(|e| at(&format!("{path}.registers"), e))?;
    c.metadata = f.metadata;
    Ok(c)
}

pub fn to_json(c: &Circuit) -> String {
    serde_json::to_string_pretty(&circuit_to_file(c, true)).expect("circuit serializes")
}

pub fn from_json(text: &str) -> Result<Circuit> {
    let file: CircuitFile = serde_json::from_str(text).map_err(|e| {
        Error::schema(format!("$ (line {}, column {})", e.line(), e.column()), e.to_string())
    })?;
    circuit_from_file(file, "$", true)
}

pub fn write_circuit(c: &Circuit, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(c)).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

pub fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_cnew, random_brickwork, CnewParams, PairingScheme, PromiseKind};

    #[test]
    fn brickwork_round_trip() {
        let c = random_brickwork(4, 3, PairingScheme::Brickwork, 5).unwrap();
        let back = from_json(&to_json(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn cnew_round_trip_keeps_blocks_and_registers() {
        let c_q = PromiseKind::rotation_for(0.9).build(2).unwrap();
        let c = build_cnew(&c_q, &CnewParams::new(3, 3, 21).with_depth(2)).unwrap();
        let back = from_json(&to_json(&c)).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.metadata.seed, Some(21));
    }

    #[test]
    fn overlapping_supports_rejected() {
        let text = r#"{"version":1,"n_qubits":2,"layers":[
            {"type":"elementary","gates":[{"kind":"x","targets":[0]},{"kind":"cnot","targets":[1,0]}]}]}"#;
        match from_json(text) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "$.layers[0]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_unitary_matrix_rejected() {
        let text = r#"{"version":1,"n_qubits":1,"layers":[
            {"type":"elementary","gates":[{"kind":"unitary","targets":[0],
              "matrix":[[[1,0],[1,0]],[[0,0],[1,0]]]}]}]}"#;
        match from_json(text) {
            Err(Error::Schema { path, message }) => {
                assert_eq!(path, "$.layers[0].gates[0]");
                assert!(message.contains("not unitary"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_paths() {
        let bad_kind = r#"{"version":1,"n_qubits":1,"layers":[{"type":"elementary","gates":[{"kind":"foo","targets":[0]}]}]}"#;
        assert!(matches!(from_json(bad_kind), Err(Error::Schema { path, .. }) if path == "$.layers[0].gates[0].kind"));
        let no_version = r#"{"n_qubits":1,"layers":[]}"#;
        assert!(matches!(from_json(no_version), Err(Error::Schema { path, .. }) if path == "$.version"));
        let endian = r#"{"version":1,"n_qubits":1,"endianness":"lsb","layers":[]}"#;
        assert!(from_json(endian).is_err());
        assert!(from_json("{not json").is_err());
    }
}
