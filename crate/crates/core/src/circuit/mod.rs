//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered list of [`Layer`]s. An elementary layer is a
//! set of gates on pairwise-disjoint qubits; a block layer wraps a whole
//! sub-circuit (optionally controlled by one qubit) that is treated as a
//! single step by the propagation engine.

mod generate;
mod io;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{check_unitary, matrix_width, Matrix, C64};

pub use generate::{
    amplify, build_cnew, haar_two_qubit, haar_unitary, majority_permutation, promise_probability,
    random_brickwork, CnewParams, Label, PairingScheme, PromiseCircuit, PromiseKind,
};
pub use io::{from_json, read_circuit, to_json, write_circuit, FORMAT_VERSION};

/// Gate payloads. Named gates follow the usual textbook matrices; rotations
/// are `exp(-i·angle·P/2)`.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Cnot,
    Cz,
    Swap,
    Toffoli,
    /// Explicit 1–3 qubit unitary; first target is the most significant bit.
    Unitary(Matrix),
    /// Classical reversible map: basis state `i` goes to `perm[i]`.
    Permutation(Vec<usize>),
}

impl GateKind {
    /// Number of qubits the kind acts on, if fixed by the kind itself.
    fn fixed_arity(&self) -> Option<usize> {
        use GateKind::*;
        match self {
            I | X | Y | Z | H | S | Sdg | T | Tdg | Rx(_) | Ry(_) | Rz(_) => Some(1),
            Cnot | Cz | Swap => Some(2),
            Toffoli => Some(3),
            Unitary(_) | Permutation(_) => None,
        }
    }

    pub fn name(&self) -> &'static str {
        use GateKind::*;
        match self {
            I => "i",
            X => "x",
            Y => "y",
            Z => "z",
            H => "h",
            S => "s",
            Sdg => "sdg",
            T => "t",
            Tdg => "tdg",
            Rx(_) => "rx",
            Ry(_) => "ry",
            Rz(_) => "rz",
            Cnot => "cnot",
            Cz => "cz",
            Swap => "swap",
            Toffoli => "toffoli",
            Unitary(_) => "unitary",
            Permutation(_) => "permutation",
        }
    }
}

/// A gate bound to its target qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn square(rows: Vec<Vec<C64>>) -> Matrix {
    let d = rows.len();
    Matrix::from_fn(d, d, |i, j| rows[i][j])
}

fn permutation_matrix(perm: &[usize]) -> Matrix {
    let d = perm.len();
    let mut m = Matrix::zeros(d, d);
    for (i, &j) in perm.iter().enumerate() {
        m[(j, i)] = c(1.0, 0.0);
    }
    m
}

fn check_permutation(perm: &[usize], arity: usize) -> Result<()> {
    if perm.len() != 1 << arity {
        return Err(Error::InvalidPermutation(format!(
            "{} entries for a {arity}-qubit gate",
            perm.len()
        )));
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::InvalidPermutation(format!(
                "entry {p} repeated or out of range"
            )));
        }
        seen[p] = true;
    }
    Ok(())
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::invalid("gate without targets"));
        }
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(Error::invalid(format!("repeated target {t}")));
            }
        }
        let arity = targets.len();
        match &kind {
            GateKind::Unitary(u) => {
                let w = matrix_width(u)?;
                if w != arity {
                    return Err(Error::invalid(format!(
                        "{w}-qubit matrix on {arity} targets"
                    )));
                }
                if arity > 3 {
                    return Err(Error::invalid("explicit unitaries are limited to 3 qubits"));
                }
                check_unitary(u)?;
            }
            GateKind::Permutation(p) => check_permutation(p, arity)?,
            k => {
                let want = k.fixed_arity().unwrap_or(arity);
                if want != arity {
                    return Err(Error::invalid(format!(
                        "{} acts on {want} qubits, got {arity} targets",
                        k.name()
                    )));
                }
            }
        }
        Ok(Gate { kind, targets })
    }

    pub fn x(q: usize) -> Self {
        Gate::new(GateKind::X, vec![q]).expect("valid")
    }

    pub fn h(q: usize) -> Self {
        Gate::new(GateKind::H, vec![q]).expect("valid")
    }

    pub fn ry(q: usize, angle: f64) -> Self {
        Gate::new(GateKind::Ry(angle), vec![q]).expect("valid")
    }

    pub fn rz(q: usize, angle: f64) -> Self {
        Gate::new(GateKind::Rz(angle), vec![q]).expect("valid")
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        Gate::new(GateKind::Cnot, vec![control, target])
    }

    pub fn unitary(u: Matrix, targets: Vec<usize>) -> Result<Self> {
        Gate::new(GateKind::Unitary(u), targets)
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    /// Dense matrix in the gate's local basis (first target most significant).
    pub fn matrix(&self) -> Matrix {
        use GateKind::*;
        let s = FRAC_1_SQRT_2;
        let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
        match &self.kind {
            I => Matrix::identity(2, 2),
            X => square(vec![vec![o, l], vec![l, o]]),
            Y => square(vec![vec![o, c(0.0, -1.0)], vec![c(0.0, 1.0), o]]),
            Z => square(vec![vec![l, o], vec![o, -l]]),
            H => square(vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]]),
            S => square(vec![vec![l, o], vec![o, c(0.0, 1.0)]]),
            Sdg => square(vec![vec![l, o], vec![o, c(0.0, -1.0)]]),
            T => square(vec![vec![l, o], vec![o, c(s, s)]]),
            Tdg => square(vec![vec![l, o], vec![o, c(s, -s)]]),
            Rx(a) => {
                let (cs, sn) = ((a / 2.0).cos(), (a / 2.0).sin());
                square(vec![
                    vec![c(cs, 0.0), c(0.0, -sn)],
                    vec![c(0.0, -sn), c(cs, 0.0)],
                ])
            }
            Ry(a) => {
                let (cs, sn) = ((a / 2.0).cos(), (a / 2.0).sin());
                square(vec![
                    vec![c(cs, 0.0), c(-sn, 0.0)],
                    vec![c(sn, 0.0), c(cs, 0.0)],
                ])
            }
            Rz(a) => {
                let h = a / 2.0;
                square(vec![
                    vec![c(h.cos(), -h.sin()), o],
                    vec![o, c(h.cos(), h.sin())],
                ])
            }
            Cnot => permutation_matrix(&[0, 1, 3, 2]),
            Swap => permutation_matrix(&[0, 2, 1, 3]),
            Cz => {
                let mut m = Matrix::identity(4, 4);
                m[(3, 3)] = -l;
                m
            }
            Toffoli => permutation_matrix(&[0, 1, 2, 3, 4, 5, 7, 6]),
            Unitary(u) => u.clone(),
            Permutation(p) => permutation_matrix(p),
        }
    }

    pub fn adjoint(&self) -> Gate {
        use GateKind::*;
        let kind = match &self.kind {
            S => Sdg,
            Sdg => S,
            T => Tdg,
            Tdg => T,
            Rx(a) => Rx(-a),
            Ry(a) => Ry(-a),
            Rz(a) => Rz(-a),
            Unitary(u) => Unitary(u.adjoint()),
            Permutation(p) => {
                let mut inv = vec![0; p.len()];
                for (i, &j) in p.iter().enumerate() {
                    inv[j] = i;
                }
                Permutation(inv)
            }
            k => k.clone(),
        };
        Gate {
            kind,
            targets: self.targets.clone(),
        }
    }

    fn remapped(&self, map: &[usize]) -> Gate {
        Gate {
            kind: self.kind.clone(),
            targets: self.targets.iter().map(|&t| map[t]).collect(),
        }
    }
}

/// A sub-circuit applied as one atomic step.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    /// When set, the body acts only on the subspace where this qubit is |1⟩.
    pub control: Option<usize>,
    /// Parent qubits that body qubit `i` is mapped to.
    pub targets: Vec<usize>,
    pub body: Circuit,
}

impl Block {
    pub fn new(
        name: impl Into<String>,
        control: Option<usize>,
        targets: Vec<usize>,
        body: Circuit,
    ) -> Result<Self> {
        if body.n_qubits() != targets.len() {
            return Err(Error::invalid(format!(
                "block body has {} qubits but {} targets",
                body.n_qubits(),
                targets.len()
            )));
        }
        let support: Vec<usize> = control.into_iter().chain(targets.iter().copied()).collect();
        for (i, t) in support.iter().enumerate() {
            if support[..i].contains(t) {
                return Err(Error::OverlappingSupports { qubit: *t });
            }
        }
        Ok(Block {
            name: name.into(),
            control,
            targets,
            body,
        })
    }

    /// Control qubit (if any) followed by the targets.
    pub fn support(&self) -> Vec<usize> {
        self.control
            .into_iter()
            .chain(self.targets.iter().copied())
            .collect()
    }

    pub fn width(&self) -> usize {
        self.targets.len() + usize::from(self.control.is_some())
    }

    /// Dense unitary over [`Block::support`] ordering.
    pub fn unitary(&self, limit: usize) -> Result<Matrix> {
        let w = self.width();
        if w > limit {
            return Err(Error::DenseLimit { width: w, limit });
        }
        let offset = usize::from(self.control.is_some());
        let map: Vec<usize> = (offset..offset + self.targets.len()).collect();
        let ctrl = self.control.map(|_| 0usize);
        crate::statevector::local_unitary(w, &self.body, &map, ctrl)
    }

    fn inverse(&self) -> Block {
        Block {
            name: self.name.clone(),
            control: self.control,
            targets: self.targets.clone(),
            body: self.body.inverse(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Elementary(Vec<Gate>),
    Block(Block),
}

impl Layer {
    fn max_qubit(&self) -> Option<usize> {
        match self {
            Layer::Elementary(gates) => gates.iter().flat_map(|g| g.targets.iter()).max().copied(),
            Layer::Block(b) => b.support().into_iter().max(),
        }
    }

    fn inverse(&self) -> Layer {
        match self {
            Layer::Elementary(gates) => Layer::Elementary(gates.iter().map(Gate::adjoint).collect()),
            Layer::Block(b) => Layer::Block(b.inverse()),
        }
    }
}

/// A contiguous named range of qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, start: usize, len: usize) -> Self {
        Register {
            name: name.into(),
            start,
            len,
        }
    }

    pub fn qubits(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    layers: Vec<Layer>,
    registers: Vec<Register>,
    pub metadata: Metadata,
}

fn check_layer(n_qubits: usize, layer: &Layer) -> Result<()> {
    let supports: Vec<Vec<usize>> = match layer {
        Layer::Elementary(gates) => gates.iter().map(|g| g.targets.clone()).collect(),
        Layer::Block(b) => vec![b.support()],
    };
    let mut seen = vec![false; n_qubits];
    for s in supports {
        for q in s {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            if seen[q] {
                return Err(Error::OverlappingSupports { qubit: q });
            }
            seen[q] = true;
        }
    }
    Ok(())
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("circuit needs at least one qubit"));
        }
        if n_qubits > crate::pauli::MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits,
                max: crate::pauli::MAX_QUBITS,
            });
        }
        Ok(Circuit {
            n_qubits,
            layers: Vec::new(),
            registers: Vec::new(),
            metadata: Metadata::default(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn push(&mut self, layer: Layer) -> Result<()> {
        check_layer(self.n_qubits, &layer)?;
        self.layers.push(layer);
        Ok(())
    }

    pub fn push_gates(&mut self, gates: Vec<Gate>) -> Result<()> {
        self.push(Layer::Elementary(gates))
    }

    pub fn with_layers(mut self, layers: Vec<Layer>) -> Result<Self> {
        for l in layers {
            self.push(l)?;
        }
        Ok(self)
    }

    /// Declares registers; they must tile `0..n_qubits` in order.
    pub fn set_registers(&mut self, registers: Vec<Register>) -> Result<()> {
        let mut next = 0;
        for r in &registers {
            if r.start != next || r.len == 0 {
                return Err(Error::invalid(format!(
                    "register {:?} does not continue the partition at qubit {next}",
                    r.name
                )));
            }
            next += r.len;
        }
        if !registers.is_empty() && next != self.n_qubits {
            return Err(Error::invalid(format!(
                "registers cover {next} of {} qubits",
                self.n_qubits
            )));
        }
        self.registers = registers;
        Ok(())
    }

    /// Largest qubit index touched by any layer.
    pub fn max_qubit(&self) -> Option<usize> {
        self.layers.iter().filter_map(Layer::max_qubit).max()
    }

    /// Layer-wise inverse: reversed order, every gate replaced by its adjoint.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            layers: self.layers.iter().rev().map(Layer::inverse).collect(),
            registers: self.registers.clone(),
            metadata: self.metadata.clone(),
        }
    }

    /// This circuit's layers relabelled through `map` onto a wider register.
    pub(crate) fn remapped_layers(&self, map: &[usize]) -> Vec<Layer> {
        self.layers
            .iter()
            .map(|layer| match layer {
                Layer::Elementary(gates) => {
                    Layer::Elementary(gates.iter().map(|g| g.remapped(map)).collect())
                }
                Layer::Block(b) => Layer::Block(Block {
                    name: b.name.clone(),
                    control: b.control.map(|q| map[q]),
                    targets: b.targets.iter().map(|&t| map[t]).collect(),
                    body: b.body.clone(),
                }),
            })
            .collect()
    }

    /// Number of gates, counting block bodies recursively.
    pub fn gate_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Elementary(g) => g.len(),
                Layer::Block(b) => b.body.gate_count(),
            })
            .sum()
    }
}
