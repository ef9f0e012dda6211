use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Block, Circuit, Gate, GateKind, Layer, Register};
use crate::error::{Error, Result};
use crate::pauli::{Matrix, C64};
use crate::seed;

/// Haar-random `dim × dim` unitary: QR of a complex Ginibre matrix with the
/// columns of Q rephased by the phases of R's diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = Matrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_two_qubit<R: Rng + ?Sized>(rng: &mut R) -> Matrix {
    haar_unitary(4, rng)
}

/// How qubits are paired into two-qubit gates in each random layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingScheme {
    /// Alternating offsets 0 and 1; for even `n` the offset layer wraps
    /// around so every qubit is covered in every layer.
    #[default]
    Brickwork,
    /// A fresh uniformly random perfect matching per layer.
    RandomMatching,
}

fn layer_pairs<R: Rng + ?Sized>(n: usize, layer: usize, scheme: PairingScheme, rng: &mut R) -> Vec<[usize; 2]> {
    match scheme {
        PairingScheme::Brickwork => {
            let offset = layer % 2;
            if n % 2 == 0 {
                (0..n / 2)
                    .map(|i| [(offset + 2 * i) % n, (offset + 2 * i + 1) % n])
                    .collect()
            } else {
                (0..n / 2)
                    .map(|i| [offset + 2 * i, offset + 2 * i + 1])
                    .filter(|p| p[1] < n)
                    .collect()
            }
        }
        PairingScheme::RandomMatching => {
            let mut qubits: Vec<usize> = (0..n).collect();
            qubits.shuffle(rng);
            qubits.chunks_exact(2).map(|c| [c[0], c[1]]).collect()
        }
    }
}

/// `layers` layers of Haar-random two-qubit gates on disjoint pairs.
pub fn random_brickwork(n: usize, layers: usize, scheme: PairingScheme, seed: u64) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::invalid("random layers need at least two qubits"));
    }
    let mut rng = seed::rng_from_seed(seed);
    let mut c = Circuit::new(n)?;
    for j in 0..layers {
        let gates = layer_pairs(n, j, scheme, &mut rng)
            .into_iter()
            .map(|pair| Gate::new(GateKind::Unitary(haar_two_qubit(&mut rng)), pair.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        c.push_gates(gates)?;
    }
    c.metadata.seed = Some(seed);
    c.metadata.generator = Some("random-brickwork".into());
    c.metadata.params.insert("n".into(), json!(n));
    c.metadata.params.insert("layers".into(), json!(layers));
    c.metadata.params.insert("pairing".into(), json!(scheme));
    Ok(c)
}

/// Basis permutation on `votes + 1` qubits flipping the last qubit iff the
/// majority of the first `votes` qubits is 1.
pub fn majority_permutation(votes: usize) -> Vec<usize> {
    let dim = 1usize << (votes + 1);
    (0..dim)
        .map(|i| {
            let ballots = (i >> 1).count_ones() as usize;
            if 2 * ballots > votes {
                i ^ 1
            } else {
                i
            }
        })
        .collect()
}

/// C_{?,ext}: `copies` disjoint copies of `c_q` followed by a coherent
/// majority vote of their first qubits into a final `q_maj` qubit.
pub fn amplify(c_q: &Circuit, copies: usize) -> Result<Circuit> {
    if copies == 0 || copies % 2 == 0 {
        return Err(Error::invalid(format!(
            "majority vote needs an odd number of copies, got {copies}"
        )));
    }
    let m = c_q.n_qubits();
    let width = m * copies + 1;
    let mut out = Circuit::new(width)?;
    let maps: Vec<Vec<usize>> = (0..copies).map(|r| (r * m..(r + 1) * m).collect()).collect();
    let per_copy: Vec<Vec<Layer>> = maps.iter().map(|map| c_q.remapped_layers(map)).collect();
    for depth in 0..c_q.depth() {
        match &c_q.layers()[depth] {
            Layer::Elementary(_) => {
                let gates = per_copy
                    .iter()
                    .flat_map(|layers| match &layers[depth] {
                        Layer::Elementary(g) => g.clone(),
                        Layer::Block(_) => unreachable!(),
                    })
                    .collect();
                out.push_gates(gates)?;
            }
            Layer::Block(_) => {
                for layers in &per_copy {
                    out.push(layers[depth].clone())?;
                }
            }
        }
    }
    let mut voters: Vec<usize> = (0..copies).map(|r| r * m).collect();
    voters.push(width - 1);
    out.push_gates(vec![Gate::new(
        GateKind::Permutation(majority_permutation(copies)),
        voters,
    )?])?;

    let mut registers: Vec<Register> = (0..copies)
        .map(|r| Register::new(format!("copy{r}"), r * m, m))
        .collect();
    registers.push(Register::new("q_maj", width - 1, 1));
    out.set_registers(registers)?;
    out.metadata.generator = Some("amplify".into());
    out.metadata.params.insert("m".into(), json!(m));
    out.metadata.params.insert("copies".into(), json!(copies));
    Ok(out)
}

/// Sizes and seed of a C_new construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnewParams {
    /// Main-register width.
    pub n: usize,
    /// Random depth `L`; `None` selects `6·(n + m·copies + 1)`.
    pub depth: Option<usize>,
    /// Majority-vote copies `ℓ`.
    pub copies: usize,
    pub seed: u64,
    #[serde(default)]
    pub pairing: PairingScheme,
}

impl CnewParams {
    pub fn new(n: usize, copies: usize, seed: u64) -> Self {
        CnewParams {
            n,
            depth: None,
            copies,
            seed,
            pairing: PairingScheme::Brickwork,
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = Some(depth);
        self
    }

    pub fn resolved_depth(&self, m: usize) -> usize {
        self.depth.unwrap_or(6 * (self.n + m * self.copies + 1))
    }
}

/// C_new = (U ⊗ I) · Controlled-(U†) · (I ⊗ C_{?,ext}).
///
/// Layer order (first applied first): the amplified block on the ancillas,
/// the block applying `U†` to the main register when `q_maj` is |1⟩, then
/// the random layers of `U` on the main register.
pub fn build_cnew(c_q: &Circuit, params: &CnewParams) -> Result<Circuit> {
    let n = params.n;
    let m = c_q.n_qubits();
    let depth = params.resolved_depth(m);
    let ext = amplify(c_q, params.copies)?;
    let width = n + ext.n_qubits();
    let q_maj = width - 1;
    let u = random_brickwork(n, depth, params.pairing, params.seed).or_else(|e| {
        if depth == 0 {
            Circuit::new(n)
        } else {
            Err(e)
        }
    })?;

    let mut out = Circuit::new(width)?;
    out.push(Layer::Block(Block::new(
        "amplified",
        None,
        (n..width).collect(),
        ext,
    )?))?;
    out.push(Layer::Block(Block::new(
        "controlled-u-dagger",
        Some(q_maj),
        (0..n).collect(),
        u.inverse(),
    )?))?;
    for layer in u.layers() {
        out.push(layer.clone())?;
    }

    let mut registers = vec![Register::new("main", 0, n)];
    registers.extend((0..params.copies).map(|r| Register::new(format!("copy{r}"), n + r * m, m)));
    registers.push(Register::new("q_maj", q_maj, 1));
    out.set_registers(registers)?;
    out.metadata.seed = Some(params.seed);
    out.metadata.generator = Some("cnew".into());
    out.metadata.params.insert("n".into(), json!(n));
    out.metadata.params.insert("m".into(), json!(m));
    out.metadata.params.insert("copies".into(), json!(params.copies));
    out.metadata.params.insert("depth".into(), json!(depth));
    out.metadata.params.insert("pairing".into(), json!(params.pairing));
    Ok(out)
}

/// YES/NO answer of a promise circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Yes,
    No,
}

impl Label {
    /// Classifies an exact success probability against the 1/3–2/3 promise.
    pub fn classify(probability: f64) -> Result<Label> {
        if probability >= 2.0 / 3.0 {
            Ok(Label::Yes)
        } else if probability <= 1.0 / 3.0 {
            Ok(Label::No)
        } else {
            Err(Error::PromiseViolation { probability })
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Yes => "yes",
            Label::No => "no",
        }
    }
}

/// Library of promise circuits with exactly known answers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PromiseKind {
    /// X on the output qubit; Pr[1] = 1.
    Flip,
    /// Does nothing; Pr[1] = 0.
    Idle,
    /// Ry(angle) on the output qubit; Pr[1] = sin²(angle/2).
    Rotation { angle: f64 },
    /// Ry(angle) on the output qubit then CNOT onto qubit 1 (needs m ≥ 2).
    EntangledRotation { angle: f64 },
}

impl PromiseKind {
    /// Rotation whose output probability is exactly `p`.
    pub fn rotation_for(p: f64) -> PromiseKind {
        PromiseKind::Rotation {
            angle: 2.0 * p.sqrt().asin(),
        }
    }

    pub fn build(&self, m: usize) -> Result<Circuit> {
        let mut c = Circuit::new(m)?;
        match *self {
            PromiseKind::Flip => c.push_gates(vec![Gate::x(0)])?,
            PromiseKind::Idle => {}
            PromiseKind::Rotation { angle } => c.push_gates(vec![Gate::ry(0, angle)])?,
            PromiseKind::EntangledRotation { angle } => {
                if m < 2 {
                    return Err(Error::invalid("entangled rotation needs two qubits"));
                }
                c.push_gates(vec![Gate::ry(0, angle)])?;
                c.push_gates(vec![Gate::cnot(0, 1)?])?;
            }
        }
        c.metadata.generator = Some(format!("promise:{}", self.name()));
        Ok(c)
    }

    pub fn name(&self) -> String {
        match self {
            PromiseKind::Flip => "flip".into(),
            PromiseKind::Idle => "idle".into(),
            PromiseKind::Rotation { angle } => format!("rotation({angle:.6})"),
            PromiseKind::EntangledRotation { angle } => format!("entangled-rotation({angle:.6})"),
        }
    }
}

/// Pr[first qubit = 1] of `c_q` run on |0^m⟩, computed exactly.
pub fn promise_probability(c_q: &Circuit) -> Result<f64> {
    crate::statevector::output_prob(c_q, &vec![false; c_q.n_qubits()])
}

/// A promise circuit together with its verified label.
#[derive(Debug, Clone, PartialEq)]
pub struct PromiseCircuit {
    pub kind: PromiseKind,
    pub circuit: Circuit,
    pub probability: f64,
    pub label: Label,
}

impl PromiseCircuit {
    pub fn new(kind: PromiseKind, m: usize) -> Result<Self> {
        let circuit = kind.build(m)?;
        let probability = promise_probability(&circuit)?;
        let label = Label::classify(probability)?;
        Ok(PromiseCircuit {
            kind,
            circuit,
            probability,
            label,
        })
    }
}
