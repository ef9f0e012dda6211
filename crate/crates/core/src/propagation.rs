//! Low-weight Pauli propagation.
//!
//! The observable is evolved backward through the circuit one declared
//! layer at a time. After each layer's exact conjugation every term of
//! weight above `k` is discarded. Elementary gates of at most three qubits go
//! through cached transfer matrices. Blocks and wider permutation gates are
//! conjugated densely on their support.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, Layer};
use crate::error::{Error, Result};
use crate::pauli::{
    conjugate_dense, conjugate_layer, transfer_matrix, LayerGate, PauliMap, TransferMatrix,
    DEFAULT_DROP_TOLERANCE,
};
use crate::statevector::DEFAULT_DENSE_LIMIT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    /// Weight cutoff.
    pub k: usize,
    pub drop_tolerance: f64,
    /// Widest block conjugated as a dense matrix.
    pub dense_block_limit: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            k: 1,
            drop_tolerance: DEFAULT_DROP_TOLERANCE,
            dense_block_limit: 10,
        }
    }
}

impl PropagationConfig {
    pub fn with_k(k: usize) -> Self {
        PropagationConfig {
            k,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("weight cutoff k must be at least 1"));
        }
        if self.dense_block_limit > DEFAULT_DENSE_LIMIT {
            return Err(Error::invalid(format!(
                "dense block limit {} exceeds the statevector limit {DEFAULT_DENSE_LIMIT}",
                self.dense_block_limit
            )));
        }
        if !(self.drop_tolerance >= 0.0) {
            return Err(Error::invalid("drop tolerance must be non-negative"));
        }
        Ok(())
    }
}

/// Transfer matrices keyed by the bit pattern of the gate's matrix.
#[derive(Debug, Default)]
pub struct TransferCache {
    entries: HashMap<Vec<u64>, TransferMatrix>,
    misses: usize,
}

impl TransferCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(gate: &Gate) -> Vec<u64> {
        gate.matrix()
            .iter()
            .flat_map(|c| [c.re.to_bits(), c.im.to_bits()])
            .collect()
    }

    /// Computes (once) the transfer matrix of `gate` and returns its key.
    fn prepare(&mut self, gate: &Gate) -> Result<Vec<u64>> {
        let key = Self::key(gate);
        if !self.entries.contains_key(&key) {
            self.misses += 1;
            let tm = transfer_matrix(&gate.matrix())?;
            self.entries.insert(key.clone(), tm);
        }
        Ok(key)
    }

    pub fn get(&mut self, gate: &Gate) -> Result<&TransferMatrix> {
        let key = self.prepare(gate)?;
        Ok(&self.entries[&key])
    }

    /// Number of distinct matrices computed so far.
    pub fn misses(&self) -> usize {
        self.misses
    }
}

/// Result of a traced backward propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// The fully propagated operator O₀.
    pub operator: PauliMap,
    /// `norms[0]` is Σc² after the initial projection; `norms[j]` after the
    /// `j`-th layer counted from the end of the circuit.
    pub norms: Vec<f64>,
}

fn conjugate_elementary(
    m: &PauliMap,
    gates: &[Gate],
    cfg: &PropagationConfig,
    cache: &mut TransferCache,
) -> Result<PauliMap> {
    let (small, wide): (Vec<&Gate>, Vec<&Gate>) = gates.iter().partition(|g| g.arity() <= 3);
    let keys = small
        .iter()
        .map(|g| cache.prepare(g))
        .collect::<Result<Vec<_>>>()?;
    let transfers: Vec<&TransferMatrix> = keys.iter().map(|k| &cache.entries[k]).collect();
    let layer: Vec<LayerGate<'_>> = small
        .iter()
        .zip(&transfers)
        .map(|(g, tm)| LayerGate {
            targets: g.targets(),
            transfer: tm,
        })
        .collect();
    let mut out = conjugate_layer(m, &layer, cfg.drop_tolerance)?;
    for g in wide {
        if g.arity() > cfg.dense_block_limit {
            return Err(Error::DenseLimit {
                width: g.arity(),
                limit: cfg.dense_block_limit,
            });
        }
        out = conjugate_dense(&out, g.targets(), &g.matrix(), cfg.drop_tolerance)?;
    }
    Ok(out)
}

fn step(
    m: &PauliMap,
    layer: &Layer,
    cfg: &PropagationConfig,
    cache: &mut TransferCache,
) -> Result<PauliMap> {
    let conjugated = match layer {
        Layer::Elementary(gates) => conjugate_elementary(m, gates, cfg, cache)?,
        Layer::Block(b) => {
            let u = b.unitary(cfg.dense_block_limit)?;
            conjugate_dense(m, &b.support(), &u, cfg.drop_tolerance)?
        }
    };
    Ok(conjugated.project_weight(cfg.k))
}

fn check_inputs(c: &Circuit, o: &PauliMap, cfg: &PropagationConfig) -> Result<()> {
    cfg.validate()?;
    if o.n_qubits() != c.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: c.n_qubits(),
            got: o.n_qubits(),
        });
    }
    Ok(())
}

/// O₀ together with Σc² after every step.
pub fn backpropagate_traced(c: &Circuit, o: &PauliMap, cfg: &PropagationConfig) -> Result<Trace> {
    check_inputs(c, o, cfg)?;
    let mut cache = TransferCache::new();
    let mut current = o.project_weight(cfg.k);
    let mut norms = Vec::with_capacity(c.depth() + 1);
    norms.push(current.frobenius_normalized());
    for layer in c.layers().iter().rev() {
        current = step(&current, layer, cfg, &mut cache)?;
        norms.push(current.frobenius_normalized());
    }
    Ok(Trace {
        operator: current,
        norms,
    })
}

/// Heisenberg-evolves `o` backward through `c` with a weight-`k` projection
/// after every declared layer, returning O₀.
pub fn backpropagate(c: &Circuit, o: &PauliMap, cfg: &PropagationConfig) -> Result<PauliMap> {
    check_inputs(c, o, cfg)?;
    let mut cache = TransferCache::new();
    let mut current = o.project_weight(cfg.k);
    for layer in c.layers().iter().rev() {
        current = step(&current, layer, cfg, &mut cache)?;
    }
    Ok(current)
}

/// Tr[O |x⟩⟨x|]: only I/Z strings contribute, with sign (-1)^{z·x}.
pub fn evaluate_product_state(o: &PauliMap, x: &[bool]) -> Result<f64> {
    if x.len() != o.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: o.n_qubits(),
            got: x.len(),
        });
    }
    let xmask: u64 = x
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(0, |acc, (q, _)| acc | 1 << q);
    Ok(o.iter()
        .filter(|(p, _)| p.is_diagonal())
        .map(|(p, c)| {
            if (p.z_mask() & xmask).count_ones() % 2 == 1 {
                -c
            } else {
                *c
            }
        })
        .sum())
}

/// Heuristic estimate of ⟨x|U† O U|x⟩.
pub fn heuristic_expectation(
    c: &Circuit,
    o: &PauliMap,
    x: &[bool],
    cfg: &PropagationConfig,
) -> Result<f64> {
    evaluate_product_state(&backpropagate(c, o, cfg)?, x)
}
