//! Dense statevector simulation, the exact oracle for every comparison.
//!
//! Qubit 0 is the most significant bit of the amplitude index, so the
//! basis state `x = 10` on two qubits is amplitude index 2.

use crate::circuit::{Circuit, Gate, GateKind, Layer};
use crate::error::{Error, Result};
use crate::pauli::{to_index_mask, Matrix, PauliMap, PauliString, Pauli, C64};

/// Widest register simulated densely unless overridden.
pub const DEFAULT_DENSE_LIMIT: usize = 16;

const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

/// Parses `"0110"` into bits, qubit 0 first.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::invalid(format!("bad bit character {other:?}"))),
        })
        .collect()
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn basis_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

impl StateVector {
    /// Computational basis state |x⟩.
    pub fn prepare_basis(n_qubits: usize, x: &[bool]) -> Result<Self> {
        if x.len() != n_qubits {
            return Err(Error::QubitMismatch {
                expected: n_qubits,
                got: x.len(),
            });
        }
        if n_qubits == 0 {
            return Err(Error::invalid("state needs at least one qubit"));
        }
        if n_qubits > 30 {
            return Err(Error::DenseLimit {
                width: n_qubits,
                limit: 30,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[basis_index(x)] = C64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::invalid(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            )));
        }
        let s = StateVector { n_qubits, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("state norm {norm} is not 1")));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of each computational basis outcome.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&mut self, c: &Circuit) -> Result<()> {
        self.apply_limited(c, DEFAULT_DENSE_LIMIT)
    }

    pub fn apply_limited(&mut self, c: &Circuit, limit: usize) -> Result<()> {
        if c.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: c.n_qubits(),
            });
        }
        if self.n_qubits > limit {
            return Err(Error::DenseLimit {
                width: self.n_qubits,
                limit,
            });
        }
        let map: Vec<usize> = (0..self.n_qubits).collect();
        apply_layers(&mut self.amps, self.n_qubits, c.layers(), &map, 0);
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Invariant(format!("norm drifted to {norm}")));
        }
        Ok(())
    }

    /// ⟨ψ|O|ψ⟩, applying each Pauli term as a bit-flip/phase pattern.
    pub fn expectation(&self, o: &PauliMap) -> Result<f64> {
        if o.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: o.n_qubits(),
            });
        }
        let mut total = C64::new(0.0, 0.0);
        for (p, &coeff) in o.iter() {
            total += pauli_expectation(&self.amps, self.n_qubits, p) * coeff;
        }
        if total.im.abs() > 1e-9 {
            return Err(Error::Invariant(format!(
                "expectation has imaginary part {}",
                total.im
            )));
        }
        Ok(total.re)
    }
}

fn pauli_expectation(amps: &[C64], n: usize, p: &PauliString) -> C64 {
    let xi = to_index_mask(p.x_mask(), n) as usize;
    let zi = to_index_mask(p.z_mask(), n) as usize;
    let phase = match (xi & zi).count_ones() % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    // P|i⟩ = phase·(-1)^{z·i}|i⊕x⟩
    let mut acc = C64::new(0.0, 0.0);
    for (i, a) in amps.iter().enumerate() {
        let term = amps[i ^ xi].conj() * a;
        if (zi & i).count_ones() % 2 == 1 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    acc * phase
}

/// |x⟩ as a state vector.
pub fn prepare_basis(n: usize, x: &[bool]) -> Result<StateVector> {
    StateVector::prepare_basis(n, x)
}

/// `c` applied to `s`.
pub fn apply_circuit(s: &StateVector, c: &Circuit) -> Result<StateVector> {
    let mut out = s.clone();
    out.apply(c)?;
    Ok(out)
}

pub fn expectation(s: &StateVector, o: &PauliMap) -> Result<f64> {
    s.expectation(o)
}

/// Bits for the whole register with `x` written into the designated input
/// register (the `main` register if declared, else the leading qubits).
pub fn embed_input(c: &Circuit, x: &[bool]) -> Result<Vec<bool>> {
    let start = match c.register("main") {
        Some(r) if r.len == x.len() => r.start,
        Some(r) => {
            return Err(Error::QubitMismatch {
                expected: r.len,
                got: x.len(),
            })
        }
        None => 0,
    };
    if start + x.len() > c.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: c.n_qubits(),
            got: x.len(),
        });
    }
    let mut bits = vec![false; c.n_qubits()];
    bits[start..start + x.len()].copy_from_slice(x);
    Ok(bits)
}

/// Pr[first qubit measures 1] after running `c` on |x⟩|0…0⟩.
pub fn output_prob(c: &Circuit, x: &[bool]) -> Result<f64> {
    let bits = embed_input(c, x)?;
    let mut s = StateVector::prepare_basis(c.n_qubits(), &bits)?;
    s.apply(c)?;
    let z1 = PauliMap::from_term(PauliString::single(c.n_qubits(), 0, Pauli::Z)?, 1.0);
    let ez = s.expectation(&z1)?;
    Ok(((1.0 - ez) / 2.0).clamp(0.0, 1.0))
}

/// Applies `layers` (whose qubit `q` lives at `map[q]`) to a raw amplitude
/// array, restricted to the indices where all bits of `ctrl` are set.
pub(crate) fn apply_layers(amps: &mut [C64], n: usize, layers: &[Layer], map: &[usize], ctrl: usize) {
    for layer in layers {
        match layer {
            Layer::Elementary(gates) => {
                for g in gates {
                    apply_gate(amps, n, g, map, ctrl);
                }
            }
            Layer::Block(b) => {
                let inner: Vec<usize> = b.targets.iter().map(|&t| map[t]).collect();
                let extra = b.control.map_or(0, |q| 1usize << (n - 1 - map[q]));
                apply_layers(amps, n, b.body.layers(), &inner, ctrl | extra);
            }
        }
    }
}

fn apply_gate(amps: &mut [C64], n: usize, gate: &Gate, map: &[usize], ctrl: usize) {
    let k = gate.arity();
    let tbits: Vec<usize> = gate
        .targets()
        .iter()
        .map(|&t| 1usize << (n - 1 - map[t]))
        .collect();
    let dim = 1usize << k;
    let offsets: Vec<usize> = (0..dim)
        .map(|l| {
            (0..k)
                .filter(|j| l >> (k - 1 - j) & 1 == 1)
                .map(|j| tbits[j])
                .sum()
        })
        .collect();
    let mut local = vec![C64::new(0.0, 0.0); dim];
    // indices with every target bit clear, in increasing order
    let mut sorted = tbits.clone();
    sorted.sort_unstable();
    let bases = (0..amps.len() >> k)
        .map(move |mut i| {
            for &b in &sorted {
                let low = i & (b - 1);
                i = ((i ^ low) << 1) | low;
            }
            i
        })
        .filter(move |base| base & ctrl == ctrl);
    match gate.kind() {
        GateKind::Permutation(perm) => {
            for base in bases {
                for (l, slot) in local.iter_mut().enumerate() {
                    *slot = amps[base | offsets[l]];
                }
                for (l, &v) in local.iter().enumerate() {
                    amps[base | offsets[perm[l]]] = v;
                }
            }
        }
        _ => {
            let gm = gate.matrix();
            let m: Vec<C64> = (0..dim * dim).map(|i| gm[(i / dim, i % dim)]).collect();
            for base in bases {
                for (l, slot) in local.iter_mut().enumerate() {
                    *slot = amps[base | offsets[l]];
                }
                for (row, &off) in m.chunks_exact(dim).zip(&offsets) {
                    amps[base | off] = row.iter().zip(&local).map(|(a, v)| a * v).sum();
                }
            }
        }
    }
}

/// Dense unitary of `body` embedded on a `w`-qubit register through `map`,
/// optionally controlled by local qubit `ctrl`.
pub(crate) fn local_unitary(w: usize, body: &Circuit, map: &[usize], ctrl: Option<usize>) -> Result<Matrix> {
    if let Some(q) = body.max_qubit() {
        if q >= map.len() {
            return Err(Error::QubitOutOfRange {
                index: q,
                n_qubits: map.len(),
            });
        }
    }
    let dim = 1usize << w;
    let ctrl_mask = ctrl.map_or(0, |q| 1usize << (w - 1 - q));
    let mut u = Matrix::zeros(dim, dim);
    let mut col = vec![C64::new(0.0, 0.0); dim];
    for j in 0..dim {
        col.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
        col[j] = C64::new(1.0, 0.0);
        apply_layers(&mut col, w, body.layers(), map, ctrl_mask);
        for (i, a) in col.iter().enumerate() {
            u[(i, j)] = *a;
        }
    }
    Ok(u)
}

/// Dense unitary of a whole circuit; for oracles on small registers.
pub fn circuit_unitary(c: &Circuit) -> Result<Matrix> {
    if c.n_qubits() > 12 {
        return Err(Error::DenseLimit {
            width: c.n_qubits(),
            limit: 12,
        });
    }
    let map: Vec<usize> = (0..c.n_qubits()).collect();
    local_unitary(c.n_qubits(), c, &map, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Block, Register};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn amps_close(s: &StateVector, expect: &[(f64, f64)]) {
        for (a, &(re, im)) in s.amplitudes().iter().zip(expect) {
            assert!((a - C64::new(re, im)).norm() < 1e-12, "{a} vs ({re},{im})");
        }
    }

    #[test]
    fn basis_preparation_is_big_endian() {
        let s = prepare_basis(2, &parse_bits("00").unwrap()).unwrap();
        amps_close(&s, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let s = prepare_basis(2, &parse_bits("10").unwrap()).unwrap();
        amps_close(&s, &[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        let s = prepare_basis(1, &[true]).unwrap();
        amps_close(&s, &[(0.0, 0.0), (1.0, 0.0)]);
        assert!(prepare_basis(3, &[true]).is_err());
    }

    #[test]
    fn simple_circuits() {
        let mut c = Circuit::new(1).unwrap();
        c.push_gates(vec![Gate::x(0)]).unwrap();
        let s = apply_circuit(&prepare_basis(1, &[false]).unwrap(), &c).unwrap();
        amps_close(&s, &[(0.0, 0.0), (1.0, 0.0)]);

        let mut c = Circuit::new(2).unwrap();
        c.push_gates(vec![Gate::cnot(0, 1).unwrap()]).unwrap();
        let s = apply_circuit(&prepare_basis(2, &[true, false]).unwrap(), &c).unwrap();
        amps_close(&s, &[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);

        let mut c = Circuit::new(2).unwrap();
        c.push_gates(vec![Gate::h(0)]).unwrap();
        c.push_gates(vec![Gate::cnot(0, 1).unwrap()]).unwrap();
        let s = apply_circuit(&prepare_basis(2, &[false, false]).unwrap(), &c).unwrap();
        let r = FRAC_1_SQRT_2;
        amps_close(&s, &[(r, 0.0), (0.0, 0.0), (0.0, 0.0), (r, 0.0)]);
    }

    #[test]
    fn expectation_examples() {
        let z = PauliMap::from_labels(&[("Z", 1.0)]).unwrap();
        let zero = prepare_basis(1, &[false]).unwrap();
        assert!((expectation(&zero, &z).unwrap() - 1.0).abs() < 1e-12);

        let mut c = Circuit::new(1).unwrap();
        c.push_gates(vec![Gate::h(0)]).unwrap();
        let plus = apply_circuit(&zero, &c).unwrap();
        assert!(expectation(&plus, &z).unwrap().abs() < 1e-12);

        let mut ghz = Circuit::new(3).unwrap();
        ghz.push_gates(vec![Gate::h(0)]).unwrap();
        ghz.push_gates(vec![Gate::cnot(0, 1).unwrap()]).unwrap();
        ghz.push_gates(vec![Gate::cnot(1, 2).unwrap()]).unwrap();
        let s = apply_circuit(&prepare_basis(3, &[false; 3]).unwrap(), &ghz).unwrap();
        let xxx = PauliMap::from_labels(&[("XXX", 1.0)]).unwrap();
        // dense oracle: ⟨ψ|XXX|ψ⟩ from the materialized matrix
        let dense = xxx.to_dense().unwrap();
        let v = nalgebra::DVector::from_column_slice(s.amplitudes());
        let oracle = (v.adjoint() * dense * &v)[(0, 0)].re;
        assert!((oracle - 1.0).abs() < 1e-12);
        assert!((expectation(&s, &xxx).unwrap() - oracle).abs() < 1e-12);
        let yyx = PauliMap::from_labels(&[("YYX", 1.0)]).unwrap();
        assert!((expectation(&s, &yyx).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn output_prob_examples() {
        let c = Circuit::new(2).unwrap();
        assert_eq!(output_prob(&c, &[false, true]).unwrap(), 0.0);
        let mut c = Circuit::new(2).unwrap();
        c.push_gates(vec![Gate::x(0)]).unwrap();
        assert!((output_prob(&c, &[false, false]).unwrap() - 1.0).abs() < 1e-12);
        let mut c = Circuit::new(1).unwrap();
        c.push_gates(vec![Gate::h(0)]).unwrap();
        assert!((output_prob(&c, &[false]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn input_goes_into_main_register() {
        let mut c = Circuit::new(3).unwrap();
        c.set_registers(vec![Register::new("main", 0, 2), Register::new("anc", 2, 1)])
            .unwrap();
        assert_eq!(embed_input(&c, &[true, false]).unwrap(), vec![true, false, false]);
        assert!(embed_input(&c, &[true]).is_err());
    }

    #[test]
    fn controlled_block_acts_only_when_control_set() {
        let mut body = Circuit::new(1).unwrap();
        body.push_gates(vec![Gate::x(0)]).unwrap();
        let mut c = Circuit::new(2).unwrap();
        c.push(Layer::Block(Block::new("cx", Some(0), vec![1], body).unwrap()))
            .unwrap();
        let cnot = {
            let mut c = Circuit::new(2).unwrap();
            c.push_gates(vec![Gate::cnot(0, 1).unwrap()]).unwrap();
            c
        };
        let a = circuit_unitary(&c).unwrap();
        let b = circuit_unitary(&cnot).unwrap();
        assert!((a - b).camax() < 1e-15);
    }

    #[test]
    fn block_unitary_matches_full_circuit() {
        let mut body = Circuit::new(2).unwrap();
        body.push_gates(vec![Gate::h(0), Gate::ry(1, 0.4)]).unwrap();
        body.push_gates(vec![Gate::cnot(1, 0).unwrap()]).unwrap();
        let block = Block::new("b", None, vec![0, 1], body.clone()).unwrap();
        let u = block.unitary(10).unwrap();
        assert!((u - circuit_unitary(&body).unwrap()).camax() < 1e-14);
    }

    #[test]
    fn dense_limit_enforced() {
        let c = Circuit::new(3).unwrap();
        let mut s = prepare_basis(3, &[false; 3]).unwrap();
        assert_eq!(
            s.apply_limited(&c, 2),
            Err(Error::DenseLimit { width: 3, limit: 2 })
        );
    }
}
