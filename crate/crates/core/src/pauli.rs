//! Pauli strings, real-weighted Pauli sums and their exact conjugation.
//!
//! Qubit `0` is the most significant bit of every amplitude / matrix index.
//! Within a [`PauliString`] the X and Z flags of qubit `q` live at bit `q`
//! of the respective mask; conversion to index-space masks happens at the
//! dense boundary only.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
/// Dense complex matrix used for gates, blocks and oracles.
pub type Matrix = DMatrix<C64>;

/// Largest register a [`PauliString`] can address.
pub const MAX_QUBITS: usize = 64;

/// Default magnitude below which propagated coefficients are discarded.
pub const DEFAULT_DROP_TOLERANCE: f64 = 1e-12;

const UNITARY_TOL: f64 = 1e-10;

/// Single-qubit Pauli factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// An n-qubit Pauli operator without phase; signs live in the coefficients
/// of the [`PauliMap`] that holds it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: u32,
    x: u64,
    z: u64,
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("a register needs at least one qubit"));
    }
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            n_qubits: n,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        Ok(PauliString {
            n_qubits: n_qubits as u32,
            x: 0,
            z: 0,
        })
    }

    /// Builds a string from raw X/Z masks (bit `q` is qubit `q`).
    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        check_width(n_qubits)?;
        let m = low_mask(n_qubits);
        if x & !m != 0 || z & !m != 0 {
            return Err(Error::invalid(format!(
                "mask bits set beyond {n_qubits} qubits"
            )));
        }
        Ok(PauliString {
            n_qubits: n_qubits as u32,
            x,
            z,
        })
    }

    /// A single non-identity factor on `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, pauli: Pauli) -> Result<Self> {
        let mut p = Self::identity(n_qubits)?;
        p.set(qubit, pauli)?;
        Ok(p)
    }

    pub fn from_paulis(paulis: &[Pauli]) -> Result<Self> {
        let mut p = Self::identity(paulis.len())?;
        for (q, &f) in paulis.iter().enumerate() {
            p.set(q, f)?;
        }
        Ok(p)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, pauli: Pauli) -> Result<()> {
        if qubit >= self.n_qubits() {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits(),
            });
        }
        let (x, z) = pauli.bits();
        let bit = 1u64 << qubit;
        self.x = if x { self.x | bit } else { self.x & !bit };
        self.z = if z { self.z | bit } else { self.z & !bit };
        Ok(())
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// True when every factor is I or Z.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    /// Mask of qubits carrying a non-identity factor.
    pub fn support(&self) -> u64 {
        self.x | self.z
    }
}

/// Number of non-identity factors of `p`.
pub fn weight(p: &PauliString) -> usize {
    p.weight()
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits() {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// One character per qubit, qubit 0 first: `"XIZY"`.
    fn from_str(s: &str) -> Result<Self> {
        let paulis = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' | '_' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::invalid(format!("bad Pauli character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_paulis(&paulis)
    }
}

/// A finite real-weighted sum of Pauli strings on a fixed register.
///
/// Terms are kept ordered so that every accumulation is performed in the
/// same sequence on every run.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliMap {
    n_qubits: usize,
    terms: BTreeMap<PauliString, f64>,
}

impl PauliMap {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        Ok(PauliMap {
            n_qubits,
            terms: BTreeMap::new(),
        })
    }

    pub fn from_term(p: PauliString, coeff: f64) -> Self {
        let mut m = PauliMap {
            n_qubits: p.n_qubits(),
            terms: BTreeMap::new(),
        };
        m.terms.insert(p, coeff);
        m
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, f64)>,
    {
        let mut m = Self::new(n_qubits)?;
        for (p, c) in terms {
            m.add(p, c)?;
        }
        Ok(m)
    }

    /// Parses `[("XZ", 0.5), ...]`-style literals; mostly for tests and configs.
    pub fn from_labels(terms: &[(&str, f64)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::invalid("at least one term required"))?;
        let n = first.0.len();
        Self::from_terms(
            n,
            terms
                .iter()
                .map(|(s, c)| s.parse::<PauliString>().map(|p| (p, *c)))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, p: &PauliString) -> f64 {
        self.terms.get(p).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &f64)> {
        self.terms.iter()
    }

    /// Accumulates `coeff` onto `p`.
    pub fn add(&mut self, p: PauliString, coeff: f64) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: p.n_qubits(),
            });
        }
        *self.terms.entry(p).or_insert(0.0) += coeff;
        Ok(())
    }

    /// Removes every coefficient with magnitude below `tol`.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.abs() >= tol);
    }

    /// Σ c², i.e. ‖O‖²_F / 2^n by Pauli orthogonality.
    pub fn frobenius_normalized(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum()
    }

    /// Keeps exactly the terms of weight at most `k`.
    pub fn project_weight(&self, k: usize) -> PauliMap {
        PauliMap {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| p.weight() <= k)
                .map(|(p, c)| (*p, *c))
                .collect(),
        }
    }

    pub fn max_weight(&self) -> usize {
        self.terms.keys().map(|p| p.weight()).max().unwrap_or(0)
    }

    /// Largest coefficient difference over the union of both supports.
    pub fn max_difference(&self, other: &PauliMap) -> f64 {
        self.terms
            .keys()
            .chain(other.terms.keys())
            .map(|p| (self.get(p) - other.get(p)).abs())
            .fold(0.0, f64::max)
    }

    /// Dense `2^n × 2^n` matrix of the operator.
    pub fn to_dense(&self) -> Result<Matrix> {
        if self.n_qubits > 14 {
            return Err(Error::DenseLimit {
                width: self.n_qubits,
                limit: 14,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = Matrix::zeros(dim, dim);
        for (p, c) in &self.terms {
            let xi = to_index_mask(p.x, self.n_qubits);
            let zi = to_index_mask(p.z, self.n_qubits);
            add_pauli_dense(&mut m, xi, zi, *c);
        }
        Ok(m)
    }

    /// Pauli expansion of a Hermitian matrix; fails if any coefficient has
    /// an imaginary part above `1e-8`.
    pub fn from_dense(n_qubits: usize, m: &Matrix, drop_tol: f64) -> Result<PauliMap> {
        let dim = 1usize << n_qubits;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, expected {dim}x{dim}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut out = PauliMap::new(n_qubits)?;
        for (xi, zi, c) in decompose_dense(n_qubits, m) {
            if c.im.abs() > 1e-8 {
                return Err(Error::Invariant(format!(
                    "non-Hermitian Pauli coefficient {c}"
                )));
            }
            if c.re.abs() >= drop_tol {
                let p = PauliString {
                    n_qubits: n_qubits as u32,
                    x: to_index_mask(xi, n_qubits),
                    z: to_index_mask(zi, n_qubits),
                };
                out.terms.insert(p, c.re);
            }
        }
        Ok(out)
    }
}

/// Σ c² over the terms of `m`.
pub fn frobenius_normalized(m: &PauliMap) -> f64 {
    m.frobenius_normalized()
}

/// Retains the terms of `m` with weight at most `k`.
pub fn project_weight(m: &PauliMap, k: usize) -> PauliMap {
    m.project_weight(k)
}

/// Reverses the low `n` bits: qubit-position masks to index-space masks and back.
pub fn to_index_mask(mask: u64, n: usize) -> u64 {
    if n == 0 {
        return 0;
    }
    mask.reverse_bits() >> (64 - n)
}

/// `m += coeff · P` where P has index-space masks `xi`, `zi`.
fn add_pauli_dense(m: &mut Matrix, xi: u64, zi: u64, coeff: f64) {
    let dim = m.nrows();
    let phase = i_pow((xi & zi).count_ones());
    for col in 0..dim {
        let row = col ^ xi as usize;
        let sign = if (zi & col as u64).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        m[(row, col)] += phase * sign * coeff;
    }
}

fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// In-place unnormalized Walsh-Hadamard transform.
fn walsh_hadamard(v: &mut [C64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let a = v[j];
                let b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// All Pauli coefficients `Tr(P M) / 2^w` of a `2^w` square matrix, returned
/// as `(x_index_mask, z_index_mask, coefficient)`. Runs in `O(w·4^w)`.
fn decompose_dense(w: usize, m: &Matrix) -> Vec<(u64, u64, C64)> {
    let dim = 1usize << w;
    let norm = 1.0 / dim as f64;
    let mut out = Vec::with_capacity(dim * dim);
    let mut v = vec![C64::new(0.0, 0.0); dim];
    for xi in 0..dim {
        // Tr(P M) = i^{|x&z|} Σ_k (-1)^{z·k} M[k, k^x]
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = m[(k, k ^ xi)];
        }
        walsh_hadamard(&mut v);
        for (zi, val) in v.iter().enumerate() {
            let c = i_pow(((xi & zi) as u64).count_ones()) * val * norm;
            out.push((xi as u64, zi as u64, c));
        }
    }
    out
}

/// Dense matrix of a single Pauli string; for oracles and tests.
pub fn pauli_matrix(p: &PauliString) -> Matrix {
    let n = p.n_qubits();
    let dim = 1usize << n;
    let mut m = Matrix::zeros(dim, dim);
    add_pauli_dense(&mut m, to_index_mask(p.x, n), to_index_mask(p.z, n), 1.0);
    m
}

/// Largest entry of `|U†U - I|`.
pub fn unitarity_deviation(u: &Matrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

pub fn check_unitary(u: &Matrix) -> Result<()> {
    let deviation = unitarity_deviation(u);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Number of qubits a `2^w` square matrix acts on.
pub fn matrix_width(u: &Matrix) -> Result<usize> {
    let d = u.nrows();
    if d != u.ncols() || !d.is_power_of_two() || d < 2 {
        return Err(Error::invalid(format!(
            "{}x{} is not a qubit operator shape",
            u.nrows(),
            u.ncols()
        )));
    }
    Ok(d.trailing_zeros() as usize)
}

/// Real Pauli transfer matrix of a 1–3 qubit unitary.
///
/// Local Pauli index: qubit `j` of the gate contributes the code
/// `x + 2z` (I=0, X=1, Z=2, Y=3) at base-4 digit `arity-1-j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    arity: usize,
    entries: Vec<f64>,
    rows: Vec<Vec<(u32, f64)>>,
}

impl TransferMatrix {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << (2 * self.arity)
    }

    /// `Tr(P_out · U† P_in U) / 2^arity`.
    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.entries[input * self.dim() + output]
    }

    /// Nonzero `(output, value)` pairs for one input Pauli.
    pub fn row(&self, input: usize) -> &[(u32, f64)] {
        &self.rows[input]
    }

    /// Largest entry of `|R Rᵀ - I|`.
    pub fn orthogonality_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = (0..d).map(|k| self.get(i, k) * self.get(j, k)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

fn local_code_to_masks(code: usize, arity: usize) -> (u64, u64) {
    // returns index-space masks over `arity` bits (gate qubit j ↔ bit arity-1-j)
    let mut xi = 0u64;
    let mut zi = 0u64;
    for j in 0..arity {
        let digit = (code >> (2 * (arity - 1 - j))) & 3;
        let bit = 1u64 << (arity - 1 - j);
        if digit & 1 == 1 {
            xi |= bit;
        }
        if digit & 2 == 2 {
            zi |= bit;
        }
    }
    (xi, zi)
}

fn masks_to_local_code(xi: u64, zi: u64, arity: usize) -> usize {
    let mut code = 0usize;
    for j in 0..arity {
        let bit = arity - 1 - j;
        let digit = ((xi >> bit) & 1) + 2 * ((zi >> bit) & 1);
        code |= (digit as usize) << (2 * bit);
    }
    code
}

/// Transfer matrix of a 1–3 qubit unitary `u` (rows: input Pauli P,
/// columns: expansion of `U† P U`).
pub fn transfer_matrix(u: &Matrix) -> Result<TransferMatrix> {
    let arity = matrix_width(u)?;
    if !(1..=3).contains(&arity) {
        return Err(Error::invalid(format!(
            "transfer matrices support 1-3 qubits, got {arity}"
        )));
    }
    check_unitary(u)?;
    let d = 1usize << (2 * arity);
    let mut entries = vec![0.0; d * d];
    let udag = u.adjoint();
    for input in 0..d {
        let (xi, zi) = local_code_to_masks(input, arity);
        let mut p = Matrix::zeros(1 << arity, 1 << arity);
        add_pauli_dense(&mut p, xi, zi, 1.0);
        let conj = &udag * p * u;
        for (ox, oz, c) in decompose_dense(arity, &conj) {
            let output = masks_to_local_code(ox, oz, arity);
            entries[input * d + output] = c.re;
        }
    }
    let rows = (0..d)
        .map(|i| {
            (0..d)
                .filter_map(|j| {
                    let v = entries[i * d + j];
                    (v.abs() > 1e-15).then_some((j as u32, v))
                })
                .collect()
        })
        .collect();
    Ok(TransferMatrix {
        arity,
        entries,
        rows,
    })
}

/// One gate of a layer as seen by [`conjugate_layer`].
#[derive(Debug, Clone, Copy)]
pub struct LayerGate<'a> {
    pub targets: &'a [usize],
    pub transfer: &'a TransferMatrix,
}

fn check_disjoint<'a>(
    n_qubits: usize,
    supports: impl Iterator<Item = &'a [usize]>,
) -> Result<()> {
    let mut seen = 0u64;
    for targets in supports {
        for &q in targets {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            if seen >> q & 1 == 1 {
                return Err(Error::OverlappingSupports { qubit: q });
            }
            seen |= 1 << q;
        }
    }
    Ok(())
}

fn local_code_of(p: &PauliString, targets: &[usize]) -> usize {
    let arity = targets.len();
    let mut code = 0usize;
    for (j, &q) in targets.iter().enumerate() {
        let digit = ((p.x >> q) & 1) + 2 * ((p.z >> q) & 1);
        code |= (digit as usize) << (2 * (arity - 1 - j));
    }
    code
}

fn with_local_code(p: &PauliString, targets: &[usize], code: usize) -> PauliString {
    let arity = targets.len();
    let mut out = *p;
    for (j, &q) in targets.iter().enumerate() {
        let digit = (code >> (2 * (arity - 1 - j))) & 3;
        let bit = 1u64 << q;
        out.x = if digit & 1 == 1 { out.x | bit } else { out.x & !bit };
        out.z = if digit & 2 == 2 { out.z | bit } else { out.z & !bit };
    }
    out
}

/// Exact Heisenberg conjugation `U† m U` through a layer of disjoint gates,
/// followed by removal of coefficients below `drop_tol`.
pub fn conjugate_layer(m: &PauliMap, gates: &[LayerGate<'_>], drop_tol: f64) -> Result<PauliMap> {
    check_disjoint(m.n_qubits, gates.iter().map(|g| g.targets))?;
    for g in gates {
        if g.targets.len() != g.transfer.arity() {
            return Err(Error::invalid(format!(
                "gate on {} qubits paired with a {}-qubit transfer matrix",
                g.targets.len(),
                g.transfer.arity()
            )));
        }
    }
    let mut current = m.terms.clone();
    for g in gates {
        let mut next: BTreeMap<PauliString, f64> = BTreeMap::new();
        for (p, c) in current {
            let code = local_code_of(&p, g.targets);
            if code == 0 {
                *next.entry(p).or_insert(0.0) += c;
                continue;
            }
            for &(out, r) in g.transfer.row(code) {
                let q = with_local_code(&p, g.targets, out as usize);
                *next.entry(q).or_insert(0.0) += c * r;
            }
        }
        current = next;
    }
    let mut out = PauliMap {
        n_qubits: m.n_qubits,
        terms: current,
    };
    out.prune(drop_tol);
    Ok(out)
}

/// Exact conjugation `V† m V` where `V` acts on the qubits `support`
/// (first entry is the most significant local bit), by grouping terms on
/// their restriction outside the support and conjugating each group densely.
pub fn conjugate_dense(
    m: &PauliMap,
    support: &[usize],
    v: &Matrix,
    drop_tol: f64,
) -> Result<PauliMap> {
    let w = support.len();
    check_disjoint(m.n_qubits, std::iter::once(support))?;
    if matrix_width(v)? != w {
        return Err(Error::invalid(format!(
            "unitary width {} does not match support of {w} qubits",
            matrix_width(v)?
        )));
    }
    let support_mask: u64 = support.iter().fold(0, |acc, &q| acc | 1 << q);

    // outside part -> list of (local index-space x, z, coefficient)
    let mut groups: BTreeMap<(u64, u64), Vec<(u64, u64, f64)>> = BTreeMap::new();
    for (p, &c) in &m.terms {
        let (mut lx, mut lz) = (0u64, 0u64);
        for (j, &q) in support.iter().enumerate() {
            let bit = 1u64 << (w - 1 - j);
            if p.x >> q & 1 == 1 {
                lx |= bit;
            }
            if p.z >> q & 1 == 1 {
                lz |= bit;
            }
        }
        groups
            .entry((p.x & !support_mask, p.z & !support_mask))
            .or_default()
            .push((lx, lz, c));
    }

    let vdag = v.adjoint();
    let dim = 1usize << w;
    let mut out = PauliMap::new(m.n_qubits)?;
    for ((ox, oz), locals) in groups {
        if locals.iter().all(|&(lx, lz, _)| lx == 0 && lz == 0) {
            let c: f64 = locals.iter().map(|t| t.2).sum();
            out.add(
                PauliString {
                    n_qubits: m.n_qubits as u32,
                    x: ox,
                    z: oz,
                },
                c,
            )?;
            continue;
        }
        let mut local = Matrix::zeros(dim, dim);
        for &(lx, lz, c) in &locals {
            add_pauli_dense(&mut local, lx, lz, c);
        }
        let conj = &vdag * local * v;
        for (lx, lz, c) in decompose_dense(w, &conj) {
            if c.im.abs() > 1e-8 {
                return Err(Error::Invariant(format!(
                    "conjugation produced a non-Hermitian coefficient {c}"
                )));
            }
            if c.re == 0.0 {
                continue;
            }
            let (mut x, mut z) = (ox, oz);
            for (j, &q) in support.iter().enumerate() {
                let bit = 1u64 << (w - 1 - j);
                if lx & bit != 0 {
                    x |= 1 << q;
                }
                if lz & bit != 0 {
                    z |= 1 << q;
                }
            }
            out.add(
                PauliString {
                    n_qubits: m.n_qubits as u32,
                    x,
                    z,
                },
                c.re,
            )?;
        }
    }
    out.prune(drop_tol);
    Ok(out)
}
