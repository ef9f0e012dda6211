//! Detecting advantage over low-weight Pauli propagation.
//!
//! [`detect`] compares, on random inputs, the exact ⟨Z₁⟩ of a circuit with
//! the heuristic estimate and reports the fraction of inputs on which they
//! differ by at least 1/3. [`decay_experiment`] measures how fast the
//! propagated Z₁ loses weight-1 mass through random two-qubit layers.

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    build_cnew, haar_two_qubit, random_brickwork, Circuit, CnewParams, Label, PairingScheme,
    PromiseCircuit, PromiseKind,
};
use crate::error::{Error, Result};
use crate::pauli::{conjugate_dense, Pauli, PauliMap, PauliString};
use crate::propagation::{backpropagate, backpropagate_traced, evaluate_product_state, PropagationConfig};
use crate::seed;
use crate::statevector::{format_bits, StateVector, DEFAULT_DENSE_LIMIT};

/// Minimum |exact − heuristic| counted as a disagreement.
pub const DISAGREEMENT_THRESHOLD: f64 = 1.0 / 3.0;

static BACKPROPAGATIONS: AtomicUsize = AtomicUsize::new(0);

/// Total backward propagations performed by [`detect`] in this process.
pub fn backpropagation_count() -> usize {
    BACKPROPAGATIONS.load(Ordering::Relaxed)
}

/// How the exact side of the comparison is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum ExactMode {
    /// Exact statevector expectation.
    Exact,
    /// Mean of `shots` simulated measurements of the first qubit.
    Shots { shots: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectOptions {
    /// Number of sampled inputs `s`.
    pub samples: usize,
    pub propagation: PropagationConfig,
    pub seed: u64,
    pub exact: ExactMode,
    pub dense_limit: usize,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            samples: 32,
            propagation: PropagationConfig::default(),
            seed: 0,
            exact: ExactMode::Exact,
            dense_limit: DEFAULT_DENSE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    /// Input written into the main register.
    pub x: String,
    pub exact: f64,
    pub heuristic: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Advantage,
    NoAdvantage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub circuit_id: String,
    pub samples: usize,
    pub k: usize,
    pub seed: u64,
    pub exact_mode: ExactMode,
    pub records: Vec<InputRecord>,
    pub disagreements: usize,
    pub disagree_fraction: f64,
    /// Advantage iff more than half of the sampled inputs disagree.
    pub verdict: Verdict,
    /// Set when the disagreement fraction falls strictly between 1/3 and 2/3.
    pub promise_violated: bool,
    /// Backward propagations performed for this report (one serves all inputs).
    pub backpropagations: usize,
}

fn main_register(c: &Circuit) -> (usize, usize) {
    c.register("main").map_or((0, c.n_qubits()), |r| (r.start, r.len))
}

fn exact_z1(c: &Circuit, bits: &[bool], mode: ExactMode, dense_limit: usize, rng_seed: u64) -> Result<f64> {
    let mut s = StateVector::prepare_basis(c.n_qubits(), bits)?;
    s.apply_limited(c, dense_limit)?;
    let z1 = PauliMap::from_term(PauliString::single(c.n_qubits(), 0, Pauli::Z)?, 1.0);
    let ez = s.expectation(&z1)?;
    match mode {
        ExactMode::Exact => Ok(ez),
        ExactMode::Shots { shots } => {
            if shots == 0 {
                return Err(Error::invalid("shot mode needs at least one shot"));
            }
            let p1 = ((1.0 - ez) / 2.0).clamp(0.0, 1.0);
            let mut rng = seed::rng_from_seed(rng_seed);
            let ones = (0..shots).filter(|_| rng.random::<f64>() < p1).count();
            Ok(1.0 - 2.0 * ones as f64 / shots as f64)
        }
    }
}

/// Runs the sampled comparison between the exact and heuristic ⟨Z₁⟩.
pub fn detect(c: &Circuit, circuit_id: &str, opts: &DetectOptions) -> Result<DetectionReport> {
    if opts.samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    if c.n_qubits() > opts.dense_limit {
        return Err(Error::DenseLimit {
            width: c.n_qubits(),
            limit: opts.dense_limit,
        });
    }
    let (start, len) = main_register(c);
    let mut rng = seed::stream(opts.seed, 0);
    let inputs: Vec<Vec<bool>> = (0..opts.samples)
        .map(|_| {
            let mut bits = vec![false; c.n_qubits()];
            for b in &mut bits[start..start + len] {
                *b = rng.random();
            }
            bits
        })
        .collect();

    let z1 = PauliMap::from_term(PauliString::single(c.n_qubits(), 0, Pauli::Z)?, 1.0);
    let o0 = backpropagate(c, &z1, &opts.propagation)?;
    BACKPROPAGATIONS.fetch_add(1, Ordering::Relaxed);

    let records = inputs
        .par_iter()
        .enumerate()
        .map(|(i, bits)| {
            let exact = exact_z1(
                c,
                bits,
                opts.exact,
                opts.dense_limit,
                seed::derive_seed(opts.seed, 1 + i as u64),
            )?;
            let heuristic = evaluate_product_state(&o0, bits)?;
            Ok(InputRecord {
                x: format_bits(&bits[start..start + len]),
                exact,
                heuristic,
                difference: (exact - heuristic).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let disagreements = records
        .iter()
        .filter(|r| r.difference >= DISAGREEMENT_THRESHOLD)
        .count();
    let fraction = disagreements as f64 / opts.samples as f64;
    Ok(DetectionReport {
        circuit_id: circuit_id.to_string(),
        samples: opts.samples,
        k: opts.propagation.k,
        seed: opts.seed,
        exact_mode: opts.exact,
        records,
        disagreements,
        disagree_fraction: fraction,
        verdict: if fraction > 0.5 {
            Verdict::Advantage
        } else {
            Verdict::NoAdvantage
        },
        promise_violated: fraction > 1.0 / 3.0 && fraction < 2.0 / 3.0,
        backpropagations: 1,
    })
}

/// Per-layer statistics of Σc² for Z₁ propagated with k = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub n: usize,
    pub layers: usize,
    pub trials: usize,
    pub seed: u64,
    /// `means[j]`: mean Σc² after `j` layers (counted from the circuit end).
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// `ratios[j-1] = means[j] / means[j-1]`.
    pub ratios: Vec<f64>,
    /// (2/5)^j
    pub predicted: Vec<f64>,
}

/// Mean and standard error of a sample.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn decay_experiment(n: usize, layers: usize, trials: usize, seed: u64) -> Result<DecayReport> {
    if n % 2 == 1 || n < 2 {
        return Err(Error::invalid(format!(
            "the decay experiment needs an even number of qubits, got {n}"
        )));
    }
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let cfg = PropagationConfig::with_k(1);
    let z1 = PauliMap::from_term(PauliString::single(n, 0, Pauli::Z)?, 1.0);
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let c = random_brickwork(n, layers, PairingScheme::Brickwork, seed::derive_seed(seed, t as u64))?;
            Ok(backpropagate_traced(&c, &z1, &cfg)?.norms)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let mut means = Vec::with_capacity(layers + 1);
    let mut std_errors = Vec::with_capacity(layers + 1);
    for j in 0..=layers {
        let column: Vec<f64> = per_trial.iter().map(|norms| norms[j]).collect();
        let (m, se) = mean_stderr(&column);
        means.push(m);
        std_errors.push(se);
    }
    let ratios = means.windows(2).map(|w| w[1] / w[0]).collect();
    let predicted = (0..=layers).map(|j| 0.4f64.powi(j as i32)).collect();
    Ok(DecayReport {
        n,
        layers,
        trials,
        seed,
        means,
        std_errors,
        ratios,
        predicted,
    })
}

/// Surviving Σc² of a single-qubit Pauli after one Haar two-qubit gate and
/// a weight-1 projection, averaged over `samples` gates.
pub fn single_gate_decay(pauli: Pauli, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples == 0 || pauli == Pauli::I {
        return Err(Error::invalid("need a non-identity Pauli and at least one sample"));
    }
    let o = PauliMap::from_term(PauliString::single(2, 0, pauli)?, 1.0);
    let values = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::stream(seed, i as u64);
            let u = haar_two_qubit(&mut rng);
            Ok(conjugate_dense(&o, &[0, 1], &u, 0.0)?
                .project_weight(1)
                .frobenius_normalized())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_stderr(&values))
}

/// One labelled promise circuit to be embedded into C_new.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteInstance {
    pub id: String,
    pub promise: PromiseKind,
    /// Width of the promise circuit.
    pub m: usize,
    pub cnew: CnewParams,
    /// Declared label; checked against the exact promise probability.
    #[serde(default)]
    pub label: Option<Label>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub samples: usize,
    pub propagation: PropagationConfig,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            samples: 32,
            propagation: PropagationConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub id: String,
    pub label: Label,
    pub promise_probability: f64,
    pub width: usize,
    pub depth: usize,
    pub correct: bool,
    pub report: DetectionReport,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub yes_advantage: usize,
    pub yes_no_advantage: usize,
    pub no_advantage: usize,
    pub no_no_advantage: usize,
    pub promise_violated: usize,
}

impl Confusion {
    pub fn correct(&self) -> usize {
        self.yes_advantage + self.no_no_advantage
    }

    pub fn total(&self) -> usize {
        self.yes_advantage + self.yes_no_advantage + self.no_advantage + self.no_no_advantage
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub instances: Vec<InstanceResult>,
    pub confusion: Confusion,
}

/// Builds and classifies C_new for every instance. All promises are checked
/// before anything runs.
pub fn instance_suite(instances: &[SuiteInstance], opts: &SuiteOptions) -> Result<SuiteReport> {
    let promised = instances
        .iter()
        .map(|inst| {
            let pc = PromiseCircuit::new(inst.promise, inst.m)?;
            if let Some(label) = inst.label {
                if label != pc.label {
                    return Err(Error::LabelMismatch {
                        label: label.as_str().into(),
                        probability: pc.probability,
                    });
                }
            }
            Ok(pc)
        })
        .collect::<Result<Vec<_>>>()?;

    let results = instances
        .par_iter()
        .zip(promised.par_iter())
        .enumerate()
        .map(|(i, (inst, pc))| {
            let c = build_cnew(&pc.circuit, &inst.cnew)?;
            let report = detect(
                &c,
                &inst.id,
                &DetectOptions {
                    samples: opts.samples,
                    propagation: opts.propagation,
                    seed: seed::derive_seed(opts.seed, i as u64),
                    ..Default::default()
                },
            )?;
            let correct = match pc.label {
                Label::Yes => report.verdict == Verdict::Advantage,
                Label::No => report.verdict == Verdict::NoAdvantage,
            } && !report.promise_violated;
            Ok(InstanceResult {
                id: inst.id.clone(),
                label: pc.label,
                promise_probability: pc.probability,
                width: c.n_qubits(),
                depth: c.depth(),
                correct,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut confusion = Confusion::default();
    for r in &results {
        if r.report.promise_violated {
            confusion.promise_violated += 1;
        }
        match (r.label, r.report.verdict) {
            (Label::Yes, Verdict::Advantage) => confusion.yes_advantage += 1,
            (Label::Yes, Verdict::NoAdvantage) => confusion.yes_no_advantage += 1,
            (Label::No, Verdict::Advantage) => confusion.no_advantage += 1,
            (Label::No, Verdict::NoAdvantage) => confusion.no_no_advantage += 1,
        }
    }
    Ok(SuiteReport {
        instances: results,
        confusion,
    })
}

/// `yes` YES and `no` NO instances drawn round-robin from the promise library,
/// each with its own random-layer seed.
pub fn standard_suite(
    yes: usize,
    no: usize,
    n: usize,
    m: usize,
    copies: usize,
    depth: Option<usize>,
    seed: u64,
) -> Vec<SuiteInstance> {
    let yes_kinds = [
        PromiseKind::Flip,
        PromiseKind::rotation_for(0.9),
        PromiseKind::EntangledRotation {
            angle: 2.0 * 0.95f64.sqrt().asin(),
        },
    ];
    let no_kinds = [
        PromiseKind::Idle,
        PromiseKind::rotation_for(0.1),
        PromiseKind::EntangledRotation {
            angle: 2.0 * 0.05f64.sqrt().asin(),
        },
    ];
    let usable = |k: &PromiseKind| m >= 2 || !matches!(k, PromiseKind::EntangledRotation { .. });
    let yes_kinds: Vec<_> = yes_kinds.into_iter().filter(usable).collect();
    let no_kinds: Vec<_> = no_kinds.into_iter().filter(usable).collect();
    let make = |i: usize, label: Label, kind: PromiseKind| SuiteInstance {
        id: format!("{}-{:02}", label.as_str(), i),
        promise: kind,
        m,
        cnew: CnewParams {
            n,
            depth,
            copies,
            seed: seed::derive_seed(seed, 10_000 + i as u64 + if label == Label::No { 5_000 } else { 0 }),
            pairing: PairingScheme::Brickwork,
        },
        label: Some(label),
    };
    (0..yes)
        .map(|i| make(i, Label::Yes, yes_kinds[i % yes_kinds.len()]))
        .chain((0..no).map(|i| make(i, Label::No, no_kinds[i % no_kinds.len()])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, GateKind};

    #[test]
    fn identity_layer_has_no_advantage() {
        let mut c = Circuit::new(3).unwrap();
        c.push_gates(vec![Gate::new(GateKind::I, vec![0]).unwrap()]).unwrap();
        for s in [1, 5, 17] {
            let r = detect(&c, "id", &DetectOptions { samples: s, ..Default::default() }).unwrap();
            assert_eq!(r.verdict, Verdict::NoAdvantage);
            assert_eq!(r.disagree_fraction, 0.0);
            assert_eq!(r.records.len(), s);
            assert_eq!(r.backpropagations, 1);
        }
    }

    #[test]
    fn detect_is_reproducible() {
        let c = random_brickwork(4, 3, PairingScheme::Brickwork, 8).unwrap();
        let opts = DetectOptions {
            samples: 8,
            seed: 99,
            ..Default::default()
        };
        assert_eq!(detect(&c, "a", &opts).unwrap(), detect(&c, "a", &opts).unwrap());
    }

    #[test]
    fn detect_rejects_bad_arguments() {
        let c = Circuit::new(3).unwrap();
        assert!(detect(&c, "x", &DetectOptions { samples: 0, ..Default::default() }).is_err());
        let opts = DetectOptions {
            dense_limit: 2,
            ..Default::default()
        };
        assert!(matches!(detect(&c, "x", &opts), Err(Error::DenseLimit { .. })));
    }

    #[test]
    fn shot_mode_approaches_exact() {
        let mut c = Circuit::new(2).unwrap();
        c.push_gates(vec![Gate::ry(0, 1.0)]).unwrap();
        let opts = DetectOptions {
            samples: 4,
            exact: ExactMode::Shots { shots: 20_000 },
            propagation: PropagationConfig::with_k(2),
            ..Default::default()
        };
        let r = detect(&c, "ry", &opts).unwrap();
        for rec in &r.records {
            // exact ⟨Z⟩ = cos(1) when x₁ = 0, -cos(1) otherwise
            assert!((rec.exact.abs() - 1.0f64.cos()).abs() < 0.03, "{rec:?}");
        }
    }

    #[test]
    fn decay_edge_cases() {
        let r = decay_experiment(4, 0, 3, 1).unwrap();
        assert_eq!(r.means, vec![1.0]);
        assert!(r.ratios.is_empty());
        assert!(decay_experiment(5, 3, 3, 1).is_err());
        assert!(decay_experiment(4, 3, 0, 1).is_err());
    }

    #[test]
    fn empty_suite() {
        let r = instance_suite(&[], &SuiteOptions::default()).unwrap();
        assert!(r.instances.is_empty());
        assert_eq!(r.confusion.total(), 0);
    }

    #[test]
    fn suite_rejects_promise_violation_before_running() {
        let mut insts = standard_suite(1, 1, 4, 1, 1, Some(2), 0);
        insts.push(SuiteInstance {
            id: "half".into(),
            promise: PromiseKind::rotation_for(0.5),
            m: 1,
            cnew: CnewParams::new(4, 1, 0),
            label: None,
        });
        assert!(matches!(
            instance_suite(&insts, &SuiteOptions::default()),
            Err(Error::PromiseViolation { .. })
        ));
    }

    #[test]
    fn suite_rejects_wrong_label() {
        let inst = SuiteInstance {
            id: "bad".into(),
            promise: PromiseKind::Flip,
            m: 1,
            cnew: CnewParams::new(4, 1, 0),
            label: Some(Label::No),
        };
        assert!(matches!(
            instance_suite(&[inst], &SuiteOptions::default()),
            Err(Error::LabelMismatch { .. })
        ));
    }

    #[test]
    fn standard_suite_is_labelled() {
        let s = standard_suite(4, 4, 6, 2, 3, None, 1);
        assert_eq!(s.len(), 8);
        for inst in &s {
            let pc = PromiseCircuit::new(inst.promise, inst.m).unwrap();
            assert_eq!(Some(pc.label), inst.label);
        }
    }
}
