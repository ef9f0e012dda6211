//! Correlations of a shared entangled pair versus local classical strategies.
//!
//! Measurement settings are polar angles in the X–Z plane: angle `a` measures
//! `cos 2a · Z + sin 2a · X`, so `a = π/4` is the rotated basis half-way to X.
//! The CHSH combination is `E₀₀ + E₀₁ + E₁₀ − E₁₁`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::Result;
use crate::pauli::PauliMap;
use crate::statevector::StateVector;

/// Deterministic outcome (±1) of each party for basis choices 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalStrategy {
    pub alice: [i8; 2],
    pub bob: [i8; 2],
}

impl LocalStrategy {
    pub fn correlator(&self, x: usize, y: usize) -> i32 {
        i32::from(self.alice[x]) * i32::from(self.bob[y])
    }

    pub fn chsh(&self) -> i32 {
        self.correlator(0, 0) + self.correlator(0, 1) + self.correlator(1, 0) - self.correlator(1, 1)
    }
}

/// All 16 deterministic two-party strategies.
pub fn all_strategies() -> Vec<LocalStrategy> {
    let sign = |bit: u32| if bit == 0 { 1 } else { -1 };
    (0u32..16)
        .map(|m| LocalStrategy {
            alice: [sign(m & 1), sign((m >> 1) & 1)],
            bob: [sign((m >> 2) & 1), sign((m >> 3) & 1)],
        })
        .collect()
}

/// Exhaustive maximum of the CHSH value over deterministic strategies.
/// Shared randomness mixes these, so it cannot do better.
pub fn classical_chsh_max() -> f64 {
    all_strategies()
        .iter()
        .map(LocalStrategy::chsh)
        .max()
        .expect("16 strategies") as f64
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell_pair() -> Result<StateVector> {
    let mut c = Circuit::new(2)?;
    c.push_gates(vec![Gate::h(0)])?;
    c.push_gates(vec![Gate::cnot(0, 1)?])?;
    let mut s = StateVector::prepare_basis(2, &[false, false])?;
    s.apply(&c)?;
    Ok(s)
}

/// `⟨A(a) ⊗ B(b)⟩` on the Bell pair, evaluated on the statevector.
pub fn quantum_correlator(a: f64, b: f64) -> Result<f64> {
    let (ca, sa) = ((2.0 * a).cos(), (2.0 * a).sin());
    let (cb, sb) = ((2.0 * b).cos(), (2.0 * b).sin());
    let obs = PauliMap::from_labels(&[
        ("ZZ", ca * cb),
        ("ZX", ca * sb),
        ("XZ", sa * cb),
        ("XX", sa * sb),
    ])?;
    bell_pair()?.expectation(&obs)
}

/// CHSH value for angles `[a₀, a₁, b₀, b₁]`.
pub fn quantum_chsh_value(angles: [f64; 4]) -> Result<f64> {
    let [a0, a1, b0, b1] = angles;
    Ok(quantum_correlator(a0, b0)? + quantum_correlator(a0, b1)? + quantum_correlator(a1, b0)?
        - quantum_correlator(a1, b1)?)
}

pub const OPTIMAL_ANGLES: [f64; 4] = [
    0.0,
    std::f64::consts::FRAC_PI_4,
    std::f64::consts::FRAC_PI_8,
    -std::f64::consts::FRAC_PI_8,
];

/// Joint distribution over (Alice, Bob) outcomes; index 0 is up/black.
pub type Joint = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocksStats {
    pub trials: usize,
    pub counts: [[usize; 2]; 2],
    pub joint: Joint,
    pub marginal_alice: f64,
    pub marginal_bob: f64,
    /// Mean of the ±1 product of outcomes.
    pub correlation: f64,
}

/// Both parties receive one sock from a pair that is either both black or
/// both white, chosen by a fair coin.
pub fn socks_simulation<R: Rng + ?Sized>(trials: usize, rng: &mut R) -> Result<SocksStats> {
    if trials == 0 {
        return Err(crate::error::Error::invalid("at least one trial is required"));
    }
    let mut counts = [[0usize; 2]; 2];
    let mut product = 0i64;
    for _ in 0..trials {
        let colour = usize::from(rng.random::<bool>());
        let (alice, bob) = (colour, colour);
        counts[alice][bob] += 1;
        product += if alice == bob { 1 } else { -1 };
    }
    let t = trials as f64;
    let joint = counts.map(|row| row.map(|c| c as f64 / t));
    Ok(SocksStats {
        trials,
        counts,
        joint,
        marginal_alice: joint[0][0] + joint[0][1],
        marginal_bob: joint[0][0] + joint[1][0],
        correlation: product as f64 / t,
    })
}

/// Both parties measure Z on the Bell pair.
pub fn quantum_single_basis_joint() -> Result<Joint> {
    let p = bell_pair()?.probabilities();
    // amplitude index = 2·alice + bob
    Ok([[p[0], p[1]], [p[2], p[3]]])
}

pub fn tv_distance(a: &Joint, b: &Joint) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / 2.0
}
