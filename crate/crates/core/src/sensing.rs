//! Detecting a small Z-rotation through a Gaussian-dephasing channel.
//!
//! Every protocol state here is a single qubit (or GHZ pair of branches)
//! carrying one phase, so trials are simulated by phase bookkeeping: the
//! signal contributes `θ` per channel use and the noise an independent
//! `Normal(0, γ)` angle per use. A sum of `n` such draws is sampled as one
//! draw of variance `nγ`, which has the same distribution.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingConfig {
    /// Probe qubits.
    pub n: usize,
    pub theta: f64,
    /// Noise variance per channel use, in rad².
    pub gamma: f64,
    /// Channel uses per probe (GHZ protocol).
    pub t: usize,
    /// Repetitions.
    pub k: usize,
    pub seed: u64,
}

impl SensingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::invalid(format!("theta must be ≥ 0, got {}", self.theta)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be ≥ 0, got {}", self.gamma)));
        }
        if self.n == 0 || self.t == 0 || self.k == 0 {
            return Err(Error::invalid("N, T and K must all be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    SignalPresent,
    SignalAbsent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "protocol")]
pub enum TrialOutcome {
    /// `minus` of the `k` GHZ measurements came out `|GHZ;−⟩`.
    Ghz { minus: usize, k: usize, decision: Decision },
    /// Fraction of `+i` outcomes over all shots.
    Separable { f_hat: f64, shots: usize, decision: Decision },
}

impl TrialOutcome {
    pub fn decision(&self) -> Decision {
        match self {
            TrialOutcome::Ghz { decision, .. } | TrialOutcome::Separable { decision, .. } => *decision,
        }
    }
}

fn noise<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> f64 {
    if variance == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, variance.sqrt())
        .expect("finite non-negative variance")
        .sample(rng)
}

/// `θ` plus one `Normal(0, γ)` draw.
pub fn dephased_angle<R: Rng + ?Sized>(theta: f64, gamma: f64, rng: &mut R) -> f64 {
    theta + noise(gamma, rng)
}

/// Probability that the signal is flagged: the GHZ state picks up phase
/// `NTθ`, and `|GHZ;−⟩` occurs with probability `(1 − cos φ)/2`.
pub fn ghz_protocol<R: Rng + ?Sized>(cfg: &SensingConfig, noisy: bool, rng: &mut R) -> TrialOutcome {
    let uses = (cfg.n * cfg.t) as f64;
    let var = if noisy { uses * cfg.gamma } else { 0.0 };
    let minus = (0..cfg.k)
        .filter(|_| {
            let phi = uses * cfg.theta + noise(var, rng);
            rng.random::<f64>() < (1.0 - phi.cos()) / 2.0
        })
        .count();
    TrialOutcome::Ghz {
        minus,
        k: cfg.k,
        decision: if minus > 0 {
            Decision::SignalPresent
        } else {
            Decision::SignalAbsent
        },
    }
}

/// Default uses per shot, `⌈1/γ⌉` (1 when noiseless).
pub fn default_r(gamma: f64) -> usize {
    if gamma > 0.0 {
        (1.0 / gamma).ceil() as usize
    } else {
        1
    }
}

/// Expected `f̂ − 1/2` for the separable protocol: `sin(Rθ) e^{−γR/2} / 2`.
pub fn separable_bias(theta: f64, gamma: f64, r: usize) -> f64 {
    let r = r as f64;
    (theta * r).sin() * (-gamma * r / 2.0).exp() / 2.0
}

/// Fraction of `+i` outcomes over `shots` single-qubit shots of `r` uses each.
pub fn separable_fraction<R: Rng + ?Sized>(theta: f64, gamma: f64, r: usize, shots: usize, rng: &mut R) -> f64 {
    let var = r as f64 * gamma;
    let plus = (0..shots)
        .filter(|_| {
            let phi = r as f64 * theta + noise(var, rng);
            rng.random::<f64>() < (1.0 + phi.sin()) / 2.0
        })
        .count();
    plus as f64 / shots as f64
}

/// `K·N` shots; signal is declared when `f̂ > 1/2 + ε/2` with `ε` evaluated
/// at `threshold_theta`.
pub fn separable_protocol<R: Rng + ?Sized>(
    cfg: &SensingConfig,
    r: usize,
    threshold_theta: f64,
    rng: &mut R,
) -> TrialOutcome {
    let shots = cfg.k * cfg.n;
    let f_hat = separable_fraction(cfg.theta, cfg.gamma, r, shots, rng);
    let eps = separable_bias(threshold_theta, cfg.gamma, r);
    TrialOutcome::Separable {
        f_hat,
        shots,
        decision: if f_hat > 0.5 + eps / 2.0 {
            Decision::SignalPresent
        } else {
            Decision::SignalAbsent
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlBound {
    /// `θ²/2γ`
    pub d_kl: f64,
    /// `1/D_KL = 2γ/θ²`, reported with an Ω-constant of 1.
    pub samples: f64,
    /// `γ/θ²`
    pub noise_floor: f64,
    /// `1/θ`
    pub heisenberg: f64,
    /// `max(γ/θ², 1/θ)`
    pub nt_lower: f64,
    pub omega_constant: f64,
}

pub fn kl_sample_bound(theta: f64, gamma: f64) -> Result<KlBound> {
    if !(theta > 0.0 && gamma > 0.0) {
        return Err(Error::invalid("the KL bound needs theta > 0 and gamma > 0"));
    }
    let d_kl = theta * theta / (2.0 * gamma);
    let noise_floor = gamma / (theta * theta);
    Ok(KlBound {
        d_kl,
        samples: 1.0 / d_kl,
        noise_floor,
        heisenberg: 1.0 / theta,
        nt_lower: noise_floor.max(1.0 / theta),
        omega_constant: 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Protocol {
    Ghz { noisy: bool },
    /// `r` uses per shot; `None` means [`default_r`].
    Separable { r: Option<usize> },
}

/// One sweep cell. For the separable protocol `t` is ignored and the total
/// channel count is `N·K·R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub protocol: Protocol,
    pub n: usize,
    pub theta: f64,
    pub gamma: f64,
    pub t: usize,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: SweepCell,
    /// Total channel uses `N·T` (`N·K·R` for the separable protocol).
    pub nt: usize,
    pub success: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl SweepCell {
    fn config(&self, theta: f64) -> SensingConfig {
        SensingConfig {
            n: self.n,
            theta,
            gamma: self.gamma,
            t: self.t,
            k: self.k,
            seed: 0,
        }
    }

    pub fn nt(&self) -> usize {
        match self.protocol {
            Protocol::Ghz { .. } => self.n * self.t,
            Protocol::Separable { r } => self.n * self.k * r.unwrap_or_else(|| default_r(self.gamma)),
        }
    }

    fn decide<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> Decision {
        let cfg = self.config(theta);
        match self.protocol {
            Protocol::Ghz { noisy } => ghz_protocol(&cfg, noisy, rng).decision(),
            Protocol::Separable { r } => {
                let r = r.unwrap_or_else(|| default_r(self.gamma));
                separable_protocol(&cfg, r, self.theta, rng).decision()
            }
        }
    }
}

/// Fraction of correct decisions over `trials` runs, half with `θ = 0` and
/// half with the cell's signal. Trial `i` draws from a stream that depends
/// only on `(seed, i)`, so neighbouring cells share randomness.
pub fn success_rate(cell: &SweepCell, trials: usize, seed: u64) -> Result<SweepRow> {
    cell.config(cell.theta).validate()?;
    if trials < 2 {
        return Err(Error::invalid("need at least two trials (one per hypothesis)"));
    }
    let pairs = trials / 2;
    let correct: usize = (0..pairs)
        .into_par_iter()
        .map(|j| {
            let mut null_rng = seed::stream(seed, 2 * j as u64);
            let mut sig_rng = seed::stream(seed, 2 * j as u64 + 1);
            usize::from(cell.decide(0.0, &mut null_rng) == Decision::SignalAbsent)
                + usize::from(cell.decide(cell.theta, &mut sig_rng) == Decision::SignalPresent)
        })
        .sum();
    let n = 2 * pairs;
    let success = correct as f64 / n as f64;
    Ok(SweepRow {
        cell: *cell,
        nt: cell.nt(),
        success,
        std_error: (success * (1.0 - success) / n as f64).sqrt(),
        trials: n,
    })
}

pub fn scaling_sweep(cells: &[SweepCell], trials: usize, seed: u64) -> Result<Vec<SweepRow>> {
    if cells.is_empty() {
        return Err(Error::invalid("the sweep grid is empty"));
    }
    cells.iter().map(|c| success_rate(c, trials, seed)).collect()
}

/// Closed-form success of the noiseless GHZ protocol with one repetition.
pub fn ghz_success_noiseless(n: usize, t: usize, theta: f64) -> f64 {
    0.5 + 0.5 * ((n * t) as f64 * theta / 2.0).sin().powi(2)
}

/// Smallest `T ≤ t_max` at which the noiseless GHZ protocol reaches `target`.
pub fn ghz_min_t(n: usize, theta: f64, target: f64, trials: usize, seed: u64, t_max: usize) -> Result<Option<SweepRow>> {
    for t in 1..=t_max {
        let row = success_rate(
            &SweepCell {
                protocol: Protocol::Ghz { noisy: false },
                n,
                theta,
                gamma: 0.0,
                t,
                k: 1,
            },
            trials,
            seed,
        )?;
        if row.success >= target {
            return Ok(Some(row));
        }
    }
    Ok(None)
}

/// Smallest repetition count `K ≤ k_max` (found by doubling, then bisection)
/// at which the separable protocol reaches `target`.
pub fn separable_min_k(
    n: usize,
    theta: f64,
    gamma: f64,
    r: Option<usize>,
    target: f64,
    trials: usize,
    seed: u64,
    k_max: usize,
) -> Result<Option<SweepRow>> {
    let row = |k: usize| {
        success_rate(
            &SweepCell {
                protocol: Protocol::Separable { r },
                n,
                theta,
                gamma,
                t: 1,
                k,
            },
            trials,
            seed,
        )
    };
    let mut hi = 1;
    let mut hi_row = row(hi)?;
    let mut lo = 0;
    while hi_row.success < target {
        if hi >= k_max {
            return Ok(None);
        }
        lo = hi;
        hi = (hi * 2).min(k_max);
        hi_row = row(hi)?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let mid_row = row(mid)?;
        if mid_row.success >= target {
            hi = mid;
            hi_row = mid_row;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi_row))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
