//! Sample-and-query access to real unit vectors.
//!
//! [`SQVector`] stores squared entries in a binary sum tree so an index can
//! be drawn with probability `v_i²` in `log₂ N` steps. The importance-sampling
//! estimator `y_i / x_i`, with `i` drawn from `x`, is unbiased for `⟨x, y⟩`
//! and has variance at most 1 for unit vectors.
//!
//! Indices are zero-based throughout.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Read access to entries of a vector.
pub trait QueryAccess {
    fn dim(&self) -> usize;
    fn query(&self, i: usize) -> f64;
}

impl QueryAccess for [f64] {
    fn dim(&self) -> usize {
        self.len()
    }

    fn query(&self, i: usize) -> f64 {
        self.get(i).copied().unwrap_or(0.0)
    }
}

impl QueryAccess for Vec<f64> {
    fn dim(&self) -> usize {
        self.len()
    }

    fn query(&self, i: usize) -> f64 {
        self.as_slice().query(i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SQVector {
    values: Vec<f64>,
    /// Heap layout: node `j` has children `2j`, `2j+1`; leaves at `N..2N`.
    tree: Vec<f64>,
}

impl SQVector {
    /// Builds the sum tree, zero-padding to a power of two. Without
    /// `normalize` the input must already have unit norm within 1e-9.
    pub fn build(v: &[f64], normalize: bool) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("vector has non-finite entries"));
        }
        let norm_sqr: f64 = v.iter().map(|x| x * x).sum();
        if norm_sqr == 0.0 {
            return Err(Error::invalid("cannot build sample access for the zero vector"));
        }
        let scale = if normalize {
            norm_sqr.sqrt().recip()
        } else if (norm_sqr - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "vector norm² is {norm_sqr}, expected 1 (pass normalize to rescale)"
            )));
        } else {
            1.0
        };
        let n = v.len().next_power_of_two();
        let mut values = vec![0.0; n];
        for (dst, src) in values.iter_mut().zip(v) {
            *dst = src * scale;
        }
        let mut tree = vec![0.0; 2 * n];
        for (i, x) in values.iter().enumerate() {
            tree[n + i] = x * x;
        }
        for j in (1..n).rev() {
            tree[j] = tree[2 * j] + tree[2 * j + 1];
        }
        Ok(SQVector { values, tree })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn query(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn root(&self) -> f64 {
        self.tree[1]
    }

    /// Probability `v_i²` stored at leaf `i`.
    pub fn probability(&self, i: usize) -> f64 {
        self.tree[self.dim() + i]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.tree[self.dim()..]
    }

    /// Internal node sums, root first.
    pub fn tree(&self) -> &[f64] {
        &self.tree[1..]
    }

    /// Re-checks the root sum and every internal node against its children.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.dim();
        if n > 1 && (self.root() - 1.0).abs() > 1e-9 {
            return Err(Error::Invariant(format!("root sum {} is not 1", self.root())));
        }
        for j in 1..n {
            let children = self.tree[2 * j] + self.tree[2 * j + 1];
            if (self.tree[j] - children).abs() > 1e-12 {
                return Err(Error::Invariant(format!(
                    "tree node {j} holds {} but its children sum to {children}",
                    self.tree[j]
                )));
            }
        }
        Ok(())
    }

    /// The unique `i` with `F(i−1) ≤ r < F(i)`; ties go right.
    pub fn sample(&self, r: f64) -> Result<usize> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::invalid(format!("r = {r} is outside [0, 1)")));
        }
        let n = self.dim();
        let mut node = 1;
        let mut r = r * self.tree[1];
        while node < n {
            let left = self.tree[2 * node];
            let right = self.tree[2 * node + 1];
            if (r < left && left > 0.0) || right == 0.0 {
                node *= 2;
            } else {
                r -= left;
                node = 2 * node + 1;
            }
        }
        Ok(node - n)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sample(rng.random::<f64>()).expect("random() lies in [0, 1)")
    }
}

impl QueryAccess for SQVector {
    fn dim(&self) -> usize {
        self.values.len()
    }

    fn query(&self, i: usize) -> f64 {
        self.values[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over √S.
    pub std_error: f64,
    pub sample_variance: f64,
    pub samples: usize,
}

/// Mean of `samples` draws of `y_i / x_i` with `i ~ x_i²`.
pub fn inner_product_estimate<Q, R>(x: &SQVector, y: &Q, samples: usize, rng: &mut R) -> Result<Estimate>
where
    Q: QueryAccess + ?Sized,
    R: Rng + ?Sized,
{
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    if y.dim() > x.dim() {
        return Err(Error::invalid(format!(
            "query vector has dimension {} but the sampled vector only {}",
            y.dim(),
            x.dim()
        )));
    }
    let y_norm: f64 = (0..y.dim()).map(|i| y.query(i).powi(2)).sum();
    if (y_norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("query vector norm² is {y_norm}, expected 1")));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let i = x.draw(rng);
        let xi = x.query(i);
        if xi == 0.0 {
            return Err(Error::Invariant(format!("sampled index {i} has zero weight")));
        }
        let yi = if i < y.dim() { y.query(i) } else { 0.0 };
        let draw = yi / xi;
        sum += draw;
        sum_sq += draw * draw;
    }
    let s = samples as f64;
    let mean = sum / s;
    let sample_variance = if samples > 1 {
        ((sum_sq - s * mean * mean) / (s - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(Estimate {
        mean,
        std_error: (sample_variance / s).sqrt(),
        sample_variance,
        samples,
    })
}

/// Total-variation distance between `draws` empirical samples and `x_i²`.
pub fn empirical_tv<R: Rng + ?Sized>(x: &SQVector, draws: usize, rng: &mut R) -> f64 {
    let mut counts = vec![0usize; x.dim()];
    for _ in 0..draws {
        counts[x.draw(rng)] += 1;
    }
    counts
        .iter()
        .zip(x.probabilities())
        .map(|(&c, &p)| (c as f64 / draws as f64 - p).abs())
        .sum::<f64>()
        / 2.0
}

/// Reads a vector: little-endian f64 for `.bin` files, whitespace or comma
/// separated text otherwise.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let io = |e: std::io::Error| Error::invalid(format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e == "bin") {
        let bytes = std::fs::read(path).map_err(io)?;
        if bytes.len() % 8 != 0 {
            return Err(Error::schema(
                path.display().to_string(),
                format!("{} bytes is not a whole number of f64 values", bytes.len()),
            ));
        }
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    } else {
        let text = std::fs::read_to_string(path).map_err(io)?;
        text.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .enumerate()
            .map(|(i, t)| {
                t.parse::<f64>().map_err(|e| {
                    Error::schema(format!("{}[{i}]", path.display()), format!("{t:?}: {e}"))
                })
            })
            .collect()
    }
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    let out = if path.extension().is_some_and(|e| e == "bin") {
        v.iter().flat_map(|x| x.to_le_bytes()).collect::<Vec<u8>>()
    } else {
        v.iter()
            .map(|x| format!("{x:e}"))
            .collect::<Vec<_>>()
            .join("\n")
            .into_bytes()
    };
    std::fs::write(path, out).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

/// Uniformly random unit vector (normalized Gaussian).
pub fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn point_mass() {
        let sq = SQVector::build(&[1.0, 0.0, 0.0, 0.0], false).unwrap();
        assert_eq!(sq.root(), 1.0);
        assert_eq!(sq.probability(0), 1.0);
        for r in [0.0, 0.3, 0.999999] {
            assert_eq!(sq.sample(r).unwrap(), 0);
        }
    }

    #[test]
    fn uniform_tree_and_cdf_walk() {
        let sq = SQVector::build(&[0.5; 4], false).unwrap();
        assert_eq!(sq.tree(), &[1.0, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25]);
        // CDF 0.25, 0.5, 0.75, 1.0: r = 0.6 falls in the third bucket
        assert_eq!(sq.sample(0.6).unwrap(), 2);
        assert_eq!(sq.sample(0.5).unwrap(), 2);
        assert_eq!(sq.sample(0.0).unwrap(), 0);
        assert!(sq.sample(1.0).is_err());
        assert!(sq.sample(-0.1).is_err());
    }

    #[test]
    fn two_entry_probabilities() {
        let sq = SQVector::build(&[0.6, 0.8], false).unwrap();
        assert!((sq.probability(0) - 0.36).abs() < 1e-15);
        assert!((sq.probability(1) - 0.64).abs() < 1e-15);
        sq.check_invariants().unwrap();
    }

    #[test]
    fn padding_and_normalization() {
        let sq = SQVector::build(&[3.0, 4.0, 0.0], true).unwrap();
        assert_eq!(sq.dim(), 4);
        assert!((sq.query(1) - 0.8).abs() < 1e-15);
        sq.check_invariants().unwrap();
        for k in 0..1000 {
            assert!(sq.sample(k as f64 / 1000.0).unwrap() < 2);
        }
        assert!(SQVector::build(&[0.0; 4], true).is_err());
        assert!(SQVector::build(&[1.0, 1.0], false).is_err());
    }

    #[test]
    fn zero_leaves_are_unreachable() {
        let sq = SQVector::build(&[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], false).unwrap();
        for k in 0..=100 {
            let r = (k as f64 / 100.0).min(1.0 - f64::EPSILON);
            assert_eq!(sq.sample(r).unwrap(), 1);
        }
    }

    #[test]
    fn estimator_trivial_cases() {
        let mut rng = seed::rng_from_seed(1);
        let x = random_unit(16, &mut rng);
        let sq = SQVector::build(&x, false).unwrap();
        let e = inner_product_estimate(&sq, &x, 500, &mut rng).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-12);
        assert!(e.std_error < 1e-12);

        let e1 = SQVector::build(&[1.0, 0.0], false).unwrap();
        let e2 = vec![0.0, 1.0];
        let e = inner_product_estimate(&e1, &e2, 100, &mut rng).unwrap();
        assert_eq!(e.mean, 0.0);
        assert!(inner_product_estimate(&e1, &vec![1.0, 1.0], 10, &mut rng).is_err());
        assert!(inner_product_estimate(&e1, &e2, 0, &mut rng).is_err());
    }

    #[test]
    fn vector_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let v = vec![0.25, -1.5e-7, 3.0];
        for name in ["v.txt", "v.bin"] {
            let p = dir.path().join(name);
            write_vector(&p, &v).unwrap();
            assert_eq!(read_vector(&p).unwrap(), v);
        }
        let bad = dir.path().join("bad.txt");
        std::fs::write(&bad, "1 2 x").unwrap();
        assert!(matches!(read_vector(&bad), Err(Error::Schema { .. })));
    }
}
