//! Saab transform: a constant (mean) response plus PCA responses of the
//! mean-removed input.
//!
//! Principal directions are searched inside the orthogonal complement of the
//! constant vector, so every AC basis vector is orthogonal to it by
//! construction and a degenerate covariance falls back to the Helmert
//! completion of the constant vector.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, symmetric_eigen};

/// Fitted transform for `dim`-dimensional inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SaabKernel {
    dim: usize,
    /// Mean of the mean-removed training vectors.
    training_mean: Vec<f64>,
    /// Orthonormal AC directions, eigenvalue-descending.
    basis: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
}

impl SaabKernel {
    pub fn from_parts(
        dim: usize,
        training_mean: Vec<f64>,
        basis: Vec<Vec<f64>>,
        eigenvalues: Vec<f64>,
    ) -> Result<Self> {
        if dim < 2
            || training_mean.len() != dim
            || basis.len() != eigenvalues.len()
            || basis.len() >= dim
            || basis.iter().any(|b| b.len() != dim)
        {
            return Err(Error::ShapeMismatch("inconsistent Saab kernel".into()));
        }
        Ok(Self {
            dim,
            training_mean,
            basis,
            eigenvalues,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_ac(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn training_mean(&self) -> &[f64] {
        &self.training_mean
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Writes `[dc, ac_1, ..., ac_k]` into `out`.
    pub fn apply(&self, input: &[f64], out: &mut [f64]) {
        debug_assert_eq!(input.len(), self.dim);
        debug_assert_eq!(out.len(), 1 + self.basis.len());
        out[0] = input.iter().sum::<f64>() / self.dim as f64;
        for (o, b) in out[1..].iter_mut().zip(&self.basis) {
            let mut acc = 0.0;
            for ((&x, &m), &w) in input.iter().zip(&self.training_mean).zip(b) {
                acc += w * (x - m);
            }
            *o = acc;
        }
    }
}

/// Running first and second moments of mean-removed vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SaabAccumulator {
    dim: usize,
    count: u64,
    sum: Vec<f64>,
    outer: Vec<f64>,
}

impl SaabAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            count: 0,
            sum: vec![0.0; dim],
            outer: vec![0.0; dim * dim],
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, input: &[f64]) {
        debug_assert_eq!(input.len(), self.dim);
        let mean = input.iter().sum::<f64>() / self.dim as f64;
        if self.dim <= 16 {
            let mut buf = [0.0; 16];
            for (c, &x) in buf.iter_mut().zip(input) {
                *c = x - mean;
            }
            self.accumulate(&buf[..self.dim]);
        } else {
            let centred: Vec<f64> = input.iter().map(|&x| x - mean).collect();
            self.accumulate(&centred);
        }
    }

    fn accumulate(&mut self, centred: &[f64]) {
        let n = self.dim;
        self.count += 1;
        for i in 0..n {
            self.sum[i] += centred[i];
            let row = &mut self.outer[i * n..(i + 1) * n];
            for j in 0..n {
                row[j] += centred[i] * centred[j];
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.dim, other.dim);
        self.count += other.count;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.outer.iter_mut().zip(&other.outer) {
            *a += b;
        }
    }

    /// Fits a kernel keeping `n_ac` principal directions (at most `dim - 1`).
    ///
    /// Each direction is sign-normalised so that its largest-magnitude entry
    /// is positive.
    pub fn finish(&self, n_ac: usize) -> Result<SaabKernel> {
        let n = self.dim;
        if n_ac >= n {
            return Err(Error::InvalidConfig(alloc::format!(
                "at most {} AC components for dimension {n}",
                n - 1
            )));
        }
        if (self.count as usize) < n {
            return Err(Error::InsufficientSamples {
                needed: n,
                got: self.count as usize,
            });
        }
        let count = self.count as f64;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / count).collect();
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                cov[i * n + j] = self.outer[i * n + j] / count - mean[i] * mean[j];
            }
        }

        let q = helmert_completion(n);
        let m = n - 1;
        // reduced covariance Qᵀ C Q
        let mut cq = vec![0.0; n * m];
        for i in 0..n {
            for b in 0..m {
                cq[i * m + b] = (0..n).map(|k| cov[i * n + k] * q[b][k]).sum();
            }
        }
        let mut reduced = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                reduced[a * m + b] = (0..n).map(|i| q[a][i] * cq[i * m + b]).sum();
            }
        }
        let eig = symmetric_eigen(&reduced, m);

        let mut basis = Vec::with_capacity(n_ac);
        for coeffs in eig.vectors.iter().take(n_ac) {
            let mut v = vec![0.0; n];
            for (c, qb) in coeffs.iter().zip(&q) {
                for (vi, &qi) in v.iter_mut().zip(qb) {
                    *vi += c * qi;
                }
            }
            normalise_sign(&mut v);
            basis.push(v);
        }
        Ok(SaabKernel {
            dim: n,
            training_mean: mean,
            basis,
            eigenvalues: eig.values.into_iter().take(n_ac).map(|e| e.max(0.0)).collect(),
        })
    }
}

/// Orthonormal basis of the complement of the constant vector in `R^n`
/// (Helmert contrasts).
pub fn helmert_completion(n: usize) -> Vec<Vec<f64>> {
    (1..n)
        .map(|k| {
            let norm = libm::sqrt((k * (k + 1)) as f64);
            let mut v = vec![0.0; n];
            for x in v.iter_mut().take(k) {
                *x = 1.0 / norm;
            }
            v[k] = -(k as f64) / norm;
            v
        })
        .collect()
}

fn normalise_sign(v: &mut [f64]) {
    let mut best = 0;
    for i in 1..v.len() {
        if libm::fabs(v[i]) > libm::fabs(v[best]) {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Fits a kernel directly from a set of samples.
pub fn fit<'a>(dim: usize, n_ac: usize, samples: impl IntoIterator<Item = &'a [f64]>) -> Result<SaabKernel> {
    let mut acc = SaabAccumulator::new(dim);
    for s in samples {
        acc.push(s);
    }
    acc.finish(n_ac)
}

/// Largest deviation of the basis Gram matrix from the identity.
pub fn gram_deviation(kernel: &SaabKernel) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in kernel.basis.iter().enumerate() {
        for (j, b) in kernel.basis.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max(libm::fabs(dot(a, b) - want));
        }
    }
    worst
}
