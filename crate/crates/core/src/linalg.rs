//! Dense Cholesky factorization for sampling gaussian vectors with a given
//! covariance.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Jitter ladder tried in order: 1e-10, 1e-9, …, 1e-6.
pub const JITTER_LADDER: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Lower-triangular factor `L` with `L Lᵀ = A`, stored row-major (full `k × k`).
#[derive(Debug, Clone)]
pub struct Cholesky {
    k: usize,
    lower: Vec<f64>,
    jitter: f64,
}

impl Cholesky {
    /// Factorizes the symmetric row-major matrix `a` (only the lower triangle
    /// is read) after adding `jitter` to the diagonal. Returns `None` when a
    /// pivot is not strictly positive.
    pub fn factor(a: &[f64], k: usize, jitter: f64) -> Option<Self> {
        assert_eq!(a.len(), k * k);
        let mut l = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let (ri, rj) = (&l[i * k..i * k + j], &l[j * k..j * k + j]);
                let s: f64 = ri.iter().zip(rj).map(|(p, q)| p * q).sum();
                if i == j {
                    let pivot = a[i * k + i] + jitter - s;
                    if !(pivot > 0.0) {
                        return None;
                    }
                    l[i * k + i] = libm::sqrt(pivot);
                } else {
                    l[i * k + j] = (a[i * k + j] - s) / l[j * k + j];
                }
            }
        }
        Some(Self { k, lower: l, jitter })
    }

    /// Factorizes with the escalating jitter ladder.
    pub fn factor_with_jitter(a: &[f64], k: usize) -> Result<Self> {
        JITTER_LADDER
            .iter()
            .find_map(|&j| Self::factor(a, k, j))
            .ok_or(Error::Factorization {
                jitter: JITTER_LADDER[JITTER_LADDER.len() - 1],
            })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    /// Diagonal jitter that made the factorization succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.k + j]
    }

    /// `out = L z`.
    pub fn mul_into(&self, z: &[f64], out: &mut [f64]) {
        let k = self.k;
        for i in 0..k {
            let row = &self.lower[i * k..i * k + i + 1];
            out[i] = row.iter().zip(&z[..=i]).map(|(p, q)| p * q).sum();
        }
    }
}
