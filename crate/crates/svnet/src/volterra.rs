//! Second-order Volterra expansion.
//!
//! A second-order Volterra filter with memory length `P` is linear in an
//! expanded regressor of length `M = P + P(P+1)/2`: the `P` raw input
//! samples followed by the `P(P+1)/2` upper-triangular pairwise products.
//! The coefficient vector uses the matching layout: `P` linear taps
//! `h1(0..P-1)`, then the quadratic taps `h2(m1,m2)` with `m2 >= m1`,
//! ordered `(0,0),(0,1),...,(P-1,P-1)`. Every module in this crate indexes
//! against this one canonical layout.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of expanded coefficients for memory length `p`:
/// `p` linear taps plus `p(p+1)/2` quadratic taps.
pub fn expanded_length(p: usize) -> Result<usize> {
    if p == 0 {
        return Err(Error::invalid("memory length P must be >= 1"));
    }
    Ok(p + p * (p + 1) / 2)
}

/// Flat index of the quadratic tap `(m1, m2)` within the quadratic block,
/// `m2 >= m1`, both `< p`.
pub fn quad_index(p: usize, m1: usize, m2: usize) -> usize {
    debug_assert!(m1 <= m2 && m2 < p);
    // row m1 starts after rows of lengths p, p-1, ..., p-m1+1
    m1 * p - (m1 * m1 - m1) / 2 + (m2 - m1)
}

/// Coefficient vector of a second-order Volterra filter in the canonical
/// layout (linear taps, then upper-triangular quadratic taps).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolterraKernel {
    coeffs: Vec<f64>,
    memory_length: usize,
}

impl VolterraKernel {
    /// Wrap a coefficient vector, checking it has length `P + P(P+1)/2`.
    pub fn new(coeffs: Vec<f64>, memory_length: usize) -> Result<Self> {
        let m = expanded_length(memory_length)?;
        if coeffs.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: coeffs.len(),
            });
        }
        Ok(Self {
            coeffs,
            memory_length,
        })
    }

    /// All-zero kernel for memory length `p`.
    pub fn zeros(p: usize) -> Result<Self> {
        let m = expanded_length(p)?;
        Ok(Self {
            coeffs: vec![0.0; m],
            memory_length: p,
        })
    }

    pub fn memory_length(&self) -> usize {
        self.memory_length
    }

    /// Total coefficient count `M`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// The `P` linear taps `h1(0..P-1)`.
    pub fn linear(&self) -> &[f64] {
        &self.coeffs[..self.memory_length]
    }

    /// Quadratic tap `h2(m1, m2)` with `m2 >= m1`.
    pub fn quadratic(&self, m1: usize, m2: usize) -> f64 {
        self.coeffs[self.memory_length + quad_index(self.memory_length, m1, m2)]
    }

    /// Squared Euclidean distance to another kernel of the same length.
    pub fn squared_distance(&self, other: &VolterraKernel) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }
}

/// Expanded input vector: raw window followed by pairwise products, same
/// ordering as [`VolterraKernel`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedRegressor {
    values: Vec<f64>,
}

impl ExpandedRegressor {
    /// Wrap an arbitrary value vector. [`expand`] is the usual producer;
    /// this is for regressors supplied directly (tests, replayed data).
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The most recent `P` input samples at one node, newest first:
/// `samples[j] = x(i - j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputWindow {
    samples: Vec<f64>,
}

impl InputWindow {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("input window must have length P >= 1"));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn memory_length(&self) -> usize {
        self.samples.len()
    }
}

/// Sliding windows over a signal, one per sample. Samples before the start
/// of the signal are taken as zero (zero-padded startup).
pub fn windows_from_signal(signal: &[f64], p: usize) -> Result<Vec<InputWindow>> {
    if p == 0 {
        return Err(Error::invalid("memory length P must be >= 1"));
    }
    Ok((0..signal.len())
        .map(|i| {
            let samples = (0..p)
                .map(|j| if i >= j { signal[i - j] } else { 0.0 })
                .collect();
            InputWindow { samples }
        })
        .collect())
}

/// Expand a raw input window into the full regressor:
/// `[x(i),...,x(i-P+1), x^2(i), x(i)x(i-1), ..., x^2(i-P+1)]`,
/// where the entry for the pair `(m1, m2)` is `x(i-m2) * x(i-m1)`.
pub fn expand(window: &InputWindow) -> ExpandedRegressor {
    let p = window.samples.len();
    let mut values = Vec::with_capacity(p + p * (p + 1) / 2);
    values.extend_from_slice(&window.samples);
    for m1 in 0..p {
        for m2 in m1..p {
            values.push(window.samples[m2] * window.samples[m1]);
        }
    }
    ExpandedRegressor { values }
}

/// Filter output `w^T u`.
pub fn volterra_output(w: &VolterraKernel, u: &ExpandedRegressor) -> Result<f64> {
    if w.len() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            actual: u.len(),
        });
    }
    Ok(w.coeffs.iter().zip(&u.values).map(|(a, b)| a * b).sum())
}

/// Draw a sparse plant: exactly `active_count` coefficients nonzero, values
/// from a zero-mean unit-variance Gaussian, positions uniform without
/// replacement, the rest exactly zero.
pub fn make_sparse_plant<R: Rng>(
    p: usize,
    active_count: usize,
    rng: &mut R,
) -> Result<VolterraKernel> {
    let m = expanded_length(p)?;
    if active_count == 0 || active_count > m {
        return Err(Error::invalid(format!(
            "active_count must be in 1..={m}, got {active_count}"
        )));
    }
    let mut coeffs = vec![0.0; m];
    for idx in sample_indices(rng, m, active_count) {
        // a standard normal draw is nonzero with probability one; redraw
        // on the representable-zero corner case to keep the count exact
        let mut v: f64 = rng.sample(StandardNormal);
        while v == 0.0 {
            v = rng.sample(StandardNormal);
        }
        coeffs[idx] = v;
    }
    VolterraKernel::new(coeffs, p)
}
