//! Grünwald-Letnikov weights and the midpoint derivative approximations
//! built on them.
//!
//! The left operator approximates `0D_t^α x` at `t_{i-1/2}` from the samples
//! `x_0 … x_i`; the right operator approximates `tD_T^α u` at `t_{i+1/2}` from
//! `u_i … u_n`. At `α = 1` both collapse to first differences over one step.

use crate::error::{FocpError, Result};

/// Rejects orders outside `(0, 1]`, including NaN and infinities.
pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(FocpError::Domain {
            name: "alpha",
            value: alpha,
            range: "(0, 1]",
        })
    }
}

/// The coefficients `ω_0 … ω_m` for a fixed order. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    alpha: f64,
    values: Vec<f64>,
}

impl WeightSequence {
    /// Computes `ω_0 = 1`, `ω_j = (1 - (α+1)/j) ω_{j-1}` for `j = 1..=m`.
    pub fn new(alpha: f64, m: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let mut values = Vec::with_capacity(m + 1);
        values.push(1.0);
        let mut prev = 1.0;
        for j in 1..=m {
            prev *= 1.0 - (alpha + 1.0) / j as f64;
            values.push(prev);
        }
        Ok(Self { alpha, values })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
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

    /// Partial sum `ω_0 + … + ω_i`.
    pub fn partial_sum(&self, i: usize) -> f64 {
        self.values[..=i].iter().sum()
    }
}

/// Free-function form of [`WeightSequence::new`].
pub fn gl_weight_sequence(alpha: f64, m: usize) -> Result<WeightSequence> {
    WeightSequence::new(alpha, m)
}

fn check_step(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(FocpError::Domain {
            name: "h",
            value: h,
            range: "(0, inf)",
        })
    }
}

fn check_samples(samples: &[f64], weights: &WeightSequence) -> Result<()> {
    if samples.len() < 2 {
        return Err(FocpError::Dimension {
            context: "midpoint derivative samples",
            expected: 2,
            found: samples.len(),
        });
    }
    if weights.len() < samples.len() {
        return Err(FocpError::Dimension {
            context: "weight sequence length",
            expected: samples.len(),
            found: weights.len(),
        });
    }
    Ok(())
}

/// Left derivative at `t_{i-1/2}`; `samples` holds `x_0 … x_i` with `i ≥ 1`.
///
/// Returns `h^{-α} Σ_{j=0}^{i} ω_j x_{i-j}`.
pub fn left_gl_midpoint(samples: &[f64], h: f64, weights: &WeightSequence) -> Result<f64> {
    check_step(h)?;
    check_samples(samples, weights)?;
    let sum: f64 = samples
        .iter()
        .rev()
        .zip(weights.values())
        .map(|(x, w)| w * x)
        .sum();
    Ok(sum * h.powf(-weights.alpha()))
}

/// Right derivative at `t_{i+1/2}`; `samples[j]` holds `u_{i+j}` for
/// `j = 0 … n-i`, with `i ≤ n - 1`.
///
/// Returns `h^{-α} Σ_{j=0}^{n-i} ω_j u_{i+j}`.
pub fn right_gl_midpoint(samples: &[f64], h: f64, weights: &WeightSequence) -> Result<f64> {
    check_step(h)?;
    check_samples(samples, weights)?;
    let sum: f64 = samples
        .iter()
        .zip(weights.values())
        .map(|(u, w)| w * u)
        .sum();
    Ok(sum * h.powf(-weights.alpha()))
}
