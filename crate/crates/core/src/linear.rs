//! Dense linear algebra for the assembled optimality system: a row-pivoted
//! Gaussian elimination and an alternating forward/backward sweep.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::Serialize;

use crate::discretizer::DiscreteSystem;
use crate::error::{FocpError, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * self.cols);
        head[lo * self.cols..(lo + 1) * self.cols].swap_with_slice(&mut tail[..self.cols]);
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(rows.len(), cols.len());
        for (bi, i) in rows.enumerate() {
            out.row_mut(bi).copy_from_slice(&self.row(i)[cols.clone()]);
        }
        out
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Max-norm of `matrix · z − rhs`.
pub fn residual_norm(matrix: &DenseMatrix, rhs: &[f64], z: &[f64]) -> f64 {
    matrix
        .mul_vec(z)
        .iter()
        .zip(rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Direct,
    Sweep,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::Sweep => "sweep",
        })
    }
}

impl FromStr for Method {
    type Err = FocpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "sweep" => Ok(Method::Sweep),
            other => Err(FocpError::Usage(format!(
                "unknown method `{other}` (expected direct or sweep)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    /// Stop when successive sweep iterates differ by less than this in max-norm.
    pub sweep_tolerance: f64,
    pub sweep_max_iterations: usize,
    /// Smallest pivot magnitude accepted by the elimination.
    pub pivot_threshold: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: Method::Direct,
            sweep_tolerance: 1e-10,
            sweep_max_iterations: 10_000,
            pivot_threshold: 1e-13,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.sweep_tolerance.is_finite() && self.sweep_tolerance > 0.0) {
            return Err(FocpError::Options(format!(
                "sweep tolerance must be positive, got {}",
                self.sweep_tolerance
            )));
        }
        if self.sweep_max_iterations == 0 {
            return Err(FocpError::Options(
                "sweep iteration cap must be at least 1".into(),
            ));
        }
        if !(self.pivot_threshold.is_finite() && self.pivot_threshold > 0.0) {
            return Err(FocpError::Options(format!(
                "pivot threshold must be positive, got {}",
                self.pivot_threshold
            )));
        }
        Ok(())
    }
}

/// Solves `matrix · z = rhs` by Gaussian elimination with partial (row)
/// pivoting. The inputs are left untouched.
pub fn gaussian_elimination(
    matrix: &DenseMatrix,
    rhs: &[f64],
    pivot_threshold: f64,
) -> Result<Vec<f64>> {
    let n = matrix.rows();
    if matrix.cols() != n || rhs.len() != n {
        return Err(FocpError::Dimension {
            context: "linear system",
            expected: n,
            found: if matrix.cols() != n {
                matrix.cols()
            } else {
                rhs.len()
            },
        });
    }
    let mut a = matrix.clone();
    let mut b = rhs.to_vec();

    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, a[(i, k)].abs()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if pivot.is_nan() || pivot < pivot_threshold {
            return Err(FocpError::Singular {
                step: k,
                pivot,
                threshold: pivot_threshold,
            });
        }
        a.swap_rows(k, p);
        b.swap(k, p);

        let cols = a.cols;
        let (upper, lower) = a.data.split_at_mut((k + 1) * cols);
        let pivot_row = &upper[k * cols..];
        let inv = 1.0 / pivot_row[k];
        for (r, row) in lower.chunks_exact_mut(cols).enumerate() {
            let factor = row[k] * inv;
            if factor == 0.0 {
                continue;
            }
            row[k] = 0.0;
            for (x, p) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                *x -= factor * p;
            }
            b[k + 1 + r] -= factor * b[k];
        }
    }

    let mut z = vec![0.0; n];
    for k in (0..n).rev() {
        let row = a.row(k);
        let tail: f64 = row[k + 1..]
            .iter()
            .zip(&z[k + 1..])
            .map(|(a, z)| a * z)
            .sum();
        z[k] = (b[k] - tail) / row[k];
    }
    Ok(z)
}

/// Direct solve of an assembled system.
pub fn solve_direct(system: &DiscreteSystem, options: &SolveOptions) -> Result<Vec<f64>> {
    options.validate()?;
    gaussian_elimination(&system.matrix, &system.rhs, options.pivot_threshold)
}

/// Result of a converged sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSolution {
    pub unknowns: Vec<f64>,
    pub iterations: usize,
}

/// One diagonal block of the system, solved either by substitution in a
/// fixed column order or, when the block is not triangular in that order,
/// by elimination.
struct BlockSolver {
    block: DenseMatrix,
    /// `order[s]` is the (row, column) resolved at substitution step `s`.
    order: Vec<(usize, usize)>,
    triangular: bool,
    pivot_threshold: f64,
}

impl BlockSolver {
    fn new(block: DenseMatrix, order: Vec<(usize, usize)>, pivot_threshold: f64) -> Self {
        let mut step_of_col = vec![0; block.cols()];
        for (s, &(_, c)) in order.iter().enumerate() {
            step_of_col[c] = s;
        }
        let triangular = order.iter().enumerate().all(|(s, &(r, _))| {
            block
                .row(r)
                .iter()
                .enumerate()
                .all(|(c, &v)| v == 0.0 || step_of_col[c] <= s)
        });
        Self {
            block,
            order,
            triangular,
            pivot_threshold,
        }
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if !self.triangular {
            return gaussian_elimination(&self.block, rhs, self.pivot_threshold);
        }
        let mut z = vec![0.0; rhs.len()];
        for (step, &(r, c)) in self.order.iter().enumerate() {
            let row = self.block.row(r);
            let diag = row[c];
            if diag.is_nan() || diag.abs() < self.pivot_threshold {
                return Err(FocpError::Singular {
                    step,
                    pivot: diag.abs(),
                    threshold: self.pivot_threshold,
                });
            }
            let known: f64 = row
                .iter()
                .zip(&z)
                .enumerate()
                .filter(|&(j, _)| j != c)
                .map(|(_, (a, z))| a * z)
                .sum();
            z[c] = (rhs[r] - known) / diag;
        }
        Ok(z)
    }
}

/// Alternating fixed-point iteration: with the costate frozen, march the
/// state rows forward for `x_1 … x_n`; with the state frozen, march the
/// costate rows backward for `λ_{n-1} … λ_0`. Repeats until successive
/// iterates agree to `sweep_tolerance`.
pub fn solve_sweep(system: &DiscreteSystem, options: &SolveOptions) -> Result<SweepSolution> {
    options.validate()?;
    let n = system.n;
    let m = &system.matrix;
    let state_block = BlockSolver::new(
        m.block(0..n, 0..n),
        (0..n).map(|r| (r, r)).collect(),
        options.pivot_threshold,
    );
    // Row k of the costate block is the equation at node n-1-k.
    let costate_block = BlockSolver::new(
        m.block(n..2 * n, n..2 * n),
        (0..n).map(|k| (k, n - 1 - k)).collect(),
        options.pivot_threshold,
    );
    let state_coupling = m.block(0..n, n..2 * n);
    let costate_coupling = m.block(n..2 * n, 0..n);
    let (rhs_x, rhs_l) = system.rhs.split_at(n);

    let mut x = vec![0.0; n];
    let mut lambda = vec![0.0; n];
    let mut last_change = f64::INFINITY;
    for iteration in 1..=options.sweep_max_iterations {
        let coupled = state_coupling.mul_vec(&lambda);
        let r: Vec<f64> = rhs_x.iter().zip(&coupled).map(|(b, c)| b - c).collect();
        let x_new = state_block.solve(&r)?;

        let coupled = costate_coupling.mul_vec(&x_new);
        let r: Vec<f64> = rhs_l.iter().zip(&coupled).map(|(b, c)| b - c).collect();
        let lambda_new = costate_block.solve(&r)?;

        last_change = x
            .iter()
            .zip(&x_new)
            .chain(lambda.iter().zip(&lambda_new))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = x_new;
        lambda = lambda_new;
        if !last_change.is_finite() {
            break;
        }
        if last_change < options.sweep_tolerance {
            x.extend_from_slice(&lambda);
            return Ok(SweepSolution {
                unknowns: x,
                iterations: iteration,
            });
        }
    }
    x.extend_from_slice(&lambda);
    Err(FocpError::SweepDiverged {
        iterations: options.sweep_max_iterations,
        last_change,
        residual: residual_norm(m, &system.rhs, &x),
    })
}
