//! Convergence studies over grids of orders and division counts.
//!
//! Every `(α, N)` cell is an independent solve, so cells run in parallel;
//! the report is always assembled in ascending `(α, N)` order.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FocpError, Result};
use crate::gl_weights::check_alpha;
use crate::problem::{AnalyticTipSolution, LqFocp, Trajectory};
use crate::solver::{solve, SolverSettings};

/// Differences between a candidate trajectory and an oracle on the
/// candidate's nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorMetrics {
    pub state_sup: f64,
    pub state_rms: f64,
    pub control_sup: f64,
    pub control_rms: f64,
}

/// Reference against which a trajectory is measured.
pub enum Oracle<'a> {
    Functions {
        state: Box<dyn Fn(f64) -> f64 + 'a>,
        control: Box<dyn Fn(f64) -> f64 + 'a>,
    },
    /// A solution on a grid that contains every candidate node.
    Trajectory(&'a Trajectory),
}

impl Oracle<'static> {
    pub fn analytic(solution: AnalyticTipSolution) -> Self {
        Oracle::Functions {
            state: Box::new(move |t| solution.state(t)),
            control: Box::new(move |t| solution.control(t)),
        }
    }
}

fn accumulate(diffs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (sup, sq, count) = diffs.fold((0.0f64, 0.0, 0usize), |(sup, sq, c), d| {
        (sup.max(d.abs()), sq + d * d, c + 1)
    });
    (sup, (sq / count.max(1) as f64).sqrt())
}

pub fn error_metrics(candidate: &Trajectory, oracle: &Oracle<'_>) -> Result<ErrorMetrics> {
    let (state_ref, control_ref): (Vec<f64>, Vec<f64>) = match oracle {
        Oracle::Functions { state, control } => candidate
            .times
            .iter()
            .map(|&t| (state(t), control(t)))
            .unzip(),
        Oracle::Trajectory(reference) => {
            if candidate.n == 0 || reference.n % candidate.n != 0 {
                return Err(FocpError::Grid(format!(
                    "reference grid n = {} does not refine candidate grid n = {}",
                    reference.n, candidate.n
                )));
            }
            let stride = reference.n / candidate.n;
            let mut pairs = Vec::with_capacity(candidate.n + 1);
            for (i, &t) in candidate.times.iter().enumerate() {
                let k = i * stride;
                let tr = reference.times[k];
                if (tr - t).abs() > 1e-12 * t.abs().max(1.0) {
                    return Err(FocpError::Grid(format!(
                        "node {i} at t = {t} has no reference node (nearest {tr})"
                    )));
                }
                pairs.push((reference.state[k], reference.control[k]));
            }
            pairs.into_iter().unzip()
        }
    };
    let (state_sup, state_rms) =
        accumulate(candidate.state.iter().zip(&state_ref).map(|(a, b)| a - b));
    let (control_sup, control_rms) = accumulate(
        candidate
            .control
            .iter()
            .zip(&control_ref)
            .map(|(a, b)| a - b),
    );
    Ok(ErrorMetrics {
        state_sup,
        state_rms,
        control_sup,
        control_rms,
    })
}

/// One `(α, N)` entry of a study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyCell {
    pub alpha: f64,
    pub n: usize,
    /// `x(T)`
    pub x_end: f64,
    /// `u(0)`
    pub u_start: f64,
    /// `|x_{N/2}(T) − x_N(T)|` when `N/2` is part of the study.
    pub state_delta: Option<f64>,
    /// `|u_{N/2}(0) − u_N(0)|` when `N/2` is part of the study.
    pub control_delta: Option<f64>,
    pub oracle: Option<ErrorMetrics>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub problem_name: String,
    pub alphas: Vec<f64>,
    pub n_values: Vec<usize>,
    /// Sorted by `(alpha, n)`.
    pub cells: Vec<StudyCell>,
}

impl StudyReport {
    pub fn cell(&self, alpha: f64, n: usize) -> Option<&StudyCell> {
        self.cells.iter().find(|c| c.alpha == alpha && c.n == n)
    }

    pub fn cells_for(&self, alpha: f64) -> impl Iterator<Item = &StudyCell> {
        self.cells.iter().filter(move |c| c.alpha == alpha)
    }

    /// Doubling deltas of `x(T)` for one order, keyed by the larger `N`.
    pub fn state_deltas(&self, alpha: f64) -> Vec<(usize, f64)> {
        self.cells_for(alpha)
            .filter_map(|c| c.state_delta.map(|d| (c.n, d)))
            .collect()
    }

    /// Doubling deltas of `u(0)` for one order, keyed by the larger `N`.
    pub fn control_deltas(&self, alpha: f64) -> Vec<(usize, f64)> {
        self.cells_for(alpha)
            .filter_map(|c| c.control_delta.map(|d| (c.n, d)))
            .collect()
    }
}

fn check_inputs(alphas: &[f64], n_values: &[usize]) -> Result<Vec<f64>> {
    if alphas.is_empty() {
        return Err(FocpError::Usage("study needs at least one alpha".into()));
    }
    if n_values.is_empty() {
        return Err(FocpError::Usage("study needs at least one n".into()));
    }
    for &alpha in alphas {
        check_alpha(alpha)?;
    }
    if n_values[0] == 0 {
        return Err(FocpError::Domain {
            name: "n",
            value: 0.0,
            range: ">= 1",
        });
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FocpError::Usage(format!(
            "n values must be strictly increasing, got {n_values:?}"
        )));
    }
    let mut sorted = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    Ok(sorted)
}

fn run(
    problem: &LqFocp,
    alphas: &[f64],
    n_values: &[usize],
    settings: &SolverSettings,
) -> Result<StudyReport> {
    let alphas = check_inputs(alphas, n_values)?;
    let jobs: Vec<(f64, usize)> = alphas
        .iter()
        .flat_map(|&a| n_values.iter().map(move |&n| (a, n)))
        .collect();

    let solved: Vec<(Trajectory, Option<ErrorMetrics>)> = jobs
        .par_iter()
        .map(|&(alpha, n)| {
            let tag = |source| FocpError::Cell {
                alpha,
                n,
                source: Box::new(source),
            };
            let p = problem.clone().with_alpha(alpha).map_err(tag)?;
            let traj = solve(&p, n, settings).map_err(tag)?;
            let oracle = p
                .analytic_solution()
                .map(|sol| error_metrics(&traj, &Oracle::analytic(sol)))
                .transpose()
                .map_err(tag)?;
            Ok((traj, oracle))
        })
        .collect::<Result<_>>()?;

    let mut cells: Vec<StudyCell> = jobs
        .iter()
        .zip(&solved)
        .map(|(&(alpha, n), (traj, oracle))| StudyCell {
            alpha,
            n,
            x_end: traj.final_state(),
            u_start: traj.initial_control(),
            state_delta: None,
            control_delta: None,
            oracle: *oracle,
            residual: traj.solver_info.residual,
        })
        .collect();

    for k in 0..cells.len() {
        let (alpha, n) = (cells[k].alpha, cells[k].n);
        if n % 2 != 0 {
            continue;
        }
        let half = cells[..k]
            .iter()
            .find(|c| c.alpha == alpha && c.n == n / 2)
            .map(|c| (c.x_end, c.u_start));
        if let Some((x_half, u_half)) = half {
            cells[k].state_delta = Some((x_half - cells[k].x_end).abs());
            cells[k].control_delta = Some((u_half - cells[k].u_start).abs());
        }
    }

    for c in &cells {
        let values = [c.x_end, c.u_start, c.residual];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FocpError::Cell {
                alpha: c.alpha,
                n: c.n,
                source: Box::new(FocpError::NonFinite {
                    coefficient: "solution",
                    time: f64::NAN,
                }),
            });
        }
    }

    Ok(StudyReport {
        problem_name: problem.name().to_string(),
        alphas,
        n_values: n_values.to_vec(),
        cells,
    })
}

/// Solves every `(α, N)` pair and records endpoint values with doubling
/// deltas.
pub fn run_convergence_study(
    problem: &LqFocp,
    alphas: &[f64],
    n_values: &[usize],
    settings: &SolverSettings,
) -> Result<StudyReport> {
    run(problem, alphas, n_values, settings)
}

/// Solves at a fixed `N` for each order. Cells for the time-invariant
/// benchmark at `α = 1` carry errors against the closed-form solution.
pub fn run_alpha_sweep(
    problem: &LqFocp,
    alphas: &[f64],
    n: usize,
    settings: &SolverSettings,
) -> Result<StudyReport> {
    run(problem, alphas, &[n], settings)
}
