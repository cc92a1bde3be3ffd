//! Assembly of the discrete optimality system.
//!
//! The horizon is split into `n` steps of width `h`. The state equation is
//! collocated at `t_{i-1/2}` for `i = 1 … n` and the costate equation at
//! `t_{i+1/2}` for `i = n-1 … 0`; values at those midpoints are averages of
//! the two neighbouring nodes. The unknown vector is laid out as
//! `[x_1 … x_n, λ_0 … λ_{n-1}]`, with `x_0` and `λ_n = 0` moved to the
//! right-hand side.

use crate::error::{FocpError, Result};
use crate::gl_weights::WeightSequence;
use crate::linear::{residual_norm, DenseMatrix, Method};
use crate::problem::{LqFocp, SolverInfo, Trajectory};

/// Which costate pair is averaged in the costate equation at `t_{i+1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostateAverage {
    /// `(λ_i + λ_{i+1}) / 2`, consistent with the midpoint of the interval.
    #[default]
    Midpoint,
    /// `(λ_{i-1} + λ_i) / 2` as it appears in the original typeset scheme.
    /// At `i = 0` the missing `λ_{-1}` is taken as `λ_0`.
    Printed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    pub n: usize,
    pub h: f64,
    pub alpha: f64,
    pub x0: f64,
    pub horizon: f64,
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
    pub costate_average: CostateAverage,
}

#[derive(Clone, Copy)]
enum Var {
    State(usize),
    Costate(usize),
}

struct Midpoint {
    q: f64,
    a: f64,
    /// `b² / r`
    gain: f64,
}

fn sample(problem: &LqFocp, t: f64) -> Result<Midpoint> {
    let values = [
        ("q", problem.q(t)),
        ("r", problem.r(t)),
        ("a", problem.a(t)),
        ("b", problem.b(t)),
    ];
    for (coefficient, v) in values {
        if !v.is_finite() {
            return Err(FocpError::NonFinite {
                coefficient,
                time: t,
            });
        }
    }
    let [(_, q), (_, r), (_, a), (_, b)] = values;
    if r <= 0.0 {
        return Err(FocpError::Positivity {
            coefficient: "r",
            time: t,
            value: r,
            requirement: "r > 0",
        });
    }
    if q < 0.0 {
        return Err(FocpError::Positivity {
            coefficient: "q",
            time: t,
            value: q,
            requirement: "q >= 0",
        });
    }
    Ok(Midpoint {
        q,
        a,
        gain: b * b / r,
    })
}

/// Builds the `2n × 2n` system for `problem` at its own order `α`.
pub fn assemble(problem: &LqFocp, n: usize) -> Result<DiscreteSystem> {
    assemble_with(problem, n, CostateAverage::Midpoint)
}

pub fn assemble_with(
    problem: &LqFocp,
    n: usize,
    costate_average: CostateAverage,
) -> Result<DiscreteSystem> {
    if n == 0 {
        return Err(FocpError::Domain {
            name: "n",
            value: 0.0,
            range: ">= 1",
        });
    }
    let alpha = problem.alpha();
    let horizon = problem.horizon();
    let h = horizon / n as f64;
    let scale = h.powf(-alpha);
    let weights = WeightSequence::new(alpha, n)?;
    let w = weights.values();
    let x0 = problem.x0();

    let midpoints = (0..n)
        .map(|k| sample(problem, (k as f64 + 0.5) * h))
        .collect::<Result<Vec<_>>>()?;

    let dim = 2 * n;
    let mut matrix = DenseMatrix::zeros(dim, dim);
    let mut rhs = vec![0.0; dim];
    let mut add = |row: usize, var: Var, c: f64| match var {
        Var::State(0) => rhs[row] -= c * x0,
        Var::State(k) => matrix[(row, k - 1)] += c,
        // λ_n = 0 contributes nothing.
        Var::Costate(k) if k == n => {}
        Var::Costate(k) => matrix[(row, n + k)] += c,
    };

    // State equation at t_{i-1/2}, i = 1..=n.
    for i in 1..=n {
        let row = i - 1;
        let mid = &midpoints[i - 1];
        for (j, wj) in w.iter().take(i + 1).enumerate() {
            add(row, Var::State(i - j), scale * wj);
        }
        add(row, Var::State(i - 1), -0.5 * mid.a);
        add(row, Var::State(i), -0.5 * mid.a);
        add(row, Var::Costate(i - 1), 0.5 * mid.gain);
        add(row, Var::Costate(i), 0.5 * mid.gain);
    }

    // Costate equation at t_{i+1/2}, i = n-1 down to 0.
    for i in (0..n).rev() {
        let row = n + (n - 1 - i);
        let mid = &midpoints[i];
        for (j, wj) in w.iter().take(n - i + 1).enumerate() {
            add(row, Var::Costate(i + j), scale * wj);
        }
        add(row, Var::State(i), -0.5 * mid.q);
        add(row, Var::State(i + 1), -0.5 * mid.q);
        let (lo, hi) = match costate_average {
            CostateAverage::Midpoint => (i, i + 1),
            CostateAverage::Printed => (i.saturating_sub(1), i),
        };
        add(row, Var::Costate(lo), -0.5 * mid.a);
        add(row, Var::Costate(hi), -0.5 * mid.a);
    }

    if !matrix.is_finite() || rhs.iter().any(|v| !v.is_finite()) {
        return Err(FocpError::NonFinite {
            coefficient: "system",
            time: f64::NAN,
        });
    }

    Ok(DiscreteSystem {
        n,
        h,
        alpha,
        x0,
        horizon,
        matrix,
        rhs,
        costate_average,
    })
}

fn check_grid(system: &DiscreteSystem, candidate: &Trajectory) -> Result<()> {
    let n = system.n;
    let lengths_ok = [
        candidate.times.len(),
        candidate.state.len(),
        candidate.costate.len(),
    ]
    .iter()
    .all(|&l| l == n + 1);
    if candidate.n != n || !lengths_ok {
        return Err(FocpError::Grid(format!(
            "system has n = {n}, candidate has n = {} with {} nodes",
            candidate.n,
            candidate.times.len()
        )));
    }
    let end = candidate.times[n];
    if (end - system.horizon).abs() > 1e-12 * system.horizon {
        return Err(FocpError::Grid(format!(
            "system horizon {} differs from candidate horizon {end}",
            system.horizon
        )));
    }
    Ok(())
}

/// Max-norm residual of `candidate` in the system's unknown layout.
pub fn residual(system: &DiscreteSystem, candidate: &Trajectory) -> Result<f64> {
    check_grid(system, candidate)?;
    let n = system.n;
    let z: Vec<f64> = candidate.state[1..=n]
        .iter()
        .chain(&candidate.costate[..n])
        .copied()
        .collect();
    Ok(residual_norm(&system.matrix, &system.rhs, &z))
}

/// Rebuilds full node arrays from the unknown vector, restoring `x_0`,
/// `λ_n = 0`, and the nodal control `u_i = -(b/r)(t_i) λ_i`.
pub fn expand_solution(
    system: &DiscreteSystem,
    unknowns: &[f64],
    problem: &LqFocp,
    method: Method,
) -> Result<Trajectory> {
    let n = system.n;
    if unknowns.len() != 2 * n {
        return Err(FocpError::Dimension {
            context: "unknown vector",
            expected: 2 * n,
            found: unknowns.len(),
        });
    }
    let times: Vec<f64> = (0..=n)
        .map(|i| system.horizon * i as f64 / n as f64)
        .collect();
    let mut state = Vec::with_capacity(n + 1);
    state.push(system.x0);
    state.extend_from_slice(&unknowns[..n]);
    let mut costate = unknowns[n..].to_vec();
    costate.push(0.0);

    let control = times
        .iter()
        .zip(&costate)
        .map(|(&t, &lambda)| {
            let r = problem.r(t);
            if r.is_nan() || r <= 0.0 {
                return Err(FocpError::Positivity {
                    coefficient: "r",
                    time: t,
                    value: r,
                    requirement: "r > 0",
                });
            }
            // Adding 0.0 turns -0.0 into 0.0.
            Ok(-(problem.b(t) / r) * lambda + 0.0)
        })
        .collect::<Result<Vec<_>>>()?;

    let residual = residual_norm(&system.matrix, &system.rhs, unknowns);
    Ok(Trajectory {
        times,
        state,
        costate,
        control,
        alpha: system.alpha,
        n,
        solver_info: SolverInfo {
            method,
            residual,
            iterations: None,
            reference: false,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::gaussian_elimination;
    use crate::problem::{make_tip, make_tvp, Coefficient, Coefficients};

    fn hand_system() -> DiscreteSystem {
        assemble(&make_tip(), 1).unwrap()
    }

    #[test]
    fn unit_order_single_step_matches_hand_elimination() {
        // 1.5 x_1 + 0.5 λ_0 = 0.5 ; -0.5 x_1 + 1.5 λ_0 = 0.5
        let s = hand_system();
        assert_eq!(s.matrix.row(0), &[1.5, 0.5]);
        assert_eq!(s.matrix.row(1), &[-0.5, 1.5]);
        assert_eq!(s.rhs, vec![0.5, 0.5]);
        let z = gaussian_elimination(&s.matrix, &s.rhs, 1e-13).unwrap();
        assert!((z[0] - 0.2).abs() < 1e-14);
        assert!((z[1] - 0.4).abs() < 1e-14);
    }

    #[test]
    fn dimensions() {
        let s = assemble(&make_tvp().with_alpha(0.6).unwrap(), 4).unwrap();
        assert_eq!((s.matrix.rows(), s.matrix.cols()), (8, 8));
        assert_eq!(s.rhs.len(), 8);
        assert_eq!(s.h, 0.25);
    }

    #[test]
    fn zero_initial_state_gives_zero_rhs() {
        let p = make_tvp().with_alpha(0.4).unwrap().with_x0(0.0).unwrap();
        let s = assemble(&p, 6).unwrap();
        assert!(s.rhs.iter().all(|&v| v == 0.0));
        let z = gaussian_elimination(&s.matrix, &s.rhs, 1e-13).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn residual_of_hand_solution() {
        let s = hand_system();
        let t = expand_solution(&s, &[0.2, 0.4], &make_tip(), Method::Direct).unwrap();
        assert!(residual(&s, &t).unwrap() < 1e-14);
        assert_eq!(t.state, vec![1.0, 0.2]);
        assert_eq!(t.costate, vec![0.4, 0.0]);
        assert_eq!(t.control, vec![-0.4, 0.0]);
        assert_eq!(t.times, vec![0.0, 1.0]);
    }

    #[test]
    fn residual_of_zero_candidate_is_rhs_norm() {
        let s = assemble(&make_tip().with_alpha(0.8).unwrap(), 5).unwrap();
        let zeros = vec![0.0; 10];
        let t = expand_solution(&s, &zeros, &make_tip(), Method::Direct).unwrap();
        let rhs_norm = s.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_eq!(residual(&s, &t).unwrap(), rhs_norm);
    }

    #[test]
    fn residual_rejects_other_grid() {
        let s = assemble(&make_tip(), 4).unwrap();
        let other = assemble(&make_tip(), 3).unwrap();
        let t = expand_solution(&other, &[0.0; 6], &make_tip(), Method::Direct).unwrap();
        assert!(matches!(residual(&s, &t), Err(FocpError::Grid(_))));
    }

    #[test]
    fn expand_checks_length() {
        let s = hand_system();
        assert!(matches!(
            expand_solution(&s, &[0.2], &make_tip(), Method::Direct),
            Err(FocpError::Dimension { .. })
        ));
    }

    #[test]
    fn unit_order_band_structure() {
        let n = 9;
        let s = assemble(&make_tvp(), n).unwrap();
        for row in 0..n {
            let i = row + 1;
            for col in 0..2 * n {
                let allowed = if col < n {
                    let k = col + 1; // x_k
                    k == i || k + 1 == i
                } else {
                    let k = col - n; // λ_k
                    k + 1 == i || k == i
                };
                if !allowed {
                    assert_eq!(s.matrix[(row, col)], 0.0, "state row {i}, col {col}");
                }
            }
        }
        for k in 0..n {
            let row = n + k;
            let i = n - 1 - k;
            for col in 0..2 * n {
                let allowed = if col < n {
                    let m = col + 1;
                    m == i || m == i + 1
                } else {
                    let m = col - n;
                    m == i || m == i + 1
                };
                if !allowed {
                    assert_eq!(s.matrix[(row, col)], 0.0, "costate row {i}, col {col}");
                }
            }
        }
    }

    #[test]
    fn fractional_memory_entries_decay_along_rows() {
        let n = 12;
        let p = make_tip().with_alpha(0.7).unwrap();
        let s = assemble(&p, n).unwrap();
        // Last state row: x_n couples to all earlier x_k through ω_{n-k}.
        let row = s.matrix.row(n - 1);
        for k in 1..n - 2 {
            // Columns away from the averaging band hold only ω terms.
            assert!(row[k - 1].abs() < row[k].abs());
        }
    }

    #[test]
    fn non_positive_r_is_rejected_with_time() {
        let c = Coefficients {
            q: 1.0.into(),
            r: Coefficient::Polynomial(vec![0.5, -1.0]),
            a: 0.0.into(),
            b: 1.0.into(),
        };
        let p = LqFocp::new("bad", c, 1.0).unwrap();
        match assemble(&p, 4) {
            Err(FocpError::Positivity {
                coefficient: "r",
                time,
                ..
            }) => assert_eq!(time, 0.625),
            other => panic!("expected positivity error, got {other:?}"),
        }
    }

    #[test]
    fn zero_state_weight_is_allowed_negative_is_not() {
        let mk = |q: f64| {
            let c = Coefficients {
                q: q.into(),
                r: 1.0.into(),
                a: 0.0.into(),
                b: 1.0.into(),
            };
            LqFocp::new("q", c, 1.0).unwrap()
        };
        assert!(assemble(&mk(0.0), 4).is_ok());
        assert!(matches!(
            assemble(&mk(-0.1), 4),
            Err(FocpError::Positivity {
                coefficient: "q",
                ..
            })
        ));
    }

    #[test]
    fn non_finite_coefficient_is_rejected() {
        let c = Coefficients {
            q: 1.0.into(),
            r: 1.0.into(),
            a: Coefficient::function(|t| 1.0 / (t - 0.375)),
            b: 1.0.into(),
        };
        let p = LqFocp::new("pole", c, 1.0).unwrap();
        assert!(matches!(
            assemble(&p, 4),
            Err(FocpError::NonFinite {
                coefficient: "a",
                ..
            })
        ));
    }

    #[test]
    fn printed_average_differs_only_in_costate_rows() {
        let p = make_tvp().with_alpha(0.8).unwrap();
        let mid = assemble(&p, 6).unwrap();
        let printed = assemble_with(&p, 6, CostateAverage::Printed).unwrap();
        for row in 0..6 {
            assert_eq!(mid.matrix.row(row), printed.matrix.row(row));
        }
        assert_ne!(mid.matrix, printed.matrix);
        assert_eq!(mid.rhs, printed.rhs);
    }
}
