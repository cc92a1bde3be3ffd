//! End-to-end solve: assemble, factor or sweep, expand to node arrays.

use crate::discretizer::{assemble_with, expand_solution, CostateAverage};
use crate::error::Result;
use crate::linear::{solve_direct, solve_sweep, Method, SolveOptions};
use crate::problem::{LqFocp, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverSettings {
    pub options: SolveOptions,
    pub costate_average: CostateAverage,
}

impl SolverSettings {
    pub fn with_method(method: Method) -> Self {
        Self {
            options: SolveOptions {
                method,
                ..Default::default()
            },
            ..Default::default()
        }
    }
}

/// Solves `problem` at its own order on `n` uniform steps.
pub fn solve(problem: &LqFocp, n: usize, settings: &SolverSettings) -> Result<Trajectory> {
    let system = assemble_with(problem, n, settings.costate_average)?;
    let (unknowns, iterations) = match settings.options.method {
        Method::Direct => (solve_direct(&system, &settings.options)?, None),
        Method::Sweep => {
            let sol = solve_sweep(&system, &settings.options)?;
            (sol.unknowns, Some(sol.iterations))
        }
    };
    let mut traj = expand_solution(&system, &unknowns, problem, settings.options.method)?;
    traj.solver_info.iterations = iterations;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretizer::{assemble, residual};
    use crate::error::FocpError;
    use crate::problem::{make_tip, make_tvp};

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn hand_case_both_methods() {
        for method in [Method::Direct, Method::Sweep] {
            let t = solve(&make_tip(), 1, &SolverSettings::with_method(method)).unwrap();
            assert!((t.state[1] - 0.2).abs() < 1e-10);
            assert!((t.costate[0] - 0.4).abs() < 1e-10);
            assert_eq!(t.solver_info.method, method);
        }
    }

    #[test]
    fn sweep_on_homogeneous_problem_stops_after_one_pass() {
        let p = make_tip().with_alpha(0.6).unwrap().with_x0(0.0).unwrap();
        let t = solve(&p, 16, &SolverSettings::with_method(Method::Sweep)).unwrap();
        assert_eq!(t.solver_info.iterations, Some(1));
        assert!(t.state.iter().chain(&t.costate).all(|&v| v == 0.0));
    }

    #[test]
    fn sweep_agrees_with_direct() {
        let p = make_tip().with_alpha(0.75).unwrap();
        let d = solve(&p, 32, &SolverSettings::default()).unwrap();
        let s = solve(&p, 32, &SolverSettings::with_method(Method::Sweep)).unwrap();
        assert!(max_diff(&d.state, &s.state) <= 1e-8);
        assert!(max_diff(&d.costate, &s.costate) <= 1e-8);
        assert!(s.solver_info.residual <= 1e-8);
    }

    #[test]
    fn sweep_handles_printed_average() {
        let p = make_tvp().with_alpha(0.9).unwrap();
        let mut settings = SolverSettings::with_method(Method::Sweep);
        settings.costate_average = CostateAverage::Printed;
        let s = solve(&p, 16, &settings).unwrap();
        settings.options.method = Method::Direct;
        let d = solve(&p, 16, &settings).unwrap();
        assert!(max_diff(&d.state, &s.state) <= 1e-8);
    }

    #[test]
    fn sweep_iteration_cap_is_an_error() {
        let mut settings = SolverSettings::with_method(Method::Sweep);
        settings.options.sweep_max_iterations = 2;
        match solve(&make_tip().with_alpha(0.75).unwrap(), 32, &settings) {
            Err(FocpError::SweepDiverged {
                iterations,
                residual,
                ..
            }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0);
            }
            other => panic!("expected divergence error, got {other:?}"),
        }
    }

    #[test]
    fn trajectory_invariants() {
        for p in [
            make_tip().with_alpha(0.5).unwrap(),
            make_tvp().with_alpha(0.95).unwrap(),
        ] {
            let n = 20;
            let t = solve(&p, n, &SolverSettings::default()).unwrap();
            assert_eq!(t.state[0], p.x0());
            assert_eq!(t.costate[n], 0.0);
            assert_eq!(t.times[n], 1.0);
            for i in 0..=n {
                let ti = t.times[i];
                assert!((ti - i as f64 / n as f64).abs() < 1e-15);
                assert_eq!(t.control[i], -(p.b(ti) / p.r(ti)) * t.costate[i] + 0.0);
            }
            let system = assemble(&p, n).unwrap();
            assert!(residual(&system, &t).unwrap() <= 1e-10);
            assert_eq!(residual(&system, &t).unwrap(), t.solver_info.residual);
        }
    }

    #[test]
    fn initial_state_scaling_is_linear() {
        let p = make_tvp().with_alpha(0.7).unwrap();
        let base = solve(&p, 40, &SolverSettings::default()).unwrap();
        let scaled = solve(
            &p.clone().with_x0(-3.0).unwrap(),
            40,
            &SolverSettings::default(),
        )
        .unwrap();
        for (a, b) in [
            (&base.state, &scaled.state),
            (&base.costate, &scaled.costate),
            (&base.control, &scaled.control),
        ] {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((y - -3.0 * x).abs() <= 1e-10 * (3.0 * x).abs().max(1e-300));
            }
        }
    }

    #[test]
    fn non_unit_horizon() {
        let p = make_tip().with_horizon(2.0).unwrap();
        let t = solve(&p, 8, &SolverSettings::default()).unwrap();
        assert_eq!(t.times[8], 2.0);
        assert_eq!(t.step(), 0.25);
    }
}
