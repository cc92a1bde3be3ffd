//! Linear-quadratic fractional optimal control on a uniform grid.
//!
//! Riemann-Liouville derivatives of order `0 < α ≤ 1` are replaced by
//! Grünwald-Letnikov sums evaluated at interval midpoints. The resulting
//! state/costate equations form a `2n × 2n` linear system that is solved
//! directly or by an alternating forward/backward sweep.
//!
//! ```
//! use focp::{make_tip, solve, SolverSettings};
//!
//! let problem = make_tip().with_alpha(0.75).unwrap();
//! let traj = solve(&problem, 64, &SolverSettings::default()).unwrap();
//! assert_eq!(traj.state[0], 1.0);
//! assert_eq!(traj.costate[64], 0.0);
//! ```

pub mod cli;
pub mod discretizer;
pub mod error;
pub mod gl_weights;
pub mod io;
pub mod linear;
pub mod oracle;
pub mod problem;
pub mod solver;
pub mod study;

pub use discretizer::{
    assemble, assemble_with, expand_solution, residual, CostateAverage, DiscreteSystem,
};
pub use error::{FocpError, Result};
pub use gl_weights::{gl_weight_sequence, left_gl_midpoint, right_gl_midpoint, WeightSequence};
pub use linear::{solve_direct, solve_sweep, DenseMatrix, Method, SolveOptions};
pub use oracle::weight_oracle;
pub use problem::{
    analytic_tip_control, analytic_tip_state, make_tip, make_tvp, reference_solution,
    AnalyticTipSolution, Coefficient, Coefficients, LqFocp, SolverInfo, Trajectory,
};
pub use solver::{solve, SolverSettings};
pub use study::{
    error_metrics, run_alpha_sweep, run_convergence_study, ErrorMetrics, Oracle, StudyReport,
};
