//! Linear-quadratic fractional optimal control problems.
//!
//! A problem minimises `½∫₀ᵀ (q x² + r u²) dt` subject to
//! `0D_t^α x = a x + b u`, `x(0) = x0`. The optimality system solved by the
//! rest of the crate is
//!
//! ```text
//! 0D_t^α x = a x − (b²/r) λ
//! tD_T^α λ = q x + a λ,      λ(T) = 0
//! u        = −(b/r) λ
//! ```

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{FocpError, Result};
use crate::gl_weights::check_alpha;
use crate::linear::Method;

/// A scalar coefficient of time.
///
/// `Function` callables must be pure: the assembler may evaluate them in any
/// order and from several threads.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// Coefficients lowest degree first.
    Polynomial(Vec<f64>),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Function(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Polynomial(coeffs) => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            Coefficient::Function(f) => f(t),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Coefficient::Polynomial(p) => f.debug_tuple("Polynomial").field(p).finish(),
            Coefficient::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(c: f64) -> Self {
        Coefficient::Constant(c)
    }
}

/// The four coefficient functions of an LQ problem.
#[derive(Debug, Clone)]
pub struct Coefficients {
    /// State weight, `q ≥ 0`.
    pub q: Coefficient,
    /// Control weight, `r > 0`.
    pub r: Coefficient,
    /// State coefficient of the dynamics.
    pub a: Coefficient,
    /// Control coefficient of the dynamics.
    pub b: Coefficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Benchmark {
    TimeInvariant,
    TimeVarying,
}

#[derive(Debug, Clone)]
pub struct LqFocp {
    name: String,
    coefficients: Coefficients,
    x0: f64,
    alpha: f64,
    horizon: f64,
    benchmark: Option<Benchmark>,
}

impl LqFocp {
    /// A problem on `[0, 1]` with `α = 1`; adjust with the `with_*` methods.
    pub fn new(name: impl Into<String>, coefficients: Coefficients, x0: f64) -> Result<Self> {
        if !x0.is_finite() {
            return Err(FocpError::Domain {
                name: "x0",
                value: x0,
                range: "finite",
            });
        }
        Ok(Self {
            name: name.into(),
            coefficients,
            x0,
            alpha: 1.0,
            horizon: 1.0,
            benchmark: None,
        })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        self.alpha = alpha;
        Ok(self)
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(FocpError::Domain {
                name: "horizon",
                value: horizon,
                range: "(0, inf)",
            });
        }
        if horizon != self.horizon {
            self.benchmark = None;
        }
        self.horizon = horizon;
        Ok(self)
    }

    /// Replacing the initial state drops any benchmark tag, since the
    /// closed-form solution is stated for `x0 = 1`.
    pub fn with_x0(mut self, x0: f64) -> Result<Self> {
        if !x0.is_finite() {
            return Err(FocpError::Domain {
                name: "x0",
                value: x0,
                range: "finite",
            });
        }
        if x0 != self.x0 {
            self.benchmark = None;
        }
        self.x0 = x0;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    pub fn q(&self, t: f64) -> f64 {
        self.coefficients.q.eval(t)
    }

    pub fn r(&self, t: f64) -> f64 {
        self.coefficients.r.eval(t)
    }

    pub fn a(&self, t: f64) -> f64 {
        self.coefficients.a.eval(t)
    }

    pub fn b(&self, t: f64) -> f64 {
        self.coefficients.b.eval(t)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn benchmark(&self) -> Option<Benchmark> {
        self.benchmark
    }

    /// The closed-form solution, when this is the time-invariant benchmark at
    /// unit order.
    pub fn analytic_solution(&self) -> Option<AnalyticTipSolution> {
        (self.benchmark == Some(Benchmark::TimeInvariant) && self.alpha == 1.0)
            .then(AnalyticTipSolution::new)
    }
}

/// Time-invariant benchmark: `q = r = b = 1`, `a = -1`, `x0 = 1` on `[0, 1]`.
pub fn make_tip() -> LqFocp {
    let coefficients = Coefficients {
        q: 1.0.into(),
        r: 1.0.into(),
        a: (-1.0).into(),
        b: 1.0.into(),
    };
    let mut p = LqFocp::new("tip", coefficients, 1.0).expect("finite x0");
    p.benchmark = Some(Benchmark::TimeInvariant);
    p
}

/// Time-varying benchmark: `q = r = b = 1`, `a(t) = t`, `x0 = 1` on `[0, 1]`.
pub fn make_tvp() -> LqFocp {
    let coefficients = Coefficients {
        q: 1.0.into(),
        r: 1.0.into(),
        a: Coefficient::Polynomial(vec![0.0, 1.0]),
        b: 1.0.into(),
    };
    let mut p = LqFocp::new("tvp", coefficients, 1.0).expect("finite x0");
    p.benchmark = Some(Benchmark::TimeVarying);
    p
}

/// Looks up a built-in problem by name.
pub fn builtin(name: &str) -> Option<LqFocp> {
    match name {
        "tip" => Some(make_tip()),
        "tvp" => Some(make_tvp()),
        _ => None,
    }
}

/// Closed-form solution of the time-invariant benchmark at `α = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticTipSolution {
    beta: f64,
}

impl Default for AnalyticTipSolution {
    fn default() -> Self {
        Self::new()
    }
}

impl AnalyticTipSolution {
    pub fn new() -> Self {
        let s = std::f64::consts::SQRT_2;
        let (c, sh) = (s.cosh(), s.sinh());
        Self {
            beta: -(c + s * sh) / (s * c + sh),
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `x(t) = cosh(√2 t) + β sinh(√2 t)`.
    pub fn state(&self, t: f64) -> f64 {
        let w = std::f64::consts::SQRT_2 * t;
        w.cosh() + self.beta * w.sinh()
    }

    /// `u(t) = (1 + √2 β) cosh(√2 t) + (√2 + β) sinh(√2 t)`.
    pub fn control(&self, t: f64) -> f64 {
        let s = std::f64::consts::SQRT_2;
        let w = s * t;
        (1.0 + s * self.beta) * w.cosh() + (s + self.beta) * w.sinh()
    }

    /// With `r = b = 1`, `λ = -u`.
    pub fn costate(&self, t: f64) -> f64 {
        -self.control(t)
    }
}

pub fn analytic_tip_state(t: f64) -> f64 {
    AnalyticTipSolution::new().state(t)
}

pub fn analytic_tip_control(t: f64) -> f64 {
    AnalyticTipSolution::new().control(t)
}

/// How the trajectory was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverInfo {
    pub method: Method,
    /// Max-norm residual of the assembled linear system at the solution.
    pub residual: f64,
    /// Sweep iterations used; `None` for direct solves.
    pub iterations: Option<usize>,
    /// Set on fine-grid reference solutions.
    pub reference: bool,
}

/// Node values of a discrete solution on the uniform grid `t_i = i h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub state: Vec<f64>,
    pub costate: Vec<f64>,
    pub control: Vec<f64>,
    pub alpha: f64,
    pub n: usize,
    pub solver_info: SolverInfo,
}

impl Trajectory {
    pub fn step(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.times[self.n] / self.n as f64
        }
    }

    /// `x(T)`.
    pub fn final_state(&self) -> f64 {
        self.state[self.n]
    }

    /// `u(0)`.
    pub fn initial_control(&self) -> f64 {
        self.control[0]
    }
}

/// Solution on a fine grid, used as the oracle for problems without a
/// closed form. `n_fine` must be a power of two no smaller than 512.
pub fn reference_solution(problem: &LqFocp, n_fine: usize) -> Result<Trajectory> {
    if n_fine < 512 || !n_fine.is_power_of_two() {
        return Err(FocpError::Domain {
            name: "n_fine",
            value: n_fine as f64,
            range: "powers of two >= 512",
        });
    }
    let mut traj = crate::solver::solve(problem, n_fine, &Default::default())?;
    traj.solver_info.reference = true;
    Ok(traj)
}
