//! Command-line configuration and dispatch.

use std::ffi::OsStr;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::discretizer::CostateAverage;
use crate::error::{FocpError, Result};
use crate::gl_weights::check_alpha;
use crate::io::{load_custom_problem, render_study, render_trajectory, Format};
use crate::linear::{Method, SolveOptions};
use crate::problem::{builtin, LqFocp};
use crate::solver::{solve, SolverSettings};
use crate::study::{run_alpha_sweep, run_convergence_study};

/// Environment variable naming the directory used when `--output` is absent.
pub const OUTPUT_DIR_ENV: &str = "FOCP_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Solve,
    Convergence,
    AlphaSweep,
}

impl Mode {
    fn label(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Convergence => "convergence",
            Mode::AlphaSweep => "alpha-sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "focp",
    version,
    about = "Solve linear-quadratic fractional optimal control problems"
)]
struct Args {
    /// Built-in problem: tip (time invariant) or tvp (time varying).
    #[arg(long, conflicts_with = "problem_file")]
    problem: Option<String>,

    /// Custom problem file with x0, horizon, q, r, a, b entries.
    #[arg(long)]
    problem_file: Option<PathBuf>,

    /// Derivative order(s) in (0, 1], comma separated.
    #[arg(long, default_value = "0.75")]
    alpha: String,

    /// Number(s) of divisions, comma separated.
    #[arg(long, default_value = "64")]
    n: String,

    #[arg(long, value_enum, default_value = "solve")]
    mode: Mode,

    #[arg(long, value_enum, default_value = "direct")]
    method: MethodArg,

    /// Output file; defaults to $FOCP_OUTPUT_DIR/<problem>_<mode>.<ext>, else stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,

    /// Average λ_{i-1} and λ_i in the costate equation, as typeset originally.
    #[arg(long)]
    compat_costate_average: bool,

    #[arg(long)]
    sweep_tol: Option<f64>,

    #[arg(long)]
    sweep_max_iter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Builtin(String),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub alphas: Vec<f64>,
    pub n_values: Vec<usize>,
    pub mode: Mode,
    pub settings: SolverSettings,
    pub output: Option<PathBuf>,
    pub format: Format,
}

fn parse_list<T: std::str::FromStr>(flag: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| FocpError::Usage(format!("--{flag}: cannot parse `{}`", s.trim())))
        })
        .collect()
}

/// Parses flags (without the program name) into a validated configuration.
pub fn parse_args<I, S>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(
        std::iter::once(std::ffi::OsString::from("focp")).chain(argv.into_iter().map(Into::into)),
    )
    .map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            FocpError::Help(e.to_string())
        }
        _ => FocpError::Usage(
            e.to_string()
                .trim_start_matches("error: ")
                .trim_end()
                .to_string(),
        ),
    })?;

    let problem = match (args.problem, args.problem_file) {
        (_, Some(path)) => ProblemSource::File(path),
        (Some(name), None) => {
            if builtin(&name).is_none() {
                return Err(FocpError::Usage(format!(
                    "--problem: unknown problem `{name}` (expected tip or tvp)"
                )));
            }
            ProblemSource::Builtin(name)
        }
        (None, None) => ProblemSource::Builtin("tip".into()),
    };

    let alphas: Vec<f64> = parse_list("alpha", &args.alpha)?;
    for &alpha in &alphas {
        check_alpha(alpha)?;
    }
    let n_values: Vec<usize> = parse_list("n", &args.n)?;
    if let Some(&n) = n_values.iter().find(|&&n| n == 0) {
        return Err(FocpError::Domain {
            name: "n",
            value: n as f64,
            range: ">= 1",
        });
    }

    match args.mode {
        Mode::Solve if alphas.len() != 1 || n_values.len() != 1 => {
            return Err(FocpError::Usage(
                "--mode solve takes a single --alpha and a single --n".into(),
            ))
        }
        Mode::AlphaSweep if n_values.len() != 1 => {
            return Err(FocpError::Usage(
                "--mode alpha-sweep takes a single --n".into(),
            ))
        }
        Mode::Convergence if n_values.windows(2).any(|w| w[0] >= w[1]) => {
            return Err(FocpError::Usage(
                "--n: values must be strictly increasing".into(),
            ))
        }
        _ => {}
    }

    let defaults = SolveOptions::default();
    let options = SolveOptions {
        method: match args.method {
            MethodArg::Direct => Method::Direct,
            MethodArg::Sweep => Method::Sweep,
        },
        sweep_tolerance: args.sweep_tol.unwrap_or(defaults.sweep_tolerance),
        sweep_max_iterations: args.sweep_max_iter.unwrap_or(defaults.sweep_max_iterations),
        ..defaults
    };
    options.validate()?;

    Ok(RunConfig {
        problem,
        alphas,
        n_values,
        mode: args.mode,
        settings: SolverSettings {
            options,
            costate_average: if args.compat_costate_average {
                CostateAverage::Printed
            } else {
                CostateAverage::Midpoint
            },
        },
        output: args.output,
        format: match args.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
    })
}

impl RunConfig {
    pub fn load_problem(&self) -> Result<LqFocp> {
        match &self.problem {
            ProblemSource::Builtin(name) => {
                builtin(name).ok_or_else(|| FocpError::Usage(format!("unknown problem `{name}`")))
            }
            ProblemSource::File(path) => load_custom_problem(path),
        }
    }

    /// Where output goes: `--output`, else a file in `output_dir`, else
    /// `None` for stdout.
    pub fn output_path(&self, output_dir: Option<&OsStr>, problem_name: &str) -> Option<PathBuf> {
        self.output.clone().or_else(|| {
            output_dir.filter(|d| !d.is_empty()).map(|dir| {
                PathBuf::from(dir).join(format!(
                    "{problem_name}_{}.{}",
                    self.mode.label(),
                    self.format.extension()
                ))
            })
        })
    }
}

/// Result of executing a configuration: rendered text plus the problem it
/// was produced for.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub problem_name: String,
    pub text: String,
}

pub fn execute(config: &RunConfig) -> Result<RunOutput> {
    let problem = config.load_problem()?;
    let text = match config.mode {
        Mode::Solve => {
            let p = problem.clone().with_alpha(config.alphas[0])?;
            let traj = solve(&p, config.n_values[0], &config.settings)?;
            render_trajectory(&traj, config.format)?
        }
        Mode::Convergence => {
            let report = run_convergence_study(
                &problem,
                &config.alphas,
                &config.n_values,
                &config.settings,
            )?;
            render_study(&report, config.format)?
        }
        Mode::AlphaSweep => {
            let report = run_alpha_sweep(
                &problem,
                &config.alphas,
                config.n_values[0],
                &config.settings,
            )?;
            render_study(&report, config.format)?
        }
    };
    Ok(RunOutput {
        problem_name: problem.name().to_string(),
        text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = parse_args(Vec::<String>::new()).unwrap();
        assert_eq!(c.problem, ProblemSource::Builtin("tip".into()));
        assert_eq!(c.alphas, vec![0.75]);
        assert_eq!(c.n_values, vec![64]);
        assert_eq!(c.mode, Mode::Solve);
        assert_eq!(c.settings.options.method, Method::Direct);
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.settings.costate_average, CostateAverage::Midpoint);
    }

    #[test]
    fn explicit_values_echo() {
        let c = parse_args(["--problem", "tip", "--alpha", "0.75", "--n", "64"]).unwrap();
        assert_eq!(c.alphas, vec![0.75]);
        assert_eq!(c.n_values, vec![64]);
    }

    #[test]
    fn convergence_division_list() {
        let c = parse_args(["--mode", "convergence", "--n", "8,16,32,64,128,256"]).unwrap();
        assert_eq!(c.mode, Mode::Convergence);
        assert_eq!(c.n_values, vec![8, 16, 32, 64, 128, 256]);
    }

    #[test]
    fn out_of_range_alpha() {
        assert!(matches!(
            parse_args(["--alpha", "1.5"]),
            Err(FocpError::Domain { name: "alpha", .. })
        ));
        assert!(matches!(
            parse_args(["--n", "0"]),
            Err(FocpError::Domain { name: "n", .. })
        ));
    }

    #[test]
    fn unknown_flag_is_named() {
        match parse_args(["--bogus", "1"]) {
            Err(FocpError::Usage(msg)) => assert!(msg.contains("--bogus"), "{msg}"),
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn mode_arity_checks() {
        assert!(parse_args(["--alpha", "0.5,0.7"]).is_err());
        assert!(parse_args(["--mode", "alpha-sweep", "--n", "8,16"]).is_err());
        assert!(parse_args(["--mode", "alpha-sweep", "--alpha", "0.5,1", "--n", "8"]).is_ok());
        assert!(parse_args(["--mode", "convergence", "--n", "16,8"]).is_err());
        assert!(parse_args(["--n", "x"]).is_err());
        assert!(parse_args(["--problem", "nope"]).is_err());
        assert!(parse_args(["--problem", "tip", "--problem-file", "f"]).is_err());
    }

    #[test]
    fn sweep_and_compat_flags() {
        let c = parse_args([
            "--method",
            "sweep",
            "--sweep-tol",
            "1e-9",
            "--sweep-max-iter",
            "50",
            "--compat-costate-average",
            "--format",
            "json",
        ])
        .unwrap();
        assert_eq!(c.settings.options.method, Method::Sweep);
        assert_eq!(c.settings.options.sweep_tolerance, 1e-9);
        assert_eq!(c.settings.options.sweep_max_iterations, 50);
        assert_eq!(c.settings.costate_average, CostateAverage::Printed);
        assert_eq!(c.format, Format::Json);
        assert!(matches!(
            parse_args(["--sweep-tol", "0"]),
            Err(FocpError::Options(_))
        ));
    }

    #[test]
    fn output_resolution() {
        let c = parse_args(["--mode", "convergence", "--n", "8,16"]).unwrap();
        assert_eq!(c.output_path(None, "tip"), None);
        assert_eq!(
            c.output_path(Some(OsStr::new("/tmp/out")), "tip"),
            Some(PathBuf::from("/tmp/out/tip_convergence.csv"))
        );
        let c = parse_args(["--output", "x.csv"]).unwrap();
        assert_eq!(
            c.output_path(Some(OsStr::new("/tmp/out")), "tip"),
            Some(PathBuf::from("x.csv"))
        );
    }

    #[test]
    fn execute_solve_mode() {
        let c = parse_args(["--alpha", "1", "--n", "1"]).unwrap();
        let out = execute(&c).unwrap();
        assert_eq!(out.problem_name, "tip");
        assert!(out.text.starts_with("t,x,lambda,u\n0,1,0.4,-0.4\n"));
    }
}
