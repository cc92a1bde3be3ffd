//! Problem files and deterministic CSV/JSON output.
//!
//! A custom problem file is a list of `key = value` lines. Blank lines and
//! lines starting with `#` are ignored. Coefficients `q`, `r`, `a`, `b` are a
//! number or a bracketed polynomial coefficient list, lowest degree first:
//!
//! ```text
//! name = ramp
//! x0 = 1
//! horizon = 1      # optional, defaults to 1
//! q = 1
//! r = 1
//! a = [0, 1]       # a(t) = t
//! b = 1
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{FocpError, Result};
use crate::problem::{Coefficient, Coefficients, LqFocp, SolverInfo, Trajectory};
use crate::study::StudyReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = FocpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(FocpError::Usage(format!(
                "unknown format `{other}` (expected csv or json)"
            ))),
        }
    }
}

const KEYS: [&str; 7] = ["name", "x0", "horizon", "q", "r", "a", "b"];

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_coefficient(s: &str) -> Option<Coefficient> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        if inner.trim().is_empty() {
            return None;
        }
        let coeffs = inner
            .split(',')
            .map(parse_number)
            .collect::<Option<Vec<_>>>()?;
        Some(Coefficient::Polynomial(coeffs))
    } else {
        parse_number(s).map(Coefficient::Constant)
    }
}

/// Parses the text of a problem file; `path` is used only in diagnostics.
pub fn parse_custom_problem(text: &str, path: &Path) -> Result<LqFocp> {
    let err = |line: usize, message: String| FocpError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, found `{line}`")))?;
        let key = key.trim();
        let known = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| err(line_no, format!("unknown key `{key}`")))?;
        if entries.insert(known, (line_no, value.trim())).is_some() {
            return Err(err(line_no, format!("duplicate key `{key}`")));
        }
    }

    let require = |key: &'static str| {
        entries.get(key).copied().ok_or(FocpError::MissingKey {
            path: path.to_path_buf(),
            key,
        })
    };
    let number = |key: &'static str| -> Result<f64> {
        let (line, value) = require(key)?;
        parse_number(value).ok_or_else(|| err(line, format!("`{key}` must be a finite number")))
    };
    let coefficient = |key: &'static str| -> Result<Coefficient> {
        let (line, value) = require(key)?;
        parse_coefficient(value).ok_or_else(|| {
            err(
                line,
                format!("`{key}` must be a number or a list like [c0, c1, ...]"),
            )
        })
    };

    let x0 = number("x0")?;
    let coefficients = Coefficients {
        q: coefficient("q")?,
        r: coefficient("r")?,
        a: coefficient("a")?,
        b: coefficient("b")?,
    };
    let name = entries.get("name").map_or("custom", |(_, v)| v);
    let mut problem = LqFocp::new(name, coefficients, x0)?;
    if entries.contains_key("horizon") {
        let (line, _) = entries["horizon"];
        let horizon = number("horizon")?;
        problem = problem
            .with_horizon(horizon)
            .map_err(|e| err(line, e.to_string()))?;
    }
    Ok(problem)
}

/// Reads a custom problem file. Positivity of `r` and `q` is checked later,
/// when the problem is assembled.
pub fn load_custom_problem(path: &Path) -> Result<LqFocp> {
    let text = fs::read_to_string(path)?;
    parse_custom_problem(&text, path)
}

/// Renders `v` with 12 significant digits. Zero of either sign prints as `0`.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        let fixed = format!("{v:.decimals$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{exp}")
    }
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x,lambda,u\n");
    for i in 0..traj.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_sig(traj.times[i]),
            format_sig(traj.state[i]),
            format_sig(traj.costate[i]),
            format_sig(traj.control[i]),
        );
    }
    out
}

#[derive(Serialize)]
struct TrajectoryMeta<'a> {
    alpha: f64,
    n: usize,
    h: f64,
    horizon: f64,
    solver_info: &'a SolverInfo,
}

#[derive(Serialize)]
struct TrajectoryJson<'a> {
    meta: TrajectoryMeta<'a>,
    times: &'a [f64],
    state: &'a [f64],
    costate: &'a [f64],
    control: &'a [f64],
}

pub fn trajectory_json(traj: &Trajectory) -> Result<String> {
    let doc = TrajectoryJson {
        meta: TrajectoryMeta {
            alpha: traj.alpha,
            n: traj.n,
            h: traj.step(),
            horizon: traj.times.last().copied().unwrap_or(0.0),
            solver_info: &traj.solver_info,
        },
        times: &traj.times,
        state: &traj.state,
        costate: &traj.costate,
        control: &traj.control,
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn render_trajectory(traj: &Trajectory, format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(trajectory_csv(traj)),
        Format::Json => trajectory_json(traj),
    }
}

pub fn write_trajectory(traj: &Trajectory, path: &Path, format: Format) -> Result<()> {
    fs::write(path, render_trajectory(traj, format)?)?;
    Ok(())
}

/// Node arrays read back from a trajectory CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryColumns {
    pub times: Vec<f64>,
    pub state: Vec<f64>,
    pub costate: Vec<f64>,
    pub control: Vec<f64>,
}

pub fn parse_trajectory_csv(text: &str) -> Result<TrajectoryColumns> {
    let path = Path::new("<csv>");
    let mut lines = text.lines();
    match lines.next() {
        Some("t,x,lambda,u") => {}
        other => {
            return Err(FocpError::Parse {
                path: path.into(),
                line: 1,
                message: format!("unexpected header {other:?}"),
            })
        }
    }
    let mut cols = TrajectoryColumns {
        times: vec![],
        state: vec![],
        costate: vec![],
        control: vec![],
    };
    for (idx, line) in lines.enumerate() {
        let fields = line
            .split(',')
            .map(parse_number)
            .collect::<Option<Vec<_>>>()
            .filter(|f| f.len() == 4)
            .ok_or_else(|| FocpError::Parse {
                path: path.into(),
                line: idx + 2,
                message: format!("expected four finite numbers, found `{line}`"),
            })?;
        cols.times.push(fields[0]);
        cols.state.push(fields[1]);
        cols.costate.push(fields[2]);
        cols.control.push(fields[3]);
    }
    Ok(cols)
}

/// One output row of a study; also the JSON row shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow<'a> {
    pub problem: &'a str,
    pub alpha: f64,
    pub n: usize,
    pub x_end: f64,
    pub u_start: f64,
    pub delta_vs_half_n: Option<f64>,
    /// Sup-norm state error against the closed-form solution.
    pub oracle_sup_error: Option<f64>,
}

pub fn study_rows(report: &StudyReport) -> Vec<StudyRow<'_>> {
    let mut rows: Vec<StudyRow<'_>> = report
        .cells
        .iter()
        .map(|c| StudyRow {
            problem: &report.problem_name,
            alpha: c.alpha,
            n: c.n,
            x_end: c.x_end,
            u_start: c.u_start,
            delta_vs_half_n: c.state_delta,
            oracle_sup_error: c.oracle.map(|m| m.state_sup),
        })
        .collect();
    rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.n.cmp(&b.n)));
    rows
}

pub fn study_csv(report: &StudyReport) -> String {
    let opt = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
    let mut out = String::from("problem,alpha,n,x_end,u_start,delta_vs_half_n,oracle_sup_error\n");
    for row in study_rows(report) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.problem,
            format_sig(row.alpha),
            row.n,
            format_sig(row.x_end),
            format_sig(row.u_start),
            opt(row.delta_vs_half_n),
            opt(row.oracle_sup_error),
        );
    }
    out
}

#[derive(Serialize)]
struct StudyMeta<'a> {
    problem: &'a str,
    alphas: &'a [f64],
    n_values: &'a [usize],
}

#[derive(Serialize)]
struct StudyJson<'a> {
    meta: StudyMeta<'a>,
    rows: Vec<StudyRow<'a>>,
}

pub fn study_json(report: &StudyReport) -> Result<String> {
    let doc = StudyJson {
        meta: StudyMeta {
            problem: &report.problem_name,
            alphas: &report.alphas,
            n_values: &report.n_values,
        },
        rows: study_rows(report),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn render_study(report: &StudyReport, format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(study_csv(report)),
        Format::Json => study_json(report),
    }
}

pub fn write_study(report: &StudyReport, path: &Path, format: Format) -> Result<()> {
    fs::write(path, render_study(report, format)?)?;
    Ok(())
}
