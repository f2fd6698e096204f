//! Text formats: problem files, solution tables, reports and front files.
//!
//! Problem files are line oriented. `#` starts a comment, blank lines are
//! ignored, and `[name]` opens a section:
//!
//! ```text
//! [timescale]
//! set = 0;1;2          # time scale literal
//! resolution = 1e-2    # optional
//! [dimension]
//! n = 1
//! [objectives]         # one integrand per line
//! y1^2
//! (y1-2)^2
//! [constraints]        # optional, `integrand = target`
//! [boundary]
//! alpha = 0            # comma separated, n values
//! beta = 0
//! [solver]             # optional overrides
//! grad_tol = 1e-8
//! ```
//!
//! Solver keys: `grad_tol`, `constraint_tol`, `det_tol`,
//! `max_inner_iterations`, `max_outer_iterations`, `seed`, `multistart`.

use std::fmt::Write as _;

use serde_json::json;

use crate::calculus::GridFunction;
use crate::error::{Error, Result};
use crate::pareto::ParetoFront;
use crate::problem::{FunctionalValue, Integrand, VariationalProblem, DEFAULT_RESOLUTION};
use crate::scalar::{lit, to_f64};
use crate::solver::{ElReport, SolveResult, SolverOptions};
use crate::timescale::TimeScale;
use crate::Scalar;

const SECTIONS: [&str; 6] = [
    "timescale",
    "dimension",
    "objectives",
    "constraints",
    "boundary",
    "solver",
];

/// Tolerance, relative to `max(1, |t|)`, for matching solution times to the
/// problem grid.
pub const GRID_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ProblemFile<T> {
    pub timescale: TimeScale<T>,
    pub resolution: T,
    pub dim: usize,
    pub objectives: Vec<Integrand>,
    pub constraints: Vec<(Integrand, T)>,
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
    pub solver: SolverOptions<T>,
}

impl<T: Scalar> ProblemFile<T> {
    pub fn build(&self) -> Result<VariationalProblem<T>> {
        self.build_with_resolution(self.resolution)
    }

    pub fn build_with_resolution(&self, resolution: T) -> Result<VariationalProblem<T>> {
        let mut b = VariationalProblem::builder(self.timescale.clone(), self.dim)
            .resolution(resolution)
            .boundary(self.alpha.clone(), self.beta.clone());
        for o in &self.objectives {
            b = b.objective_expr(o.expr().clone());
        }
        for (g, target) in &self.constraints {
            b = b.constraint_expr(g.expr().clone(), *target);
        }
        b.build()
    }
}

struct Line<'a> {
    number: usize,
    // byte column of `text` within the raw line
    column: usize,
    text: &'a str,
}

fn format_error(context: &str, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Format {
        context: context.to_string(),
        line,
        column: column + 1,
        message: message.into(),
    }
}

/// Decimal number with optional sign, fraction and exponent.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let ok = !s.is_empty()
        && s.chars().any(|c| c.is_ascii_digit())
        && s
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'));
    if !ok {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn trimmed<'a>(raw: &'a str, start: usize, number: usize) -> Line<'a> {
    let lead = raw.len() - raw.trim_start().len();
    Line {
        number,
        column: start + lead,
        text: raw.trim(),
    }
}

fn split_key<'a>(line: &Line<'a>, context: &str) -> Result<(&'a str, Line<'a>)> {
    let eq = line
        .text
        .find('=')
        .ok_or_else(|| format_error(context, line.number, line.column, "expected `key = value`"))?;
    let key = line.text[..eq].trim();
    Ok((key, trimmed(&line.text[eq + 1..], line.column + eq + 1, line.number)))
}

fn number<T: Scalar>(line: &Line<'_>, context: &str) -> Result<T> {
    parse_number(line.text)
        .map(lit)
        .ok_or_else(|| format_error(context, line.number, line.column, format!("bad number `{}`", line.text)))
}

fn integer(line: &Line<'_>, context: &str) -> Result<usize> {
    line.text
        .parse::<usize>()
        .map_err(|_| format_error(context, line.number, line.column, format!("bad integer `{}`", line.text)))
}

fn vector<T: Scalar>(line: &Line<'_>, context: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in line.text.split(',') {
        out.push(number(&trimmed(part, line.column + start, line.number), context)?);
        start += part.len() + 1;
    }
    Ok(out)
}

fn integrand(line: &Line<'_>, dim: usize, context: &str) -> Result<Integrand> {
    Integrand::parse(line.text, dim).map_err(|e| {
        let offset = match &e {
            Error::Syntax { offset, .. }
            | Error::UnknownIdentifier { offset, .. }
            | Error::VariableOutOfRange { offset, .. } => *offset,
            _ => 0,
        };
        format_error(context, line.number, line.column + offset, e.to_string())
    })
}

pub fn parse_problem_file<T: Scalar>(text: &str) -> Result<ProblemFile<T>> {
    let mut sections: Vec<(&str, usize, Vec<Line<'_>>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let content = raw.split('#').next().unwrap();
        let line = trimmed(content, 0, number);
        if line.text.is_empty() {
            continue;
        }
        if let Some(name) = line.text.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| format_error("file", number, line.column, "unterminated section header"))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(format_error("file", number, line.column, format!("unknown section [{name}]")));
            }
            if sections.iter().any(|s| s.0 == name) {
                return Err(format_error("file", number, line.column, format!("duplicate section [{name}]")));
            }
            sections.push((name, number, Vec::new()));
        } else {
            match sections.last_mut() {
                Some(s) => s.2.push(line),
                None => return Err(format_error("file", number, line.column, "text before the first section")),
            }
        }
    }
    let find = |name: &str| sections.iter().find(|s| s.0 == name);
    let require = |name: &str| {
        find(name).ok_or_else(|| format_error(&format!("section [{name}]"), 0, 0, "missing section"))
    };

    // [dimension]
    let (_, header, lines) = require("dimension")?;
    let ctx = "section [dimension]";
    let mut dim = None;
    for line in lines {
        let (key, value) = split_key(line, ctx)?;
        match key {
            "n" => dim = Some((integer(&value, ctx)?, value)),
            _ => return Err(format_error(ctx, line.number, line.column, format!("unknown key `{key}`"))),
        }
    }
    let (dim, dim_line) = dim.ok_or_else(|| format_error(ctx, *header, 0, "missing `n`"))?;
    if dim == 0 {
        return Err(format_error(ctx, dim_line.number, dim_line.column, "dimension must be at least 1"));
    }

    // [timescale]
    let (_, header, lines) = require("timescale")?;
    let ctx = "section [timescale]";
    let mut timescale = None;
    let mut resolution = lit(DEFAULT_RESOLUTION);
    for line in lines {
        let (key, value) = split_key(line, ctx)?;
        match key {
            "set" => {
                let ts = TimeScale::parse(value.text)
                    .map_err(|e| format_error(ctx, value.number, value.column, e.to_string()))?;
                timescale = Some(ts);
            }
            "resolution" => {
                resolution = number(&value, ctx)?;
                if !(resolution > T::zero()) {
                    return Err(format_error(ctx, value.number, value.column, "resolution must be positive"));
                }
            }
            _ => return Err(format_error(ctx, line.number, line.column, format!("unknown key `{key}`"))),
        }
    }
    let timescale = timescale.ok_or_else(|| format_error(ctx, *header, 0, "missing `set`"))?;

    // [objectives]
    let (_, header, lines) = require("objectives")?;
    let ctx = "section [objectives]";
    let objectives = lines
        .iter()
        .map(|l| integrand(l, dim, ctx))
        .collect::<Result<Vec<_>>>()?;
    if objectives.is_empty() {
        return Err(format_error(ctx, *header, 0, "at least one objective is required"));
    }

    // [constraints]
    let mut constraints = Vec::new();
    if let Some((_, _, lines)) = find("constraints") {
        let ctx = "section [constraints]";
        for line in lines {
            let eq = line
                .text
                .rfind('=')
                .ok_or_else(|| format_error(ctx, line.number, line.column, "expected `integrand = target`"))?;
            let lhs = trimmed(&line.text[..eq], line.column, line.number);
            let rhs = trimmed(&line.text[eq + 1..], line.column + eq + 1, line.number);
            constraints.push((integrand(&lhs, dim, ctx)?, number(&rhs, ctx)?));
        }
    }

    // [boundary]
    let (_, header, lines) = require("boundary")?;
    let ctx = "section [boundary]";
    let (mut alpha, mut beta) = (None, None);
    for line in lines {
        let (key, value) = split_key(line, ctx)?;
        let slot = match key {
            "alpha" => &mut alpha,
            "beta" => &mut beta,
            _ => return Err(format_error(ctx, line.number, line.column, format!("unknown key `{key}`"))),
        };
        let v: Vec<T> = vector(&value, ctx)?;
        if v.len() != dim {
            return Err(format_error(
                ctx,
                value.number,
                value.column,
                format!("expected {dim} values, found {}", v.len()),
            ));
        }
        *slot = Some(v);
    }
    let alpha = alpha.ok_or_else(|| format_error(ctx, *header, 0, "missing `alpha`"))?;
    let beta = beta.ok_or_else(|| format_error(ctx, *header, 0, "missing `beta`"))?;

    // [solver]
    let mut solver = SolverOptions::default();
    if let Some((_, _, lines)) = find("solver") {
        let ctx = "section [solver]";
        for line in lines {
            let (key, value) = split_key(line, ctx)?;
            match key {
                "grad_tol" => solver.grad_tol = number(&value, ctx)?,
                "constraint_tol" => solver.constraint_tol = number(&value, ctx)?,
                "det_tol" => solver.det_tol = number(&value, ctx)?,
                "max_inner_iterations" => solver.max_inner_iterations = integer(&value, ctx)?,
                "max_outer_iterations" => solver.max_outer_iterations = integer(&value, ctx)?,
                "seed" => solver.seed = integer(&value, ctx)? as u64,
                "multistart" => solver.multistart = integer(&value, ctx)?,
                _ => return Err(format_error(ctx, line.number, line.column, format!("unknown key `{key}`"))),
            }
        }
    }

    Ok(ProblemFile {
        timescale,
        resolution,
        dim,
        objectives,
        constraints,
        alpha,
        beta,
        solver,
    })
}

/// `t,y1,..,yn` table of a grid function.
pub fn write_solution<T: Scalar>(y: &GridFunction<T>) -> String {
    let mut out = String::from("t");
    for k in 1..=y.dim() {
        write!(out, ",y{k}").unwrap();
    }
    out.push('\n');
    for (i, t) in y.grid().points().iter().enumerate() {
        write!(out, "{t}").unwrap();
        for v in y.at(i) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Times and row-major values of a solution table.
pub fn read_solution_table<T: Scalar>(text: &str) -> Result<(Vec<T>, usize, Vec<T>)> {
    let ctx = "solution table";
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| format_error(ctx, 0, 0, "empty table"))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let dim = columns.len().saturating_sub(1);
    let expected_header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=dim).map(|k| format!("y{k}")))
        .collect();
    if dim == 0 || columns != expected_header {
        return Err(format_error(ctx, 1, 0, "header must be `t,y1,..,yn`"));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, raw) in lines {
        let number = i + 1;
        let mut start = 0;
        let mut count = 0;
        for (c, part) in raw.split(',').enumerate() {
            let cell = trimmed(part, start, number);
            let v: T = self::number(&cell, ctx)?;
            if c == 0 {
                times.push(v);
            } else {
                values.push(v);
            }
            start += part.len() + 1;
            count += 1;
        }
        if count != dim + 1 {
            return Err(format_error(
                ctx,
                number,
                0,
                format!("expected {} columns, found {count}", dim + 1),
            ));
        }
    }
    Ok((times, dim, values))
}

/// Reads a solution table and checks it against the problem's grid.
pub fn read_solution<T: Scalar>(text: &str, problem: &VariationalProblem<T>) -> Result<GridFunction<T>> {
    let (times, dim, values) = read_solution_table::<T>(text)?;
    if dim != problem.dim() {
        return Err(Error::GridMismatch(format!(
            "solution has {dim} components, the problem has {}",
            problem.dim()
        )));
    }
    problem.grid().check_matches(&times, lit(GRID_MATCH_TOL))?;
    GridFunction::new(problem.grid().clone(), dim, values)
}

/// `functional,value` table with objectives, constraint values and violations.
pub fn functional_table<T: Scalar>(values: &FunctionalValue<T>) -> String {
    let mut out = String::from("functional,value\n");
    for (i, v) in values.objectives.iter().enumerate() {
        writeln!(out, "L{},{v}", i + 1).unwrap();
    }
    for (i, (v, r)) in values.constraints.iter().zip(&values.violations).enumerate() {
        writeln!(out, "G{},{v}", i + 1).unwrap();
        writeln!(out, "G{}_violation,{r}", i + 1).unwrap();
    }
    out
}

/// `key,value` summary of a solve.
pub fn solve_report<T: Scalar>(result: &SolveResult<T>, el: &ElReport<T>) -> String {
    let mut out = String::from("key,value\n");
    writeln!(out, "status,{}", result.status).unwrap();
    writeln!(out, "objective,{}", result.objective).unwrap();
    for (i, l) in result.multipliers.iter().enumerate() {
        writeln!(out, "lambda{},{l}", i + 1).unwrap();
    }
    for (i, v) in result.violations.iter().enumerate() {
        writeln!(out, "violation{},{v}", i + 1).unwrap();
    }
    writeln!(out, "grad_norm,{}", result.grad_norm).unwrap();
    writeln!(out, "el_residual_max,{}", el.max_residual).unwrap();
    writeln!(out, "dr_spread,{}", el.dr_spread).unwrap();
    writeln!(out, "iterations,{}", result.iterations).unwrap();
    writeln!(out, "outer_iterations,{}", result.outer_iterations).unwrap();
    writeln!(out, "seed,{}", result.seed).unwrap();
    out
}

/// One row per entry: `gamma1..gammad,L1..Ld,solution`.
pub fn front_table<T: Scalar>(front: &ParetoFront<T>, paths: &[String]) -> String {
    let d = front.entries.first().map_or(0, |e| e.weights.len());
    let mut out = String::new();
    for i in 1..=d {
        write!(out, "gamma{i},").unwrap();
    }
    for i in 1..=d {
        write!(out, "L{i},").unwrap();
    }
    out.push_str("solution\n");
    for (e, path) in front.entries.iter().zip(paths) {
        for g in &e.weights {
            write!(out, "{g},").unwrap();
        }
        for l in &e.objectives {
            write!(out, "{l},").unwrap();
        }
        writeln!(out, "{path}").unwrap();
    }
    out
}

fn floats<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|&x| to_f64(x)).collect()
}

/// Structured diagnostics for a front:
///
/// ```text
/// { "grid": k, "dominated_removed": n,
///   "entries": [ { "weights", "objectives", "solution", "status",
///                  "objective", "multipliers", "violations", "grad_norm",
///                  "iterations", "outer_iterations", "seed" } ],
///   "failures": [ { "weights", "reason" } ] }
/// ```
pub fn front_diagnostics<T: Scalar>(front: &ParetoFront<T>, k: usize, paths: &[String]) -> String {
    let entries: Vec<_> = front
        .entries
        .iter()
        .zip(paths)
        .map(|(e, path)| {
            let r = &e.result;
            json!({
                "weights": floats(&e.weights),
                "objectives": floats(&e.objectives),
                "solution": path,
                "status": r.status.to_string(),
                "objective": to_f64(r.objective),
                "multipliers": floats(&r.multipliers),
                "violations": floats(&r.violations),
                "grad_norm": to_f64(r.grad_norm),
                "iterations": r.iterations,
                "outer_iterations": r.outer_iterations,
                "seed": r.seed,
            })
        })
        .collect();
    let failures: Vec<_> = front
        .failures
        .iter()
        .map(|f| json!({ "weights": floats(&f.weights), "reason": f.reason }))
        .collect();
    let doc = json!({
        "grid": k,
        "dominated_removed": front.dominated_removed,
        "entries": entries,
        "failures": failures,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json");
    s.push('\n');
    s
}
