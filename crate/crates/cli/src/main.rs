use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tscv::io::{
    front_diagnostics, front_table, functional_table, parse_number, parse_problem_file,
    read_solution, solve_report, write_solution,
};
use tscv::pareto::{nc_crosscheck, weighted_sweep, SweepOptions, DEFAULT_NC_TOL};
use tscv::solver::{el_residual, el_residual_at, recover_multipliers, solve_scalar};
use tscv::{Error, GridFunction, ScalarObjective, SolverOptions, VariationalProblem};

const EXIT_INPUT: u8 = 2;
const EXIT_SHAPE: u8 = 3;
const EXIT_SOLVER: u8 = 4;
const EXIT_CHECK: u8 = 5;

/// Solve variational problems on time scales.
#[derive(Parser)]
#[command(name = "tscv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print objective and constraint values of a solution.
    Eval {
        problem: PathBuf,
        solution: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Minimize one objective or a weighted sum of objectives.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        select: Select,
        /// Solution file; the report goes to `<out>.report`, EL residuals to `<out>.el.csv`.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the weight simplex and write the non-dominated front.
    Pareto {
        problem: PathBuf,
        /// Weights are the interior points of the simplex with step 1/k.
        #[arg(long)]
        grid: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Solve every weight from the linear guess, in parallel.
        #[arg(long)]
        no_warm_start: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Check the first-order conditions of a solution.
    Check {
        problem: PathBuf,
        solution: PathBuf,
        #[command(flatten)]
        select: Select,
        /// Multipliers, comma separated; recovered by least squares if absent.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        /// Re-solve each objective with the others fixed at their values.
        #[arg(long)]
        nc: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Select {
    /// Positive weights summing to 1, comma separated.
    #[arg(long, conflicts_with = "objective")]
    weights: Option<String>,
    /// Single objective, 1-based.
    #[arg(long)]
    objective: Option<usize>,
}

#[derive(Args)]
struct Common {
    /// Maximum step of the grid on dense parts of the scale.
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    multistart: Option<usize>,
    #[arg(long = "tol-grad")]
    tol_grad: Option<f64>,
    #[arg(long = "tol-con")]
    tol_con: Option<f64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

/// Library errors default to input errors; shape errors get their own code.
fn classify(context: &str) -> impl Fn(Error) -> Failure + '_ {
    move |e| {
        let code = match e {
            Error::GridMismatch(_) | Error::DimensionMismatch { .. } => EXIT_SHAPE,
            _ => EXIT_INPUT,
        };
        Failure::new(code, format!("{context}: {e}"))
    }
}

type Outcome = Result<(), Failure>;

struct Loaded {
    problem: VariationalProblem,
    opts: SolverOptions,
}

fn load(path: &Path, common: &Common) -> Result<Loaded, Failure> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{name}: {e}")))?;
    let file = parse_problem_file::<f64>(&text).map_err(classify(&name))?;
    if let Some(r) = common.resolution {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Failure::new(EXIT_INPUT, "--resolution must be positive"));
        }
    }
    let problem = file
        .build_with_resolution(common.resolution.unwrap_or(file.resolution))
        .map_err(classify(&name))?;
    let mut opts = file.solver.clone();
    if let Some(s) = common.seed {
        opts.seed = s;
    }
    if let Some(k) = common.multistart {
        if k == 0 {
            return Err(Failure::new(EXIT_INPUT, "--multistart must be at least 1"));
        }
        opts.multistart = k;
    }
    for (flag, value, slot) in [
        ("--tol-grad", common.tol_grad, &mut opts.grad_tol),
        ("--tol-con", common.tol_con, &mut opts.constraint_tol),
    ] {
        if let Some(v) = value {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::new(EXIT_INPUT, format!("{flag} must be positive")));
            }
            *slot = v;
        }
    }
    Ok(Loaded {
        problem,
        opts,
    })
}

fn load_solution(path: &Path, problem: &VariationalProblem) -> Result<GridFunction, Failure> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{name}: {e}")))?;
    read_solution(&text, problem).map_err(classify(&name))
}

fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|x| {
            parse_number(x.trim())
                .ok_or_else(|| Failure::new(EXIT_INPUT, format!("{flag}: not a number: '{}'", x.trim())))
        })
        .collect()
}

fn objective(problem: &VariationalProblem, select: &Select) -> Result<ScalarObjective, Failure> {
    let d = problem.objectives().len();
    if let Some(i) = select.objective {
        if i == 0 || i > d {
            return Err(Failure::new(
                EXIT_INPUT,
                format!("--objective {i} out of range 1..={d}"),
            ));
        }
        return ScalarObjective::single(problem, i - 1).map_err(classify("--objective"));
    }
    let weights = match &select.weights {
        Some(s) => {
            let w = parse_list("--weights", s)?;
            if w.len() != d {
                return Err(Failure::new(
                    EXIT_INPUT,
                    format!("--weights: expected {d} values, got {}", w.len()),
                ));
            }
            if let Some(bad) = w.iter().find(|&&g| g.is_nan() || g <= 0.0) {
                return Err(Failure::new(
                    EXIT_INPUT,
                    format!("--weights: every weight must be positive, got {bad}"),
                ));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Failure::new(
                    EXIT_INPUT,
                    format!("--weights: weights must sum to 1, got {sum}"),
                ));
            }
            w.iter().map(|g| g / sum).collect()
        }
        None => vec![1.0 / d as f64; d],
    };
    ScalarObjective::weighted(problem, &weights).map_err(classify("--weights"))
}

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_eval(problem: &Path, solution: &Path, common: &Common) -> Outcome {
    let l = load(problem, common)?;
    let y = load_solution(solution, &l.problem)?;
    let values = l.problem.evaluate(&y).map_err(classify("evaluation"))?;
    print!("{}", functional_table(&values));
    Ok(())
}

fn cmd_solve(problem: &Path, select: &Select, out: &Path, common: &Common) -> Outcome {
    let l = load(problem, common)?;
    let obj = objective(&l.problem, select)?;
    let r = solve_scalar(&l.problem, &obj, None, &l.opts)
        .map_err(|e| Failure::new(EXIT_SOLVER, format!("solve: {e}")))?;
    let el = el_residual(&l.problem, &obj, &r)
        .map_err(|e| Failure::new(EXIT_SOLVER, format!("residual: {e}")))?;
    let report = solve_report(&r, &el);
    write(out, &write_solution(&r.y))?;
    write(&with_suffix(out, ".report"), &report)?;
    write(&with_suffix(out, ".el.csv"), &el.to_table())?;
    print!("{report}");
    if r.converged() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_SOLVER, format!("solver stopped: {}", r.status)))
    }
}

fn cmd_pareto(problem: &Path, grid: usize, out: &Path, no_warm_start: bool, common: &Common) -> Outcome {
    let l = load(problem, common)?;
    let d = l.problem.objectives().len();
    if d < 2 {
        return Err(Failure::new(
            EXIT_INPUT,
            format!("a front needs at least two objectives, the problem has {d}"),
        ));
    }
    let opts = SweepOptions {
        solver: l.opts.clone(),
        warm_start: !no_warm_start,
        ..SweepOptions::default()
    };
    let front = weighted_sweep(&l.problem, grid, &opts).map_err(classify("pareto"))?;
    if front.entries.is_empty() {
        return Err(Failure::new(
            EXIT_SOLVER,
            format!("all {} solves failed", front.failures.len()),
        ));
    }
    fs::create_dir_all(out)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", out.display())))?;
    let width = front.entries.len().to_string().len().max(3);
    let paths: Vec<String> = (0..front.entries.len())
        .map(|i| format!("entry_{i:0width$}.csv"))
        .collect();
    for (e, name) in front.entries.iter().zip(&paths) {
        write(&out.join(name), &write_solution(e.y()))?;
    }
    let table = front_table(&front, &paths);
    write(&out.join("front.csv"), &table)?;
    write(&out.join("diagnostics.json"), &front_diagnostics(&front, grid, &paths))?;
    print!("{table}");
    for f in &front.failures {
        eprintln!("weights {:?} failed: {}", f.weights, f.reason);
    }
    Ok(())
}

fn cmd_check(
    problem: &Path,
    solution: &Path,
    select: &Select,
    lambda: Option<&str>,
    nc: bool,
    common: &Common,
) -> Outcome {
    let l = load(problem, common)?;
    let p = &l.problem;
    let y = load_solution(solution, p)?;
    let obj = objective(p, select)?;
    let m = p.constraints().len();
    let multipliers = match lambda {
        Some(s) => {
            let v = parse_list("--lambda", s)?;
            if v.len() != m {
                return Err(Failure::new(
                    EXIT_INPUT,
                    format!("--lambda: expected {m} values, got {}", v.len()),
                ));
            }
            v
        }
        None => recover_multipliers(p, &obj, &y)
            .map_err(classify("multipliers"))?
            .ok_or_else(|| {
                Failure::new(
                    EXIT_INPUT,
                    "multipliers are not recoverable (dependent constraint gradients); pass --lambda",
                )
            })?,
    };
    let el = el_residual_at(p, &obj, &y, &multipliers).map_err(classify("residual"))?;
    let values = p.evaluate(&y).map_err(classify("evaluation"))?;

    let grid = p.grid();
    let el_tol = 10.0 * l.opts.grad_tol / grid.min_mu();
    let dr_tol = 10.0 * l.opts.grad_tol * (grid.end() - grid.start());
    let mut pass = el.max_residual <= el_tol && el.dr_spread <= dr_tol;

    let mut out = String::from("check,value,tolerance,pass\n");
    let mut row = |name: &str, value: f64, tol: f64, ok: bool| {
        writeln!(out, "{name},{value},{tol},{ok}").unwrap();
    };
    row("el_residual_max", el.max_residual, el_tol, el.max_residual <= el_tol);
    row("dr_spread", el.dr_spread, dr_tol, el.dr_spread <= dr_tol);
    for (i, v) in values.violations.iter().enumerate() {
        let ok = v.abs() <= l.opts.constraint_tol;
        pass &= ok;
        row(&format!("violation{}", i + 1), *v, l.opts.constraint_tol, ok);
    }
    for (i, v) in multipliers.iter().enumerate() {
        writeln!(out, "lambda{},{v},,", i + 1).unwrap();
    }
    if nc {
        if p.objectives().len() < 2 {
            writeln!(out, "nc,skipped: single objective,,").unwrap();
        } else {
            for i in 0..p.objectives().len() {
                let r = nc_crosscheck(p, &y, i, &l.opts).map_err(classify("nc"))?;
                match r.passes(DEFAULT_NC_TOL) {
                    Some(ok) => {
                        pass &= ok;
                        let d = r.improvement.unwrap_or(f64::NAN);
                        writeln!(out, "nc_improvement{},{d},{DEFAULT_NC_TOL},{ok}", i + 1).unwrap();
                    }
                    None => {
                        pass = false;
                        writeln!(out, "nc_improvement{},inconclusive ({}),{DEFAULT_NC_TOL},false", i + 1, r.status)
                            .unwrap();
                    }
                }
            }
        }
    }
    print!("{out}");
    if pass {
        Ok(())
    } else {
        Err(Failure::new(EXIT_CHECK, "check failed"))
    }
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Eval {
            problem,
            solution,
            common,
        } => cmd_eval(problem, solution, common),
        Command::Solve {
            problem,
            select,
            out,
            common,
        } => cmd_solve(problem, select, out, common),
        Command::Pareto {
            problem,
            grid,
            out,
            no_warm_start,
            common,
        } => cmd_pareto(problem, *grid, out, *no_warm_start, common),
        Command::Check {
            problem,
            solution,
            select,
            lambda,
            nc,
            common,
        } => cmd_check(problem, solution, select, lambda.as_deref(), *nc, common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
