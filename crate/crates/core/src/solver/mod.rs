//! Scalarized minimization with isoperimetric constraints, and first-order
//! optimality diagnostics.
//!
//! Constraints are handled by an augmented Lagrangian
//! `f - sum lambda_i (G_i - xi_i) + penalty/2 sum (G_i - xi_i)^2` with the
//! update `lambda <- lambda - penalty (G - xi)`, so at a solution
//! `F = L - sum lambda_i G_i` is stationary. Inner problems are solved by
//! gradient descent with Armijo backtracking, taking gradients in a discrete
//! `H^1` metric (see [`descent`]).

mod brute;
mod descent;
mod el;
mod regularity;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::GridFunction;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg;
use crate::problem::{Integrand, VariationalProblem};
use crate::scalar::lit;
use crate::Scalar;

pub use brute::{brute_force_oracle, BruteForceOptions, BruteForceResult, Lattice};
pub use el::{el_residual, el_residual_at, ElReport};
pub use regularity::{random_directions, regularity_matrix, regularity_probe};

/// The scalar functional `sum_i gamma_i L_i` handed to the solver.
#[derive(Debug, Clone)]
pub struct ScalarObjective<T> {
    weights: Vec<T>,
    integrand: Integrand,
}

impl<T: Scalar> ScalarObjective<T> {
    /// Weighted sum of all objectives; the combined integrand is built
    /// symbolically.
    pub fn weighted(problem: &VariationalProblem<T>, weights: &[T]) -> Result<Self> {
        let d = problem.objectives().len();
        if weights.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite".into()));
        }
        let mut combined = Expr::num(0.0);
        for (w, l) in weights.iter().zip(problem.objectives()) {
            let w = w.to_f64().unwrap();
            combined = Expr::add(combined, Expr::mul(Expr::num(w), l.expr().clone()));
        }
        Ok(ScalarObjective {
            weights: weights.to_vec(),
            integrand: Integrand::new(combined, problem.dim())?,
        })
    }

    /// A single objective.
    pub fn single(problem: &VariationalProblem<T>, index: usize) -> Result<Self> {
        let d = problem.objectives().len();
        if index >= d {
            return Err(Error::InvalidArgument(format!(
                "objective index {index} out of range for {d} objectives"
            )));
        }
        let mut weights = vec![T::zero(); d];
        weights[index] = T::one();
        Ok(ScalarObjective {
            weights,
            integrand: problem.objectives()[index].clone(),
        })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn integrand(&self) -> &Integrand {
        &self.integrand
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    LineSearchFailure,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::MaxIterations => "MaxIterations",
            SolveStatus::LineSearchFailure => "LineSearchFailure",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    pub grad_tol: T,
    pub constraint_tol: T,
    pub det_tol: T,
    /// Inner iteration budget per augmented Lagrangian subproblem.
    pub max_inner_iterations: usize,
    pub max_outer_iterations: usize,
    pub armijo_c: T,
    pub backtrack_shrink: T,
    pub max_backtracks: usize,
    pub initial_penalty: T,
    pub penalty_growth: T,
    /// The penalty grows when the violation shrinks by less than this factor.
    pub violation_shrink: T,
    /// Number of starts; starts after the first are seeded perturbations.
    pub multistart: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            grad_tol: lit(1e-8),
            constraint_tol: lit(1e-8),
            det_tol: lit(1e-10),
            max_inner_iterations: 10_000,
            max_outer_iterations: 50,
            armijo_c: lit(1e-4),
            backtrack_shrink: lit(0.5),
            max_backtracks: 60,
            initial_penalty: T::one(),
            penalty_growth: lit(10.0),
            violation_shrink: lit(4.0),
            multistart: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub y: GridFunction<T>,
    pub multipliers: Vec<T>,
    pub objective: T,
    pub violations: Vec<T>,
    /// `max(|g|_inf, |g|_1 / (b - a))` of the Lagrangian gradient at exit.
    pub grad_norm: T,
    pub iterations: usize,
    pub outer_iterations: usize,
    pub penalty: T,
    pub status: SolveStatus,
    pub seed: u64,
    /// Index of the start that produced this result.
    pub start: usize,
}

impl<T: Scalar> SolveResult<T> {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn max_violation(&self) -> T {
        self.violations
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Minimizes `obj` subject to the problem's boundary values and
/// constraints. Starts from `init`, or from the linear interpolant of the
/// boundary values.
///
/// A `Converged` result is a stationary point of the discretized problem
/// and a candidate weak local minimum; global optimality is not certified.
pub fn solve_scalar<T: Scalar>(
    problem: &VariationalProblem<T>,
    obj: &ScalarObjective<T>,
    init: Option<&GridFunction<T>>,
    opts: &SolverOptions<T>,
) -> Result<SolveResult<T>> {
    if problem.grid().len() < 3 {
        return Err(Error::DegenerateScale(
            "solving needs at least one interior grid point".into(),
        ));
    }
    let base = match init {
        Some(y) => {
            problem.check_function(y)?;
            problem.interior(y).to_vec()
        }
        None => problem.interior(&problem.linear_guess()).to_vec(),
    };
    let starts = opts.multistart.max(1);
    let mut best: Option<SolveResult<T>> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let amplitude = lit::<T>(0.1) * (T::one() + base.iter().fold(T::zero(), |m, v| m.max(v.abs())));
    for start in 0..starts {
        let mut x = base.clone();
        if start > 0 {
            for v in &mut x {
                *v += amplitude * lit(rng.gen_range(-1.0..=1.0));
            }
        }
        let mut result = solve_from(problem, obj, x, opts)?;
        result.start = start;
        let better = match &best {
            None => true,
            Some(b) => match (result.converged(), b.converged()) {
                (true, false) => true,
                (false, true) => false,
                _ => result.objective < b.objective,
            },
        };
        if better {
            best = Some(result);
        }
    }
    Ok(best.expect("at least one start"))
}

fn solve_from<T: Scalar>(
    problem: &VariationalProblem<T>,
    obj: &ScalarObjective<T>,
    mut x: Vec<T>,
    opts: &SolverOptions<T>,
) -> Result<SolveResult<T>> {
    let m = problem.constraints().len();
    let metric = descent::SobolevMetric::new(problem);
    let mut multipliers = vec![T::zero(); m];
    let mut penalty = opts.initial_penalty;
    let mut previous_violation = T::infinity();
    let mut iterations = 0;
    let mut outer = 0;
    let mut status;
    loop {
        outer += 1;
        let phi = descent::Augmented {
            problem,
            objective: obj,
            multipliers: &multipliers,
            penalty,
        };
        let inner = descent::minimize(&phi, &metric, &mut x, opts, opts.max_inner_iterations)?;
        iterations += inner.iterations;
        status = inner.status;
        if m == 0 || status != SolveStatus::Converged {
            break;
        }
        let y = problem.assemble(&x)?;
        let violation: Vec<T> = problem
            .constraints()
            .iter()
            .map(|c| Ok(c.integrand.integrate(&y)? - c.target))
            .collect::<Result<_>>()?;
        for (l, &r) in multipliers.iter_mut().zip(&violation) {
            *l -= penalty * r;
        }
        let worst = violation.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        if worst <= opts.constraint_tol {
            break;
        }
        if outer >= opts.max_outer_iterations {
            status = SolveStatus::MaxIterations;
            break;
        }
        if worst > previous_violation / opts.violation_shrink {
            penalty *= opts.penalty_growth;
        }
        previous_violation = worst;
    }

    let y = problem.assemble(&x)?;
    let values = problem.evaluate(&y)?;
    let objective = obj.integrand().integrate(&y)?;
    let grid = problem.grid();
    let grad = descent::lagrangian_gradient(problem, obj, &multipliers, &y)?;
    let grad_norm = descent::gradient_norm(&grad, grid.end() - grid.start());
    if status == SolveStatus::Converged
        && (grad_norm > opts.grad_tol || values.max_violation() > opts.constraint_tol)
    {
        // inner tolerance met for the penalized function but not for the
        // Lagrangian at the updated multipliers
        status = SolveStatus::MaxIterations;
    }
    Ok(SolveResult {
        y,
        multipliers,
        objective,
        violations: values.violations,
        grad_norm,
        iterations,
        outer_iterations: outer,
        penalty,
        status,
        seed: opts.seed,
        start: 0,
    })
}

/// Least-squares multipliers for `y`: minimizes the gradient of
/// `f - sum lambda_i G_i` over the interior samples. `None` when the
/// constraint gradients are linearly dependent.
pub fn recover_multipliers<T: Scalar>(
    problem: &VariationalProblem<T>,
    obj: &ScalarObjective<T>,
    y: &GridFunction<T>,
) -> Result<Option<Vec<T>>> {
    problem.check_function(y)?;
    let m = problem.constraints().len();
    if m == 0 {
        return Ok(Some(Vec::new()));
    }
    let f_grad = descent::lagrangian_gradient(problem, obj, &[], y)?;
    let mut cols = Vec::with_capacity(m);
    for c in problem.constraints() {
        let mut full = vec![T::zero(); y.values().len()];
        c.integrand.accumulate_gradient(y, T::one(), &mut full)?;
        let n = problem.dim();
        cols.push(full[n..full.len() - n].to_vec());
    }
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>();
    let normal: Vec<Vec<T>> = cols
        .iter()
        .map(|ci| cols.iter().map(|cj| dot(ci, cj)).collect())
        .collect();
    let rhs: Vec<T> = cols.iter().map(|c| dot(c, &f_grad)).collect();
    Ok(linalg::solve(&normal, &rhs, lit(1e-12)))
}
