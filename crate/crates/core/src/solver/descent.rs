//! Augmented Lagrangian of a scalarized problem and its inner minimizer:
//! gradient descent in a discrete Sobolev metric with backtracking.

use crate::calculus::GridFunction;
use crate::error::Result;
use crate::linalg::Tridiagonal;
use crate::problem::VariationalProblem;
use crate::scalar::lit;
use crate::Scalar;

use super::{ScalarObjective, SolveStatus, SolverOptions};

/// `f(y) - sum_i lambda_i (G_i[y] - xi_i) + penalty/2 sum_i (G_i[y] - xi_i)^2`
/// as a function of the interior samples.
pub(crate) struct Augmented<'a, T> {
    pub problem: &'a VariationalProblem<T>,
    pub objective: &'a ScalarObjective<T>,
    pub multipliers: &'a [T],
    pub penalty: T,
}

impl<T: Scalar> Augmented<'_, T> {
    pub fn value(&self, x: &[T]) -> Result<T> {
        let y = self.problem.assemble(x)?;
        let mut v = self.objective.integrand().integrate(&y)?;
        for (c, &lambda) in self.problem.constraints().iter().zip(self.multipliers) {
            let r = c.integrand.integrate(&y)? - c.target;
            v += -lambda * r + self.penalty * r * r / lit(2.0);
        }
        Ok(v)
    }

    /// Value and gradient with respect to the interior samples.
    pub fn value_grad(&self, x: &[T], grad: &mut Vec<T>) -> Result<T> {
        let y = self.problem.assemble(x)?;
        let mut full = vec![T::zero(); y.values().len()];
        let mut v = self.objective.integrand().integrate(&y)?;
        self.objective
            .integrand()
            .accumulate_gradient(&y, T::one(), &mut full)?;
        for (c, &lambda) in self.problem.constraints().iter().zip(self.multipliers) {
            let r = c.integrand.integrate(&y)? - c.target;
            v += -lambda * r + self.penalty * r * r / lit(2.0);
            c.integrand
                .accumulate_gradient(&y, -lambda + self.penalty * r, &mut full)?;
        }
        let n = self.problem.dim();
        grad.clear();
        grad.extend_from_slice(&full[n..full.len() - n]);
        Ok(v)
    }
}

/// `max(|g|_inf, |g|_1 / (b - a))`.
///
/// Interior gradient entries equal `-mu(t_{j-1})` times the Euler-Lagrange
/// residual at `t_{j-1}`, so the sup part bounds the pointwise residual and
/// the `l1` part bounds the Dubois-Reymond spread.
pub(crate) fn gradient_norm<T: Scalar>(g: &[T], span: T) -> T {
    let sup = g.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let l1: T = g.iter().map(|v| v.abs()).sum();
    sup.max(l1 / span)
}

/// Inner product `sum mu (η^Δ)^2 + mu (η^σ)^2` restricted to functions that
/// vanish at both ends; one tridiagonal block per component.
pub(crate) struct SobolevMetric<T> {
    factor: Tridiagonal<T>,
    dim: usize,
}

impl<T: Scalar> SobolevMetric<T> {
    pub fn new(problem: &VariationalProblem<T>) -> Self {
        let grid = problem.grid();
        let unknowns = grid.len() - 2;
        let mut diag = Vec::with_capacity(unknowns);
        let mut off = Vec::with_capacity(unknowns.saturating_sub(1));
        for j in 1..=unknowns {
            let (left, right) = (grid.mu(j - 1), grid.mu(j));
            diag.push(T::one() / left + T::one() / right + left);
            if j < unknowns {
                off.push(-T::one() / right);
            }
        }
        SobolevMetric {
            factor: Tridiagonal::factor(&diag, &off),
            dim: problem.dim(),
        }
    }

    /// Overwrites `g` with `M^{-1} g`.
    pub fn precondition(&self, g: &mut [T]) {
        for k in 0..self.dim {
            self.factor.solve_strided(g, self.dim, k);
        }
    }
}

pub(crate) struct InnerOutcome {
    pub status: SolveStatus,
    pub iterations: usize,
}

const NOISE_REL: f64 = 1e-12;
const MAX_STEP: f64 = 1e8;

/// Minimizes `phi` from `x` (updated in place).
pub(crate) fn minimize<T: Scalar>(
    phi: &Augmented<'_, T>,
    metric: &SobolevMetric<T>,
    x: &mut Vec<T>,
    opts: &SolverOptions<T>,
    budget: usize,
) -> Result<InnerOutcome> {
    let grid = phi.problem.grid();
    let span = grid.end() - grid.start();
    let mut grad = Vec::with_capacity(x.len());
    let mut value = phi.value_grad(x, &mut grad)?;
    let mut step = T::one();
    let mut iterations = 0;
    let mut trial = vec![T::zero(); x.len()];
    let mut trial_grad = Vec::with_capacity(x.len());
    let c = opts.armijo_c;
    loop {
        if gradient_norm(&grad, span) <= opts.grad_tol {
            return Ok(InnerOutcome {
                status: SolveStatus::Converged,
                iterations,
            });
        }
        if iterations >= budget {
            return Ok(InnerOutcome {
                status: SolveStatus::MaxIterations,
                iterations,
            });
        }
        iterations += 1;

        let mut dir = grad.clone();
        metric.precondition(&mut dir);
        dir.iter_mut().for_each(|d| *d = -*d);
        let slope: T = grad.iter().zip(&dir).map(|(&g, &d)| g * d).sum();

        let mut alpha = (step * lit(2.0)).min(lit(MAX_STEP));
        let noise = lit::<T>(NOISE_REL) * (T::one() + value.abs());
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            for ((t, &xi), &di) in trial.iter_mut().zip(x.iter()).zip(&dir) {
                *t = xi + alpha * di;
            }
            // evaluation failures (domain errors, overflow) count as a too-long step
            if let Ok(f) = phi.value(&trial) {
                if (f - value).abs() <= noise {
                    // Change below rounding, where the sufficient-decrease test
                    // passes trivially: accept if the slope along `dir` has
                    // flattened without overshooting.
                    if let Ok(fv) = phi.value_grad(&trial, &mut trial_grad) {
                        let s: T = trial_grad.iter().zip(&dir).map(|(&g, &d)| g * d).sum();
                        if s >= lit::<T>(0.9) * slope && s <= -lit::<T>(0.8) * slope {
                            accepted = Some(fv);
                            break;
                        }
                    }
                } else if f <= value + c * alpha * slope {
                    let fv = phi.value_grad(&trial, &mut trial_grad)?;
                    accepted = Some(fv);
                    break;
                }
            }
            alpha *= opts.backtrack_shrink;
        }
        match accepted {
            Some(fv) => {
                std::mem::swap(x, &mut trial);
                std::mem::swap(&mut grad, &mut trial_grad);
                value = fv;
                step = alpha;
            }
            None => {
                return Ok(InnerOutcome {
                    status: SolveStatus::LineSearchFailure,
                    iterations,
                })
            }
        }
    }
}

/// Interior gradient of `f - sum lambda_i G_i` at `y`.
pub(crate) fn lagrangian_gradient<T: Scalar>(
    problem: &VariationalProblem<T>,
    objective: &ScalarObjective<T>,
    multipliers: &[T],
    y: &GridFunction<T>,
) -> Result<Vec<T>> {
    let mut full = vec![T::zero(); y.values().len()];
    objective
        .integrand()
        .accumulate_gradient(y, T::one(), &mut full)?;
    for (c, &lambda) in problem.constraints().iter().zip(multipliers) {
        c.integrand.accumulate_gradient(y, -lambda, &mut full)?;
    }
    let n = problem.dim();
    Ok(full[n..full.len() - n].to_vec())
}
