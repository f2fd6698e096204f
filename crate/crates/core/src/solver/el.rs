use std::fmt::Write as _;

use crate::calculus::{GridFunction, VecNorm};
use crate::error::{Error, Result};
use crate::expr::Point;
use crate::problem::VariationalProblem;
use crate::Scalar;

use super::{ScalarObjective, SolveResult};

/// Euler-Lagrange residual `F_v^Δ(t_i) - F_s(t_i)` for `F = L - sum lambda_i G_i`
/// at `i = 0..N-2`, plus the Dubois-Reymond constancy spread of
/// `F_v(t) - ∫_a^t F_s Δτ` over `i = 0..N-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElReport<T> {
    pub dim: usize,
    pub times: Vec<T>,
    /// Row-major, `dim` entries per time.
    pub residuals: Vec<T>,
    pub max_residual: T,
    /// Mean of `F_v - ∫ F_s` over the `k`-points.
    pub dr_constant: Vec<T>,
    pub dr_spread: T,
}

impl<T: Scalar> ElReport<T> {
    pub fn residual(&self, i: usize) -> &[T] {
        &self.residuals[i * self.dim..(i + 1) * self.dim]
    }

    /// Comma-separated table `index,t,r1..rn` with a header row.
    pub fn to_table(&self) -> String {
        let mut out = String::from("index,t");
        for k in 1..=self.dim {
            write!(out, ",r{k}").unwrap();
        }
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            write!(out, "{i},{t}").unwrap();
            for r in self.residual(i) {
                write!(out, ",{r}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub fn el_residual<T: Scalar>(
    problem: &VariationalProblem<T>,
    obj: &ScalarObjective<T>,
    result: &SolveResult<T>,
) -> Result<ElReport<T>> {
    el_residual_at(problem, obj, &result.y, &result.multipliers)
}

pub fn el_residual_at<T: Scalar>(
    problem: &VariationalProblem<T>,
    obj: &ScalarObjective<T>,
    y: &GridFunction<T>,
    multipliers: &[T],
) -> Result<ElReport<T>> {
    problem.check_function(y)?;
    if multipliers.len() != problem.constraints().len() {
        return Err(Error::DimensionMismatch {
            expected: problem.constraints().len(),
            found: multipliers.len(),
        });
    }
    let grid = y.grid();
    let n = y.dim();
    let steps = grid.steps();
    let mut f_s = vec![T::zero(); steps * n];
    let mut f_v = vec![T::zero(); steps * n];
    let mut rate = vec![T::zero(); n];
    let (mut s, mut v) = (vec![T::zero(); n], vec![T::zero(); n]);
    for i in 0..steps {
        y.delta_at(i, &mut rate);
        let at = Point::new(grid.point(i), y.at(i + 1), &rate);
        obj.integrand().partials(&at, &mut s, &mut v)?;
        for k in 0..n {
            f_s[i * n + k] = s[k];
            f_v[i * n + k] = v[k];
        }
        for (c, &lambda) in problem.constraints().iter().zip(multipliers) {
            c.integrand.partials(&at, &mut s, &mut v)?;
            for k in 0..n {
                f_s[i * n + k] -= lambda * s[k];
                f_v[i * n + k] -= lambda * v[k];
            }
        }
    }

    let count = steps.saturating_sub(1);
    let mut residuals = Vec::with_capacity(count * n);
    for i in 0..count {
        let mu = grid.mu(i);
        for k in 0..n {
            residuals.push((f_v[(i + 1) * n + k] - f_v[i * n + k]) / mu - f_s[i * n + k]);
        }
    }
    let max_residual = residuals.iter().fold(T::zero(), |m, r| m.max(r.abs()));

    // D(t_i) = F_v(t_i) - sum_{j<i} mu_j F_s(t_j)
    let mut dr = vec![T::zero(); steps * n];
    let mut integral = vec![T::zero(); n];
    for i in 0..steps {
        for k in 0..n {
            dr[i * n + k] = f_v[i * n + k] - integral[k];
            integral[k] += grid.mu(i) * f_s[i * n + k];
        }
    }
    let count_t = T::from_usize(steps).unwrap();
    let dr_constant: Vec<T> = (0..n)
        .map(|k| (0..steps).map(|i| dr[i * n + k]).sum::<T>() / count_t)
        .collect();
    let mut dr_spread = T::zero();
    let mut diff = vec![T::zero(); n];
    for i in 0..steps {
        for k in 0..n {
            diff[k] = dr[i * n + k] - dr_constant[k];
        }
        dr_spread = dr_spread.max(VecNorm::Max.apply(&diff));
    }

    Ok(ElReport {
        dim: n,
        times: grid.points()[..count].to_vec(),
        residuals,
        max_residual,
        dr_constant,
        dr_spread,
    })
}
