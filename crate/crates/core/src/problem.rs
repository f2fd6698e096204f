//! Variational problems: objectives, isoperimetric constraints and fixed
//! boundary values on a sampled time scale.

use std::sync::Arc;

use crate::calculus::GridFunction;
use crate::error::{Error, Result};
use crate::expr::{self, Expr, Point, Var};
use crate::scalar::lit;
use crate::timescale::{GridTimeScale, TimeScale};
use crate::Scalar;

/// Sampling step used for continuous segments when none is given.
pub const DEFAULT_RESOLUTION: f64 = 1e-2;

/// An integrand `L(t, y^σ, y^Δ)` together with its symbolic partials.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrand {
    expr: Expr,
    d_state: Vec<Expr>,
    d_rate: Vec<Expr>,
}

impl Integrand {
    pub fn new(expr: Expr, dim: usize) -> Result<Self> {
        if expr.max_index() > dim {
            return Err(Error::InvalidProblem(format!(
                "expression `{expr}` uses index {} but the dimension is {dim}",
                expr.max_index()
            )));
        }
        let d_state = (0..dim).map(|k| expr.diff(Var::Y(k))).collect();
        let d_rate = (0..dim).map(|k| expr.diff(Var::V(k))).collect();
        Ok(Integrand {
            expr,
            d_state,
            d_rate,
        })
    }

    pub fn parse(src: &str, dim: usize) -> Result<Self> {
        Self::new(expr::parse(src, dim)?, dim)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn dim(&self) -> usize {
        self.d_state.len()
    }

    /// `∂L/∂y_k` as an expression.
    pub fn d_state(&self) -> &[Expr] {
        &self.d_state
    }

    /// `∂L/∂v_k` as an expression.
    pub fn d_rate(&self) -> &[Expr] {
        &self.d_rate
    }

    pub fn value<T: Scalar>(&self, at: &Point<'_, T>) -> Result<T> {
        self.expr.eval(at)
    }

    /// Writes `L_s` and `L_v` at `at` into the two output slices.
    pub fn partials<T: Scalar>(&self, at: &Point<'_, T>, s: &mut [T], v: &mut [T]) -> Result<()> {
        for (k, e) in self.d_state.iter().enumerate() {
            s[k] = if e.is_zero() { T::zero() } else { e.eval(at)? };
        }
        for (k, e) in self.d_rate.iter().enumerate() {
            v[k] = if e.is_zero() { T::zero() } else { e.eval(at)? };
        }
        Ok(())
    }

    /// `sum_i mu(t_i) L(t_i, y^σ(t_i), y^Δ(t_i))` over `i = 0..N-1`.
    pub fn integrate<T: Scalar>(&self, y: &GridFunction<T>) -> Result<T> {
        let grid = y.grid();
        let mut rate = vec![T::zero(); y.dim()];
        let mut acc = T::zero();
        for i in 0..grid.steps() {
            y.delta_at(i, &mut rate);
            let at = Point::new(grid.point(i), y.at(i + 1), &rate);
            acc += grid.mu(i) * self.value(&at)?;
        }
        Ok(acc)
    }

    /// Directional derivative of [`Integrand::integrate`] at `y` along `eta`.
    pub fn first_variation<T: Scalar>(&self, y: &GridFunction<T>, eta: &GridFunction<T>) -> Result<T> {
        let grid = y.grid();
        let n = y.dim();
        let (mut rate, mut eta_rate) = (vec![T::zero(); n], vec![T::zero(); n]);
        let (mut ls, mut lv) = (vec![T::zero(); n], vec![T::zero(); n]);
        let mut acc = T::zero();
        for i in 0..grid.steps() {
            y.delta_at(i, &mut rate);
            eta.delta_at(i, &mut eta_rate);
            let at = Point::new(grid.point(i), y.at(i + 1), &rate);
            self.partials(&at, &mut ls, &mut lv)?;
            let eta_sigma = eta.at(i + 1);
            let mut term = T::zero();
            for k in 0..n {
                term += ls[k] * eta_sigma[k] + lv[k] * eta_rate[k];
            }
            acc += grid.mu(i) * term;
        }
        Ok(acc)
    }

    /// Adds `weight * ∂/∂y(t_j)` of the discretized functional to `out`, for
    /// every sample `j` (`out` has `len * dim` entries).
    pub fn accumulate_gradient<T: Scalar>(
        &self,
        y: &GridFunction<T>,
        weight: T,
        out: &mut [T],
    ) -> Result<()> {
        let grid = y.grid();
        let n = y.dim();
        let mut rate = vec![T::zero(); n];
        let (mut ls, mut lv) = (vec![T::zero(); n], vec![T::zero(); n]);
        for i in 0..grid.steps() {
            y.delta_at(i, &mut rate);
            let at = Point::new(grid.point(i), y.at(i + 1), &rate);
            self.partials(&at, &mut ls, &mut lv)?;
            let mu = grid.mu(i);
            for k in 0..n {
                // y(t_{i+1}) enters through y^σ(t_i) and y^Δ(t_i); y(t_i) through y^Δ(t_i)
                out[(i + 1) * n + k] += weight * (mu * ls[k] + lv[k]);
                out[i * n + k] -= weight * lv[k];
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub integrand: Integrand,
    pub target: T,
}

/// Selects one functional of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    Objective(usize),
    Constraint(usize),
}

/// Values of all functionals of a problem at one function.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalValue<T> {
    pub objectives: Vec<T>,
    pub constraints: Vec<T>,
    /// `G_i[y] - xi_i`.
    pub violations: Vec<T>,
}

impl<T: Scalar> FunctionalValue<T> {
    pub fn max_violation(&self) -> T {
        self.violations
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Objectives `L_i`, constraints `G_i[y] = xi_i` and boundary values
/// `y(a) = alpha`, `y(b) = beta` on a sampled time scale.
#[derive(Debug, Clone)]
pub struct VariationalProblem<T> {
    timescale: TimeScale<T>,
    grid: Arc<GridTimeScale<T>>,
    dim: usize,
    objectives: Vec<Integrand>,
    constraints: Vec<Constraint<T>>,
    alpha: Vec<T>,
    beta: Vec<T>,
}

impl<T: Scalar> VariationalProblem<T> {
    pub fn builder(timescale: TimeScale<T>, dim: usize) -> ProblemBuilder<T> {
        ProblemBuilder {
            timescale,
            dim,
            resolution: lit(DEFAULT_RESOLUTION),
            objectives: Vec::new(),
            constraints: Vec::new(),
            alpha: None,
            beta: None,
        }
    }

    pub fn timescale(&self) -> &TimeScale<T> {
        &self.timescale
    }

    pub fn grid(&self) -> &Arc<GridTimeScale<T>> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objectives(&self) -> &[Integrand] {
        &self.objectives
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    pub fn integrand(&self, f: Functional) -> Result<&Integrand> {
        match f {
            Functional::Objective(i) => self.objectives.get(i),
            Functional::Constraint(i) => self.constraints.get(i).map(|c| &c.integrand),
        }
        .ok_or_else(|| Error::InvalidArgument(format!("no functional {f:?}")))
    }

    /// Same problem with different objectives and constraints.
    pub fn with_functionals(&self, objectives: Vec<Integrand>, constraints: Vec<Constraint<T>>) -> Result<Self> {
        let mut p = self.clone();
        p.objectives = objectives;
        p.constraints = constraints;
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.objectives.is_empty() {
            return Err(Error::InvalidProblem("at least one objective is required".into()));
        }
        let dims = self
            .objectives
            .iter()
            .chain(self.constraints.iter().map(|c| &c.integrand))
            .map(Integrand::dim);
        for d in dims {
            if d != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: d,
                });
            }
        }
        if self.constraints.iter().any(|c| !c.target.is_finite()) {
            return Err(Error::InvalidProblem("constraint target is not finite".into()));
        }
        Ok(())
    }

    /// Checks that `y` lives on this problem's grid with its dimension.
    pub fn check_function(&self, y: &GridFunction<T>) -> Result<()> {
        if y.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: y.dim(),
            });
        }
        if !Arc::ptr_eq(y.grid(), &self.grid) && **y.grid() != *self.grid {
            return Err(Error::GridMismatch("function is not sampled on the problem grid".into()));
        }
        Ok(())
    }

    /// Linear interpolation between the boundary values.
    pub fn linear_guess(&self) -> GridFunction<T> {
        let (a, b) = (self.grid.start(), self.grid.end());
        let (alpha, beta) = (self.alpha.clone(), self.beta.clone());
        GridFunction::from_fn(self.grid.clone(), self.dim, |t| {
            let s = (t - a) / (b - a);
            alpha
                .iter()
                .zip(&beta)
                .map(|(&l, &r)| l + (r - l) * s)
                .collect()
        })
        .expect("interpolant has the problem shape")
    }

    /// Grid function with the boundary values and the given interior samples.
    pub fn assemble(&self, interior: &[T]) -> Result<GridFunction<T>> {
        let n = self.dim;
        let expected = (self.grid.len().saturating_sub(2)) * n;
        if interior.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: interior.len(),
            });
        }
        let mut values = Vec::with_capacity(self.grid.len() * n);
        values.extend_from_slice(&self.alpha);
        values.extend_from_slice(interior);
        values.extend_from_slice(&self.beta);
        GridFunction::new(self.grid.clone(), n, values)
    }

    /// Interior samples of `y`, the solver's unknowns.
    pub fn interior<'a>(&self, y: &'a GridFunction<T>) -> &'a [T] {
        let n = self.dim;
        &y.values()[n..y.values().len() - n]
    }

    pub fn evaluate(&self, y: &GridFunction<T>) -> Result<FunctionalValue<T>> {
        self.check_function(y)?;
        let objectives = self
            .objectives
            .iter()
            .map(|l| l.integrate(y))
            .collect::<Result<Vec<_>>>()?;
        let constraints = self
            .constraints
            .iter()
            .map(|c| c.integrand.integrate(y))
            .collect::<Result<Vec<_>>>()?;
        let violations = constraints
            .iter()
            .zip(&self.constraints)
            .map(|(&g, c)| g - c.target)
            .collect();
        Ok(FunctionalValue {
            objectives,
            constraints,
            violations,
        })
    }

    /// Gateaux derivative of the discretized functional `f` at `y` along `eta`.
    pub fn gateaux(&self, f: Functional, y: &GridFunction<T>, eta: &GridFunction<T>) -> Result<T> {
        self.check_function(y)?;
        self.check_function(eta)?;
        self.integrand(f)?.first_variation(y, eta)
    }
}

/// Builder for [`VariationalProblem`].
#[derive(Debug, Clone)]
pub struct ProblemBuilder<T> {
    timescale: TimeScale<T>,
    dim: usize,
    resolution: T,
    objectives: Vec<std::result::Result<Integrand, Error>>,
    constraints: Vec<(std::result::Result<Integrand, Error>, T)>,
    alpha: Option<Vec<T>>,
    beta: Option<Vec<T>>,
}

impl<T: Scalar> ProblemBuilder<T> {
    pub fn resolution(mut self, resolution: T) -> Self {
        self.resolution = resolution;
        self
    }

    /// Adds an objective given as source text.
    pub fn objective(mut self, src: &str) -> Self {
        self.objectives.push(Integrand::parse(src, self.dim));
        self
    }

    pub fn objective_expr(mut self, e: Expr) -> Self {
        self.objectives.push(Integrand::new(e, self.dim));
        self
    }

    /// Adds the constraint `∫ G Δt = target`.
    pub fn constraint(mut self, src: &str, target: T) -> Self {
        self.constraints.push((Integrand::parse(src, self.dim), target));
        self
    }

    pub fn constraint_expr(mut self, e: Expr, target: T) -> Self {
        self.constraints.push((Integrand::new(e, self.dim), target));
        self
    }

    pub fn boundary(mut self, alpha: Vec<T>, beta: Vec<T>) -> Self {
        self.alpha = Some(alpha);
        self.beta = Some(beta);
        self
    }

    pub fn build(self) -> Result<VariationalProblem<T>> {
        if self.dim == 0 {
            return Err(Error::InvalidProblem("dimension must be at least 1".into()));
        }
        let objectives = self.objectives.into_iter().collect::<Result<Vec<_>>>()?;
        let constraints = self
            .constraints
            .into_iter()
            .map(|(g, target)| g.map(|integrand| Constraint { integrand, target }))
            .collect::<Result<Vec<_>>>()?;
        let (alpha, beta) = match (self.alpha, self.beta) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::InvalidProblem("boundary values are required".into())),
        };
        for v in [&alpha, &beta] {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidProblem("boundary value is not finite".into()));
            }
        }
        if !(self.timescale.min() < self.timescale.max()) {
            return Err(Error::DegenerateScale("time scale must satisfy a < b".into()));
        }
        let grid = Arc::new(self.timescale.sample(self.resolution)?);
        let p = VariationalProblem {
            timescale: self.timescale,
            grid,
            dim: self.dim,
            objectives,
            constraints,
            alpha,
            beta,
        };
        p.validate()?;
        Ok(p)
    }
}
