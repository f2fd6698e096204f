//! Variational problems on time scales.
//!
//! The numerical types are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common cases.

// `!(x > y)` comparisons deliberately treat NaN as failing.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod expr;
pub mod io;
pub mod linalg;
pub mod pareto;
pub mod problem;
pub mod scalar;
pub mod solver;
pub mod timescale;

pub use error::{Error, Result};
pub use scalar::{lit, Scalar};

pub type TimeScale = timescale::TimeScale<f64>;
pub type GridTimeScale = timescale::GridTimeScale<f64>;
pub type GridFunction = calculus::GridFunction<f64>;
pub type VariationalProblem = problem::VariationalProblem<f64>;
pub type ScalarObjective = solver::ScalarObjective<f64>;
pub type SolverOptions = solver::SolverOptions<f64>;
pub type SolveResult = solver::SolveResult<f64>;
pub type ParetoFront = pareto::ParetoFront<f64>;

pub type TimeScaleF32 = timescale::TimeScale<f32>;
pub type GridTimeScaleF32 = timescale::GridTimeScale<f32>;
pub type GridFunctionF32 = calculus::GridFunction<f32>;
pub type VariationalProblemF32 = problem::VariationalProblem<f32>;
pub type ScalarObjectiveF32 = solver::ScalarObjective<f32>;
pub type SolverOptionsF32 = solver::SolverOptions<f32>;
pub type SolveResultF32 = solver::SolveResult<f32>;
pub type ParetoFrontF32 = pareto::ParetoFront<f32>;
