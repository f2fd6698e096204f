//! Weighted-sum sweeps over the weight simplex, dominance filtering and the
//! constrained-scalar cross-check of individual front points.

use rayon::prelude::*;

use crate::calculus::GridFunction;
use crate::error::{Error, Result};
use crate::problem::{Constraint, VariationalProblem};
use crate::scalar::lit;
use crate::solver::{solve_scalar, ScalarObjective, SolveResult, SolveStatus, SolverOptions};
use crate::Scalar;

pub const DEFAULT_DOM_TOL: f64 = 1e-9;
pub const DEFAULT_NC_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SweepOptions<T> {
    pub solver: SolverOptions<T>,
    /// Start each solve from the previous weight's solution. Disabling it
    /// solves the weights in parallel.
    pub warm_start: bool,
    pub dom_tol: T,
}

impl<T: Scalar> Default for SweepOptions<T> {
    fn default() -> Self {
        SweepOptions {
            solver: SolverOptions::default(),
            warm_start: true,
            dom_tol: lit(DEFAULT_DOM_TOL),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParetoEntry<T> {
    pub weights: Vec<T>,
    pub objectives: Vec<T>,
    pub result: SolveResult<T>,
}

impl<T: Scalar> ParetoEntry<T> {
    pub fn y(&self) -> &GridFunction<T> {
        &self.result.y
    }
}

/// A weight whose solve did not converge (or errored) and was left out.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure<T> {
    pub weights: Vec<T>,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ParetoFront<T> {
    /// Sorted lexicographically by objective vector.
    pub entries: Vec<ParetoEntry<T>>,
    pub dominated_removed: usize,
    pub failures: Vec<SweepFailure<T>>,
}

/// Interior points of the simplex grid with spacing `1/k`, every weight at
/// least `1/k`, ordered by the first weight, then the rest lexicographically.
pub fn simplex_weights<T: Scalar>(d: usize, k: usize) -> Vec<Vec<T>> {
    fn rec(d: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if d == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        // leave at least one unit for each remaining coordinate
        for c in 1..=remaining.saturating_sub(d - 1) {
            prefix.push(c);
            rec(d - 1, remaining - c, prefix, out);
            prefix.pop();
        }
    }
    let mut counts = Vec::new();
    if d >= 1 && k >= d {
        rec(d, k, &mut Vec::new(), &mut counts);
    }
    let kt = T::from_usize(k).unwrap();
    counts
        .into_iter()
        .map(|c| c.into_iter().map(|ci| T::from_usize(ci).unwrap() / kt).collect())
        .collect()
}

/// Solves the weighted-sum problem for every interior simplex weight,
/// drops non-converged solves and dominated points.
pub fn weighted_sweep<T: Scalar>(
    problem: &VariationalProblem<T>,
    k: usize,
    opts: &SweepOptions<T>,
) -> Result<ParetoFront<T>> {
    let d = problem.objectives().len();
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "a sweep needs at least two objectives, got {d}"
        )));
    }
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid size must be at least 2, got {k}"
        )));
    }
    let weights = simplex_weights::<T>(d, k);
    if weights.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no interior weights with spacing 1/{k} for {d} objectives"
        )));
    }

    let solve_one = |w: &[T], init: Option<&GridFunction<T>>| -> Result<SolveResult<T>> {
        let obj = ScalarObjective::weighted(problem, w)?;
        solve_scalar(problem, &obj, init, &opts.solver)
    };
    let outcomes: Vec<Result<SolveResult<T>>> = if opts.warm_start {
        let mut previous: Option<GridFunction<T>> = None;
        weights
            .iter()
            .map(|w| {
                let r = solve_one(w, previous.as_ref());
                if let Ok(r) = &r {
                    if r.converged() {
                        previous = Some(r.y.clone());
                    }
                }
                r
            })
            .collect()
    } else {
        weights.par_iter().map(|w| solve_one(w, None)).collect()
    };

    let mut candidates = Vec::new();
    let mut failures = Vec::new();
    for (w, outcome) in weights.into_iter().zip(outcomes) {
        match outcome {
            Ok(r) if r.converged() => {
                let objectives = problem.evaluate(&r.y)?.objectives;
                candidates.push(ParetoEntry {
                    weights: w,
                    objectives,
                    result: r,
                });
            }
            Ok(r) => failures.push(SweepFailure {
                weights: w,
                reason: r.status.to_string(),
            }),
            Err(e) => failures.push(SweepFailure {
                weights: w,
                reason: e.to_string(),
            }),
        }
    }

    let points: Vec<Vec<T>> = candidates.iter().map(|e| e.objectives.clone()).collect();
    let keep = dominance_filter(&points, opts.dom_tol);
    let dominated_removed = candidates.len() - keep.len();
    let mut keep_mask = vec![false; candidates.len()];
    for i in keep {
        keep_mask[i] = true;
    }
    let mut entries: Vec<ParetoEntry<T>> = candidates
        .into_iter()
        .zip(keep_mask)
        .filter_map(|(e, k)| k.then_some(e))
        .collect();
    entries.sort_by(|a, b| {
        a.objectives
            .iter()
            .zip(&b.objectives)
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(ParetoFront {
        entries,
        dominated_removed,
        failures,
    })
}

/// Indices of the points not dominated by any other point, in input order.
/// `u` dominates `w` when `u <= w + tol` everywhere and `u < w - tol`
/// somewhere; points equal within `tol` to an earlier point are dropped.
pub fn dominance_filter<T: Scalar>(points: &[Vec<T>], tol: T) -> Vec<usize> {
    let dominates = |u: &[T], w: &[T]| {
        u.iter().zip(w).all(|(&a, &b)| a <= b + tol) && u.iter().zip(w).any(|(&a, &b)| a < b - tol)
    };
    let same = |u: &[T], w: &[T]| u.iter().zip(w).all(|(&a, &b)| (a - b).abs() <= tol);
    (0..points.len())
        .filter(|&i| {
            !points.iter().enumerate().any(|(j, p)| {
                j != i && (dominates(p, &points[i]) || (j < i && same(p, &points[i])))
            })
        })
        .collect()
}

/// Outcome of re-solving `min L_i` subject to `L_j = L_j[y]` for `j != i`.
#[derive(Debug, Clone, PartialEq)]
pub struct NcReport<T> {
    pub objective: usize,
    pub value: T,
    pub resolved_value: T,
    /// `value - resolved_value`; `None` when the constrained solve failed.
    pub improvement: Option<T>,
    pub status: SolveStatus,
}

impl<T: Scalar> NcReport<T> {
    /// `Some(true)` when no improvement beyond `tol` was found,
    /// `None` when the check was inconclusive.
    pub fn passes(&self, tol: T) -> Option<bool> {
        self.improvement.map(|d| d <= tol)
    }
}

pub fn nc_crosscheck<T: Scalar>(
    problem: &VariationalProblem<T>,
    y: &GridFunction<T>,
    index: usize,
    opts: &SolverOptions<T>,
) -> Result<NcReport<T>> {
    let d = problem.objectives().len();
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "the cross-check needs at least two objectives, got {d}"
        )));
    }
    if index >= d {
        return Err(Error::InvalidArgument(format!(
            "objective index {index} out of range for {d} objectives"
        )));
    }
    let values = problem.evaluate(y)?;
    let mut constraints: Vec<Constraint<T>> = problem.constraints().to_vec();
    for (j, l) in problem.objectives().iter().enumerate() {
        if j != index {
            constraints.push(Constraint {
                integrand: l.clone(),
                target: values.objectives[j],
            });
        }
    }
    let q = problem.with_functionals(vec![problem.objectives()[index].clone()], constraints)?;
    let obj = ScalarObjective::single(&q, 0)?;
    let value = values.objectives[index];
    let (resolved_value, improvement, status) = match solve_scalar(&q, &obj, Some(y), opts) {
        Ok(r) if r.converged() => (r.objective, Some(value - r.objective), r.status),
        Ok(r) => (r.objective, None, r.status),
        Err(_) => (T::nan(), None, SolveStatus::LineSearchFailure),
    };
    Ok(NcReport {
        objective: index,
        value,
        resolved_value,
        improvement,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timescale::TimeScale;

    fn three_point() -> VariationalProblem<f64> {
        VariationalProblem::builder(TimeScale::<f64>::parse("0;1;2").unwrap(), 1)
            .objective("y1^2")
            .objective("(y1-2)^2")
            .boundary(vec![0.0], vec![0.0])
            .build()
            .unwrap()
    }

    #[test]
    fn simplex_grid() {
        let w = simplex_weights::<f64>(2, 4);
        assert_eq!(w, vec![vec![0.25, 0.75], vec![0.5, 0.5], vec![0.75, 0.25]]);
        let w3 = simplex_weights::<f64>(3, 5);
        assert_eq!(w3.len(), 6);
        assert!(w3.iter().all(|w| w.iter().all(|&x| x >= 0.2 - 1e-15)));
        assert!(w3.iter().all(|w| (w.iter().sum::<f64>() - 1.0).abs() < 1e-12));
        assert!(simplex_weights::<f64>(3, 2).is_empty());
    }

    #[test]
    fn dominance_examples() {
        let tol = 1e-9;
        assert_eq!(
            dominance_filter(&[vec![1.0, 5.0], vec![2.0, 2.0], vec![3.0, 1.0]], tol),
            vec![0, 1, 2]
        );
        assert_eq!(dominance_filter(&[vec![1.0, 5.0], vec![1.0, 4.0]], tol), vec![1]);
        assert_eq!(dominance_filter(&[vec![0.0, 0.0]], tol), vec![0]);
        assert_eq!(
            dominance_filter(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-12]], tol),
            vec![0]
        );
        assert!(dominance_filter::<f64>(&[], tol).is_empty());
    }

    #[test]
    fn three_point_sweep() {
        let p = three_point();
        let front = weighted_sweep(&p, 20, &SweepOptions::default()).unwrap();
        assert_eq!(front.entries.len(), 19);
        assert!(front.failures.is_empty());
        assert_eq!(front.dominated_removed, 0);
        for e in &front.entries {
            let a = e.y().at(1)[0];
            assert!((a - 2.0 * (1.0 - e.weights[0])).abs() <= 1e-6);
            assert!((e.objectives[0] - a * a).abs() <= 1e-9);
            assert!((e.objectives[1] - 4.0 - (a - 2.0) * (a - 2.0)).abs() <= 1e-9);
        }
        let half = front
            .entries
            .iter()
            .find(|e| (e.weights[0] - 0.5).abs() < 1e-12)
            .unwrap();
        assert!((half.objectives[0] - 1.0).abs() <= 1e-6);
        assert!((half.objectives[1] - 5.0).abs() <= 1e-6);
    }

    #[test]
    fn parallel_sweep_matches_warm_start() {
        let p = three_point();
        let warm = weighted_sweep(&p, 10, &SweepOptions::default()).unwrap();
        let cold = weighted_sweep(
            &p,
            10,
            &SweepOptions {
                warm_start: false,
                ..SweepOptions::default()
            },
        )
        .unwrap();
        assert_eq!(warm.entries.len(), cold.entries.len());
        for (a, b) in warm.entries.iter().zip(&cold.entries) {
            assert_eq!(a.weights, b.weights);
            assert!((a.objectives[0] - b.objectives[0]).abs() <= 1e-7);
        }
    }

    #[test]
    fn identical_objectives_collapse() {
        let p = VariationalProblem::builder(TimeScale::<f64>::parse("0;1;2").unwrap(), 1)
            .objective("(y1-1)^2")
            .objective("(y1-1)^2")
            .boundary(vec![0.0], vec![0.0])
            .build()
            .unwrap();
        let front = weighted_sweep(&p, 5, &SweepOptions::default()).unwrap();
        assert_eq!(front.entries.len(), 1);
        let r = nc_crosscheck(&p, front.entries[0].y(), 0, &SolverOptions::default()).unwrap();
        assert!(r.passes(1e-6).unwrap());
    }

    #[test]
    fn crosscheck_confirms_and_refutes() {
        let p = three_point();
        let opts = SolverOptions::default();
        let good = p.assemble(&[1.0]).unwrap();
        for i in 0..2 {
            let r = nc_crosscheck(&p, &good, i, &opts).unwrap();
            assert!(r.passes(1e-6).unwrap(), "{r:?}");
        }
        let bad = p.assemble(&[3.0]).unwrap();
        let r = nc_crosscheck(&p, &bad, 0, &opts).unwrap();
        assert!((r.value - 9.0).abs() < 1e-12);
        assert!((r.improvement.unwrap() - 8.0).abs() <= 1e-6, "{r:?}");
    }

    #[test]
    fn argument_errors() {
        let single = VariationalProblem::builder(TimeScale::<f64>::parse("0;1;2").unwrap(), 1)
            .objective("y1^2")
            .boundary(vec![0.0], vec![0.0])
            .build()
            .unwrap();
        assert!(weighted_sweep(&single, 10, &SweepOptions::default()).is_err());
        let p = three_point();
        assert!(weighted_sweep(&p, 1, &SweepOptions::default()).is_err());
        assert!(nc_crosscheck(&p, &p.linear_guess(), 2, &SolverOptions::default()).is_err());
    }
}
