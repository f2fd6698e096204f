use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::GridFunction;
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{Functional, VariationalProblem};
use crate::scalar::lit;
use crate::Scalar;

/// `M_ij = δG_i[y; v_j]` for the problem's `m` constraints and the first `m`
/// directions.
pub fn regularity_matrix<T: Scalar>(
    problem: &VariationalProblem<T>,
    y: &GridFunction<T>,
    directions: &[GridFunction<T>],
) -> Result<Vec<Vec<T>>> {
    let m = problem.constraints().len();
    if m == 0 {
        return Err(Error::InvalidArgument("problem has no constraints".into()));
    }
    if directions.len() < m {
        return Err(Error::InvalidArgument(format!(
            "{m} directions required, {} supplied",
            directions.len()
        )));
    }
    for v in &directions[..m] {
        problem.check_function(v)?;
        let last = v.len() - 1;
        if v.at(0).iter().chain(v.at(last)).any(|x| *x != T::zero()) {
            return Err(Error::InvalidArgument(
                "directions must vanish at both endpoints".into(),
            ));
        }
    }
    (0..m)
        .map(|i| {
            directions[..m]
                .iter()
                .map(|v| problem.gateaux(Functional::Constraint(i), y, v))
                .collect()
        })
        .collect()
}

/// Determinant of [`regularity_matrix`]. A magnitude above `det_tol`
/// means the multiplier rule holds in its normal form at `y`.
pub fn regularity_probe<T: Scalar>(
    problem: &VariationalProblem<T>,
    y: &GridFunction<T>,
    directions: &[GridFunction<T>],
) -> Result<T> {
    Ok(linalg::determinant(&regularity_matrix(problem, y, directions)?))
}

/// Seeded random directions, uniform in `[-1, 1]` at interior samples and
/// zero at both endpoints.
pub fn random_directions<T: Scalar>(
    problem: &VariationalProblem<T>,
    count: usize,
    seed: u64,
) -> Vec<GridFunction<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.dim();
    let len = problem.grid().len();
    (0..count)
        .map(|_| {
            let mut values = vec![T::zero(); len * n];
            for v in &mut values[n..(len - 1) * n] {
                *v = lit(rng.gen_range(-1.0..=1.0));
            }
            GridFunction::new(problem.grid().clone(), n, values).expect("direction shape")
        })
        .collect()
}
