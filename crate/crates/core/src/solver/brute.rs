use rayon::prelude::*;

use crate::calculus::GridFunction;
use crate::error::{Error, Result};
use crate::expr::Point;
use crate::problem::VariationalProblem;
use crate::scalar::to_f64;
use crate::Scalar;

use super::ScalarObjective;

/// Values `lo, lo + step, ...` up to `hi`, shared by every unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice<T> {
    pub lo: T,
    pub hi: T,
    pub step: T,
}

impl<T: Scalar> Lattice<T> {
    pub fn new(lo: T, hi: T, step: T) -> Result<Self> {
        if !(step > T::zero()) || !(lo <= hi) || !step.is_finite() || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad lattice [{lo}, {hi}] step {step}"
            )));
        }
        Ok(Lattice { lo, hi, step })
    }

    pub fn count(&self) -> usize {
        let n = to_f64((self.hi - self.lo) / self.step);
        (n + 1e-9).floor() as usize + 1
    }

    pub fn value(&self, i: usize) -> T {
        self.lo + T::from_usize(i).unwrap() * self.step
    }
}

#[derive(Debug, Clone)]
pub struct BruteForceOptions<T> {
    pub lattice: Lattice<T>,
    /// Constraint equality tolerance; the lattice step when `None`.
    pub tol: Option<T>,
    /// Largest number of lattice points that will be enumerated.
    pub cap: f64,
}

impl<T: Scalar> BruteForceOptions<T> {
    pub fn new(lattice: Lattice<T>) -> Self {
        BruteForceOptions {
            lattice,
            tol: None,
            cap: 1e8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BruteForceResult<T> {
    pub y: GridFunction<T>,
    pub objective: T,
    pub constraints: Vec<T>,
    /// Number of lattice points enumerated.
    pub evaluated: u64,
}

pub const MAX_INTERIOR: usize = 3;
pub const MAX_UNKNOWNS: usize = 4;

/// Exhaustive minimization of `obj` over lattice values of the interior
/// samples of a purely discrete problem. Ties go to the lexicographically
/// smallest lattice index.
pub fn brute_force_oracle<T: Scalar>(
    problem: &VariationalProblem<T>,
    obj: &ScalarObjective<T>,
    opts: &BruteForceOptions<T>,
) -> Result<BruteForceResult<T>> {
    if !problem.timescale().is_discrete() {
        return Err(Error::InvalidArgument(
            "brute force needs a purely discrete time scale".into(),
        ));
    }
    let grid = problem.grid();
    let n = problem.dim();
    let interior = grid.len() - 2;
    if interior == 0 || interior > MAX_INTERIOR || n * interior > MAX_UNKNOWNS {
        return Err(Error::InvalidArgument(format!(
            "brute force supports 1..={MAX_INTERIOR} interior points and at most \
             {MAX_UNKNOWNS} unknowns, got {interior} points of dimension {n}"
        )));
    }
    let lattice = opts.lattice;
    let count = lattice.count();
    let size = (count as f64).powi((n * interior) as i32);
    if size > opts.cap {
        return Err(Error::SearchSpaceTooLarge {
            size,
            cap: opts.cap,
        });
    }
    let tol = opts.tol.unwrap_or(lattice.step);
    let m = problem.constraints().len();
    let width = 1 + m;

    // one sample takes `per_sample` possible vector values
    let per_sample = count.pow(n as u32);
    let sample_values: Vec<T> = (0..per_sample)
        .flat_map(|mut s| {
            let mut v = vec![T::zero(); n];
            for slot in v.iter_mut().rev() {
                *slot = lattice.value(s % count);
                s /= count;
            }
            v
        })
        .collect();
    let value_of = |s: usize| &sample_values[s * n..(s + 1) * n];

    // mu_i * (L, G_1, ..) at step i between samples `left` and `right`
    let term = |i: usize, left: &[T], right: &[T], out: &mut [T]| -> Result<()> {
        let mu = grid.mu(i);
        let mut rate = [T::zero(); MAX_UNKNOWNS];
        for ((v, &r), &l) in rate.iter_mut().zip(right).zip(left) {
            *v = (r - l) / mu;
        }
        let at = Point::new(grid.point(i), right, &rate[..n]);
        out[0] = mu * obj.integrand().value(&at)?;
        for (j, c) in problem.constraints().iter().enumerate() {
            out[1 + j] = mu * c.integrand.value(&at)?;
        }
        Ok(())
    };

    let last = grid.len() - 1;
    let mut first_cache = vec![T::zero(); per_sample * width];
    let mut last_cache = vec![T::zero(); per_sample * width];
    first_cache
        .par_chunks_mut(width)
        .zip(last_cache.par_chunks_mut(width))
        .enumerate()
        .try_for_each(|(s, (first, end))| {
            term(0, problem.alpha(), value_of(s), first)?;
            term(last - 1, value_of(s), problem.beta(), end)
        })?;

    type Best<T> = Option<(T, Vec<usize>, Vec<T>)>;
    let better = |a: Best<T>, b: Best<T>| -> Best<T> {
        match (a, b) {
            (None, b) => b,
            (a, None) => a,
            (Some(a), Some(b)) => {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
        }
    };

    let best = (0..per_sample)
        .into_par_iter()
        .map(|s1| -> Result<Best<T>> {
            let mut idx = vec![0usize; interior];
            idx[0] = s1;
            let mut acc = vec![T::zero(); width];
            let mut tmp = vec![T::zero(); width];
            let mut best: Best<T> = None;
            loop {
                for (a, &f) in acc.iter_mut().zip(&first_cache[s1 * width..]) {
                    *a = f;
                }
                for i in 1..last - 1 {
                    term(i, value_of(idx[i - 1]), value_of(idx[i]), &mut tmp)?;
                    for (a, &t) in acc.iter_mut().zip(&tmp) {
                        *a += t;
                    }
                }
                let sl = idx[interior - 1];
                for (a, &t) in acc.iter_mut().zip(&last_cache[sl * width..]) {
                    *a += t;
                }
                let feasible = problem
                    .constraints()
                    .iter()
                    .enumerate()
                    .all(|(j, c)| (acc[1 + j] - c.target).abs() <= tol);
                if feasible {
                    best = better(best, Some((acc[0], idx.clone(), acc[1..].to_vec())));
                }
                // odometer over samples 2..
                let mut k = interior - 1;
                loop {
                    if k == 0 {
                        return Ok(best);
                    }
                    idx[k] += 1;
                    if idx[k] < per_sample {
                        break;
                    }
                    idx[k] = 0;
                    k -= 1;
                }
            }
        })
        .try_reduce(|| None, |a, b| Ok(better(a, b)))?;

    let (objective, idx, constraints) = best.ok_or(Error::NoFeasiblePoint)?;
    let x: Vec<T> = idx.iter().flat_map(|&s| value_of(s).to_vec()).collect();
    Ok(BruteForceResult {
        y: problem.assemble(&x)?,
        objective,
        constraints,
        evaluated: size as u64,
    })
}
