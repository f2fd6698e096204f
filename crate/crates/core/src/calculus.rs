//! Delta derivative, delta integral, sigma shift and the `C^1_rd` norm of
//! functions sampled on a grid.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::timescale::GridTimeScale;
use crate::Scalar;

/// Norm used on `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VecNorm {
    #[default]
    Max,
    Euclidean,
}

impl VecNorm {
    pub fn apply<T: Scalar>(self, v: &[T]) -> T {
        match self {
            VecNorm::Max => v.iter().fold(T::zero(), |m, x| m.max(x.abs())),
            VecNorm::Euclidean => v.iter().map(|&x| x * x).sum::<T>().sqrt(),
        }
    }
}

/// A function `y: grid -> R^n` stored by its samples, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    grid: Arc<GridTimeScale<T>>,
    dim: usize,
    values: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    /// `values` holds `grid.len() * dim` entries, sample by sample.
    pub fn new(grid: Arc<GridTimeScale<T>>, dim: usize, values: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if values.len() != grid.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: grid.len() * dim,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("grid function has non-finite entries".into()));
        }
        Ok(GridFunction { grid, dim, values })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Arc<GridTimeScale<T>>, dim: usize, f: impl Fn(T) -> Vec<T>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * dim);
        for &t in grid.points() {
            let v = f(t);
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            values.extend(v);
        }
        Self::new(grid, dim, values)
    }

    /// Scalar-valued convenience constructor.
    pub fn scalar(grid: Arc<GridTimeScale<T>>, values: Vec<T>) -> Result<Self> {
        Self::new(grid, 1, values)
    }

    pub fn zeros(grid: Arc<GridTimeScale<T>>, dim: usize) -> Self {
        let len = grid.len() * dim;
        GridFunction {
            grid,
            dim,
            values: vec![T::zero(); len],
        }
    }

    pub fn grid(&self) -> &Arc<GridTimeScale<T>> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Sample vector at index `i`.
    pub fn at(&self, i: usize) -> &[T] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn at_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Component `k` across the grid.
    pub fn component(&self, k: usize) -> Vec<T> {
        (0..self.len()).map(|i| self.at(i)[k]).collect()
    }

    /// Delta derivative at index `i < N`.
    pub fn delta_at(&self, i: usize, out: &mut [T]) {
        let mu = self.grid.mu(i);
        let (cur, next) = (self.at(i), self.at(i + 1));
        for k in 0..self.dim {
            out[k] = (next[k] - cur[k]) / mu;
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if !Arc::ptr_eq(&self.grid, &other.grid) && *self.grid != *other.grid {
            return Err(Error::GridMismatch("functions live on different grids".into()));
        }
        Ok(())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: T, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + c * b)
            .collect();
        Self::new(self.grid.clone(), self.dim, values)
    }

    /// Pointwise product of two scalar-valued functions.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .collect();
        Self::new(self.grid.clone(), self.dim, values)
    }

    /// Pointwise dot product, a scalar-valued function.
    pub fn dot(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let values = (0..self.len())
            .map(|i| self.at(i).iter().zip(other.at(i)).map(|(&a, &b)| a * b).sum())
            .collect();
        Self::new(self.grid.clone(), 1, values)
    }

    /// Restriction to the first `N` points, the `k`-truncated grid.
    pub fn truncate_k(&self) -> Result<Self> {
        let grid = Arc::new(self.grid.truncate_k()?);
        let values = self.values[..grid.len() * self.dim].to_vec();
        Self::new(grid, self.dim, values)
    }
}

/// `f^Δ(t_i) = (f(t_{i+1}) - f(t_i)) / mu(t_i)` on the `k`-truncated grid.
pub fn delta_derivative<T: Scalar>(f: &GridFunction<T>) -> Result<GridFunction<T>> {
    f.grid.require_steps(2)?;
    let grid = Arc::new(f.grid.truncate_k()?);
    let mut values = vec![T::zero(); grid.len() * f.dim];
    for i in 0..grid.len() {
        f.delta_at(i, &mut values[i * f.dim..(i + 1) * f.dim]);
    }
    GridFunction::new(grid, f.dim, values)
}

/// `f^σ(t_i) = f(t_{i+1})` on the `k`-truncated grid.
pub fn sigma_shift<T: Scalar>(f: &GridFunction<T>) -> Result<GridFunction<T>> {
    f.grid.require_steps(2)?;
    let grid = Arc::new(f.grid.truncate_k()?);
    let values = f.values[f.dim..].to_vec();
    GridFunction::new(grid, f.dim, values)
}

/// Delta integral over `[t_c, t_d)`, per component:
/// `sum_{i=c}^{d-1} mu(t_i) f(t_i)`.
pub fn delta_integral<T: Scalar>(f: &GridFunction<T>, c: usize, d: usize) -> Result<Vec<T>> {
    let len = f.len();
    if d >= len {
        return Err(Error::IndexOutOfRange { index: d, len });
    }
    if c > d {
        return Err(Error::InvalidArgument(format!(
            "integration bounds reversed: {c} > {d}"
        )));
    }
    let mut acc = vec![T::zero(); f.dim];
    for i in c..d {
        let mu = f.grid.mu(i);
        for (a, &v) in acc.iter_mut().zip(f.at(i)) {
            *a += mu * v;
        }
    }
    Ok(acc)
}

/// Integral over the whole grid `[a, b)`.
pub fn delta_integral_full<T: Scalar>(f: &GridFunction<T>) -> Vec<T> {
    delta_integral(f, 0, f.len() - 1).expect("full range is valid")
}

/// `max_i ||f^σ(t_i)|| + max_i ||f^Δ(t_i)||` over `i = 0..N-1`.
pub fn c1rd_norm<T: Scalar>(f: &GridFunction<T>, norm: VecNorm) -> Result<T> {
    f.grid.require_steps(2)?;
    let mut max_sigma = T::zero();
    let mut max_delta = T::zero();
    let mut buf = vec![T::zero(); f.dim];
    for i in 0..f.grid.steps() {
        max_sigma = max_sigma.max(norm.apply(f.at(i + 1)));
        f.delta_at(i, &mut buf);
        max_delta = max_delta.max(norm.apply(&buf));
    }
    Ok(max_sigma + max_delta)
}

/// For `g` not constant on `[a,b]^k`, an `eta` with `eta(a) = eta(b) = 0` and
/// `∫ g · eta^Δ Δt != 0`; `None` when `g` is constant there.
///
/// With `eta_j = g(t_{j-1}) - g(t_j)` the integral equals
/// `sum_j |g(t_j) - g(t_{j-1})|^2`.
pub fn dubois_reymond_witness<T: Scalar>(g: &GridFunction<T>) -> Result<Option<GridFunction<T>>> {
    g.grid.require_steps(2)?;
    let n = g.grid.steps();
    let mut eta = GridFunction::zeros(g.grid.clone(), g.dim);
    let mut nonconstant = false;
    for j in 1..n {
        let (prev, cur) = (g.at(j - 1), g.at(j));
        let out = eta.at_mut(j);
        for k in 0..g.dim {
            out[k] = prev[k] - cur[k];
            nonconstant |= out[k] != T::zero();
        }
    }
    Ok(nonconstant.then_some(eta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(points: &[f64]) -> Arc<GridTimeScale<f64>> {
        Arc::new(GridTimeScale::new(points.to_vec()).unwrap())
    }

    #[test]
    fn derivative_of_square_on_integers() {
        let g = grid(&[0.0, 1.0, 2.0, 3.0]);
        let f = GridFunction::from_fn(g, 1, |t| vec![t * t]).unwrap();
        let d = delta_derivative(&f).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.at(1)[0], 3.0);
        assert_eq!(d.values(), &[1.0, 3.0, 5.0]);
    }

    #[test]
    fn derivative_of_constant_and_identity() {
        let g = grid(&[0.0, 0.3, 1.0, 1.7, 4.0]);
        let c = GridFunction::from_fn(g.clone(), 1, |_| vec![2.5]).unwrap();
        assert!(delta_derivative(&c).unwrap().values().iter().all(|&v| v == 0.0));
        let id = GridFunction::from_fn(g, 1, |t| vec![t]).unwrap();
        for &v in delta_derivative(&id).unwrap().values() {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn single_point_grid_is_degenerate() {
        let f = GridFunction::scalar(grid(&[0.0]), vec![1.0]).unwrap();
        assert!(matches!(delta_derivative(&f), Err(Error::DegenerateScale(_))));
        assert!(matches!(sigma_shift(&f), Err(Error::DegenerateScale(_))));
        assert!(matches!(c1rd_norm(&f, VecNorm::Max), Err(Error::DegenerateScale(_))));
    }

    #[test]
    fn sigma_shift_examples() {
        let a = 1.5;
        let g = grid(&[0.0, 1.0, 2.0]);
        let f = GridFunction::scalar(g.clone(), vec![0.0, a, 0.0]).unwrap();
        let s = sigma_shift(&f).unwrap();
        assert_eq!(s.values(), &[a, 0.0]);
        assert_eq!(s.grid().points(), &[0.0, 1.0]);
        let id = GridFunction::from_fn(g.clone(), 1, |t| vec![t]).unwrap();
        assert_eq!(sigma_shift(&id).unwrap().values(), &[1.0, 2.0]);
        let c = GridFunction::scalar(g, vec![7.0; 3]).unwrap();
        assert_eq!(sigma_shift(&c).unwrap().values(), &[7.0, 7.0]);
    }

    #[test]
    fn integral_examples() {
        let a = 1.5;
        let g = grid(&[0.0, 1.0, 2.0]);
        let y = GridFunction::scalar(g.clone(), vec![0.0, a, 0.0]).unwrap();
        let ys = sigma_shift(&y).unwrap();
        let sq = ys.mul(&ys).unwrap();
        let full = delta_integral(&sq, 0, sq.len() - 1).unwrap();
        assert_eq!(full[0], a * a);

        assert_eq!(delta_integral(&y, 1, 1).unwrap(), vec![0.0]);

        let h = grid(&[0.0, 0.5, 2.0]);
        let f = GridFunction::scalar(h.clone(), vec![3.0, -2.0, 9.0]).unwrap();
        assert_eq!(delta_integral(&f, 1, 2).unwrap()[0], h.mu(1) * -2.0);
    }

    #[test]
    fn integral_bounds_are_checked() {
        let f = GridFunction::scalar(grid(&[0.0, 1.0, 2.0]), vec![1.0; 3]).unwrap();
        assert!(matches!(
            delta_integral(&f, 0, 3),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
        assert!(delta_integral(&f, 2, 1).is_err());
        assert_eq!(delta_integral(&f, 0, 2).unwrap(), vec![2.0]);
    }

    #[test]
    fn norm_examples() {
        let g = grid(&[0.0, 1.0, 2.0]);
        let id = GridFunction::from_fn(g.clone(), 1, |t| vec![t]).unwrap();
        assert_eq!(c1rd_norm(&id, VecNorm::Max).unwrap(), 3.0);
        let z = GridFunction::zeros(g.clone(), 1);
        assert_eq!(c1rd_norm(&z, VecNorm::Max).unwrap(), 0.0);
        let a = 0.75;
        let bump = GridFunction::scalar(g, vec![0.0, a, 0.0]).unwrap();
        assert_eq!(c1rd_norm(&bump, VecNorm::Max).unwrap(), 2.0 * a);
    }

    #[test]
    fn euclidean_norm_option() {
        let g = grid(&[0.0, 1.0]);
        let f = GridFunction::new(g, 2, vec![0.0, 0.0, 3.0, 4.0]).unwrap();
        // f^σ = (3,4), f^Δ = (3,4)
        assert_eq!(c1rd_norm(&f, VecNorm::Euclidean).unwrap(), 10.0);
        assert_eq!(c1rd_norm(&f, VecNorm::Max).unwrap(), 8.0);
    }

    #[test]
    fn witness_is_none_for_constant_on_k_points() {
        let g = grid(&[0.0, 1.0, 2.0, 3.0]);
        // last sample is outside [a,b]^k and may differ
        let f = GridFunction::scalar(g, vec![2.0, 2.0, 2.0, -5.0]).unwrap();
        assert!(dubois_reymond_witness(&f).unwrap().is_none());
    }

    #[test]
    fn constructor_validates_shape() {
        let g = grid(&[0.0, 1.0]);
        assert!(GridFunction::new(g.clone(), 1, vec![1.0]).is_err());
        assert!(GridFunction::new(g.clone(), 0, vec![]).is_err());
        assert!(GridFunction::new(g, 1, vec![1.0, f64::NAN]).is_err());
    }
}
