//! Small dense and tridiagonal solves.

use crate::Scalar;

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant<T: Scalar>(matrix: &[Vec<T>]) -> T {
    let n = matrix.len();
    let mut a: Vec<Vec<T>> = matrix.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col] == T::zero() {
            return T::zero();
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (x, &v) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= factor * v;
            }
        }
    }
    det
}

/// Solves `A x = b`; `None` when a pivot falls below `rel_tol` times the
/// largest diagonal magnitude.
pub fn solve<T: Scalar>(matrix: &[Vec<T>], rhs: &[T], rel_tol: T) -> Option<Vec<T>> {
    let n = matrix.len();
    let scale = (0..n).fold(T::zero(), |m, i| m.max(matrix[i][i].abs()));
    let mut a: Vec<Vec<T>> = matrix.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if !(a[pivot][col].abs() > rel_tol * scale) {
            return None;
        }
        a.swap(pivot, col);
        b.swap(pivot, col);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (x, &v) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[i][k] * x[k];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

/// Symmetric tridiagonal matrix, factored once for repeated solves.
#[derive(Debug, Clone)]
pub struct Tridiagonal<T> {
    // Thomas algorithm factors
    upper: Vec<T>,
    pivots: Vec<T>,
    off: Vec<T>,
}

impl<T: Scalar> Tridiagonal<T> {
    /// `diag` has `m` entries, `off` has `m - 1` (the sub/super diagonal).
    pub fn factor(diag: &[T], off: &[T]) -> Self {
        let m = diag.len();
        let mut pivots = vec![T::zero(); m];
        let mut upper = vec![T::zero(); m.saturating_sub(1)];
        for i in 0..m {
            let d = if i == 0 {
                diag[0]
            } else {
                diag[i] - off[i - 1] * upper[i - 1]
            };
            pivots[i] = d;
            if i + 1 < m {
                upper[i] = off[i] / d;
            }
        }
        Tridiagonal {
            upper,
            pivots,
            off: off.to_vec(),
        }
    }

    pub fn size(&self) -> usize {
        self.pivots.len()
    }

    /// Solves in place for a right-hand side read with the given stride and
    /// offset, so interleaved components can be solved separately.
    pub fn solve_strided(&self, x: &mut [T], stride: usize, offset: usize) {
        let m = self.pivots.len();
        let at = |i: usize| i * stride + offset;
        for i in 0..m {
            let prev = if i == 0 { T::zero() } else { self.off[i - 1] * x[at(i - 1)] };
            x[at(i)] = (x[at(i)] - prev) / self.pivots[i];
        }
        for i in (0..m.saturating_sub(1)).rev() {
            let next = x[at(i + 1)];
            x[at(i)] -= self.upper[i] * next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(&[vec![2.0, 1.0], vec![1.0, 3.0]]), 5.0);
        assert_eq!(determinant(&[vec![1.0, 2.0], vec![2.0, 4.0]]), 0.0);
        assert_eq!(determinant(&[vec![0.0, 1.0], vec![1.0, 0.0]]), -1.0);
        let det = determinant::<f64>(&[
            vec![1.0, 2.0, 3.0],
            vec![0.0, 1.0, 4.0],
            vec![5.0, 6.0, 0.0],
        ]);
        assert!((det - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solve_small() {
        let x = solve::<f64>(&[vec![4.0, 1.0], vec![1.0, 3.0]], &[1.0, 2.0], 1e-12).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
        assert!(solve(&[vec![1.0, 1.0], vec![1.0, 1.0]], &[1.0, 2.0], 1e-12).is_none());
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let diag = [4.0, 5.0, 6.0, 3.0];
        let off = [-1.0, 2.0, 0.5];
        let t = Tridiagonal::factor(&diag, &off);
        let b = [1.0, -2.0, 3.0, 0.5];
        // interleave with a second component to exercise the stride
        let mut x: Vec<f64> = b.iter().flat_map(|&v| [v, 100.0]).collect();
        t.solve_strided(&mut x, 2, 0);
        let sol: Vec<f64> = x.iter().step_by(2).copied().collect();
        for i in 0..4 {
            let mut r = diag[i] * sol[i];
            if i > 0 {
                r += off[i - 1] * sol[i - 1];
            }
            if i < 3 {
                r += off[i] * sol[i + 1];
            }
            assert!((r - b[i]).abs() < 1e-12);
        }
        assert!(x.iter().skip(1).step_by(2).all(|&v| v == 100.0));
    }
}
