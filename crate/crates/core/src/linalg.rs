//! Small dense complex linear algebra.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let data = (0..rows * cols).map(|idx| f(idx / cols, idx % cols)).collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum())
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (largest column sum).
    pub fn norm1(&self) -> f64 {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting, together
    /// with the 1-norm condition number `‖M‖₁‖M⁻¹‖₁`.
    pub fn inverse_with_condition(&self) -> Result<(Self, f64)> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
                .unwrap_or(col);
            if a[(pivot, col)].norm() == 0.0 {
                return Err(Error::IllConditioned(f64::INFINITY));
            }
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let d = ONE / a[(col, col)];
            for j in 0..n {
                a[(col, j)] *= d;
                inv[(col, j)] *= d;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(i, j)] -= f * ac;
                    inv[(i, j)] -= f * ic;
                }
            }
        }
        let cond = self.norm1() * inv.norm1();
        Ok((inv, cond))
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            for c in 0..self.cols {
                self.data.swap(i * self.cols + c, j * self.cols + c);
            }
        }
    }
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Result of a least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<C64>,
    /// Numerical rank detected by the pivoted QR factorization.
    pub rank: usize,
    /// `‖M x - b‖_∞` at the returned solution.
    pub residual: f64,
}

/// Least-squares solution of `M x ≈ b` by Householder QR with column
/// pivoting. For full column rank this is the unique minimizer. Columns whose
/// pivot falls below `rtol` times the first pivot are treated as dependent
/// and their unknowns set to zero; callers check `rank`.
pub fn least_squares(m: &CMatrix, b: &[C64], rtol: f64) -> LeastSquares {
    assert_eq!(m.rows, b.len(), "dimension mismatch");
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut norms: Vec<f64> = (0..cols).map(|j| col_norm2(&a, j, 0)).collect();
    let steps = rows.min(cols);
    let mut rank = 0;
    let mut first_pivot = 0.0;
    for k in 0..steps {
        let p = (k..cols).max_by(|&i, &j| norms[i].total_cmp(&norms[j])).unwrap_or(k);
        if p != k {
            for i in 0..rows {
                a.data.swap(i * cols + k, i * cols + p);
            }
            perm.swap(k, p);
            norms.swap(k, p);
        }
        let alpha = col_norm2(&a, k, k).sqrt();
        if k == 0 {
            first_pivot = alpha;
        }
        if alpha <= rtol * first_pivot || alpha == 0.0 {
            break;
        }
        rank += 1;
        // Householder vector v = x + e^{i arg x_k} ‖x‖ e_k.
        let x0 = a[(k, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let mut v: Vec<C64> = (k..rows).map(|i| a[(i, k)]).collect();
        v[0] += phase * alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 > 0.0 {
            let scale = 2.0 / vnorm2;
            for j in k..cols {
                let dot: C64 = v.iter().enumerate().map(|(o, vi)| vi.conj() * a[(k + o, j)]).sum();
                let f = dot * scale;
                for (o, vi) in v.iter().enumerate() {
                    a[(k + o, j)] -= f * vi;
                }
            }
            let dot: C64 = v.iter().enumerate().map(|(o, vi)| vi.conj() * rhs[k + o]).sum();
            let f = dot * scale;
            for (o, vi) in v.iter().enumerate() {
                rhs[k + o] -= f * vi;
            }
        }
        for (j, nj) in norms.iter_mut().enumerate().skip(k + 1) {
            *nj = col_norm2(&a, j, k + 1);
        }
    }
    // Back substitution on the leading rank x rank block.
    let mut y = vec![ZERO; cols];
    for i in (0..rank).rev() {
        let mut acc = rhs[i];
        for j in i + 1..rank {
            acc -= a[(i, j)] * y[j];
        }
        y[i] = acc / a[(i, i)];
    }
    let mut solution = vec![ZERO; cols];
    for (k, &p) in perm.iter().enumerate() {
        solution[p] = y[k];
    }
    let residual = m
        .mul_vec(&solution)
        .iter()
        .zip(b)
        .map(|(r, b)| (r - b).norm())
        .fold(0.0, f64::max);
    LeastSquares { solution, rank, residual }
}

fn col_norm2(a: &CMatrix, j: usize, from: usize) -> f64 {
    (from..a.rows).map(|i| a[(i, j)].norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..7 {
            let m = random(n, n, &mut rng);
            let (inv, cond) = m.inverse_with_condition().unwrap();
            assert!(cond >= 1.0);
            let e = m.mul(&inv);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { ONE } else { ZERO };
                    assert!((e[(i, j)] - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let m = CMatrix::from_fn(2, 2, |_, _| ONE);
        let r = m.inverse_with_condition();
        assert!(r.is_err() || r.unwrap().1 > 1e15);
    }

    #[test]
    fn least_squares_consistent_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random(12, 5, &mut rng);
        let x: Vec<C64> = (0..5).map(|i| C64::new(i as f64, 1.0 - i as f64)).collect();
        let b = m.mul_vec(&x);
        let ls = least_squares(&m, &b, 1e-12);
        assert_eq!(ls.rank, 5);
        assert!(ls.residual < 1e-12);
        for (u, v) in ls.solution.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn least_squares_minimizes_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random(9, 3, &mut rng);
        let b: Vec<C64> = (0..9).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let ls = least_squares(&m, &b, 1e-12);
        // Normal equations: M^H (M x - b) = 0.
        let r: Vec<C64> = m.mul_vec(&ls.solution).iter().zip(&b).map(|(a, b)| a - b).collect();
        let g = m.conj().transpose().mul_vec(&r);
        assert!(g.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn rank_deficiency_is_detected() {
        let m = CMatrix::from_fn(6, 3, |i, j| if j == 2 { C64::new(i as f64, 0.0) * 2.0 } else { C64::new((i * (j + 1)) as f64, 1.0) });
        let m2 = CMatrix::from_fn(6, 3, |i, j| if j == 2 { m[(i, 0)] + m[(i, 1)] } else { m[(i, j)] });
        assert_eq!(least_squares(&m2, &[ONE; 6], 1e-12).rank, 2);
    }
}
