//! Three independent routes to the spectral matrix `q(λ)`.
//!
//! The resolution of the identity has a cyclic kernel
//! `Im[(1/w) F^{-,j+1}(x) F^{-,j}(x')]` for `x` on branch `j`. The matrix
//! `q` rewrites it as `Σ_{l,m} q_{lm} F^{-,l}(x) conj(F^{-,m}(x'))`. This
//! module computes `q`
//!
//! * in closed form, `q_{lm} = δ_{lm} 1_{λ > a_l} c_l ξ_l / |w|²`;
//! * as the least-squares solution of the linear constraints obtained by
//!   matching coefficients of independent functions for every branch pair;
//! * from an `n × n` matrix identity built on eigenfunction values at
//!   anchor points.
//!
//! Everything here is unnormalized (`κ = 1`).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

#[allow(unused_imports)]
use num_traits::Float;

use crate::eigen::{EigenParams, Sign};
use crate::linalg::{least_squares, CMatrix};
use crate::network::{BranchPoint, StarNetwork};
use crate::spectral::q_weights;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// The `n × n` spectral matrix at one `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    pub lambda: f64,
    pub entries: CMatrix,
    /// Whether the `1/π`-type normalization has been applied.
    pub normalized: bool,
}

impl QMatrix {
    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    /// Largest entrywise difference.
    pub fn max_gap(&self, other: &QMatrix) -> f64 {
        let n = self.n();
        (0..n)
            .flat_map(|l| (0..n).map(move |m| (l, m)))
            .map(|(l, m)| (self.entries[(l, m)] - other.entries[(l, m)]).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.n();
        (0..n)
            .flat_map(|l| (0..n).filter(move |&m| m != l).map(move |m| (l, m)))
            .map(|(l, m)| self.entries[(l, m)].norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry with `l ≥ p` or `m ≥ p` (0-based), which must vanish in
    /// band `p`.
    pub fn max_outside_band(&self, p: usize) -> f64 {
        let n = self.n();
        (0..n)
            .flat_map(|l| (0..n).map(move |m| (l, m)))
            .filter(|&(l, m)| l >= p || m >= p)
            .map(|(l, m)| self.entries[(l, m)].norm())
            .fold(0.0, f64::max)
    }
}

/// Closed form `q̃_{lm} = δ_{lm} 1_{λ > a_l} c_l ξ_l / |w|²`.
pub fn closed_form(net: &StarNetwork, lambda: f64) -> Result<QMatrix> {
    let q = q_weights(net, lambda, 1.0)?;
    let n = net.len();
    let entries = CMatrix::from_fn(n, n, |l, m| if l == m { C64::new(q[l], 0.0) } else { ZERO });
    Ok(QMatrix { lambda, entries, normalized: false })
}

/// Which closed-form expression applies to a branch pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImKernelCase {
    /// Both branches evanescent.
    A,
    /// Both propagating, distinct.
    BDistinct,
    /// The same propagating branch.
    BEqual,
    /// `x` propagating, `x'` evanescent.
    C,
    /// `x` evanescent, `x'` propagating.
    D,
}

/// Case for `x` on branch `j` and `x'` on branch `k` in band `p`
/// (`p` propagating branches, 0-based indices).
pub fn im_kernel_case(p: usize, j: usize, k: usize) -> ImKernelCase {
    match (j < p, k < p) {
        (false, false) => ImKernelCase::A,
        (true, true) if j == k => ImKernelCase::BEqual,
        (true, true) => ImKernelCase::BDistinct,
        (true, false) => ImKernelCase::C,
        (false, true) => ImKernelCase::D,
    }
}

struct BandData {
    p: usize,
    params: EigenParams,
    inv_w: C64,
}

fn band_data(net: &StarNetwork, lambda: f64) -> Result<BandData> {
    let p = net.band_index(lambda)?;
    let params = EigenParams::new(net, C64::new(lambda, 0.0), Sign::Minus);
    let inv_w = ONE / params.w();
    Ok(BandData { p, params, inv_w })
}

/// `Im[(1/w) F^{-,j+1}_j(x) F^{-,j}_k(x')]` from its case-wise closed form.
pub fn im_kernel_cases(net: &StarNetwork, lambda: f64, j: usize, k: usize, x: f64, x_prime: f64) -> Result<f64> {
    net.check_branch(j)?;
    net.check_branch(k)?;
    let BandData { p, params, inv_w } = band_data(net, lambda)?;
    let im_w = inv_w.im;
    let re_w = inv_w.re;
    // Im(1/(iw)) = -Re(1/w).
    let im_iw = -re_w;
    let xi = |b: usize| params.xi(b).re;
    let rate = |b: usize| params.xi_prime(b).re;
    Ok(match im_kernel_case(p, j, k) {
        ImKernelCase::A => im_w * (-rate(j) * x - rate(k) * x_prime).exp(),
        ImKernelCase::BDistinct | ImKernelCase::BEqual => {
            let (sj, cj) = (xi(j) * x).sin_cos();
            let (sk, ck) = (xi(k) * x_prime).sin_cos();
            let sin_coeff = if j == k { (params.s(k)? * inv_w).im } else { im_w };
            im_w * cj * ck - sin_coeff * sj * sk - re_w * cj * sk - re_w * sj * ck
        }
        ImKernelCase::C => {
            let (sj, cj) = (xi(j) * x).sin_cos();
            (-rate(k) * x_prime).exp() * (im_w * cj + im_iw * sj)
        }
        ImKernelCase::D => {
            let (sk, ck) = (xi(k) * x_prime).sin_cos();
            (-rate(j) * x).exp() * (im_w * ck + im_iw * sk)
        }
    })
}

/// The same quantity by direct evaluation of the eigenfunctions.
pub fn im_kernel_direct(net: &StarNetwork, lambda: f64, j: usize, k: usize, x: f64, x_prime: f64) -> Result<f64> {
    let params = EigenParams::new(net, C64::new(lambda, 0.0), Sign::Minus);
    let next = (j + 1) % net.len();
    let left = params.eval(next, BranchPoint::new(net, j, x)?)?;
    let right = params.eval(j, BranchPoint::new(net, k, x_prime)?)?;
    Ok((left * right / params.w()).im)
}

/// One linear constraint `Σ_{lm} coeff(l, m) q_{lm} = rhs` for a pair
/// `(j, k)`, with coefficient `o` on `l ≠ j, m ≠ k`, `r` on `l ≠ j, m = k`,
/// `c` on `l = j, m ≠ k` and `d` on `q_{jk}`.
fn push_row(rows: &mut Vec<Vec<C64>>, rhs: &mut Vec<C64>, n: usize, (j, k): (usize, usize), [o, r, c, d]: [C64; 4], value: C64) {
    let mut row = vec![ZERO; n * n];
    for l in 0..n {
        for m in 0..n {
            row[l * n + m] = match (l == j, m == k) {
                (false, false) => o,
                (false, true) => r,
                (true, false) => c,
                (true, true) => d,
            };
        }
    }
    rows.push(row);
    rhs.push(value);
}

/// Stacks the four constraints of every branch pair `(j, k)` on the `n²`
/// unknowns `q_{lm}` (column `l·n + m`). Duplicate rows are kept.
pub fn assemble_system(net: &StarNetwork, lambda: f64) -> Result<(CMatrix, Vec<C64>)> {
    let BandData { p, params, inv_w } = band_data(net, lambda)?;
    let n = net.len();
    let im_w = C64::new(inv_w.im, 0.0);
    let im_iw = C64::new(-inv_w.re, 0.0);
    let (mut rows, mut rhs) = (Vec::new(), Vec::new());
    for j in 0..n {
        for k in 0..n {
            let mut row = |coeffs, value| push_row(&mut rows, &mut rhs, n, (j, k), coeffs, value);
            match im_kernel_case(p, j, k) {
                ImKernelCase::A => {
                    row([ZERO, ZERO, ZERO, ONE], ZERO);
                    row([ZERO, ONE, ZERO, ZERO], ZERO);
                    row([ZERO, ZERO, ONE, ZERO], ZERO);
                    row([ONE, ZERO, ZERO, ZERO], im_w);
                }
                case @ (ImKernelCase::BDistinct | ImKernelCase::BEqual) => {
                    let sj = params.s(j)?;
                    let skc = params.s(k)?.conj();
                    let second = if case == ImKernelCase::BEqual { -C64::new((sj * inv_w).im, 0.0) } else { -im_w };
                    row([ONE, ONE, ONE, ONE], im_w);
                    row([ONE, skc, sj, sj * skc], second);
                    row([ONE, skc, ONE, skc], -I * im_iw);
                    row([ONE, ONE, sj, sj], I * im_iw);
                }
                ImKernelCase::C => {
                    let sj = params.s(j)?;
                    row([ZERO, ZERO, ZERO, ONE], ZERO);
                    row([ZERO, ONE, ZERO, ZERO], ZERO);
                    row([ONE, ZERO, ONE, ZERO], im_w);
                    row([ONE, ZERO, sj, ZERO], I * im_iw);
                }
                ImKernelCase::D => {
                    let skc = params.s(k)?.conj();
                    row([ZERO, ZERO, ZERO, ONE], ZERO);
                    row([ONE, ONE, ZERO, ZERO], im_w);
                    row([ZERO, ZERO, ONE, ZERO], ZERO);
                    row([ONE, skc, ZERO, ZERO], -I * im_iw);
                }
            }
        }
    }
    let cols = n * n;
    let m = CMatrix::from_fn(rows.len(), cols, |i, c| rows[i][c]);
    Ok((m, rhs))
}

/// Least-squares solution of the stacked system.
#[derive(Debug, Clone, PartialEq)]
pub struct LsSolution {
    pub q: QMatrix,
    /// `‖M q - rhs‖_∞`.
    pub residual: f64,
    /// Largest entrywise distance to the closed form.
    pub gap: f64,
    pub rank: usize,
}

/// Solves the stacked system. A rank below `n²` would contradict
/// uniqueness of `q` and is reported as an error.
pub fn solve_q_least_squares(net: &StarNetwork, lambda: f64) -> Result<LsSolution> {
    let (m, rhs) = assemble_system(net, lambda)?;
    let n = net.len();
    let ls = least_squares(&m, &rhs, 1e-10);
    if ls.rank < n * n {
        return Err(Error::RankDeficient { rank: ls.rank, expected: n * n });
    }
    let entries = CMatrix::from_fn(n, n, |l, m| ls.solution[l * n + m]);
    let q = QMatrix { lambda, entries, normalized: false };
    let gap = q.max_gap(&closed_form(net, lambda)?);
    Ok(LsSolution { q, residual: ls.residual, gap, rank: ls.rank })
}

/// Smallest admissible `|β_j - α_j|`.
pub const ANCHOR_THRESHOLD: f64 = 1e-6;
/// Largest admissible condition number of `D`.
pub const CONDITION_LIMIT: f64 = 1e10;
/// Attempts made by [`AnchorFrame::select`].
pub const ANCHOR_ATTEMPTS: usize = 5;

/// Anchor points `x_j` on branches `2..n` and the matrices built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorFrame {
    lambda: f64,
    anchors: Vec<f64>,
    alpha: Vec<C64>,
    beta: Vec<C64>,
    d: CMatrix,
    c: CMatrix,
}

impl AnchorFrame {
    /// Frame from explicit anchors, one per branch after the first.
    pub fn new(net: &StarNetwork, lambda: f64, anchors: &[f64]) -> Result<Self> {
        let n = net.len();
        if anchors.len() != n - 1 {
            return Err(Error::Precondition("one anchor per branch after the first"));
        }
        if anchors.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::Precondition("anchors must be positive"));
        }
        net.band_index(lambda)?;
        let params = EigenParams::new(net, C64::new(lambda, 0.0), Sign::Minus);
        let mut all = vec![0.0];
        all.extend_from_slice(anchors);
        let mut alpha = vec![ONE];
        let mut beta = vec![ONE];
        for j in 1..n {
            let x = all[j];
            let a = (-I * params.xi(j) * x).exp();
            let b = (params.xi(j) * x).cos() - I * params.s(j)? * (params.xi(j) * x).sin();
            if (b - a).norm() < ANCHOR_THRESHOLD {
                return Err(Error::AnchorFailure(1));
            }
            alpha.push(a);
            beta.push(b);
        }
        // Column j of D is d_j: β_j at row j, α_j elsewhere; d_1 = (1, …, 1).
        let d = CMatrix::from_fn(n, n, |l, j| if l == j { beta[j] } else { alpha[j] });
        let c = CMatrix::from_fn(n, n, |l, m| if l == m { I * alpha[l] } else { ZERO });
        Ok(Self { lambda, anchors: all, alpha, beta, d, c })
    }

    /// Default anchors: `x_j = π/(2ξ_j)` on propagating branches and
    /// `x_j = 1/ξ'_j` on evanescent ones.
    pub fn default_anchors(net: &StarNetwork, lambda: f64) -> Result<Vec<f64>> {
        let p = net.band_index(lambda)?;
        let params = EigenParams::new(net, C64::new(lambda, 0.0), Sign::Minus);
        Ok((1..net.len())
            .map(|j| if j < p { FRAC_PI_2 / params.xi(j).re } else { 1.0 / params.xi_prime(j).re })
            .collect())
    }

    /// Default anchors, re-drawn uniformly from `[0.5, 2]·x_j` while the
    /// frame is degenerate or `D` is ill-conditioned. `uniform` yields
    /// samples in `[0, 1)`.
    pub fn select(net: &StarNetwork, lambda: f64, uniform: &mut dyn FnMut() -> f64) -> Result<Self> {
        let base = Self::default_anchors(net, lambda)?;
        let mut anchors = base.clone();
        for _ in 0..ANCHOR_ATTEMPTS {
            if let Ok(frame) = Self::new(net, lambda, &anchors) {
                if frame.condition().is_ok_and(|c| c <= CONDITION_LIMIT) {
                    return Ok(frame);
                }
            }
            anchors = base.iter().map(|&x| x * (0.5 + 1.5 * uniform())).collect();
        }
        Err(Error::AnchorFailure(ANCHOR_ATTEMPTS))
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `x_1 = 0` followed by the anchors.
    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    pub fn alpha(&self) -> &[C64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[C64] {
        &self.beta
    }

    pub fn d(&self) -> &CMatrix {
        &self.d
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    /// `det D = Π_{j ≥ 2} (β_j - α_j)`.
    pub fn determinant(&self) -> C64 {
        self.alpha.iter().zip(&self.beta).skip(1).map(|(a, b)| b - a).product()
    }

    fn condition(&self) -> Result<f64> {
        Ok(self.d.inverse_with_condition()?.1)
    }
}

/// `q = (D⁻¹)ᵀ Im(-i C D / w) conj(D)⁻¹`, from `Dᵀ q conj(D) = Im(-i C D / w)`.
pub fn q_direct(net: &StarNetwork, lambda: f64, frame: &AnchorFrame) -> Result<QMatrix> {
    let params = EigenParams::new(net, C64::new(lambda, 0.0), Sign::Minus);
    let (inv, cond) = frame.d.inverse_with_condition()?;
    if cond > CONDITION_LIMIT {
        return Err(Error::IllConditioned(cond));
    }
    let (inv_conj, _) = frame.d.conj().inverse_with_condition()?;
    let scale = -I / params.w();
    let x = frame.c.mul(&frame.d).map(|z| C64::new((scale * z).im, 0.0));
    let entries = inv.transpose().mul(&x).mul(&inv_conj);
    Ok(QMatrix { lambda, entries, normalized: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(c: &[f64], a: &[f64]) -> StarNetwork {
        StarNetwork::from_slices(c, a).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let q = closed_form(&net(&[1.0, 1.0], &[0.0, 3.0]), 1.0).unwrap();
        assert!((q.entries[(0, 0)].re - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(q.entries[(1, 1)], ZERO);
        let q = closed_form(&net(&[1.0; 3], &[0.0; 3]), 4.0).unwrap();
        for l in 0..3 {
            assert!((q.entries[(l, l)].re - 1.0 / 18.0).abs() < 1e-15);
        }
    }

    #[test]
    fn case_a_hand_value() {
        // 1/w = (-√2 + i)/3, so the case (a) value is e^{-√2(x + x')}/3.
        let n = net(&[1.0, 1.0], &[0.0, 3.0]);
        let v = im_kernel_cases(&n, 1.0, 1, 1, 0.4, 0.9).unwrap();
        let want = (-(2f64.sqrt()) * 1.3).exp() / 3.0;
        assert!((v - want).abs() < 1e-15);
        assert!((im_kernel_direct(&n, 1.0, 1, 1, 0.4, 0.9).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn below_spectrum_everything_vanishes() {
        let n = net(&[1.0, 2.0, 1.0], &[0.5, 1.0, 4.0]);
        for (j, k) in [(0, 0), (0, 2), (2, 1)] {
            assert_eq!(im_kernel_cases(&n, 0.2, j, k, 0.3, 1.1).unwrap(), 0.0);
        }
        let (_, rhs) = assemble_system(&n, 0.2).unwrap();
        assert!(rhs.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn direct_two_branch_hand_case() {
        let n = net(&[1.0, 1.0], &[0.0, 0.0]);
        let frame = AnchorFrame::new(&n, 4.0, &[0.3]).unwrap();
        let d = frame.d();
        assert!((d[(0, 1)] - C64::new(0.0, -0.6).exp()).norm() < 1e-15);
        assert!((d[(1, 1)] - C64::new(0.0, 0.6).exp()).norm() < 1e-15);
        let q = q_direct(&n, 4.0, &frame).unwrap();
        assert!((q.entries[(0, 0)] - C64::new(0.125, 0.0)).norm() < 1e-12);
        assert!((q.entries[(1, 1)] - C64::new(0.125, 0.0)).norm() < 1e-12);
        assert!(q.max_off_diagonal() < 1e-12);
    }

    #[test]
    fn system_has_n_squared_columns() {
        let (m, rhs) = assemble_system(&net(&[1.0, 2.0, 1.0], &[0.0, 1.0, 4.0]), 2.0).unwrap();
        assert_eq!(m.cols(), 9);
        assert_eq!(m.rows(), 36);
        assert_eq!(rhs.len(), 36);
    }

    #[test]
    fn degenerate_anchor_is_refused() {
        // With equal potentials at λ = 4 and x = π, sin(2π) = 0 gives β = α.
        let n = net(&[1.0, 1.0], &[0.0, 0.0]);
        assert!(AnchorFrame::new(&n, 4.0, &[core::f64::consts::PI]).is_err());
        let mut u = 0.3;
        let frame = AnchorFrame::select(&n, 4.0, &mut || {
            u = (u + 0.618_033_988_75) % 1.0;
            u
        })
        .unwrap();
        assert!(frame.determinant().norm() > ANCHOR_THRESHOLD);
    }
}
