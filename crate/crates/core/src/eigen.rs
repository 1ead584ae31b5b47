//! Generalized eigenfunctions `F_λ^{±,j}` and the scalars they are built from.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::network::{BranchPoint, StarNetwork};
use crate::{Error, Result, C64};

/// Square root with the argument taken in `[-π, π)`: `z = r e^{iφ}` maps to
/// `√r e^{iφ/2}`.
///
/// On the negative real axis this returns `-i√r`, the opposite of the usual
/// principal root. Evaluated at `(λ - a_k)/c_k` with `λ` below `a_k`, it
/// yields `ξ_k = -iξ'_k` with `ξ'_k > 0`, so `e^{-iξ_k x}` decays.
pub fn branch_sqrt(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        return C64::new(0.0, 0.0);
    }
    // Exact results on the real axis keep real-λ quantities exactly real.
    if z.im == 0.0 {
        return if z.re > 0.0 { C64::new(z.re.sqrt(), 0.0) } else { C64::new(0.0, -(-z.re).sqrt()) };
    }
    // Off the real axis atan2 lies in (-π, π], and π itself only arises by
    // rounding just above the cut.
    C64::from_polar(r.sqrt(), 0.5 * z.im.atan2(z.re))
}

/// Which family of eigenfunctions: `+` for `Im λ > 0`, `-` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// The sign used by the resolvent kernel at `λ`.
    pub fn for_lambda(lambda: C64) -> Self {
        if lambda.im > 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Every `λ`-dependent scalar at one spectral point.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenParams {
    lambda: C64,
    sign: Sign,
    xi: Vec<C64>,
    s: Vec<Option<C64>>,
    w: C64,
}

/// Computes `ξ_k`, `s_k` and `w` at `λ` for the given sign.
pub fn eigen_params(net: &StarNetwork, lambda: C64, sign: Sign) -> EigenParams {
    EigenParams::new(net, lambda, sign)
}

impl EigenParams {
    pub fn new(net: &StarNetwork, lambda: C64, sign: Sign) -> Self {
        let (c, a) = (net.speeds(), net.potentials());
        let xi: Vec<C64> = (0..net.len()).map(|k| branch_sqrt((lambda - a[k]) / c[k])).collect();
        let flux: Vec<C64> = xi.iter().zip(c).map(|(&x, &c)| x * c).collect();
        let total: C64 = flux.iter().sum();
        // The sum over the other branches is accumulated directly rather than
        // as `total - own`, which would cancel.
        let s = (0..net.len())
            .map(|k| {
                (flux[k] != C64::new(0.0, 0.0)).then(|| {
                    let others: C64 = flux.iter().enumerate().filter(|&(l, _)| l != k).map(|(_, &f)| f).sum();
                    -others / flux[k]
                })
            })
            .collect();
        let w = C64::new(0.0, sign.value()) * total;
        Self { lambda, sign, xi, s, w }
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn xi(&self, k: usize) -> C64 {
        self.xi[k]
    }

    pub fn xis(&self) -> &[C64] {
        &self.xi
    }

    /// `ξ'_k = iξ_k`, the positive decay rate on an evanescent branch.
    pub fn xi_prime(&self, k: usize) -> C64 {
        C64::new(0.0, 1.0) * self.xi[k]
    }

    /// Node mixing coefficient `s_k`; unavailable when `ξ_k = 0`.
    pub fn s(&self, k: usize) -> Result<C64> {
        self.s[k].ok_or(Error::MixingUnavailable(k))
    }

    pub fn w(&self) -> C64 {
        self.w
    }

    fn check(&self, j: usize, p: &BranchPoint) -> Result<C64> {
        if j >= self.len() || p.branch() >= self.len() {
            return Err(Error::BranchOutOfRange { branch: j.max(p.branch()), n: self.len() });
        }
        self.s(j)
    }

    /// `F^{±,j}` at `p`: `cos(ξ_j x) ± i s_j sin(ξ_j x)` on branch `j` and
    /// `exp(±iξ_k x)` on any other branch `k`.
    pub fn eval(&self, j: usize, p: BranchPoint) -> Result<C64> {
        let s = self.check(j, &p)?;
        Ok(self.value_with(j, s, p.branch(), p.x()))
    }

    /// Exact `x`-derivative of [`EigenParams::eval`].
    pub fn eval_deriv(&self, j: usize, p: BranchPoint) -> Result<C64> {
        let s = self.check(j, &p)?;
        let (k, x) = (p.branch(), p.x());
        let xi = self.xi[k];
        let i_sign = C64::new(0.0, self.sign.value());
        Ok(if k == j {
            -xi * (xi * x).sin() + i_sign * s * xi * (xi * x).cos()
        } else {
            i_sign * xi * (i_sign * xi * x).exp()
        })
    }

    /// Exact second derivative, `-ξ_k² F` on branch `k`.
    pub fn eval_second(&self, j: usize, p: BranchPoint) -> Result<C64> {
        let xi = self.xi[p.branch().min(self.len() - 1)];
        Ok(-xi * xi * self.eval(j, p)?)
    }

    /// `F^{±,j}` on branch `k` at `x` with `s_j` already resolved.
    pub(crate) fn value_with(&self, j: usize, s_j: C64, k: usize, x: f64) -> C64 {
        let xi = self.xi[k];
        let i_sign = C64::new(0.0, self.sign.value());
        if k == j {
            (xi * x).cos() + i_sign * s_j * (xi * x).sin()
        } else {
            (i_sign * xi * x).exp()
        }
    }
}

/// Uniform bound on `|s_j(λ - iε)|` for `0 < ε < δ`.
///
/// With equal potentials `s_j` is constant and the bound is
/// `max_j c_j^{-1/2} Σ_{k≠j} √c_k`. Otherwise it is
/// `max_j (c_j|λ - a_j|)^{-1/2} · Σ_k √c_k ((λ - a_k)² + δ²)^{1/4}`.
pub fn bound_m(net: &StarNetwork, lambda: f64, delta: f64) -> f64 {
    let (c, a) = (net.speeds(), net.potentials());
    let n = net.len();
    if net.equal_potentials() {
        return (0..n)
            .map(|j| (0..n).filter(|&k| k != j).map(|k| c[k].sqrt()).sum::<f64>() / c[j].sqrt())
            .fold(0.0, f64::max);
    }
    let lead = (0..n).map(|j| 1.0 / (c[j] * (lambda - a[j]).abs()).sqrt()).fold(0.0, f64::max);
    let sum: f64 = (0..n).map(|k| c[k].sqrt() * ((lambda - a[k]).powi(2) + delta * delta).powf(0.25)).sum();
    lead * sum
}
