//! The resolvent kernel `K(x, x', λ)` and its action on functions.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::eigen::{bound_m, EigenParams, Sign};
use crate::network::{BranchPoint, NetworkFunction, QuadratureKind, QuadratureRule, StarNetwork};
use crate::{Error, Result, C64};

/// Arguments of one kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    pub x: BranchPoint,
    pub x_prime: BranchPoint,
    pub lambda: C64,
}

/// The kernel at a fixed `λ`, with the eigenfunction family chosen by the
/// sign of `Im λ` (`-` for real `λ`, the limit from below).
#[derive(Debug, Clone)]
pub struct Kernel {
    params: EigenParams,
    s: Vec<C64>,
    inv_w: C64,
}

impl Kernel {
    pub fn new(net: &StarNetwork, lambda: C64) -> Result<Self> {
        let params = EigenParams::new(net, lambda, Sign::for_lambda(lambda));
        if params.w() == C64::new(0.0, 0.0) {
            return Err(Error::SingularWronskian(lambda.re));
        }
        let s = (0..net.len())
            .map(|k| params.s(k).map_err(|_| Error::BandEdge(lambda.re)))
            .collect::<Result<Vec<_>>>()?;
        let inv_w = C64::new(1.0, 0.0) / params.w();
        Ok(Self { params, s, inv_w })
    }

    pub fn params(&self) -> &EigenParams {
        &self.params
    }

    fn f(&self, j: usize, k: usize, x: f64) -> C64 {
        self.params.value_with(j, self.s[j], k, x)
    }

    /// `K(x, x')`. With `x` on branch `j`: for `x'` further out on the same
    /// branch, `F^j_j(x) F^{j+1}_j(x') / w`; otherwise
    /// `F^{j+1}_j(x) F^j(x') / w`, indices modulo `n`.
    pub fn eval(&self, x: BranchPoint, x_prime: BranchPoint) -> C64 {
        let n = self.params.len();
        let j = x.branch();
        let next = (j + 1) % n;
        if x_prime.branch() == j && x_prime.x() > x.x() {
            self.f(j, j, x.x()) * self.f(next, j, x_prime.x()) * self.inv_w
        } else {
            self.f(next, j, x.x()) * self.f(j, x_prime.branch(), x_prime.x()) * self.inv_w
        }
    }
}

/// One kernel evaluation.
pub fn kernel_k(net: &StarNetwork, q: &KernelQuery) -> Result<C64> {
    net.check_branch(q.x.branch())?;
    net.check_branch(q.x_prime.branch())?;
    Ok(Kernel::new(net, q.lambda)?.eval(q.x, q.x_prime))
}

/// `R(λ)f = ∫_N K(·, x', λ) f(x') dx'` on the grid of `f`.
///
/// Integrals over other branches use `rule`. On the output point's own
/// branch the kernel has a kink at `x' = x`, so that integral is split there
/// and each half integrated by the trapezoid rule, accumulated in one sweep
/// from each end. Cost is linear in the number of samples.
pub fn apply_resolvent(
    net: &StarNetwork,
    f: &NetworkFunction,
    lambda: C64,
    rule: &QuadratureRule,
) -> Result<NetworkFunction> {
    let kernel = Kernel::new(net, lambda)?;
    check_grids(net, f, rule)?;
    let grid = f.grid().clone();
    let n = net.len();
    let sign = C64::new(0.0, kernel.params.sign().value());
    // E_b = ∫_{N_b} exp(±iξ_b x') f_b(x') dx'.
    let outgoing: Vec<C64> = (0..n)
        .map(|b| {
            let xi = kernel.params.xi(b);
            f.branch(b)
                .iter()
                .zip(rule.weights(b))
                .enumerate()
                .map(|(i, (&v, &w))| (sign * xi * f.x(b, i)).exp() * v * w)
                .sum()
        })
        .collect();
    let total: C64 = outgoing.iter().sum();
    let values = crate::par::map_range(n, |j| {
        let b = grid.branch(j);
        let (m, dx) = (b.count(), b.dx());
        let v = f.branch(j);
        let e: Vec<C64> = (0..m).map(|i| kernel.f((j + 1) % n, j, b.x(i))).collect();
        let phi: Vec<C64> = (0..m).map(|i| kernel.f(j, j, b.x(i))).collect();
        let mut inner = vec![C64::new(0.0, 0.0); m];
        for i in 1..m {
            inner[i] = inner[i - 1] + (phi[i - 1] * v[i - 1] + phi[i] * v[i]) * (0.5 * dx);
        }
        let mut outer = vec![C64::new(0.0, 0.0); m];
        for i in (0..m - 1).rev() {
            outer[i] = outer[i + 1] + (e[i] * v[i] + e[i + 1] * v[i + 1]) * (0.5 * dx);
        }
        let others = total - outgoing[j];
        (0..m)
            .map(|i| (e[i] * (others + inner[i]) + phi[i] * outer[i]) * kernel.inv_w)
            .collect::<Vec<C64>>()
    });
    let node = values[0][0];
    let values = values
        .into_iter()
        .map(|mut v| {
            v[0] = node;
            v
        })
        .collect();
    Ok(NetworkFunction::from_raw(grid, values))
}

/// Reference evaluation of [`apply_resolvent`] by direct summation of the
/// kernel at every pair of samples, with the same quadrature: `rule` on
/// other branches and the trapezoid rule on the own branch.
pub fn apply_resolvent_naive(
    net: &StarNetwork,
    f: &NetworkFunction,
    lambda: C64,
    rule: &QuadratureRule,
) -> Result<NetworkFunction> {
    let kernel = Kernel::new(net, lambda)?;
    check_grids(net, f, rule)?;
    let grid = f.grid().clone();
    let trap = QuadratureRule::new(&grid, QuadratureKind::Trapezoid);
    let n = net.len();
    let values = (0..n)
        .map(|j| {
            crate::par::map_range(grid.branch(j).count(), |i| {
                let x = BranchPoint::new(net, j, f.x(j, i)).expect("grid point");
                let mut acc = C64::new(0.0, 0.0);
                for b in 0..n {
                    let w = if b == j { trap.weights(b) } else { rule.weights(b) };
                    for (l, (&v, &w)) in f.branch(b).iter().zip(w).enumerate() {
                        let xp = BranchPoint::new(net, b, f.x(b, l)).expect("grid point");
                        acc += kernel.eval(x, xp) * v * w;
                    }
                }
                acc
            })
        })
        .collect::<Vec<_>>();
    let node = values[0][0];
    let values = values
        .into_iter()
        .map(|mut v| {
            v[0] = node;
            v
        })
        .collect();
    Ok(NetworkFunction::from_raw(grid, values))
}

fn check_grids(net: &StarNetwork, f: &NetworkFunction, rule: &QuadratureRule) -> Result<()> {
    if f.grid().len() != net.len() || f.grid() != rule.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Constants `(N, γ)` of the kernel bound `|K(x, x', λ - iε)| ≤ N e^{γ(x + x')}`
/// for `0 < ε < δ`.
pub fn lap_constants(net: &StarNetwork, lambda: f64, delta: f64) -> (f64, f64) {
    let (c, a) = (net.speeds(), net.potentials());
    let m = bound_m(net, lambda, delta);
    let weight: f64 = c.iter().zip(a).map(|(&c, &a)| c * (lambda - a).abs()).sum();
    let big_n = (1.0 + m) / weight.sqrt();
    let spread = net.highest_edge() - net.lowest_edge();
    let inv_speed = c.iter().map(|&c| 1.0 / c.sqrt()).fold(0.0, f64::max);
    let gamma = inv_speed * (spread * spread + delta * delta).powf(0.25).max(1.0).max(delta);
    (big_n, gamma)
}

/// A sample pair and damping for [`limiting_absorption_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LapSample {
    pub x: BranchPoint,
    pub x_prime: BranchPoint,
    pub epsilon: f64,
}

/// Outcome of [`limiting_absorption_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct LapReport {
    pub n_bound: f64,
    pub gamma: f64,
    pub samples: usize,
    /// Samples where `|K(λ - iε)| > N e^{γ(x + x')}`.
    pub bound_violations: usize,
    /// Largest `|K(λ - iε)| / (N e^{γ(x + x')})`.
    pub worst_ratio: f64,
    /// Largest `|K(λ - iδ2^{-40}) - K(λ)|` over the samples.
    pub limit_gap: f64,
    /// Largest final Cauchy increment `|K(λ - iα_40) - K(λ - iα_39)|`.
    pub cauchy_increment: f64,
}

impl LapReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.bound_violations == 0 && self.limit_gap < tol && self.cauchy_increment < tol
    }
}

/// Checks the limiting absorption principle at real `λ` on the given
/// samples: the kernel bound at `λ - iε`, and convergence of
/// `K(λ - iα)` to `K(λ)` along `α = δ 2^{-m}`, `m = 0..=40`.
pub fn limiting_absorption_check(
    net: &StarNetwork,
    lambda: f64,
    delta: f64,
    samples: &[LapSample],
) -> Result<LapReport> {
    if net.is_band_edge(lambda) {
        return Err(Error::BandEdge(lambda));
    }
    let (n_bound, gamma) = lap_constants(net, lambda, delta);
    let at_limit = Kernel::new(net, C64::new(lambda, 0.0))?;
    let ladder: Vec<Kernel> = (0..=40)
        .map(|m| Kernel::new(net, C64::new(lambda, -delta * 2f64.powi(-m))))
        .collect::<Result<_>>()?;
    let mut report = LapReport {
        n_bound,
        gamma,
        samples: samples.len(),
        bound_violations: 0,
        worst_ratio: 0.0,
        limit_gap: 0.0,
        cauchy_increment: 0.0,
    };
    for s in samples {
        let k = Kernel::new(net, C64::new(lambda, -s.epsilon))?.eval(s.x, s.x_prime);
        let bound = n_bound * (gamma * (s.x.x() + s.x_prime.x())).exp();
        let ratio = k.norm() / bound;
        report.worst_ratio = report.worst_ratio.max(ratio);
        if ratio > 1.0 {
            report.bound_violations += 1;
        }
        let limit = at_limit.eval(s.x, s.x_prime);
        let last = ladder[40].eval(s.x, s.x_prime);
        let before = ladder[39].eval(s.x, s.x_prime);
        report.limit_gap = report.limit_gap.max((last - limit).norm());
        report.cauchy_increment = report.cauchy_increment.max((last - before).norm());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkGrid;

    fn net(c: &[f64], a: &[f64]) -> StarNetwork {
        StarNetwork::from_slices(c, a).unwrap()
    }

    fn pt(n: &StarNetwork, b: usize, x: f64) -> BranchPoint {
        BranchPoint::new(n, b, x).unwrap()
    }

    #[test]
    fn node_value_is_inverse_wronskian() {
        let n = net(&[1.0, 2.0, 1.0], &[0.0, 1.0, 4.0]);
        for lambda in [C64::new(2.0, 0.5), C64::new(5.0, -0.1), C64::new(2.0, 0.0)] {
            let k = Kernel::new(&n, lambda).unwrap();
            let inv_w = 1.0 / k.params().w();
            for b in 0..3 {
                for b2 in 0..3 {
                    assert!((k.eval(pt(&n, b, 0.0), pt(&n, b2, 0.0)) - inv_w).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn same_branch_symmetry_and_diagonal_continuity() {
        let n = net(&[1.0, 2.0, 1.0], &[0.0, 1.0, 4.0]);
        let k = Kernel::new(&n, C64::new(2.3, -0.2)).unwrap();
        for b in 0..3 {
            let (x, y) = (pt(&n, b, 0.7), pt(&n, b, 1.9));
            let d = (k.eval(x, y) - k.eval(y, x)).norm();
            assert!(d < 1e-12 * k.eval(x, y).norm().max(1.0));
            let z = pt(&n, b, 1.2);
            let above = k.eval(z, pt(&n, b, 1.2 + 1e-13));
            let at = k.eval(z, z);
            assert!((above - at).norm() < 1e-11);
        }
    }

    #[test]
    fn real_kernel_below_spectrum() {
        let n = net(&[1.0, 2.0, 1.0], &[1.0, 2.0, 4.0]);
        let k = Kernel::new(&n, C64::new(0.3, 0.0)).unwrap();
        for (b, b2) in [(0, 0), (0, 1), (2, 1), (1, 1)] {
            for (x, y) in [(0.3, 1.2), (2.0, 0.1)] {
                assert_eq!(k.eval(pt(&n, b, x), pt(&n, b2, y)).im, 0.0);
            }
        }
    }

    #[test]
    fn singular_point_is_reported() {
        let n = net(&[1.0, 1.0], &[0.0, 0.0]);
        assert!(matches!(Kernel::new(&n, C64::new(0.0, 0.0)), Err(Error::SingularWronskian(_))));
        let n = net(&[1.0, 1.0], &[0.0, 3.0]);
        assert!(matches!(Kernel::new(&n, C64::new(3.0, 0.0)), Err(Error::BandEdge(_))));
    }

    #[test]
    fn fast_path_matches_direct_summation() {
        let n = net(&[1.0, 2.0, 1.0], &[0.0, 1.0, 4.0]);
        let grid = NetworkGrid::uniform(3, 0.05, 6.0).unwrap();
        let rule = QuadratureRule::simpson(&grid);
        let f = NetworkFunction::from_fn(&grid, |k, x| C64::new((-(x - 2.0 - k as f64 * 0.3).powi(2)).exp(), 0.1 * x));
        for lambda in [C64::new(2.0, 0.5), C64::new(4.5, -0.1), C64::new(2.0, 0.0), C64::new(-1.0, 0.0)] {
            let fast = apply_resolvent(&n, &f, lambda, &rule).unwrap();
            let slow = apply_resolvent_naive(&n, &f, lambda, &rule).unwrap();
            let diff = fast.sub(&slow).unwrap().sup_norm();
            assert!(diff < 1e-12 * slow.sup_norm(), "{lambda}: {diff}");
        }
    }

    #[test]
    fn lap_constants_equal_potentials() {
        let n = net(&[1.0, 1.0], &[0.0, 0.0]);
        let (big_n, gamma) = lap_constants(&n, 2.0, 0.1);
        assert!((big_n - 2.0 / 2.0f64.sqrt() / 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(gamma, 1.0);
    }
}
