//! Leapfrog time-domain solver for `u_tt - c_k u_xx + a_k u = 0` on a
//! truncated star, plus the d'Alembert closed form for the free line.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::network::{NetworkFunction, NetworkGrid, StarNetwork};
use crate::{Error, Result, C64};

/// Condition at the far end of every branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Dirichlet,
    Neumann,
    /// Damping `σ(x) = strength·((x - (L - width))/width)²` over the last
    /// `width` of each branch, with a Dirichlet end.
    Sponge { width: f64, strength: f64 },
}

/// How the node value is recovered from the branch samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeScheme {
    /// `u_0 = Σ c_k u_{k,1} / Σ c_k`.
    FirstOrder,
    /// `u_0 = Σ c_k (4u_{k,1} - u_{k,2}) / (3 Σ c_k)`, the zero of the
    /// second-order one-sided Kirchhoff sum.
    #[default]
    SecondOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdtdConfig {
    pub dx: f64,
    pub dt: f64,
    /// Truncation length per branch.
    pub lengths: Vec<f64>,
    pub boundary: Boundary,
    pub final_time: f64,
    pub node: NodeScheme,
}

impl FdtdConfig {
    /// Configuration with `dt = courant · dx / max √c_k`.
    pub fn with_courant(net: &StarNetwork, dx: f64, courant: f64, length: f64, boundary: Boundary, final_time: f64) -> Self {
        let speed = net.speeds().iter().map(|c| c.sqrt()).fold(0.0, f64::max);
        Self {
            dx,
            dt: courant * dx / speed,
            lengths: vec![length; net.len()],
            boundary,
            final_time,
            node: NodeScheme::SecondOrder,
        }
    }
}

/// Two consecutive time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct FdtdState {
    /// Time of the current level.
    pub time: f64,
    pub steps: usize,
    prev: Vec<Vec<f64>>,
    curr: Vec<Vec<f64>>,
}

impl FdtdState {
    pub fn current(&self) -> &[Vec<f64>] {
        &self.curr
    }

    pub fn previous(&self) -> &[Vec<f64>] {
        &self.prev
    }
}

#[derive(Debug, Clone)]
pub struct FdtdSolver {
    net: StarNetwork,
    cfg: FdtdConfig,
    grid: NetworkGrid,
    sigma: Vec<Vec<f64>>,
}

impl FdtdSolver {
    pub fn new(net: &StarNetwork, cfg: FdtdConfig) -> Result<Self> {
        if cfg.lengths.len() != net.len() {
            return Err(Error::GridMismatch);
        }
        if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
            return Err(Error::Cfl("dt must be positive"));
        }
        let speed = net.speeds().iter().map(|c| c.sqrt()).fold(0.0, f64::max);
        if cfg.dt > 0.9 * cfg.dx / speed * (1.0 + 1e-12) {
            return Err(Error::Cfl("dt exceeds 0.9 dx / max sqrt(c)"));
        }
        let stiff = net
            .speeds()
            .iter()
            .zip(net.potentials())
            .map(|(&c, &a)| cfg.dt * cfg.dt * (4.0 * c / (cfg.dx * cfg.dx) + a))
            .fold(0.0, f64::max);
        if stiff > 4.0 {
            return Err(Error::Cfl("dt too large for the potential"));
        }
        let branches = cfg
            .lengths
            .iter()
            .map(|&l| crate::network::BranchGrid::new(cfg.dx, l))
            .collect::<Result<Vec<_>>>()?;
        if branches.iter().any(|b| b.count() < 4) {
            return Err(Error::InvalidGrid("FDTD needs at least 4 samples per branch"));
        }
        let grid = NetworkGrid::new(branches)?;
        let sigma = grid
            .branches()
            .iter()
            .map(|b| {
                let len = b.length();
                (0..b.count())
                    .map(|i| match cfg.boundary {
                        Boundary::Sponge { width, strength } => {
                            let d = b.x(i) - (len - width);
                            if d > 0.0 { strength * (d / width).powi(2) } else { 0.0 }
                        }
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        if let Boundary::Sponge { width, strength } = cfg.boundary {
            if width < 10.0 * cfg.dx || strength < 0.0 {
                return Err(Error::InvalidGrid("sponge must span at least 10 dx with nonnegative strength"));
            }
        }
        Ok(Self { net: net.clone(), cfg, grid, sigma })
    }

    pub fn grid(&self) -> &NetworkGrid {
        &self.grid
    }

    pub fn config(&self) -> &FdtdConfig {
        &self.cfg
    }

    /// Initial levels from `u(0) = u0`, `u_t(0) = v0` (real parts), the
    /// second level by a second-order Taylor step.
    pub fn initial_state(&self, u0: &NetworkFunction, v0: Option<&NetworkFunction>) -> Result<FdtdState> {
        if u0.grid() != &self.grid || v0.is_some_and(|v| v.grid() != &self.grid) {
            return Err(Error::GridMismatch);
        }
        let dt = self.cfg.dt;
        let prev: Vec<Vec<f64>> = u0.branches().iter().map(|b| b.iter().map(|z| z.re).collect()).collect();
        let vel: Vec<Vec<f64>> = match v0 {
            Some(v) => v.branches().iter().map(|b| b.iter().map(|z| z.re).collect()).collect(),
            None => prev.iter().map(|b| vec![0.0; b.len()]).collect(),
        };
        let mut curr = prev.clone();
        for k in 0..self.net.len() {
            let (c, a) = (self.net.speeds()[k], self.net.potentials()[k]);
            let u = &prev[k];
            let m = u.len();
            for i in 1..m {
                let right = if i + 1 < m { u[i + 1] } else { self.ghost(u) };
                let lap = (right - 2.0 * u[i] + u[i - 1]) / (self.cfg.dx * self.cfg.dx);
                let acc = c * lap - a * u[i] - self.sigma[k][i] * vel[k][i];
                curr[k][i] = u[i] + dt * vel[k][i] + 0.5 * dt * dt * acc;
            }
        }
        self.close(&mut curr);
        Ok(FdtdState { time: dt, steps: 1, prev, curr })
    }

    fn ghost(&self, u: &[f64]) -> f64 {
        match self.cfg.boundary {
            Boundary::Neumann => u[u.len() - 2],
            _ => 0.0,
        }
    }

    /// Imposes the far-end condition and the node coupling on a new level.
    fn close(&self, level: &mut [Vec<f64>]) {
        if !matches!(self.cfg.boundary, Boundary::Neumann) {
            for b in level.iter_mut() {
                let last = b.len() - 1;
                b[last] = 0.0;
            }
        }
        let c = self.net.speeds();
        let total: f64 = c.iter().sum();
        let node = match self.cfg.node {
            NodeScheme::FirstOrder => level.iter().zip(c).map(|(b, c)| c * b[1]).sum::<f64>() / total,
            NodeScheme::SecondOrder => {
                level.iter().zip(c).map(|(b, c)| c * (4.0 * b[1] - b[2])).sum::<f64>() / (3.0 * total)
            }
        };
        for b in level.iter_mut() {
            b[0] = node;
        }
    }

    /// Advances one step in place.
    pub fn step_mut(&self, s: &mut FdtdState) {
        let (dt, dx) = (self.cfg.dt, self.cfg.dx);
        let neumann = matches!(self.cfg.boundary, Boundary::Neumann);
        for k in 0..self.net.len() {
            let (c, a) = (self.net.speeds()[k], self.net.potentials()[k]);
            let courant = c * dt * dt / (dx * dx);
            let u = &s.curr[k];
            let old = &mut s.prev[k];
            let m = u.len();
            let end = if neumann { m } else { m - 1 };
            for i in 1..end {
                let right = if i + 1 < m { u[i + 1] } else { u[m - 2] };
                let damp = 0.5 * self.sigma[k][i] * dt;
                let next = 2.0 * u[i] - (1.0 - damp) * old[i] + courant * (right - 2.0 * u[i] + u[i - 1])
                    - dt * dt * a * u[i];
                old[i] = next / (1.0 + damp);
            }
        }
        core::mem::swap(&mut s.prev, &mut s.curr);
        self.close(&mut s.curr);
        s.steps += 1;
        s.time += dt;
    }

    pub fn step(&self, s: &FdtdState) -> FdtdState {
        let mut next = s.clone();
        self.step_mut(&mut next);
        next
    }

    /// Steps until the current time is within half a step of `t`.
    pub fn run_until(&self, s: &mut FdtdState, t: f64) {
        while s.time + 0.5 * self.cfg.dt < t {
            self.step_mut(s);
        }
    }

    /// Discrete energy at the half step between the two stored levels.
    ///
    /// `½ Σ_k [Σ ω_i (δ_t u_i)² + c_k Σ dx D₊u_i^{n+1} D₊u_i^n + a_k Σ ω_i u_i^{n+1} u_i^n]`
    /// with `ω_i = dx` off the node (`dx/2` at a Neumann end). This is
    /// exactly conserved by the first-order node scheme without damping.
    pub fn energy(&self, s: &FdtdState) -> f64 {
        let (dt, dx) = (self.cfg.dt, self.cfg.dx);
        let mut e = 0.0;
        for k in 0..self.net.len() {
            let (c, a) = (self.net.speeds()[k], self.net.potentials()[k]);
            let (u1, u0) = (&s.curr[k], &s.prev[k]);
            let m = u1.len();
            for i in 1..m {
                let w = if i == m - 1 { 0.5 * dx } else { dx };
                let v = (u1[i] - u0[i]) / dt;
                e += w * (v * v + a * u1[i] * u0[i]);
            }
            for i in 0..m - 1 {
                e += c * (u1[i + 1] - u1[i]) * (u0[i + 1] - u0[i]) / dx;
            }
        }
        0.5 * e
    }

    /// `Σ_k c_k D_k` at the current level, `D_k` the second-order one-sided
    /// node derivative.
    pub fn node_flux(&self, s: &FdtdState) -> f64 {
        s.curr
            .iter()
            .zip(self.net.speeds())
            .map(|(b, c)| c * (-3.0 * b[0] + 4.0 * b[1] - b[2]) / (2.0 * self.cfg.dx))
            .sum()
    }

    /// The current level as a network function.
    pub fn to_function(&self, s: &FdtdState) -> NetworkFunction {
        let values = s.curr.iter().map(|b| b.iter().map(|&v| C64::new(v, 0.0)).collect()).collect();
        NetworkFunction::from_raw(self.grid.clone(), values)
    }
}

/// Free-line solution `½(u0(X - √c t) + u0(X + √c t))` for two identical
/// branches without potential, on the line `X = x` on branch 0 and `X = -x`
/// on branch 1. `u0` is given as `u0(branch, x)`.
pub fn dalembert_reference(
    net: &StarNetwork,
    u0: impl Fn(usize, f64) -> f64,
    t: f64,
    grid: &NetworkGrid,
) -> Result<NetworkFunction> {
    let (c, a) = (net.speeds(), net.potentials());
    if net.len() != 2 || c[0] != c[1] || a.iter().any(|&a| a != 0.0) {
        return Err(Error::Precondition("d'Alembert reference needs two equal branches without potential"));
    }
    let line = |x: f64| if x >= 0.0 { u0(0, x) } else { u0(1, -x) };
    let shift = c[0].sqrt() * t;
    Ok(NetworkFunction::from_real_fn(grid, |k, x| {
        let xl = if k == 0 { x } else { -x };
        0.5 * (line(xl - shift) + line(xl + shift))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(c: &[f64], a: &[f64]) -> StarNetwork {
        StarNetwork::from_slices(c, a).unwrap()
    }

    #[test]
    fn cfl_is_enforced() {
        let n = net(&[1.0, 4.0], &[0.0, 0.0]);
        let mut cfg = FdtdConfig::with_courant(&n, 0.01, 0.9, 1.0, Boundary::Dirichlet, 1.0);
        assert!(FdtdSolver::new(&n, cfg.clone()).is_ok());
        cfg.dt *= 1.01;
        assert!(matches!(FdtdSolver::new(&n, cfg), Err(Error::Cfl(_))));
        let cfg = FdtdConfig::with_courant(&n, 0.01, 0.5, 1.0, Boundary::Sponge { width: 0.05, strength: 1.0 }, 1.0);
        assert!(FdtdSolver::new(&n, cfg).is_err());
    }

    #[test]
    fn constant_state_is_stationary() {
        let n = net(&[1.0, 2.0, 0.5], &[0.0, 0.0, 0.0]);
        let cfg = FdtdConfig::with_courant(&n, 0.05, 0.8, 2.0, Boundary::Neumann, 1.0);
        let solver = FdtdSolver::new(&n, cfg).unwrap();
        let u0 = NetworkFunction::from_real_fn(solver.grid(), |_, _| 1.5);
        let mut s = solver.initial_state(&u0, None).unwrap();
        for _ in 0..50 {
            solver.step_mut(&mut s);
        }
        assert!(s.current().iter().flatten().all(|&v| (v - 1.5).abs() < 1e-13));
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let n = net(&[1.0, 1.0], &[0.0, 2.0]);
        let solver = FdtdSolver::new(&n, FdtdConfig::with_courant(&n, 0.05, 0.8, 2.0, Boundary::Dirichlet, 1.0)).unwrap();
        let s = solver.initial_state(&NetworkFunction::zeros(solver.grid()), None).unwrap();
        assert_eq!(solver.energy(&s), 0.0);
    }

    #[test]
    fn first_order_node_conserves_energy_exactly() {
        let n = net(&[1.0, 2.0, 0.5], &[0.0, 1.0, 3.0]);
        let mut cfg = FdtdConfig::with_courant(&n, 0.02, 0.8, 3.0, Boundary::Dirichlet, 1.0);
        cfg.node = NodeScheme::FirstOrder;
        let solver = FdtdSolver::new(&n, cfg).unwrap();
        let u0 = NetworkFunction::from_real_fn(solver.grid(), |k, x| (-(x - 1.0 - 0.2 * k as f64).powi(2) * 8.0).exp());
        let mut s = solver.initial_state(&u0, None).unwrap();
        let e0 = solver.energy(&s);
        for _ in 0..2000 {
            solver.step_mut(&mut s);
        }
        assert!((solver.energy(&s) - e0).abs() < 1e-11 * e0);
    }

    #[test]
    fn second_order_node_zeroes_the_flux() {
        let n = net(&[1.0, 2.0, 0.5], &[0.0, 1.0, 3.0]);
        let solver = FdtdSolver::new(&n, FdtdConfig::with_courant(&n, 0.02, 0.8, 3.0, Boundary::Dirichlet, 1.0)).unwrap();
        let u0 = NetworkFunction::from_real_fn(solver.grid(), |_, x| (-(x - 0.5).powi(2) * 8.0).exp());
        let mut s = solver.initial_state(&u0, None).unwrap();
        for _ in 0..500 {
            solver.step_mut(&mut s);
            assert!(solver.node_flux(&s).abs() < 1e-8);
        }
    }

    #[test]
    fn dalembert_at_time_zero_is_the_data() {
        let n = net(&[1.0, 1.0], &[0.0, 0.0]);
        let grid = NetworkGrid::uniform(2, 0.1, 10.0).unwrap();
        let g = |k: usize, x: f64| if k == 0 { (-(x - 5.0f64).powi(2)).exp() } else { 0.0 };
        let r = dalembert_reference(&n, g, 0.0, &grid).unwrap();
        let u0 = NetworkFunction::from_real_fn(&grid, g);
        assert_eq!(r, u0);
        let r = dalembert_reference(&n, g, 2.0, &grid).unwrap();
        assert!((r.branch(0)[30].re - 0.5).abs() < 1e-6);
        assert!((r.branch(0)[70].re - 0.5).abs() < 1e-6);
        assert!(dalembert_reference(&net(&[1.0, 2.0], &[0.0, 0.0]), g, 1.0, &grid).is_err());
    }
}
