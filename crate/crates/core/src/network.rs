//! Star networks, sampled functions on them, quadrature and the
//! finite-difference operator.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

/// Raw branch parameters as supplied by a user, before sorting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSpec {
    pub c: f64,
    pub a: f64,
}

/// A band edge `a_p`, with `a_{n+1}` represented as [`BandEdge::Unbounded`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandEdge {
    Finite(f64),
    Unbounded,
}

/// `n >= 2` half-lines glued at a node, sorted by ascending potential.
///
/// Internally branches are indexed `0..n` in sorted order. The permutation
/// back to the order the branches were supplied in is kept so that input
/// and output can use the caller's labels.
#[derive(Debug, Clone, PartialEq)]
pub struct StarNetwork {
    c: Vec<f64>,
    a: Vec<f64>,
    labels: Vec<usize>,
}

impl StarNetwork {
    /// Validates and sorts the branches (stable sort on `a`).
    pub fn new(branches: &[BranchSpec]) -> Result<Self> {
        if branches.len() < 2 {
            return Err(Error::TooFewBranches(branches.len()));
        }
        for (k, b) in branches.iter().enumerate() {
            if !b.c.is_finite() || !b.a.is_finite() {
                return Err(Error::NonFinite(k));
            }
            if b.c <= 0.0 {
                return Err(Error::NonPositiveSpeed { branch: k, value: b.c });
            }
            if b.a < 0.0 {
                return Err(Error::NegativePotential { branch: k, value: b.a });
            }
        }
        let mut labels: Vec<usize> = (0..branches.len()).collect();
        labels.sort_by(|&i, &j| branches[i].a.total_cmp(&branches[j].a));
        Ok(Self {
            c: labels.iter().map(|&i| branches[i].c).collect(),
            a: labels.iter().map(|&i| branches[i].a).collect(),
            labels,
        })
    }

    /// Convenience constructor from parallel slices of speeds and potentials.
    pub fn from_slices(c: &[f64], a: &[f64]) -> Result<Self> {
        if c.len() != a.len() {
            return Err(Error::Precondition("speed and potential lists differ in length"));
        }
        let specs: Vec<BranchSpec> = c.iter().zip(a).map(|(&c, &a)| BranchSpec { c, a }).collect();
        Self::new(&specs)
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    /// Always false; a network has at least two branches.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn speeds(&self) -> &[f64] {
        &self.c
    }

    pub fn potentials(&self) -> &[f64] {
        &self.a
    }

    /// For every internal branch, the position it had in the input list.
    pub fn permutation(&self) -> &[usize] {
        &self.labels
    }

    /// Position in the input list of internal branch `k`.
    pub fn user_label(&self, k: usize) -> usize {
        self.labels[k]
    }

    /// Internal index of the branch supplied at position `label`.
    pub fn internal_index(&self, label: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Band edge `p` in `0..=n`, where `p = n` is the unbounded sentinel.
    pub fn band_edge(&self, p: usize) -> BandEdge {
        match self.a.get(p) {
            Some(&a) => BandEdge::Finite(a),
            None => BandEdge::Unbounded,
        }
    }

    pub fn lowest_edge(&self) -> f64 {
        self.a[0]
    }

    pub fn highest_edge(&self) -> f64 {
        self.a[self.a.len() - 1]
    }

    /// True when every potential coincides, the case with a singular
    /// Wronskian at `λ = a_1`.
    pub fn equal_potentials(&self) -> bool {
        self.a.iter().all(|&a| a == self.a[0])
    }

    /// Whether `λ` lies on (or within rounding of) a band edge.
    pub fn is_band_edge(&self, lambda: f64) -> bool {
        let tol = 1e-14 * lambda.abs().max(1.0);
        self.a.iter().any(|&a| (lambda - a).abs() <= tol)
    }

    /// Number of propagating branches: `p` with `λ ∈ (a_p, a_{p+1})`, where
    /// `p = 0` means `λ < a_1`.
    pub fn band_index(&self, lambda: f64) -> Result<usize> {
        if !lambda.is_finite() || self.is_band_edge(lambda) {
            return Err(Error::BandEdge(lambda));
        }
        Ok(self.a.iter().filter(|&&a| a < lambda).count())
    }

    pub fn check_branch(&self, branch: usize) -> Result<()> {
        if branch < self.len() {
            Ok(())
        } else {
            Err(Error::BranchOutOfRange { branch, n: self.len() })
        }
    }
}

/// A point at distance `x` from the node along branch `branch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    branch: usize,
    x: f64,
}

impl BranchPoint {
    pub fn new(net: &StarNetwork, branch: usize, x: f64) -> Result<Self> {
        net.check_branch(branch)?;
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::InvalidPoint(x));
        }
        Ok(Self { branch, x })
    }

    pub fn node() -> Self {
        Self { branch: 0, x: 0.0 }
    }

    pub fn branch(&self) -> usize {
        self.branch
    }

    pub fn x(&self) -> f64 {
        self.x
    }
}

/// Uniform sampling `x_i = i·dx`, `i = 0..count`, of one truncated branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchGrid {
    dx: f64,
    count: usize,
}

impl BranchGrid {
    /// Grid with `floor(length/dx) + 1` samples; a ratio within rounding of
    /// an integer is taken as that integer.
    pub fn new(dx: f64, length: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid("dx must be positive"));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid("length must be positive"));
        }
        let r = length / dx;
        let intervals = if (r - r.round()).abs() <= 1e-9 * r.max(1.0) { r.round() } else { r.floor() };
        if intervals < 1.0 {
            return Err(Error::InvalidGrid("length shorter than dx"));
        }
        Ok(Self { dx, count: intervals as usize + 1 })
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Extent covered by the samples, `(count - 1)·dx`.
    pub fn length(&self) -> f64 {
        (self.count - 1) as f64 * self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }
}

/// Per-branch grids of a truncated network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGrid {
    branches: Vec<BranchGrid>,
}

impl NetworkGrid {
    pub fn new(branches: Vec<BranchGrid>) -> Result<Self> {
        if branches.len() < 2 {
            return Err(Error::TooFewBranches(branches.len()));
        }
        Ok(Self { branches })
    }

    /// The same spacing and length on each of `n` branches.
    pub fn uniform(n: usize, dx: f64, length: f64) -> Result<Self> {
        Self::new(vec![BranchGrid::new(dx, length)?; n])
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn branch(&self, k: usize) -> &BranchGrid {
        &self.branches[k]
    }

    pub fn branches(&self) -> &[BranchGrid] {
        &self.branches
    }

    /// Total number of stored samples (the node counted once per branch).
    pub fn total_samples(&self) -> usize {
        self.branches.iter().map(|b| b.count).sum()
    }
}

/// Complex samples of a function on a truncated network. Every branch
/// stores the node sample and all of them are equal.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkFunction {
    grid: NetworkGrid,
    values: Vec<Vec<C64>>,
}

impl NetworkFunction {
    pub fn zeros(grid: &NetworkGrid) -> Self {
        let values = grid.branches.iter().map(|b| vec![C64::new(0.0, 0.0); b.count]).collect();
        Self { grid: grid.clone(), values }
    }

    /// Samples `f(branch, x)`. The node value is taken from branch 0 and
    /// shared with the others.
    pub fn from_fn(grid: &NetworkGrid, f: impl Fn(usize, f64) -> C64) -> Self {
        let node = f(0, 0.0);
        let values = grid
            .branches
            .iter()
            .enumerate()
            .map(|(k, b)| (0..b.count).map(|i| if i == 0 { node } else { f(k, b.x(i)) }).collect())
            .collect();
        Self { grid: grid.clone(), values }
    }

    /// Real-valued variant of [`NetworkFunction::from_fn`].
    pub fn from_real_fn(grid: &NetworkGrid, f: impl Fn(usize, f64) -> f64) -> Self {
        Self::from_fn(grid, |k, x| C64::new(f(k, x), 0.0))
    }

    /// Wraps explicit samples. Node samples must agree to `1e-12` relative;
    /// the common value is then set exactly on every branch.
    pub fn from_branches(grid: &NetworkGrid, mut values: Vec<Vec<C64>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        for (v, b) in values.iter().zip(&grid.branches) {
            if v.len() != b.count {
                return Err(Error::GridMismatch);
            }
        }
        let node = values[0][0];
        let spread = values.iter().map(|v| (v[0] - node).norm()).fold(0.0, f64::max);
        let scale = values.iter().map(|v| v[0].norm()).fold(0.0, f64::max).max(1e-300);
        if spread > 1e-12 * scale && spread > 0.0 {
            return Err(Error::InconsistentNode(spread));
        }
        for v in values.iter_mut() {
            v[0] = node;
        }
        Ok(Self { grid: grid.clone(), values })
    }

    /// Builds from samples whose node entries are known to agree.
    pub(crate) fn from_raw(grid: NetworkGrid, values: Vec<Vec<C64>>) -> Self {
        debug_assert!(values.iter().all(|v| v[0] == values[0][0]));
        Self { grid, values }
    }

    pub fn grid(&self) -> &NetworkGrid {
        &self.grid
    }

    pub fn branch(&self, k: usize) -> &[C64] {
        &self.values[k]
    }

    pub fn branches(&self) -> &[Vec<C64>] {
        &self.values
    }

    pub fn node_value(&self) -> C64 {
        self.values[0][0]
    }

    pub fn x(&self, k: usize, i: usize) -> f64 {
        self.grid.branches[k].x(i)
    }

    /// Applies `g(branch, x, value)` to every sample. The node is evaluated
    /// once through branch 0.
    pub fn map(&self, g: impl Fn(usize, f64, C64) -> C64) -> Self {
        let node = g(0, 0.0, self.values[0][0]);
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let dx = self.grid.branches[k].dx;
                v.iter()
                    .enumerate()
                    .map(|(i, &u)| if i == 0 { node } else { g(k, i as f64 * dx, u) })
                    .collect()
            })
            .collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|_, _, u| s * u)
    }

    pub fn conj(&self) -> Self {
        self.map(|_, _, u| u.conj())
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: C64, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| u.iter().zip(v).map(|(&a, &b)| a + s * b).collect())
            .collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// Discrete `L²(N)` norm under `rule`.
    pub fn norm(&self, rule: &QuadratureRule) -> Result<f64> {
        Ok(integrate_network(self, self, rule)?.re.max(0.0).sqrt())
    }

    /// Largest sample magnitude.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().flatten().map(|u| u.norm()).fold(0.0, f64::max)
    }
}

/// Composite rule used to integrate sampled functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureKind {
    Trapezoid,
    /// Composite Simpson; an odd number of intervals ends with a 3/8 panel.
    #[default]
    Simpson,
}

/// Quadrature weights matching a [`NetworkGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: QuadratureKind,
    grid: NetworkGrid,
    weights: Vec<Vec<f64>>,
}

impl QuadratureRule {
    pub fn new(grid: &NetworkGrid, kind: QuadratureKind) -> Self {
        let weights = grid.branches.iter().map(|b| branch_weights(b.count, b.dx, kind)).collect();
        Self { kind, grid: grid.clone(), weights }
    }

    pub fn simpson(grid: &NetworkGrid) -> Self {
        Self::new(grid, QuadratureKind::Simpson)
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn grid(&self) -> &NetworkGrid {
        &self.grid
    }

    pub fn weights(&self, k: usize) -> &[f64] {
        &self.weights[k]
    }
}

fn branch_weights(count: usize, h: f64, kind: QuadratureKind) -> Vec<f64> {
    let intervals = count - 1;
    let mut w = vec![0.0; count];
    let trapezoid = |w: &mut [f64]| {
        for i in 0..w.len() - 1 {
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        }
    };
    match kind {
        QuadratureKind::Trapezoid => trapezoid(&mut w),
        QuadratureKind::Simpson if intervals < 2 => trapezoid(&mut w),
        QuadratureKind::Simpson => {
            let simpson_end = if intervals % 2 == 0 { intervals } else { intervals - 3 };
            for i in (0..simpson_end).step_by(2) {
                w[i] += h / 3.0;
                w[i + 1] += 4.0 * h / 3.0;
                w[i + 2] += h / 3.0;
            }
            if simpson_end < intervals {
                let s = simpson_end;
                for (o, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    w[s + o] += 3.0 * h / 8.0 * c;
                }
            }
        }
    }
    w
}

/// `(f, g)_H = Σ_k Σ_i w_{k,i} f_{k,i} conj(g_{k,i})`, summed branch-major in
/// ascending sample order.
pub fn integrate_network(f: &NetworkFunction, g: &NetworkFunction, rule: &QuadratureRule) -> Result<C64> {
    if f.grid != g.grid || f.grid != rule.grid {
        return Err(Error::GridMismatch);
    }
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..f.grid.len() {
        for ((&u, &v), &w) in f.values[k].iter().zip(&g.values[k]).zip(&rule.weights[k]) {
            acc += u * v.conj() * w;
        }
    }
    Ok(acc)
}

/// Discrete transmission defects `(t0, t1)`: the largest node-value spread
/// across branches and `|Σ_k c_k D_k|` with `D_k` the second-order one-sided
/// derivative at the node.
pub fn transmission_residual(f: &NetworkFunction, net: &StarNetwork) -> Result<(f64, f64)> {
    if f.grid.len() != net.len() {
        return Err(Error::GridMismatch);
    }
    let mut t0: f64 = 0.0;
    let mut flux = C64::new(0.0, 0.0);
    for k in 0..net.len() {
        let u = &f.values[k];
        if u.len() < 3 {
            return Err(Error::InvalidGrid("transmission residual needs 3 samples per branch"));
        }
        for l in 0..k {
            t0 = t0.max((u[0] - f.values[l][0]).norm());
        }
        let dx = f.grid.branches[k].dx;
        flux += (u[0] * -3.0 + u[1] * 4.0 - u[2]) * (net.c[k] / (2.0 * dx));
    }
    Ok((t0, flux.norm()))
}

/// Second-order finite-difference discretization `A_h` of the operator.
///
/// Interior samples use the five-point fourth-order Laplacian, falling back
/// to three points next to the node and the far end. The node row is the
/// finite-volume balance over the half cells adjacent to the node, which
/// encodes the Kirchhoff condition; its edge fluxes carry a third-difference
/// correction that makes the row second-order consistent. The last sample of
/// each branch sees a homogeneous Dirichlet ghost value.
pub fn apply_operator_fd(net: &StarNetwork, u: &NetworkFunction) -> Result<NetworkFunction> {
    if u.grid.len() != net.len() {
        return Err(Error::GridMismatch);
    }
    let u0 = u.node_value();
    let mut flux = C64::new(0.0, 0.0);
    let mut mass = C64::new(0.0, 0.0);
    let mut measure = 0.0;
    for k in 0..net.len() {
        let b = u.grid.branches[k];
        let v = &u.values[k];
        if v.len() < 4 {
            return Err(Error::InvalidGrid("operator needs 4 samples per branch"));
        }
        // (u1 - u0)/dx less its u''' term, estimated by a forward third difference.
        let difference = -u0 * (5.0 / 6.0) + v[1] * 0.5 + v[2] * 0.5 - v[3] * (1.0 / 6.0);
        flux += difference * (net.c[k] / b.dx);
        mass += u0 * (0.5 * b.dx * net.a[k]);
        measure += 0.5 * b.dx;
    }
    let node = (mass - flux) / measure;
    let values = u
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let dx2 = u.grid.branches[k].dx.powi(2);
            let (c, a) = (net.c[k], net.a[k]);
            let m = v.len();
            (0..m)
                .map(|i| {
                    if i == 0 {
                        return node;
                    }
                    let right = v.get(i + 1).copied().unwrap_or_default();
                    let second = if i >= 2 && i + 2 < m {
                        (-v[i - 2] + v[i - 1] * 16.0 - v[i] * 30.0 + right * 16.0 - v[i + 2]) / 12.0
                    } else {
                        right - v[i] * 2.0 + v[i - 1]
                    };
                    -second * (c / dx2) + v[i] * a
                })
                .collect()
        })
        .collect();
    Ok(NetworkFunction::from_raw(u.grid.clone(), values))
}
