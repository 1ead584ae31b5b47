//! Spectral representation: weights `q_k`, the transform `V`, its inverse
//! `Z`, the weighted space `L²_q`, functional calculus and evolution.
//!
//! Spectral integrals run over `[a_1, Λ]`, split at every band edge. A panel
//! ending at a band edge is mapped by `λ = l + (r - l) sin²θ`, which removes
//! the square-root behaviour of `ξ_k` at both ends; the topmost panel uses
//! `λ = l + s²`. Each mapped panel is cut into equal sub-panels carrying an
//! `m`-point Gauss–Legendre rule, enough of them to follow the oscillation
//! of `e^{iξ(λ)x}` over the spatial extent of interest.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)]
use num_traits::Float;

use crate::eigen::branch_sqrt;
use crate::gauss::gauss_legendre;
use crate::network::{NetworkFunction, NetworkGrid, QuadratureRule, StarNetwork};
use crate::par::map_range;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Weights `q_k(λ) = κ c_k ξ_k(λ) / |w(λ)|²` for `λ > a_k`, zero below.
pub fn q_weights(net: &StarNetwork, lambda: f64, kappa: f64) -> Result<Vec<f64>> {
    net.band_index(lambda)?;
    let (c, a) = (net.speeds(), net.potentials());
    let xi: Vec<C64> = (0..net.len()).map(|k| branch_sqrt(C64::new((lambda - a[k]) / c[k], 0.0))).collect();
    let w2 = xi.iter().zip(c).map(|(&x, &c)| x * c).sum::<C64>().norm_sqr();
    Ok((0..net.len()).map(|k| if lambda > a[k] { kappa * c[k] * xi[k].re / w2 } else { 0.0 }).collect())
}

/// Resolution parameters of a [`SpectralGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// Gauss–Legendre nodes per sub-panel.
    pub order: usize,
    /// Largest distance from the node at which functions are transformed
    /// or evaluated; sets the oscillation rate in `λ`.
    pub extent: f64,
    /// Nodes per oscillation of `e^{iξ(λ)x}` at `x = extent`.
    pub nodes_per_oscillation: f64,
    /// Lower bound on sub-panels per panel.
    pub min_subpanels: usize,
}

impl GridOptions {
    pub fn new(extent: f64) -> Self {
        Self { order: 16, extent, nodes_per_oscillation: 8.0, min_subpanels: 2 }
    }
}

/// Quadrature nodes and weights in `λ`. Band edges are never nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    lower: f64,
    cutoff: f64,
    breakpoints: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralGrid {
    /// Grid on `[a_1, cutoff]` with panels split at every band edge.
    pub fn new(net: &StarNetwork, cutoff: f64, opts: &GridOptions) -> Result<Self> {
        Self::with_breakpoints(net, cutoff, &[], opts)
    }

    /// As [`SpectralGrid::new`] with additional panel breakpoints, e.g. the
    /// ends of a spectral projector's interval.
    pub fn with_breakpoints(net: &StarNetwork, cutoff: f64, extra: &[f64], opts: &GridOptions) -> Result<Self> {
        let top = net.highest_edge();
        if !(cutoff.is_finite() && cutoff > top) {
            return Err(Error::InvalidCutoff { cutoff, top_edge: top });
        }
        Self::build(net, net.lowest_edge(), cutoff, extra, opts)
    }

    /// Grid on the window `[lower, upper]` of the spectrum, used for tail
    /// probes.
    pub fn window(net: &StarNetwork, lower: f64, upper: f64, opts: &GridOptions) -> Result<Self> {
        if !(lower >= net.lowest_edge() && upper > lower && upper.is_finite()) {
            return Err(Error::InvalidBand(lower, upper));
        }
        Self::build(net, lower, upper, &[], opts)
    }

    fn build(net: &StarNetwork, lower: f64, upper: f64, extra: &[f64], opts: &GridOptions) -> Result<Self> {
        if opts.order == 0 || !(opts.extent > 0.0) || !(opts.nodes_per_oscillation > 0.0) {
            return Err(Error::InvalidGrid("spectral grid options"));
        }
        let mut breakpoints: Vec<f64> = net
            .potentials()
            .iter()
            .chain(extra)
            .copied()
            .filter(|&b| b > lower && b < upper)
            .collect();
        breakpoints.push(lower);
        breakpoints.push(upper);
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * a.abs().max(1.0));
        let (gx, gw) = gauss_legendre(opts.order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for piece in breakpoints.windows(2) {
            let (l, r) = (piece[0], piece[1]);
            let to_edge = net.potentials().contains(&r);
            let phase = (0..net.len())
                .map(|k| (xi_real(net, k, r) - xi_real(net, k, l)).norm())
                .fold(0.0, f64::max)
                * opts.extent;
            let wanted = 1.5 * opts.nodes_per_oscillation * phase / (2.0 * PI) / opts.order as f64;
            let subpanels = (wanted.ceil() as usize).max(opts.min_subpanels);
            // Map t ∈ [0, T] to λ with Jacobian dλ/dt.
            let (t_end, map): (f64, &dyn Fn(f64) -> (f64, f64)) = if to_edge {
                (FRAC_PI_2, &|t: f64| {
                    let (s, c) = t.sin_cos();
                    (l + (r - l) * s * s, 2.0 * (r - l) * s * c)
                })
            } else {
                ((r - l).sqrt(), &|t: f64| (l + t * t, 2.0 * t))
            };
            let h = t_end / subpanels as f64;
            for p in 0..subpanels {
                let t0 = p as f64 * h;
                for (x, w) in gx.iter().zip(&gw) {
                    let t = t0 + 0.5 * h * (x + 1.0);
                    let (lambda, jac) = map(t);
                    if lambda <= l || lambda >= r {
                        continue;
                    }
                    nodes.push(lambda);
                    weights.push(0.5 * h * w * jac);
                }
            }
        }
        Ok(Self { lower, cutoff: upper, breakpoints, nodes, weights })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn xi_real(net: &StarNetwork, k: usize, lambda: f64) -> C64 {
    branch_sqrt(C64::new((lambda - net.potentials()[k]) / net.speeds()[k], 0.0))
}

/// `(G_1, …, G_n)` sampled on a [`SpectralGrid`]; `G_k` only at nodes above
/// `a_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    len: usize,
    start: Vec<usize>,
    values: Vec<Vec<C64>>,
}

impl SpectralFunction {
    /// Zero function on `grid`.
    pub fn zeros(net: &StarNetwork, grid: &SpectralGrid) -> Self {
        Self::from_fn(net, grid, |_, _| ZERO)
    }

    /// Samples `g(k, λ)` at every node above `a_k`.
    pub fn from_fn(net: &StarNetwork, grid: &SpectralGrid, g: impl Fn(usize, f64) -> C64) -> Self {
        let start: Vec<usize> =
            net.potentials().iter().map(|&a| grid.nodes.iter().position(|&l| l > a).unwrap_or(grid.len())).collect();
        let values = (0..net.len()).map(|k| grid.nodes[start[k]..].iter().map(|&l| g(k, l)).collect()).collect();
        Self { len: grid.len(), start, values }
    }

    pub fn components(&self) -> usize {
        self.values.len()
    }

    /// Index of the first node carrying a sample of `G_k`.
    pub fn start(&self, k: usize) -> usize {
        self.start[k]
    }

    /// Samples of `G_k` from node [`SpectralFunction::start`] on.
    pub fn component(&self, k: usize) -> &[C64] {
        &self.values[k]
    }

    /// `G_k` at node `i`, zero below `a_k`.
    pub fn get(&self, k: usize, i: usize) -> C64 {
        if i < self.start[k] {
            ZERO
        } else {
            self.values[k][i - self.start[k]]
        }
    }

    /// Pointwise `h(λ) G(λ)`.
    pub fn multiply(&self, grid: &SpectralGrid, h: impl Fn(f64) -> C64) -> Result<Self> {
        self.check(grid)?;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| v.iter().zip(&grid.nodes[self.start[k]..]).map(|(&g, &l)| g * h(l)).collect())
            .collect();
        Ok(Self { len: self.len, start: self.start.clone(), values })
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: C64, other: &Self) -> Result<Self> {
        if self.len != other.len || self.start != other.start {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| u.iter().zip(v).map(|(&a, &b)| a + s * b).collect())
            .collect();
        Ok(Self { len: self.len, start: self.start.clone(), values })
    }

    fn check(&self, grid: &SpectralGrid) -> Result<()> {
        if self.len != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// Per-node eigen-data with the `-` sign on real `λ`.
#[derive(Debug, Clone)]
struct NodeData {
    /// `Re ξ_k` on propagating branches, `ξ'_k` on evanescent ones.
    rate: Vec<f64>,
    propagating: Vec<bool>,
    s: Vec<C64>,
    q: Vec<f64>,
}

/// Spectral transform of a network on a fixed [`SpectralGrid`].
#[derive(Debug, Clone)]
pub struct SpectralTransform {
    net: StarNetwork,
    grid: SpectralGrid,
    kappa: f64,
    data: Vec<NodeData>,
}

impl SpectralTransform {
    pub fn new(net: &StarNetwork, grid: SpectralGrid, kappa: f64) -> Result<Self> {
        let (c, a) = (net.speeds(), net.potentials());
        let data = grid
            .nodes
            .iter()
            .map(|&lambda| {
                let xi: Vec<C64> = (0..net.len()).map(|k| xi_real(net, k, lambda)).collect();
                let flux: Vec<C64> = xi.iter().zip(c).map(|(&x, &c)| x * c).collect();
                let w2 = flux.iter().sum::<C64>().norm_sqr();
                let s = (0..net.len())
                    .map(|k| -flux.iter().enumerate().filter(|&(l, _)| l != k).map(|(_, &f)| f).sum::<C64>() / flux[k])
                    .collect();
                let propagating: Vec<bool> = a.iter().map(|&a| lambda > a).collect();
                let rate = (0..net.len()).map(|k| if propagating[k] { xi[k].re } else { -xi[k].im }).collect();
                let q = (0..net.len()).map(|k| if propagating[k] { kappa * c[k] * xi[k].re / w2 } else { 0.0 }).collect();
                NodeData { rate, propagating, s, q }
            })
            .collect();
        Ok(Self { net: net.clone(), grid, kappa, data })
    }

    pub fn network(&self) -> &StarNetwork {
        &self.net
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `q_k` at node `i`.
    pub fn weight(&self, k: usize, i: usize) -> f64 {
        self.data[i].q[k]
    }

    /// Largest `dx_k · Re ξ_k(Λ)` for a spatial grid. The forward transform
    /// requires it below `0.5` on every branch carrying data.
    pub fn resolution(&self, grid: &NetworkGrid) -> f64 {
        (0..self.net.len())
            .map(|k| grid.branch(k).dx() * xi_real(&self.net, k, self.grid.cutoff).re)
            .fold(0.0, f64::max)
    }

    /// `(Vf)_k(λ) = ∫_N f conj(F_λ^{-,k}) dx` at every node above `a_k`,
    /// integrated with `rule`.
    pub fn forward(&self, f: &NetworkFunction, rule: &QuadratureRule) -> Result<SpectralFunction> {
        let n = self.net.len();
        if f.grid().len() != n || f.grid() != rule.grid() {
            return Err(Error::GridMismatch);
        }
        // Only the support of f contributes; skipping exact zeros leaves the
        // sums unchanged.
        let support: Vec<(usize, usize)> = (0..n)
            .map(|b| {
                let v = f.branch(b);
                let first = v.iter().position(|z| *z != ZERO).unwrap_or(v.len());
                let last = v.iter().rposition(|z| *z != ZERO).map_or(first, |l| l + 1);
                (first, last)
            })
            .collect();
        let res = (0..n)
            .filter(|&b| support[b].0 < support[b].1)
            .map(|b| f.grid().branch(b).dx() * xi_real(&self.net, b, self.grid.cutoff).re)
            .fold(0.0, f64::max);
        if res >= 0.5 {
            return Err(Error::CutoffUnresolved(res));
        }
        let per_node = map_range(self.grid.len(), |i| {
            let d = &self.data[i];
            // exp_b = ∫ f_b conj(e^{-iξ_b x}), own_b = ∫ f_b conj(cos ξ_b x - i s_b sin ξ_b x).
            let mut exp_part = vec![ZERO; n];
            let mut own_part = vec![ZERO; n];
            for b in 0..n {
                let (first, last) = support[b];
                let v = f.branch(b);
                let w = rule.weights(b);
                let dx = f.grid().branch(b).dx();
                if d.propagating[b] {
                    let s_conj = d.s[b].conj();
                    let (mut e, mut o) = (ZERO, ZERO);
                    for l in first..last {
                        let (sn, cs) = (d.rate[b] * (l as f64 * dx)).sin_cos();
                        let fw = v[l] * w[l];
                        e += fw * C64::new(cs, sn);
                        o += fw * (C64::new(0.0, sn) * s_conj + cs);
                    }
                    exp_part[b] = e;
                    own_part[b] = o;
                } else {
                    let mut e = ZERO;
                    for l in first..last {
                        e += v[l] * (w[l] * (-d.rate[b] * (l as f64 * dx)).exp());
                    }
                    exp_part[b] = e;
                }
            }
            let total: C64 = exp_part.iter().sum();
            (0..n)
                .map(|k| if d.propagating[k] { total - exp_part[k] + own_part[k] } else { ZERO })
                .collect::<Vec<C64>>()
        });
        let mut out = SpectralFunction::zeros(&self.net, &self.grid);
        for k in 0..n {
            let start = out.start[k];
            for (i, slot) in out.values[k].iter_mut().enumerate() {
                *slot = per_node[start + i][k];
            }
        }
        Ok(out)
    }

    /// `Z(G)(x) = Σ_k ∫ q_k G_k F_λ^{-,k}(x) dλ` on `out`.
    pub fn inverse(&self, g: &SpectralFunction, out: &NetworkGrid) -> Result<NetworkFunction> {
        let n = self.net.len();
        g.check(&self.grid)?;
        if out.len() != n || g.components() != n {
            return Err(Error::GridMismatch);
        }
        // terms[i][k] = w_i q_k G_k(λ_i); totals[i] = Σ_k terms[i][k].
        let terms: Vec<Vec<C64>> = (0..self.grid.len())
            .map(|i| (0..n).map(|k| g.get(k, i) * (self.grid.weights[i] * self.data[i].q[k])).collect())
            .collect();
        let totals: Vec<C64> = terms.iter().map(|t| t.iter().sum()).collect();
        let node: C64 = totals.iter().sum();
        let mut values = Vec::with_capacity(n);
        for b in 0..n {
            let bg = out.branch(b);
            let v = map_range(bg.count(), |l| {
                if l == 0 {
                    return node;
                }
                let x = bg.x(l);
                let mut acc = ZERO;
                for (i, d) in self.data.iter().enumerate() {
                    if d.propagating[b] {
                        let (sn, cs) = (d.rate[b] * x).sin_cos();
                        let own = terms[i][b];
                        acc += (totals[i] - own) * C64::new(cs, -sn) + own * (C64::new(0.0, -sn) * d.s[b] + cs);
                    } else {
                        acc += totals[i] * (-d.rate[b] * x).exp();
                    }
                }
                acc
            });
            values.push(v);
        }
        Ok(NetworkFunction::from_raw(out.clone(), values))
    }

    /// `(G, H)_q = Σ_k ∫ q_k G_k conj(H_k) dλ`.
    pub fn inner(&self, g: &SpectralFunction, h: &SpectralFunction) -> Result<C64> {
        g.check(&self.grid)?;
        h.check(&self.grid)?;
        if g.start != h.start {
            return Err(Error::GridMismatch);
        }
        let mut acc = ZERO;
        for k in 0..g.components() {
            let s = g.start[k];
            for (i, (&u, &v)) in g.values[k].iter().zip(&h.values[k]).enumerate() {
                acc += u * v.conj() * (self.grid.weights[s + i] * self.data[s + i].q[k]);
            }
        }
        Ok(acc)
    }

    /// `|G|_q`.
    pub fn norm(&self, g: &SpectralFunction) -> Result<f64> {
        Ok(self.inner(g, g)?.re.max(0.0).sqrt())
    }

    /// `h(A) f = Z(h · Vf)`, sampled on `out`.
    pub fn apply_function(
        &self,
        f: &NetworkFunction,
        rule: &QuadratureRule,
        h: impl Fn(f64) -> C64,
        out: &NetworkGrid,
    ) -> Result<NetworkFunction> {
        let g = self.forward(f, rule)?.multiply(&self.grid, h)?;
        self.inverse(&g, out)
    }

    /// Spectral projector `E(a, b) f`. Accurate when `a` and `b` are
    /// breakpoints of the grid.
    pub fn project(
        &self,
        f: &NetworkFunction,
        rule: &QuadratureRule,
        a: f64,
        b: f64,
        out: &NetworkGrid,
    ) -> Result<NetworkFunction> {
        if !(a < b) {
            return Err(Error::InvalidBand(a, b));
        }
        self.apply_function(f, rule, |l| C64::new(if l > a && l < b { 1.0 } else { 0.0 }, 0.0), out)
    }

    /// Spectral coefficients at time `t` of the Klein–Gordon solution with
    /// data `(u0, v0)`: `cos(√λ t) Vu0 + sin(√λ t)/√λ Vv0`.
    pub fn evolve_coefficients(&self, vu0: &SpectralFunction, vv0: Option<&SpectralFunction>, t: f64) -> Result<SpectralFunction> {
        let pos = vu0.multiply(&self.grid, |l| C64::new(propagator(l, t)[0][0], 0.0))?;
        match vv0 {
            None => Ok(pos),
            Some(v) => pos.axpy(C64::new(1.0, 0.0), &v.multiply(&self.grid, |l| C64::new(propagator(l, t)[0][1], 0.0))?),
        }
    }

    /// `u(t) = Z[cos(√λ t) Vu0 + sin(√λ t)/√λ Vv0]` sampled on `out`.
    pub fn evolve(
        &self,
        u0: &NetworkFunction,
        v0: Option<&NetworkFunction>,
        rule: &QuadratureRule,
        t: f64,
        out: &NetworkGrid,
    ) -> Result<NetworkFunction> {
        let vu0 = self.forward(u0, rule)?;
        let vv0 = v0.map(|v| self.forward(v, rule)).transpose()?;
        let g = self.evolve_coefficients(&vu0, vv0.as_ref(), t)?;
        self.inverse(&g, out)
    }
}

/// Propagator of `P'' = -λP` over time `t`, mapping `(P, P')(0)` to
/// `(P, P')(t)`: `[[cos, sin/√λ], [-√λ sin, cos]]` with `ω = √λ`. The entry
/// `sin(ωt)/ω` uses its series for `ωt < 1e-4`, so `λ = 0` gives `t`.
pub fn propagator(lambda: f64, t: f64) -> [[f64; 2]; 2] {
    let omega = lambda.max(0.0).sqrt();
    let phase = omega * t;
    let (s, c) = phase.sin_cos();
    let sinc = if phase.abs() < 1e-4 { t * (1.0 - phase * phase / 6.0) } else { s / omega };
    [[c, sinc], [-omega * s, c]]
}

/// Per-node Klein–Gordon energy `|P'|² + λ|P|²` of spectral coefficients.
pub fn spectral_energy(lambda: f64, p: C64, dp: C64) -> f64 {
    dp.norm_sqr() + lambda * p.norm_sqr()
}

/// Tail mass `Σ_k ∫_lo^hi q_k |(Vf)_k|² dλ` on its own window grid.
pub fn tail_mass(
    net: &StarNetwork,
    f: &NetworkFunction,
    rule: &QuadratureRule,
    lo: f64,
    hi: f64,
    opts: &GridOptions,
    kappa: f64,
) -> Result<f64> {
    let t = SpectralTransform::new(net, SpectralGrid::window(net, lo, hi, opts)?, kappa)?;
    let g = t.forward(f, rule)?;
    Ok(t.inner(&g, &g)?.re)
}

/// Smallest cutoff `Λ' = a_n + L₀ 2^m` (`L₀ = max(1, a_n - a_1)`, `m < 20`)
/// whose tail probe `Σ_k ∫_{Λ'}^{2Λ'} q_k |Vf_k|² dλ` falls below
/// `ε_tail² (f, f)_H`.
pub fn choose_cutoff(
    net: &StarNetwork,
    f: &NetworkFunction,
    rule: &QuadratureRule,
    eps_tail: f64,
    opts: &GridOptions,
    kappa: f64,
) -> Result<f64> {
    let top = net.highest_edge();
    let base = (top - net.lowest_edge()).max(1.0);
    let first = top + base;
    if eps_tail.is_infinite() {
        return Ok(first);
    }
    let mass = crate::network::integrate_network(f, f, rule)?.re;
    if mass == 0.0 {
        return Ok(first);
    }
    for m in 0..20 {
        let cut = top + base * 2f64.powi(m);
        let tail = match tail_mass(net, f, rule, cut, 2.0 * cut, opts, kappa) {
            Ok(t) => t,
            Err(Error::CutoffUnresolved(_)) => return Err(Error::TooRough),
            Err(e) => return Err(e),
        };
        if tail < eps_tail * eps_tail * mass {
            return Ok(cut);
        }
    }
    Err(Error::TooRough)
}

/// Growth of `‖λ^j Vu‖_q` over increasing cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub power: u32,
    pub cutoffs: Vec<f64>,
    /// `‖λ^j Vu‖_q` restricted to `[a_1, Λ_m]`.
    pub norms: Vec<f64>,
    /// Ratio of the last two norms minus one.
    pub last_growth: f64,
    /// True when the last relative growth is below the threshold.
    pub bounded: bool,
}

/// Relative growth per cutoff doubling below which a tail counts as bounded.
pub const DECAY_GROWTH_THRESHOLD: f64 = 0.05;

/// Evaluates `‖λ^j Vu‖_q` on `[a_1, Λ_m]` for the increasing `cutoffs`. A
/// norm that keeps growing indicates `u ∉ D(A^j)`.
pub fn domain_decay_diagnostic(
    net: &StarNetwork,
    u: &NetworkFunction,
    rule: &QuadratureRule,
    power: u32,
    cutoffs: &[f64],
    opts: &GridOptions,
    kappa: f64,
) -> Result<DecayReport> {
    if cutoffs.len() < 2 || cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("cutoffs must be increasing, at least two"));
    }
    let mut lo = net.lowest_edge();
    let mut acc = 0.0;
    let mut norms = Vec::with_capacity(cutoffs.len());
    for &cut in cutoffs {
        let grid = if lo == net.lowest_edge() {
            SpectralGrid::new(net, cut, opts)?
        } else {
            SpectralGrid::window(net, lo, cut, opts)?
        };
        let t = SpectralTransform::new(net, grid, kappa)?;
        let g = t.forward(u, rule)?.multiply(t.grid(), |l| C64::new(l.powi(power as i32), 0.0))?;
        acc += t.inner(&g, &g)?.re;
        norms.push(acc.max(0.0).sqrt());
        lo = cut;
    }
    let (a, b) = (norms[norms.len() - 2], norms[norms.len() - 1]);
    let last_growth = if a > 0.0 { b / a - 1.0 } else if b > 0.0 { f64::INFINITY } else { 0.0 };
    Ok(DecayReport { power, cutoffs: cutoffs.to_vec(), norms, last_growth, bounded: last_growth < DECAY_GROWTH_THRESHOLD })
}
