//! Spectral evolution against the leapfrog solver on a truncated star.

use serde::{Deserialize, Serialize};
use starwave_core::fdtd::{Boundary, FdtdConfig, FdtdSolver};
use starwave_core::network::{NetworkFunction, QuadratureRule, StarNetwork};
use starwave_core::spectral::{choose_cutoff, GridOptions, SpectralGrid, SpectralTransform};
use starwave_core::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub t: f64,
    pub courant: f64,
    /// Sponge width; `None` takes `max(10 dx, L/5)`.
    pub sponge_width: Option<f64>,
    pub sponge_strength: f64,
    /// Tail tolerance of the automatic cutoff.
    pub tail_tol: f64,
    /// Fixed cutoff instead of the automatic one.
    pub cutoff: Option<f64>,
    pub kappa: f64,
}

impl CompareOptions {
    pub fn new(t: f64) -> Self {
        Self {
            t,
            courant: 0.5,
            sponge_width: None,
            sponge_strength: 20.0,
            tail_tol: 1e-3,
            cutoff: None,
            kappa: starwave_core::KAPPA_DEFAULT,
        }
    }
}

/// Initial displacement; the initial velocity is zero.
#[derive(Debug, Clone)]
pub enum InitialData {
    /// Given samples.
    Samples(NetworkFunction),
    /// `h(A) f` for a smooth window `h` supported in `(lower, upper)`.
    Band { source: NetworkFunction, lower: f64, upper: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    /// Time reached by the leapfrog solver, within half a step of the
    /// requested time.
    pub t: f64,
    pub dx: f64,
    pub dt: f64,
    pub length: f64,
    pub sponge_width: f64,
    pub cutoff: f64,
    /// `‖u_fdtd(t) - u_spectral(t)‖ / ‖u0‖` on `x ≤ L - sponge_width`.
    pub l2_gap: f64,
    /// `|E(t) - E(0)| / E(0)` of the leapfrog energy.
    pub energy_drift: f64,
    /// Last time before the data can reach the sponge.
    pub causality_window: f64,
    pub within_window: bool,
    /// Largest weighted node slope sum over the run.
    pub max_node_flux: f64,
    pub passed: bool,
}

pub const GAP_TOLERANCE: f64 = 5e-2;
pub const DRIFT_TOLERANCE: f64 = 1e-3;

/// Smooth step from 0 at `u ≤ 0` to 1 at `u ≥ 1`.
fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let (a, b) = ((-1.0 / u).exp(), (-1.0 / (1.0 - u)).exp());
    a / (a + b)
}

/// Window equal to 1 on the middle 60% of `(lower, upper)`, with smooth
/// tapers over the outer 20% on each side.
pub fn band_window(lower: f64, upper: f64) -> impl Fn(f64) -> f64 {
    let taper = 0.2 * (upper - lower);
    move |l| smooth_step((l - lower) / taper).min(smooth_step((upper - l) / taper))
}

/// Largest `x` where `|u0| > 1e-8 max |u0|` over all branches.
fn support_radius(u0: &NetworkFunction) -> f64 {
    let peak = u0.sup_norm();
    (0..u0.grid().len())
        .filter_map(|k| u0.branch(k).iter().rposition(|z| z.norm() > 1e-8 * peak).map(|i| u0.x(k, i)))
        .fold(0.0, f64::max)
}

pub fn oracle_compare(net: &StarNetwork, data: &InitialData, opts: &CompareOptions) -> Result<CompareReport> {
    let source = match data {
        InitialData::Samples(f) | InitialData::Band { source: f, .. } => f,
    };
    let grid = source.grid().clone();
    let (dx, length) = (grid.branch(0).dx(), grid.branch(0).length());
    if grid.branches().iter().any(|b| b.dx() != dx || b.length() != length) {
        return Err(Error::Precondition("comparison needs the same grid on every branch"));
    }
    let rule = QuadratureRule::simpson(&grid);
    let spectral_opts = GridOptions::new(length);

    // Spectral coefficients of the initial data and the transform carrying them.
    let (transform, coeffs, u0) = match data {
        InitialData::Samples(f) => {
            let cut = match opts.cutoff {
                Some(c) => c,
                None => choose_cutoff(net, f, &rule, opts.tail_tol, &spectral_opts, opts.kappa)?,
            };
            let t = SpectralTransform::new(net, SpectralGrid::new(net, cut, &spectral_opts)?, opts.kappa)?;
            let g = t.forward(f, &rule)?;
            (t, g, f.clone())
        }
        InitialData::Band { source, lower, upper } => {
            if !(lower < upper) {
                return Err(Error::InvalidBand(*lower, *upper));
            }
            let cut = opts.cutoff.unwrap_or(upper.max(net.highest_edge()) + 1.0);
            let sg = SpectralGrid::with_breakpoints(net, cut, &[*lower, *upper], &spectral_opts)?;
            let t = SpectralTransform::new(net, sg, opts.kappa)?;
            let h = band_window(*lower, *upper);
            let g = t.forward(source, &rule)?.multiply(t.grid(), |l| C64::new(h(l), 0.0))?;
            let u0 = t.inverse(&g, &grid)?;
            (t, g, u0)
        }
    };

    let width = opts.sponge_width.unwrap_or((10.0 * dx).max(0.2 * length));
    let boundary = Boundary::Sponge { width, strength: opts.sponge_strength };
    let solver = FdtdSolver::new(net, FdtdConfig::with_courant(net, dx, opts.courant, length, boundary, opts.t))?;
    if solver.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let real_u0 = u0.map(|_, _, z| C64::new(z.re, 0.0));
    let mut state = solver.initial_state(&real_u0, None)?;
    let e0 = solver.energy(&state);
    let mut max_flux = solver.node_flux(&state).abs();
    while state.time + 0.5 * solver.config().dt < opts.t {
        solver.step_mut(&mut state);
        max_flux = max_flux.max(solver.node_flux(&state).abs());
    }
    let drift = (solver.energy(&state) - e0).abs() / e0;

    let evolved = transform.evolve_coefficients(&coeffs, None, state.time)?;
    let spectral = transform.inverse(&evolved, &grid)?;
    // The sponge layer is not part of the modelled network.
    let inside = |f: &NetworkFunction| f.map(|_, x, z| if x <= length - width { z } else { C64::new(0.0, 0.0) });
    let gap = inside(&solver.to_function(&state).sub(&spectral)?).norm(&rule)? / inside(&real_u0).norm(&rule)?;

    let speed = net.speeds().iter().map(|c| c.sqrt()).fold(0.0, f64::max);
    let window = (length - width - support_radius(&real_u0)).max(0.0) / speed;
    let within = state.time <= window;
    Ok(CompareReport {
        t: state.time,
        dx,
        dt: solver.config().dt,
        length,
        sponge_width: width,
        cutoff: transform.grid().cutoff(),
        l2_gap: gap,
        energy_drift: drift,
        causality_window: window,
        within_window: within,
        max_node_flux: max_flux,
        passed: within && gap < GAP_TOLERANCE && drift < DRIFT_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_is_smooth_and_supported_in_the_band() {
        let h = band_window(1.0, 6.0);
        assert_eq!(h(1.0), 0.0);
        assert_eq!(h(6.0), 0.0);
        assert_eq!(h(3.5), 1.0);
        assert_eq!(h(2.0), 1.0);
        assert!(h(1.5) > 0.0 && h(1.5) < 1.0);
        assert!((h(1.5) - 0.5).abs() < 1e-12);
    }
}
