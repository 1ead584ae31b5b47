//! Suites on time evolution and band projection.

use serde_json::json;
use starwave_core::fdtd::{Boundary, FdtdConfig, FdtdSolver};
use starwave_core::network::{NetworkFunction, NetworkGrid, QuadratureRule};
use starwave_core::spectral::{GridOptions, SpectralGrid, SpectralTransform};
use starwave_core::KAPPA_DEFAULT;

use super::{run_trials, Ctx, Outcome, SuiteReport};
use crate::compare::{oracle_compare, CompareOptions, InitialData, DRIFT_TOLERANCE, GAP_TOLERANCE};
use crate::reference::{gaussian, net_c, network};

pub(super) fn fdtd(_: Ctx) -> SuiteReport {
    run_trials("fdtd", 1, |_| {
        let mut out = Outcome::default();
        let net = net_c();
        let result = (|| -> starwave_core::Result<_> {
            let grid = NetworkGrid::uniform(3, 0.01, 30.0)?;
            let u0 = NetworkFunction::from_real_fn(&grid, |k, x| if k == 0 { gaussian(x, 4.0, 0.7) } else { 0.0 });
            oracle_compare(&net, &InitialData::Samples(u0), &CompareOptions::new(5.0))
        })();
        match result {
            Ok(r) => {
                out.max("l2_gap", r.l2_gap);
                out.max("energy_drift", r.energy_drift);
                out.max("node_flux", r.max_node_flux);
                out.min("causality_window", r.causality_window);
                out.require(r.within_window, || format!("t = {} beyond the causality window {}", r.t, r.causality_window));
                out.require(r.l2_gap < GAP_TOLERANCE, || format!("L2 gap {:e}", r.l2_gap));
                out.require(r.energy_drift < DRIFT_TOLERANCE, || format!("energy drift {:e}", r.energy_drift));
                out.record = Some(serde_json::to_value(&r).expect("serializable report"));
            }
            Err(e) => out.error("comparison", e),
        }
        out
    })
}

/// Peak amplitudes after a unit pulse on branch 1 of `n` identical
/// branches has scattered off the node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection {
    pub reflected: f64,
    pub transmitted: f64,
    /// `∫ u²` left on the incoming branch.
    pub reflected_mass: f64,
    pub initial_energy: f64,
}

/// Leapfrog run of a left-moving Gaussian `g(x + t - 10)` on branch 1 of
/// `n` unit-speed branches without potential, until `t = 20`.
pub fn reflection_amplitudes(n: usize) -> starwave_core::Result<Reflection> {
    let net = network(&vec![1.0; n], &vec![0.0; n]);
    let cfg = FdtdConfig::with_courant(&net, 0.01, 0.5, 30.0, Boundary::Dirichlet, 20.0);
    let solver = FdtdSolver::new(&net, cfg)?;
    let grid = solver.grid().clone();
    let u0 = NetworkFunction::from_real_fn(&grid, |k, x| if k == 0 { gaussian(x, 10.0, 1.0) } else { 0.0 });
    let v0 = NetworkFunction::from_real_fn(&grid, |k, x| if k == 0 { -2.0 * (x - 10.0) * gaussian(x, 10.0, 1.0) } else { 0.0 });
    let mut s = solver.initial_state(&u0, Some(&v0))?;
    let initial_energy = solver.energy(&s);
    solver.run_until(&mut s, 20.0);
    let u = solver.to_function(&s);
    let peak = |k: usize| u.branch(k).iter().map(|z| z.re).fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    let reflected_mass = u.branch(0).iter().skip(1).map(|z| z.re * z.re).sum::<f64>() * 0.01;
    Ok(Reflection { reflected: peak(0), transmitted: peak(1), reflected_mass, initial_energy })
}

/// Least-squares slope of `ln|u|` against `x` over the samples in `[lo, hi]`.
fn log_slope(u: &NetworkFunction, k: usize, lo: f64, hi: f64) -> f64 {
    let pts: Vec<(f64, f64)> = u
        .branch(k)
        .iter()
        .enumerate()
        .map(|(i, z)| (u.x(k, i), z.norm().ln()))
        .filter(|&(x, _)| x >= lo && x <= hi)
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    sxy / sxx
}

pub(super) fn tunnel(_: Ctx) -> SuiteReport {
    run_trials("tunnel", 2, |i| {
        let mut out = Outcome::default();
        if i == 0 {
            // Band (1.9, 2.1) of the network c = (1,1,1), a = (0,0,4):
            // propagating on the first two branches, evanescent on the third.
            let net = network(&[1.0, 1.0, 1.0], &[0.0, 0.0, 4.0]);
            let (lower, upper) = (1.9, 2.1);
            let result = (|| -> starwave_core::Result<_> {
                let grid = NetworkGrid::uniform(3, 0.01, 20.0)?;
                let rule = QuadratureRule::simpson(&grid);
                let f = NetworkFunction::from_real_fn(&grid, |k, x| if k == 0 { gaussian(x, 5.0, 1.0) } else { 0.0 });
                let sg = SpectralGrid::with_breakpoints(&net, 50.0, &[lower, upper], &GridOptions::new(20.0))?;
                let t = SpectralTransform::new(&net, sg, KAPPA_DEFAULT)?;
                t.project(&f, &rule, lower, upper, &grid)
            })();
            match result {
                Ok(u) => {
                    let k = net.internal_index(2).expect("third branch");
                    let rate = -log_slope(&u, k, 1.0, 5.0);
                    let centre = 0.5 * (lower + upper);
                    let expected = ((net.potentials()[k] - centre) / net.speeds()[k]).sqrt();
                    let rel = (rate / expected - 1.0).abs();
                    out.max("decay_rate_error", rel);
                    out.require(rel < 5e-2, || format!("fitted rate {rate}, expected {expected}"));
                    out.record = Some(json!({"check": "evanescent decay", "fitted_rate": rate, "expected_rate": expected}));
                }
                Err(e) => out.error("band projection", e),
            }
        } else {
            match reflection_amplitudes(3) {
                Ok(r) => {
                    let (re, te) = ((r.reflected / (-1.0 / 3.0) - 1.0).abs(), (r.transmitted / (2.0 / 3.0) - 1.0).abs());
                    out.max("reflection_error", re);
                    out.max("transmission_error", te);
                    out.require(re < 1e-2, || format!("reflection {}", r.reflected));
                    out.require(te < 1e-2, || format!("transmission {}", r.transmitted));
                    out.record = Some(json!({"check": "node scattering", "reflected": r.reflected, "transmitted": r.transmitted}));
                }
                Err(e) => out.error("scattering", e),
            }
        }
        out
    })
}
