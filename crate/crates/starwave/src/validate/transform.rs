//! Suites on the resolvent and the spectral transform.

use std::f64::consts::PI;

use rand::Rng;
use serde_json::json;
use starwave_core::fdtd::dalembert_reference;
use starwave_core::network::{apply_operator_fd, NetworkFunction, NetworkGrid, QuadratureRule, StarNetwork};
use starwave_core::resolvent::apply_resolvent;
use starwave_core::spectral::{
    choose_cutoff, domain_decay_diagnostic, GridOptions, SpectralGrid, SpectralTransform,
};
use starwave_core::{C64, KAPPA_DEFAULT};

use super::{run_trials, Ctx, Outcome, SuiteReport};
use crate::reference::{bump, gaussian, net_b, net_c, network, reference_networks};

const ZERO: C64 = C64::new(0.0, 0.0);

/// `‖(λ - A_h) R(λ) f - f‖ / ‖f‖` on `[0, 20]` for a sum of Gaussians,
/// leaving out the last sample of each branch, which sees the truncation.
fn resolvent_residual(net: &StarNetwork, lambda: C64, dx: f64) -> starwave_core::Result<f64> {
    let grid = NetworkGrid::uniform(net.len(), dx, 20.0)?;
    let rule = QuadratureRule::simpson(&grid);
    let f = NetworkFunction::from_real_fn(&grid, |k, x| (1.0 + k as f64) * gaussian(x, 4.0 + k as f64, 1.0));
    let r = apply_resolvent(net, &f, lambda, &rule)?;
    let res = r.scale(lambda).sub(&apply_operator_fd(net, &r)?)?.sub(&f)?;
    let res = res.map(|k, x, v| if x >= grid.branch(k).length() { ZERO } else { v });
    Ok(res.norm(&rule)? / f.norm(&rule)?)
}

pub(super) fn resolvent(_: Ctx) -> SuiteReport {
    let cases: Vec<(&str, StarNetwork, C64)> = [("B", net_b()), ("C", net_c())]
        .into_iter()
        .flat_map(|(name, net)| {
            [C64::new(2.0, 0.5), C64::new(4.0, -0.1), C64::new(2.0, 0.0)].map(move |l| (name, net.clone(), l))
        })
        .collect();
    run_trials("resolvent", cases.len(), |i| {
        let (name, net, lambda) = &cases[i];
        let mut out = Outcome::default();
        match resolvent_residual(net, *lambda, 1e-2).and_then(|c| Ok((c, resolvent_residual(net, *lambda, 5e-3)?))) {
            Ok((coarse, fine)) => {
                let order = (coarse / fine).log2();
                out.max("residual", fine);
                out.min("order", order);
                out.require(fine < 1e-3, || format!("net {name}, lambda {lambda}: residual {fine:e}"));
                out.require(order >= 2.0, || format!("net {name}, lambda {lambda}: order {order}"));
                out.record = Some(json!({
                    "network": name, "lambda": [lambda.re, lambda.im],
                    "residual_dx_1e-2": coarse, "residual_dx_5e-3": fine, "order": order,
                }));
            }
            Err(e) => out.error(&format!("net {name}, lambda {lambda}"), e),
        }
        out
    })
}

/// Smooth compact bump with a random phase on one random branch of a
/// reference network, sampled at `dx = 0.01` on `[0, 10]`.
struct BumpCase {
    name: &'static str,
    net: StarNetwork,
    grid: NetworkGrid,
    rule: QuadratureRule,
    f: NetworkFunction,
}

const BUMP_LENGTH: f64 = 10.0;

fn bump_case(ctx: &Ctx, suite: &str, per_network: usize, i: usize) -> starwave_core::Result<BumpCase> {
    let (name, net) = reference_networks()[i / per_network.max(1)].clone();
    let mut rng = ctx.rng_of(suite, i);
    let branch = rng.gen_range(0..net.len());
    let centre = rng.gen_range(3.0..6.0);
    let width = rng.gen_range(1.5..2.5);
    let phase = rng.gen_range(0.0..2.0 * PI);
    let grid = NetworkGrid::uniform(net.len(), 0.01, BUMP_LENGTH)?;
    let rule = QuadratureRule::simpson(&grid);
    let f = NetworkFunction::from_fn(&grid, |k, x| if k == branch { C64::from_polar(bump(x, centre, width), phase) } else { ZERO });
    Ok(BumpCase { name, net, grid, rule, f })
}

/// Transform at the cutoff chosen for `f` with tail tolerance `tol`.
fn fitted_transform(net: &StarNetwork, f: &NetworkFunction, rule: &QuadratureRule, tol: f64, extent: f64) -> starwave_core::Result<SpectralTransform> {
    let opts = GridOptions::new(extent);
    let cut = choose_cutoff(net, f, rule, tol, &opts, KAPPA_DEFAULT)?;
    SpectralTransform::new(net, SpectralGrid::new(net, cut, &opts)?, KAPPA_DEFAULT)
}

pub(super) fn plancherel(ctx: Ctx, per_network: usize) -> SuiteReport {
    run_trials("plancherel", 3 * per_network, |i| {
        let mut out = Outcome::default();
        let result = (|| -> starwave_core::Result<_> {
            let c = bump_case(&ctx, "plancherel", per_network, i)?;
            let t = fitted_transform(&c.net, &c.f, &c.rule, 1e-3, BUMP_LENGTH)?;
            let unit = SpectralTransform::new(&c.net, t.grid().clone(), 1.0)?;
            let g = t.forward(&c.f, &c.rule)?;
            let norm2 = c.f.norm(&c.rule)?.powi(2);
            Ok((c.name, t.grid().cutoff(), t.norm(&g)?.powi(2) / norm2, unit.norm(&g)?.powi(2) / norm2))
        })();
        match result {
            Ok((name, cut, ratio, ratio_unit)) => {
                out.max("defect", (ratio - 1.0).abs());
                out.max("unit_kappa_gap_to_pi", (ratio_unit - PI).abs());
                out.max("cutoff", cut);
                out.require((ratio - 1.0).abs() < 1e-3, || format!("trial {i}, net {name}: ratio {ratio}"));
                out.require((ratio_unit - PI).abs() < 1e-3, || format!("trial {i}, net {name}: unit-kappa ratio {ratio_unit}"));
            }
            Err(e) => out.error(&format!("trial {i}"), e),
        }
        out
    })
}

pub(super) fn inversion(ctx: Ctx, per_network: usize) -> SuiteReport {
    run_trials("inversion", 3 * per_network, |i| {
        let mut out = Outcome::default();
        // Same corpus as the isometry suite.
        let result = (|| -> starwave_core::Result<_> {
            let c = bump_case(&ctx, "plancherel", per_network, i)?;
            let t = fitted_transform(&c.net, &c.f, &c.rule, 1e-3, BUMP_LENGTH)?;
            let back = t.inverse(&t.forward(&c.f, &c.rule)?, &c.grid)?;
            Ok((c.name, back.sub(&c.f)?.norm(&c.rule)? / c.f.norm(&c.rule)?))
        })();
        match result {
            Ok((name, err)) => {
                out.max("error", err);
                out.require(err < 1e-2, || format!("trial {i}, net {name}: error {err:e}"));
            }
            Err(e) => out.error(&format!("trial {i}"), e),
        }
        out
    })
}

/// `‖V(A_h u) - λ Vu‖_q / ‖Vu‖_q` for `u` sampled at `dx`.
fn diagonalization_error(
    net: &StarNetwork,
    u: impl Fn(usize, f64) -> C64,
    dx: f64,
    cutoff: f64,
) -> starwave_core::Result<f64> {
    let grid = NetworkGrid::uniform(net.len(), dx, BUMP_LENGTH)?;
    let rule = QuadratureRule::simpson(&grid);
    let u = NetworkFunction::from_fn(&grid, u);
    let t = SpectralTransform::new(net, SpectralGrid::new(net, cutoff, &GridOptions::new(BUMP_LENGTH))?, KAPPA_DEFAULT)?;
    let vu = t.forward(&u, &rule)?;
    let vau = t.forward(&apply_operator_fd(net, &u)?, &rule)?;
    let diff = vau.axpy(C64::new(-1.0, 0.0), &vu.multiply(t.grid(), |l| C64::new(l, 0.0))?)?;
    Ok(t.norm(&diff)? / t.norm(&vu)?)
}

pub(super) fn diagonalization(ctx: Ctx, per_network: usize) -> SuiteReport {
    run_trials("diagonalization", 3 * per_network, |i| {
        let mut out = Outcome::default();
        let (name, net) = reference_networks()[i / per_network.max(1)].clone();
        let mut rng = ctx.rng(i);
        // Supported inside (0.5, 8.5): zero near the node and the far end,
        // so in the operator domain.
        let branch = rng.gen_range(0..net.len());
        let centre = rng.gen_range(3.0..6.0);
        let width = rng.gen_range(1.5..2.5);
        let data = |k: usize, x: f64| C64::new(if k == branch { bump(x, centre, width) } else { 0.0 }, 0.0);
        let result = (|| -> starwave_core::Result<_> {
            let coarse = NetworkGrid::uniform(net.len(), 1e-2, BUMP_LENGTH)?;
            let rule = QuadratureRule::simpson(&coarse);
            let cut = choose_cutoff(&net, &NetworkFunction::from_fn(&coarse, data), &rule, 1e-3, &GridOptions::new(BUMP_LENGTH), KAPPA_DEFAULT)?;
            Ok((cut, diagonalization_error(&net, data, 1e-2, cut)?, diagonalization_error(&net, data, 5e-3, cut)?))
        })();
        match result {
            Ok((cut, coarse, fine)) => {
                let order = (coarse / fine).log2();
                out.max("error", fine);
                out.min("order", order);
                let tag = format!("trial {i}, net {name}, centre {centre}, width {width}");
                out.require(fine < 1e-3, || format!("{tag}: error {fine:e}"));
                out.require(order >= 2.0, || format!("{tag}: order {order}"));
                out.record = Some(json!({
                    "network": name, "branch": branch + 1, "centre": centre, "width": width, "cutoff": cut,
                    "error_dx_1e-2": coarse, "error_dx_5e-3": fine, "order": order,
                }));
            }
            Err(e) => out.error(&format!("trial {i}, net {name}"), e),
        }
        out
    })
}

pub(super) fn dalembert(_: Ctx) -> SuiteReport {
    run_trials("dalembert", 1, |_| {
        let mut out = Outcome::default();
        let net = network(&[1.0, 1.0], &[0.0, 0.0]);
        let data = |k: usize, x: f64| if k == 0 { gaussian(x, 5.0, 0.5) } else { 0.0 };
        let t = 2.0;
        let result = (|| -> starwave_core::Result<_> {
            let grid = NetworkGrid::uniform(2, 0.01, BUMP_LENGTH)?;
            let rule = QuadratureRule::simpson(&grid);
            let u0 = NetworkFunction::from_real_fn(&grid, data);
            let tr = fitted_transform(&net, &u0, &rule, 1e-4, BUMP_LENGTH)?;
            let u = tr.evolve(&u0, None, &rule, t, &grid)?;
            let exact = dalembert_reference(&net, data, t, &grid)?;
            Ok((tr.grid().cutoff(), u.sub(&exact)?.sup_norm()))
        })();
        match result {
            Ok((cut, err)) => {
                out.max("sup_error", err);
                out.max("cutoff", cut);
                out.require(err < 1e-2, || format!("sup error {err:e}"));
            }
            Err(e) => out.error("evolution", e),
        }
        out
    })
}

/// Cutoffs of the growth diagnostic.
pub const DECAY_CUTOFFS: [f64; 5] = [100.0, 200.0, 400.0, 800.0, 1600.0];

pub(super) fn decay(_: Ctx, pairs: usize) -> SuiteReport {
    run_trials("decay", pairs, |i| {
        let mut out = Outcome::default();
        let (name, net) = reference_networks()[i % 3].clone();
        let s = i as f64 / pairs.max(1) as f64;
        let smooth = |k: usize, x: f64| if k == 0 { gaussian(x, 4.0 + s, 0.6 + 0.2 * s) } else { 0.0 };
        // Continuous at the node with outgoing slopes 1 + k + s, so the
        // weighted slope sum cannot vanish.
        let kink = |k: usize, x: f64| (1.0 + (1.0 + k as f64 + s) * x) * (-(x / (1.0 + s)).powi(2)).exp();
        let result = (|| -> starwave_core::Result<_> {
            let grid = NetworkGrid::uniform(net.len(), 0.01, BUMP_LENGTH)?;
            let rule = QuadratureRule::simpson(&grid);
            let opts = GridOptions::new(BUMP_LENGTH);
            let run = |f: &dyn Fn(usize, f64) -> f64| {
                domain_decay_diagnostic(&net, &NetworkFunction::from_real_fn(&grid, f), &rule, 1, &DECAY_CUTOFFS, &opts, KAPPA_DEFAULT)
            };
            Ok((run(&smooth)?, run(&kink)?))
        })();
        match result {
            Ok((a, b)) => {
                out.max("smooth_growth", a.last_growth);
                out.min("kink_growth", b.last_growth);
                let tag = format!("pair {i}, net {name}");
                out.require(a.bounded, || format!("{tag}: smooth data growth {}", a.last_growth));
                out.require(!b.bounded, || format!("{tag}: kink growth {}", b.last_growth));
                out.record = Some(json!({
                    "pair": i, "network": name, "shift": s,
                    "smooth_norms": a.norms, "smooth_growth": a.last_growth, "smooth_bounded": a.bounded,
                    "kink_norms": b.norms, "kink_growth": b.last_growth, "kink_bounded": b.bounded,
                }));
            }
            Err(e) => out.error(&format!("pair {i}, net {name}"), e),
        }
        out
    })
}
