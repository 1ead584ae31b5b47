//! Suites on closed-form quantities at single points.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use starwave_core::eigen::{EigenParams, Sign};
use starwave_core::network::{BranchPoint, StarNetwork};
use starwave_core::resolvent::{limiting_absorption_check, LapSample};
use starwave_core::symmetrization::{
    closed_form, im_kernel_case, im_kernel_cases, im_kernel_direct, q_direct, solve_q_least_squares, AnchorFrame,
    ImKernelCase,
};
use starwave_core::C64;

use super::{run_trials, Ctx, Outcome, SuiteReport};
use crate::reference::{lambda_in_band, network, open_bands, reference_networks};

const ZERO: C64 = C64::new(0.0, 0.0);

fn pick<T: Clone>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.gen_range(0..items.len())].clone()
}

/// Random real `λ` inside a random open band, with the band.
fn lambda_in_random_band(rng: &mut ChaCha8Rng, net: &StarNetwork) -> (usize, f64) {
    let p = pick(rng, &open_bands(net));
    (p, lambda_in_band(net, p, rng.gen()))
}

/// Random network with 2 to 5 branches, speeds in `[0.3, 4)` and
/// potential gaps of at least 0.2.
fn random_network(rng: &mut ChaCha8Rng) -> StarNetwork {
    let n = rng.gen_range(2..=5);
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..4.0)).collect();
    let mut a = vec![0.0; n];
    for i in 1..n {
        a[i] = a[i - 1] + 0.2 + 1.8 * rng.gen::<f64>();
    }
    network(&c, &a)
}

pub(super) fn eigen(ctx: Ctx, trials: usize) -> SuiteReport {
    run_trials("eigen", trials, |i| {
        let mut rng = ctx.rng(i);
        let mut out = Outcome::default();
        let (name, net) = pick(&mut rng, &reference_networks());
        let (_, lambda) = lambda_in_random_band(&mut rng, &net);
        let sign = if rng.gen() { Sign::Plus } else { Sign::Minus };
        let j = rng.gen_range(0..net.len());
        let params = EigenParams::new(&net, C64::new(lambda, 0.0), sign);
        let (c, a) = (net.speeds(), net.potentials());
        let tag = || format!("net {name}, lambda {lambda}, sign {sign:?}, j {j}");
        let result = (|| -> starwave_core::Result<()> {
            let node = params.eval(j, BranchPoint::node())?;
            let (mut flux, mut scale) = (ZERO, 0.0);
            for k in 0..net.len() {
                let at_zero = BranchPoint::new(&net, k, 0.0)?;
                out.require(params.eval(j, at_zero)? == node, || format!("{}: node value differs on branch {k}", tag()));
                let d = params.eval_deriv(j, at_zero)? * c[k];
                flux += d;
                scale += d.norm();
                for _ in 0..4 {
                    let x = rng.gen_range(0.0..12.0);
                    let pt = BranchPoint::new(&net, k, x)?;
                    let (f, f2) = (params.eval(j, pt)?, params.eval_second(j, pt)?);
                    let residual = (-f2 * c[k] + f * a[k] - f * lambda).norm();
                    let size = (f2 * c[k]).norm() + (f * a[k]).norm() + (f * lambda).norm();
                    let rel = if size > 0.0 { residual / size } else { residual };
                    out.max("ode_residual", rel);
                    out.require(rel <= 1e-13, || format!("{}: ODE residual {rel:e} at branch {k}, x {x}", tag()));
                }
            }
            let rel = flux.norm() / scale.max(f64::MIN_POSITIVE);
            out.max("kirchhoff_residual", rel);
            out.require(rel <= 1e-13, || format!("{}: Kirchhoff residual {rel:e}", tag()));
            Ok(())
        })();
        if let Err(e) = result {
            out.error(&tag(), e);
        }
        out
    })
}

pub(super) fn wronskian(ctx: Ctx, per_network: usize) -> SuiteReport {
    let nets = reference_networks();
    let mut report = run_trials("wronskian", 3 * per_network, |i| {
        let mut rng = ctx.rng(i);
        let mut out = Outcome::default();
        let (name, net) = &nets[i / per_network.max(1)];
        let a = net.potentials();
        let lambda = a[0] + (a[a.len() - 1] - a[0] + 10.0) * rng.gen::<f64>();
        let eps: f64 = rng.gen();
        let w2 = EigenParams::new(net, C64::new(lambda, -eps), Sign::Minus).w().norm_sqr();
        let bound: f64 = net.speeds().iter().zip(a).map(|(c, a)| c * (lambda - a).abs()).sum();
        out.min("slack", w2 - bound);
        out.require(w2 >= bound - 1e-12, || format!("net {name}: |w|^2 {w2} below {bound} at lambda {lambda}, eps {eps}"));
        out
    });
    // Equality case: net B at λ = 1 gives 3 on both sides.
    let (_, b) = &nets[1];
    let w2 = EigenParams::new(b, C64::new(1.0, 0.0), Sign::Minus).w().norm_sqr();
    let bound: f64 = b.speeds().iter().zip(b.potentials()).map(|(c, a)| c * (1.0f64 - a).abs()).sum();
    let gap = (w2 - 3.0).abs().max((bound - 3.0).abs());
    report.metrics.insert("equality_gap".into(), gap);
    if gap > 1e-12 {
        report.passed = false;
        *report.metrics.get_mut("failed").expect("failed metric") += 1.0;
        report.failures.push(format!("equality case: |w|^2 = {w2}, bound = {bound}"));
    }
    report
}

pub(super) fn lap(ctx: Ctx, per_network: usize) -> SuiteReport {
    let nets = reference_networks();
    run_trials("lap", 3 * per_network, |i| {
        let mut rng = ctx.rng(i);
        let mut out = Outcome::default();
        let (name, net) = &nets[i / per_network.max(1)];
        let (_, lambda) = lambda_in_random_band(&mut rng, net);
        let n = net.len();
        let sample = (|| {
            Ok::<_, starwave_core::Error>(LapSample {
                x: BranchPoint::new(net, rng.gen_range(0..n), rng.gen_range(0.0..8.0))?,
                x_prime: BranchPoint::new(net, rng.gen_range(0..n), rng.gen_range(0.0..8.0))?,
                epsilon: 1.0 - rng.gen::<f64>(),
            })
        })();
        match sample.and_then(|s| limiting_absorption_check(net, lambda, 1.0, &[s])) {
            Ok(r) => {
                out.max("bound_ratio", r.worst_ratio);
                out.max("limit_gap", r.limit_gap);
                out.max("cauchy_increment", r.cauchy_increment);
                out.require(r.passed(1e-10), || format!("net {name}, lambda {lambda}: {r:?}"));
            }
            Err(e) => out.error(&format!("net {name}, lambda {lambda}"), e),
        }
        out
    })
}

const CASES: [ImKernelCase; 5] =
    [ImKernelCase::A, ImKernelCase::BDistinct, ImKernelCase::BEqual, ImKernelCase::C, ImKernelCase::D];

/// `(band, j, k)` combinations that fall in `case`.
fn case_combinations(net: &StarNetwork, case: ImKernelCase) -> Vec<(usize, usize, usize)> {
    let n = net.len();
    let mut out = Vec::new();
    for p in open_bands(net) {
        for j in 0..n {
            for k in 0..n {
                if im_kernel_case(p, j, k) == case {
                    out.push((p, j, k));
                }
            }
        }
    }
    out
}

/// `|(1/w) F^{-,j+1}_j(x) F^{-,j}_k(x')|`.
fn product_modulus(net: &StarNetwork, lambda: f64, j: usize, k: usize, x: f64, y: f64) -> f64 {
    let params = EigenParams::new(net, C64::new(lambda, 0.0), Sign::Minus);
    let value = || -> starwave_core::Result<f64> {
        let left = params.eval((j + 1) % net.len(), BranchPoint::new(net, j, x)?)?;
        let right = params.eval(j, BranchPoint::new(net, k, y)?)?;
        Ok((left * right / params.w()).norm())
    };
    value().unwrap_or(f64::INFINITY)
}

/// Network index, case and its `(band, j, k)` combinations.
type CaseGroup = (usize, ImKernelCase, Vec<(usize, usize, usize)>);

pub(super) fn imkernel(ctx: Ctx, per_case: usize) -> SuiteReport {
    let nets = reference_networks();
    // Cases that cannot occur on a network (no evanescent branch on A) are
    // skipped.
    let groups: Vec<CaseGroup> = nets
        .iter()
        .enumerate()
        .flat_map(|(m, (_, net))| CASES.iter().map(move |&c| (m, c, case_combinations(net, c))))
        .filter(|g| !g.2.is_empty())
        .collect();
    let mut report = run_trials("imkernel", groups.len() * per_case, |i| {
        let mut rng = ctx.rng(i);
        let mut out = Outcome::default();
        let (m, case, combos) = &groups[i / per_case.max(1)];
        let (name, net) = &nets[*m];
        let (p, j, k) = pick(&mut rng, combos);
        let lambda = lambda_in_band(net, p, rng.gen());
        let (x, y) = (rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0));
        match (im_kernel_cases(net, lambda, j, k, x, y), im_kernel_direct(net, lambda, j, k, x, y)) {
            (Ok(a), Ok(b)) => {
                // The imaginary part is only known to within rounding of the
                // full complex product.
                let err = (a - b).abs() / product_modulus(net, lambda, j, k, x, y).max(1.0);
                out.max(&format!("error_{case:?}"), err);
                out.require(err <= 1e-12, || format!("net {name}, case {case:?}, lambda {lambda}, j {j}, k {k}: {a} vs {b}"));
            }
            (Err(e), _) | (_, Err(e)) => out.error(&format!("net {name}, case {case:?}"), e),
        }
        out
    });
    report.metrics.insert("groups".into(), groups.len() as f64);
    // Below the spectrum every expression vanishes.
    let mut below = 0.0f64;
    for (_, net) in &nets {
        for j in 0..net.len() {
            for k in 0..net.len() {
                let lambda = net.lowest_edge() - 1.0;
                let v = im_kernel_cases(net, lambda, j, k, 0.7, 1.3).map(f64::abs).unwrap_or(f64::INFINITY);
                let d = im_kernel_direct(net, lambda, j, k, 0.7, 1.3).map(f64::abs).unwrap_or(f64::INFINITY);
                below = below.max(v).max(d);
            }
        }
    }
    report.metrics.insert("below_spectrum".into(), below);
    if below > 1e-15 {
        report.passed = false;
        *report.metrics.get_mut("failed").expect("failed metric") += 1.0;
        report.failures.push(format!("nonzero value {below:e} below the spectrum"));
    }
    report
}

pub(super) fn symmetrization(ctx: Ctx, trials: usize) -> SuiteReport {
    run_trials("symmetrization", trials, |i| {
        let mut rng = ctx.rng(i);
        let mut out = Outcome::default();
        let net = random_network(&mut rng);
        let (p, lambda) = lambda_in_random_band(&mut rng, &net);
        let result = (|| -> starwave_core::Result<_> {
            let closed = closed_form(&net, lambda)?;
            let ls = solve_q_least_squares(&net, lambda)?;
            let frame = AnchorFrame::select(&net, lambda, &mut || rng.gen::<f64>())?;
            let direct = q_direct(&net, lambda, &frame)?;
            Ok((closed, ls, frame, direct))
        })();
        let (closed, ls, frame, direct) = match result {
            Ok(v) => v,
            Err(e) => {
                out.error(&format!("trial {i}, lambda {lambda}"), e);
                return out;
            }
        };
        let direct_gap = direct.max_gap(&closed);
        let cross_gap = direct.max_gap(&ls.q);
        let off = ls.q.max_off_diagonal().max(direct.max_off_diagonal());
        let outside = [closed.max_outside_band(p), ls.q.max_outside_band(p), direct.max_outside_band(p)];
        out.max("ls_residual", ls.residual);
        out.max("ls_gap", ls.gap);
        out.max("direct_gap", direct_gap);
        out.max("direct_ls_gap", cross_gap);
        out.max("off_diagonal", off);
        out.max("closed_outside_band", outside[0]);
        out.max("ls_outside_band", outside[1]);
        out.max("direct_outside_band", outside[2]);
        let tag = format!("trial {i}, n {}, lambda {lambda}", net.len());
        out.require(ls.gap < 1e-8, || format!("{tag}: least-squares gap {:e}", ls.gap));
        out.require(direct_gap < 1e-10, || format!("{tag}: direct gap {direct_gap:e}"));
        out.require(cross_gap < 1e-8, || format!("{tag}: direct vs least squares {cross_gap:e}"));
        out.require(off < 1e-8, || format!("{tag}: off-diagonal {off:e}"));
        out.require(outside[0] == 0.0, || format!("{tag}: closed form nonzero outside band"));
        out.require(outside[1] < 1e-8 && outside[2] < 1e-10, || format!("{tag}: outside band {outside:?}"));
        out.record = Some(json!({
            "trial": i,
            "c": net.speeds(),
            "a": net.potentials(),
            "lambda": lambda,
            "band": p,
            "anchors": frame.anchors(),
            "ls_residual": ls.residual,
            "ls_rank": ls.rank,
            "ls_gap": ls.gap,
            "direct_gap": direct_gap,
            "direct_ls_gap": cross_gap,
            "off_diagonal": off,
        }));
        out
    })
}

