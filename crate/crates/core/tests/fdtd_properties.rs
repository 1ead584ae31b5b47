mod common;

use common::*;
use starwave_core::fdtd::{dalembert_reference, Boundary, FdtdConfig, FdtdSolver, NodeScheme};
use starwave_core::network::NetworkFunction;

/// A unit pulse travelling towards the node on branch 0 of `n` identical
/// branches, run until the scattered pulses are well separated.
fn scatter(n: usize) -> (f64, f64, f64, f64) {
    let net = net(&vec![1.0; n], &vec![0.0; n]);
    let cfg = FdtdConfig::with_courant(&net, 0.01, 0.5, 30.0, Boundary::Dirichlet, 20.0);
    let solver = FdtdSolver::new(&net, cfg).unwrap();
    let grid = solver.grid().clone();
    let u0 = NetworkFunction::from_real_fn(&grid, |k, x| if k == 0 { gaussian(x, 10.0, 1.0) } else { 0.0 });
    // u = g(x + t - 10) moves towards the node: u_t = g'(x - 10).
    let v0 = NetworkFunction::from_real_fn(&grid, |k, x| if k == 0 { -2.0 * (x - 10.0) * gaussian(x, 10.0, 1.0) } else { 0.0 });
    let mut s = solver.initial_state(&u0, Some(&v0)).unwrap();
    let e0 = solver.energy(&s);
    solver.run_until(&mut s, 20.0);
    let u = solver.to_function(&s);
    let peak = |k: usize| u.branch(k).iter().map(|z| z.re).fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    let reflected: f64 = u.branch(0).iter().skip(1).map(|z| z.re * z.re).sum::<f64>() * 0.01;
    (peak(0), peak(1), reflected, e0)
}

#[test]
fn kirchhoff_node_scatters_with_mode_matching_amplitudes() {
    for n in [3, 4, 5] {
        let (r, t, _, _) = scatter(n);
        let (r_exact, t_exact) = (2.0 / n as f64 - 1.0, 2.0 / n as f64);
        assert!((r / r_exact - 1.0).abs() < 1e-2, "n={n}: r={r}");
        assert!((t / t_exact - 1.0).abs() < 1e-2, "n={n}: t={t}");
    }
}

#[test]
fn two_equal_branches_are_transparent() {
    let (_, t, reflected, e0) = scatter(2);
    assert!((t - 1.0).abs() < 1e-2);
    // Incident energy is ∫ u_t² + u_x² = 2 ∫ g'², twice the potential part.
    assert!(reflected < 1e-3 * e0);
}

#[test]
fn standing_wave_keeps_its_energy() {
    // Odd data on two equal branches pins the node at zero, leaving a
    // single Dirichlet string of length 1.
    let net = net(&[1.0, 1.0], &[0.0, 0.0]);
    let cfg = FdtdConfig::with_courant(&net, 0.01, 0.5, 1.0, Boundary::Dirichlet, 20.0);
    let solver = FdtdSolver::new(&net, cfg).unwrap();
    let u0 = NetworkFunction::from_real_fn(solver.grid(), |k, x| {
        let s = (std::f64::consts::PI * x).sin();
        if k == 0 { s } else { -s }
    });
    let mut s = solver.initial_state(&u0, None).unwrap();
    let e0 = solver.energy(&s);
    // Ten periods of length 2.
    while s.time < 20.0 {
        solver.step_mut(&mut s);
        assert!((solver.energy(&s) - e0).abs() < 1e-3 * e0);
    }
}

#[test]
fn sponge_only_removes_energy() {
    let net = net_c();
    let cfg = FdtdConfig::with_courant(&net, 0.02, 0.5, 20.0, Boundary::Sponge { width: 5.0, strength: 20.0 }, 30.0);
    let solver = FdtdSolver::new(&net, cfg).unwrap();
    let u0 = NetworkFunction::from_real_fn(solver.grid(), |k, x| if k == 1 { gaussian(x, 8.0, 1.0) } else { 0.0 });
    let mut s = solver.initial_state(&u0, None).unwrap();
    solver.step_mut(&mut s);
    let mut last = solver.energy(&s);
    let first = last;
    while s.time < 30.0 {
        solver.step_mut(&mut s);
        let e = solver.energy(&s);
        assert!(e <= last * (1.0 + 1e-12) + 1e-15);
        last = e;
    }
    assert!(last < 0.5 * first);
}

#[test]
fn second_order_node_keeps_the_flux_at_zero() {
    let net = net_c();
    let cfg = FdtdConfig::with_courant(&net, 0.01, 0.5, 15.0, Boundary::Dirichlet, 6.0);
    let solver = FdtdSolver::new(&net, cfg).unwrap();
    let u0 = NetworkFunction::from_real_fn(solver.grid(), |k, x| if k == 0 { gaussian(x, 3.0, 0.7) } else { 0.0 });
    let mut s = solver.initial_state(&u0, None).unwrap();
    while s.time < 6.0 {
        solver.step_mut(&mut s);
        assert!(solver.node_flux(&s).abs() < 1e-8);
    }
}

#[test]
fn leapfrog_converges_to_dalembert_at_second_order() {
    let net = net(&[1.0, 1.0], &[0.0, 0.0]);
    let data = |k: usize, x: f64| if k == 0 { gaussian(x, 5.0, 0.5) } else { 0.0 };
    let error = |dx: f64, node: NodeScheme| {
        let mut cfg = FdtdConfig::with_courant(&net, dx, 0.5, 12.0, Boundary::Dirichlet, 2.0);
        cfg.node = node;
        let solver = FdtdSolver::new(&net, cfg).unwrap();
        let u0 = NetworkFunction::from_real_fn(solver.grid(), data);
        let mut s = solver.initial_state(&u0, None).unwrap();
        solver.run_until(&mut s, 4.0);
        let exact = dalembert_reference(&net, data, s.time, solver.grid()).unwrap();
        solver.to_function(&s).sub(&exact).unwrap().sup_norm()
    };
    let (coarse, fine) = (error(0.02, NodeScheme::SecondOrder), error(0.01, NodeScheme::SecondOrder));
    assert!((coarse / fine).log2() >= 1.9, "{coarse} {fine}");
    // The first-order node dominates the error.
    assert!(error(0.01, NodeScheme::FirstOrder) > 2.0 * fine);
}
