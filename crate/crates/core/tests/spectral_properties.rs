mod common;

use common::*;
use proptest::prelude::*;
use starwave_core::network::{integrate_network, NetworkFunction, NetworkGrid, QuadratureRule};
use starwave_core::spectral::{
    choose_cutoff, propagator, spectral_energy, GridOptions, SpectralFunction, SpectralGrid, SpectralTransform,
};
use starwave_core::{C64, KAPPA_DEFAULT};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn transform_is_isometric_and_inverted(which in 0usize..3, branch in 0usize..3, centre in 3.0f64..6.0, width in 1.5f64..2.5, phase in 0.0f64..6.3) {
        let net = reference_networks().swap_remove(which);
        let branch = branch % net.len();
        let grid = NetworkGrid::uniform(net.len(), 0.01, 10.0).unwrap();
        let rule = QuadratureRule::simpson(&grid);
        let f = NetworkFunction::from_fn(&grid, |k, x| if k == branch { C64::from_polar(bump(x, centre, width), phase) } else { C64::new(0.0, 0.0) });
        let opts = GridOptions::new(10.0);
        let cut = choose_cutoff(&net, &f, &rule, 1e-3, &opts, KAPPA_DEFAULT).unwrap();
        let t = SpectralTransform::new(&net, SpectralGrid::new(&net, cut, &opts).unwrap(), KAPPA_DEFAULT).unwrap();
        let g = t.forward(&f, &rule).unwrap();
        let norm2 = f.norm(&rule).unwrap().powi(2);
        prop_assert!((t.norm(&g).unwrap().powi(2) / norm2 - 1.0).abs() < 1e-3);
        let back = t.inverse(&g, &grid).unwrap();
        prop_assert!(back.sub(&f).unwrap().norm(&rule).unwrap() < 1e-2 * norm2.sqrt());
    }

    #[test]
    fn inverse_is_adjoint_of_forward(which in 0usize..3, centre in 2.0f64..6.0, peak in 0.5f64..8.0, coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3)) {
        // (G, Vf)_q = (ZG, f)_H for smooth G and f.
        let net = reference_networks().swap_remove(which);
        let grid = NetworkGrid::uniform(net.len(), 0.01, 10.0).unwrap();
        let rule = QuadratureRule::simpson(&grid);
        let f = NetworkFunction::from_real_fn(&grid, |k, x| bump(x, centre, 1.5) * (1.0 + k as f64));
        let t = SpectralTransform::new(&net, SpectralGrid::new(&net, 60.0, &GridOptions::new(10.0)).unwrap(), KAPPA_DEFAULT).unwrap();
        let g = SpectralFunction::from_fn(&net, t.grid(), |k, l| C64::new(coeffs[k].0, coeffs[k].1) * gaussian(l, peak, 2.0));
        let left = t.inner(&g, &t.forward(&f, &rule).unwrap()).unwrap();
        let right = integrate_network(&t.inverse(&g, &grid).unwrap(), &f, &rule).unwrap();
        prop_assert!((left - right).norm() <= 1e-8 * (1.0 + left.norm()));
    }

    #[test]
    fn inverse_does_not_annihilate_band_limited_data(which in 0usize..3, lo in 0.2f64..5.0, coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3)) {
        let net = reference_networks().swap_remove(which);
        let opts = GridOptions::new(60.0);
        let t = SpectralTransform::new(&net, SpectralGrid::new(&net, 12.0, &opts).unwrap(), KAPPA_DEFAULT).unwrap();
        let g = SpectralFunction::from_fn(&net, t.grid(), |k, l| C64::new(coeffs[k].0, coeffs[k].1) * bump(l, lo + 1.0, 1.0));
        let norm = t.norm(&g).unwrap();
        prop_assume!(norm > 1e-6);
        let out = NetworkGrid::uniform(net.len(), 0.02, 60.0).unwrap();
        let z = t.inverse(&g, &out).unwrap();
        prop_assert!(z.norm(&QuadratureRule::simpson(&out)).unwrap() / norm > 0.5);
    }

    #[test]
    fn propagator_keeps_per_node_energy(lambda in 0.0f64..200.0, t in 0.0f64..50.0, p in (-1.0f64..1.0, -1.0f64..1.0), dp in (-1.0f64..1.0, -1.0f64..1.0)) {
        let (p, dp) = (C64::new(p.0, p.1), C64::new(dp.0, dp.1));
        let m = propagator(lambda, t);
        let (q, dq) = (p * m[0][0] + dp * m[0][1], p * m[1][0] + dp * m[1][1]);
        let e = spectral_energy(lambda, p, dp);
        prop_assert!((spectral_energy(lambda, q, dq) - e).abs() <= 1e-13 * e.max(1e-300));
    }
}

#[test]
fn projectors_compose_to_the_intersection() {
    let net = net_c();
    let small = NetworkGrid::uniform(3, 0.02, 10.0).unwrap();
    let large = NetworkGrid::uniform(3, 0.02, 80.0).unwrap();
    let (rs, rl) = (QuadratureRule::simpson(&small), QuadratureRule::simpson(&large));
    let data = |k: usize, x: f64| if k == 0 { bump(x, 4.0, 2.0) } else { 0.0 };
    let f = NetworkFunction::from_real_fn(&small, data);
    let fl = NetworkFunction::from_real_fn(&large, data);
    let t = SpectralTransform::new(
        &net,
        SpectralGrid::with_breakpoints(&net, 300.0, &[0.5, 2.0, 3.0, 4.5, 6.0], &GridOptions::new(80.0)).unwrap(),
        KAPPA_DEFAULT,
    )
    .unwrap();
    let norm = fl.norm(&rl).unwrap();
    let g = t.project(&f, &rs, 0.5, 3.0, &large).unwrap();
    let nested = t.project(&g, &rl, 2.0, 6.0, &large).unwrap();
    let direct = t.project(&fl, &rl, 2.0, 3.0, &large).unwrap();
    assert!(nested.sub(&direct).unwrap().norm(&rl).unwrap() < 2e-2 * norm);
    let disjoint = t.project(&g, &rl, 4.5, 6.0, &large).unwrap();
    assert!(disjoint.norm(&rl).unwrap() < 2e-2 * norm);
    let again = t.project(&g, &rl, 0.5, 3.0, &large).unwrap();
    assert!(again.sub(&g).unwrap().norm(&rl).unwrap() < 2e-2 * norm);
}
