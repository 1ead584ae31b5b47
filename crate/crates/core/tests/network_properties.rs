mod common;

use common::*;
use proptest::prelude::*;
use starwave_core::network::{integrate_network, NetworkFunction, NetworkGrid, QuadratureKind, QuadratureRule};
use starwave_core::C64;

fn arb_function(n: usize) -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    // Per branch: amplitude (re, im), centre, width of a bump.
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0, 1.0f64..6.0, 0.3f64..2.0), n)
}

fn build(grid: &NetworkGrid, spec: &[(f64, f64, f64, f64)]) -> NetworkFunction {
    NetworkFunction::from_fn(grid, |k, x| {
        let (re, im, c, w) = spec[k];
        C64::new(re, im) * bump(x, c, w)
    })
}

proptest! {
    #[test]
    fn self_inner_product_is_real_and_nonnegative(spec in arb_function(3), simpson: bool) {
        let grid = NetworkGrid::uniform(3, 0.05, 8.0).unwrap();
        let kind = if simpson { QuadratureKind::Simpson } else { QuadratureKind::Trapezoid };
        let rule = QuadratureRule::new(&grid, kind);
        let f = build(&grid, &spec);
        let v = integrate_network(&f, &f, &rule).unwrap();
        prop_assert!(v.re >= 0.0);
        prop_assert!(v.im.abs() <= 1e-13 * v.re.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(f in arb_function(3), g in arb_function(3)) {
        // An odd interval count exercises the Simpson 3/8 tail.
        let grid = NetworkGrid::uniform(3, 0.05, 7.95).unwrap();
        let rule = QuadratureRule::simpson(&grid);
        let (f, g) = (build(&grid, &f), build(&grid, &g));
        let fg = integrate_network(&f, &g, &rule).unwrap();
        let gf = integrate_network(&g, &f, &rule).unwrap();
        prop_assert!((fg - gf.conj()).norm() <= 1e-14 * fg.norm().max(1e-300));
    }

    #[test]
    fn refinement_changes_integrals_by_order_dx_squared(spec in arb_function(2), simpson: bool) {
        let kind = if simpson { QuadratureKind::Simpson } else { QuadratureKind::Trapezoid };
        let value = |dx: f64| {
            let grid = NetworkGrid::uniform(2, dx, 8.0).unwrap();
            let rule = QuadratureRule::new(&grid, kind);
            let f = build(&grid, &spec);
            integrate_network(&f, &f, &rule).unwrap().re
        };
        // Euler–Maclaurin: |error| ≤ L dx² max|g''| / 12 per branch, g = |f|².
        let h = 1e-3;
        let curvature: f64 = spec
            .iter()
            .map(|&(re, im, c, w)| {
                let g = |x: f64| (re * re + im * im) * bump(x, c, w).powi(2);
                (1..8000).map(|i| i as f64 * h).map(|x| ((g(x - h) - 2.0 * g(x) + g(x + h)) / (h * h)).abs()).fold(0.0, f64::max)
            })
            .sum();
        let dx = 0.04;
        let change = (value(dx) - value(dx / 2.0)).abs();
        prop_assert!(change <= 2.0 * 8.0 * dx * dx * curvature / 12.0 + 1e-13);
    }
}
