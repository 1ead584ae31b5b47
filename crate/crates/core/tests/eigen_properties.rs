mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starwave_core::eigen::{bound_m, branch_sqrt, EigenParams, Sign};
use starwave_core::network::BranchPoint;
use starwave_core::C64;

fn sign(plus: bool) -> Sign {
    if plus {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

#[test]
fn square_root_on_a_hundred_thousand_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100_000 {
        let z = C64::new(rng.gen_range(-1e3..1e3), rng.gen_range(-1e3..1e3));
        let r = branch_sqrt(z);
        assert!((r * r - z).norm() <= 1e-13 * z.norm());
        // The cut lies on the negative real axis, which random draws miss.
        assert_eq!(branch_sqrt(z.conj()), r.conj());
        assert!(r.re >= 0.0 && (r.re > 0.0 || r.im <= 0.0));
    }
}

#[test]
fn cut_is_attached_to_the_lower_half_plane() {
    assert_eq!(branch_sqrt(C64::new(-4.0, 0.0)), C64::new(0.0, -2.0));
    assert!((branch_sqrt(C64::new(-4.0, 1e-300)) - C64::new(0.0, 2.0)).norm() < 1e-12);
}

proptest! {
    #[test]
    fn eigenfunctions_solve_the_equation(
        net in arb_network(),
        band in 0usize..5,
        t in 0.0f64..1.0,
        plus: bool,
        j in 0usize..5,
        xs in prop::collection::vec(0.0f64..12.0, 4),
    ) {
        let bands = open_bands(&net);
        let p = bands[band % bands.len()];
        let lambda = lambda_in_band(&net, p, t);
        let j = j % net.len();
        let params = EigenParams::new(&net, C64::new(lambda, 0.0), sign(plus));
        let (c, a) = (net.speeds(), net.potentials());
        let node = params.eval(j, BranchPoint::node()).unwrap();
        let mut flux = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for k in 0..net.len() {
            let at_node = params.eval(j, BranchPoint::new(&net, k, 0.0).unwrap()).unwrap();
            prop_assert_eq!(at_node, node);
            let d = params.eval_deriv(j, BranchPoint::new(&net, k, 0.0).unwrap()).unwrap() * c[k];
            flux += d;
            scale += d.norm();
            for &x in &xs {
                let pt = BranchPoint::new(&net, k, x).unwrap();
                let f = params.eval(j, pt).unwrap();
                let f2 = params.eval_second(j, pt).unwrap();
                let residual = (-f2 * c[k] + f * a[k] - f * lambda).norm();
                let size = (f2 * c[k]).norm() + (f * a[k]).norm() + (f * lambda).norm();
                prop_assert!(residual <= 1e-13 * size, "residual {} size {}", residual, size);
                // Independent check of the second derivative by differences.
                let h = 1e-3;
                let at = |y: f64| params.eval(j, BranchPoint::new(&net, k, y).unwrap()).unwrap();
                let fd = (at(x) - at(x + h) * 2.0 + at(x + 2.0 * h)) / (h * h);
                let exact = params.eval_second(j, BranchPoint::new(&net, k, x + h).unwrap()).unwrap();
                // Rounding follows the size of the terms, not of their sum.
                let terms = if k == j { 1.0 + params.s(j).unwrap().norm() } else { 0.0 };
                let size = at(x).norm().max(at(x + h).norm()).max(at(x + 2.0 * h).norm()).max(terms);
                let xi4 = params.xi(k).norm_sqr().powi(2);
                prop_assert!((fd - exact).norm() <= (h * h * xi4 / 6.0 + 1e-8) * size);
            }
        }
        prop_assert!(flux.norm() <= 1e-13 * scale.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn wronskian_lower_bound(net in arb_network(), t in 0.0f64..1.0, eps in 0.0f64..1.0) {
        let a = net.potentials();
        let lambda = a[0] + (a[a.len() - 1] - a[0] + 10.0) * t;
        let w = EigenParams::new(&net, C64::new(lambda, -eps), Sign::Minus).w();
        let bound: f64 = net.speeds().iter().zip(a).map(|(c, a)| c * (lambda - a).abs()).sum();
        prop_assert!(w.norm_sqr() >= bound - 1e-12);
    }

    #[test]
    fn wronskian_is_real_negative_below_the_spectrum(net in arb_network(), depth in 0.01f64..20.0) {
        let lambda = net.lowest_edge() - depth;
        let params = EigenParams::new(&net, C64::new(lambda, 0.0), Sign::Minus);
        prop_assert_eq!(params.w().im, 0.0);
        prop_assert!(params.w().re < 0.0);
        let sum: C64 = params.xis().iter().zip(net.speeds()).map(|(x, c)| x * c).sum();
        prop_assert!(sum.norm() > 0.0);
    }

    #[test]
    fn mixing_coefficients_are_bounded(net in arb_network(), t in 0.0f64..1.0, delta in 0.05f64..2.0, frac in 1e-6f64..1.0) {
        let a = net.potentials();
        let lambda = a[0] + (a[a.len() - 1] - a[0] + 10.0) * t;
        prop_assume!(!net.is_band_edge(lambda));
        let m = bound_m(&net, lambda, delta);
        let params = EigenParams::new(&net, C64::new(lambda, -frac * delta), Sign::Minus);
        for k in 0..net.len() {
            prop_assert!(params.s(k).unwrap().norm() <= m * (1.0 + 1e-12));
        }
    }
}

#[test]
fn equality_case_of_the_wronskian_bound() {
    let params = EigenParams::new(&net_b(), C64::new(1.0, 0.0), Sign::Minus);
    assert!((params.w().norm_sqr() - 3.0).abs() < 1e-12);
}
