#![allow(dead_code)]

use proptest::prelude::*;
use starwave_core::network::StarNetwork;

pub fn net(c: &[f64], a: &[f64]) -> StarNetwork {
    StarNetwork::from_slices(c, a).unwrap()
}

pub fn net_a() -> StarNetwork {
    net(&[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0])
}

pub fn net_b() -> StarNetwork {
    net(&[1.0, 1.0], &[0.0, 3.0])
}

pub fn net_c() -> StarNetwork {
    net(&[1.0, 2.0, 1.0], &[0.0, 1.0, 4.0])
}

pub fn reference_networks() -> Vec<StarNetwork> {
    vec![net_a(), net_b(), net_c()]
}

/// Compactly supported C∞ bump of half-width `w` centred at `c`.
pub fn bump(x: f64, c: f64, w: f64) -> f64 {
    let r = (x - c) / w;
    if r.abs() < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

pub fn gaussian(x: f64, c: f64, s: f64) -> f64 {
    (-((x - c) / s).powi(2)).exp()
}

/// Random networks with 2 to 5 branches and well separated potentials.
pub fn arb_network() -> impl Strategy<Value = StarNetwork> {
    (2usize..=5)
        .prop_flat_map(|n| (prop::collection::vec(0.3f64..4.0, n), prop::collection::vec(0.0f64..1.0, n)))
        .prop_map(|(c, gaps)| {
            // Cumulative gaps of at least 0.2 keep band edges apart.
            let mut a = Vec::with_capacity(gaps.len());
            let mut level = 0.0;
            for (i, g) in gaps.iter().enumerate() {
                if i > 0 {
                    level += 0.2 + 1.8 * g;
                }
                a.push(level);
            }
            net(&c, &a)
        })
}

/// A real `λ` in band `p` (1-based, `p` propagating branches), kept away
/// from the band edges by `margin` of the band width.
pub fn lambda_in_band(net: &StarNetwork, p: usize, t: f64) -> f64 {
    let a = net.potentials();
    let lo = a[p - 1];
    let hi = if p < a.len() { a[p] } else { lo + 10.0 };
    lo + (hi - lo) * (0.02 + 0.96 * t)
}

/// Bands with positive width.
pub fn open_bands(net: &StarNetwork) -> Vec<usize> {
    let a = net.potentials();
    (1..=a.len()).filter(|&p| p == a.len() || a[p] > a[p - 1]).collect()
}
