//! Reference networks and test data shared by the validation suites.

use starwave_core::network::StarNetwork;

pub fn network(c: &[f64], a: &[f64]) -> StarNetwork {
    StarNetwork::from_slices(c, a).expect("valid reference network")
}

/// Three equal branches.
pub fn net_a() -> StarNetwork {
    network(&[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0])
}

/// Two branches, one raised by 3.
pub fn net_b() -> StarNetwork {
    network(&[1.0, 1.0], &[0.0, 3.0])
}

/// Three branches with distinct speeds and potentials.
pub fn net_c() -> StarNetwork {
    network(&[1.0, 2.0, 1.0], &[0.0, 1.0, 4.0])
}

pub fn reference_networks() -> [(&'static str, StarNetwork); 3] {
    [("A", net_a()), ("B", net_b()), ("C", net_c())]
}

/// Compactly supported smooth bump of half-width `w` centred at `c`.
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

/// Bands of positive width, numbered by their count of propagating
/// branches.
pub fn open_bands(net: &StarNetwork) -> Vec<usize> {
    let a = net.potentials();
    (1..=a.len()).filter(|&p| p == a.len() || a[p] > a[p - 1]).collect()
}

/// A real `λ` in band `p` at relative position `t ∈ [0, 1]`, keeping 2% of
/// the band width from each edge. The top band is taken 10 wide.
pub fn lambda_in_band(net: &StarNetwork, p: usize, t: f64) -> f64 {
    let a = net.potentials();
    let lo = a[p - 1];
    let hi = if p < a.len() { a[p] } else { lo + 10.0 };
    lo + (hi - lo) * (0.02 + 0.96 * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands_skip_degenerate_gaps() {
        assert_eq!(open_bands(&net_a()), vec![3]);
        assert_eq!(open_bands(&net_b()), vec![1, 2]);
        assert_eq!(open_bands(&net_c()), vec![1, 2, 3]);
        let l = lambda_in_band(&net_c(), 2, 0.5);
        assert_eq!(net_c().band_index(l).unwrap(), 2);
    }

    #[test]
    fn bump_vanishes_outside_its_support() {
        assert_eq!(bump(3.0, 5.0, 2.0), 0.0);
        assert!((bump(5.0, 5.0, 2.0) - (-1f64).exp()).abs() < 1e-15);
    }
}
