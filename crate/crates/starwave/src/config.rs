//! Network configuration files.
//!
//! ```json
//! {"branches":[{"c":1.0,"a":0.0},{"c":1.0,"a":3.0}],"grid":{"dx":0.01,"length":20.0}}
//! ```
//!
//! Branch order in the file is the user's labelling; CSV files and CLI flags
//! number branches from 1 in that order.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use starwave_core::network::{BranchSpec, NetworkFunction, NetworkGrid, StarNetwork};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration {path}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid network: {0}")]
    Network(#[from] starwave_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    pub c: f64,
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dx: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub branches: Vec<BranchConfig>,
    pub grid: GridConfig,
}

impl NetworkConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let cfg: Self = serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })?;
        cfg.network()?;
        cfg.grid()?;
        Ok(cfg)
    }

    pub fn network(&self) -> Result<StarNetwork, ConfigError> {
        let specs: Vec<BranchSpec> = self.branches.iter().map(|b| BranchSpec { c: b.c, a: b.a }).collect();
        Ok(StarNetwork::new(&specs)?)
    }

    /// The same uniform grid on every branch.
    pub fn grid(&self) -> Result<NetworkGrid, ConfigError> {
        Ok(NetworkGrid::uniform(self.branches.len(), self.grid.dx, self.grid.length)?)
    }
}

/// Default initial data: a Gaussian `exp(-((x - L/4)/(L/40))²)` on the
/// first branch of the file.
pub fn default_pulse(net: &StarNetwork, grid: &NetworkGrid) -> NetworkFunction {
    let first = net.internal_index(0).expect("network has branches");
    let length = grid.branch(first).length();
    let (centre, width) = (0.25 * length, 0.025 * length);
    NetworkFunction::from_real_fn(grid, |k, x| if k == first { (-((x - centre) / width).powi(2)).exp() } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_sorts() {
        let cfg: NetworkConfig = serde_json::from_str(
            r#"{"branches":[{"c":1.0,"a":3.0},{"c":2.0,"a":0.0}],"grid":{"dx":0.5,"length":2.0}}"#,
        )
        .unwrap();
        let net = cfg.network().unwrap();
        assert_eq!(net.potentials(), &[0.0, 3.0]);
        assert_eq!(net.internal_index(0), Some(1));
        assert_eq!(cfg.grid().unwrap().branch(0).count(), 5);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(serde_json::from_str::<NetworkConfig>(r#"{"branches":[],"grid":{"dx":1,"length":2},"x":1}"#).is_err());
        let cfg: NetworkConfig =
            serde_json::from_str(r#"{"branches":[{"c":-1.0,"a":0.0},{"c":1.0,"a":0.0}],"grid":{"dx":0.1,"length":1}}"#)
                .unwrap();
        assert!(cfg.network().is_err());
    }

    #[test]
    fn default_pulse_sits_on_the_first_listed_branch() {
        let cfg: NetworkConfig = serde_json::from_str(
            r#"{"branches":[{"c":1.0,"a":3.0},{"c":1.0,"a":0.0}],"grid":{"dx":0.1,"length":20.0}}"#,
        )
        .unwrap();
        let (net, grid) = (cfg.network().unwrap(), cfg.grid().unwrap());
        let p = default_pulse(&net, &grid);
        assert_eq!(p.branch(1)[50].re, 1.0);
        assert!(p.branch(0).iter().all(|z| z.re == 0.0));
    }
}
