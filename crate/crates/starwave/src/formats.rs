//! CSV files for sampled functions and the metadata written next to every
//! output.
//!
//! Network functions use the columns `branch,x,re,im` and spectral functions
//! `k,lambda,re,im`. Branch and component numbers are the 1-based positions
//! in the configuration file. Floats are written with 17 significant digits,
//! which reproduces every value bit for bit on reading.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use starwave_core::network::{NetworkFunction, NetworkGrid, StarNetwork};
use starwave_core::spectral::{SpectralFunction, SpectralGrid};
use starwave_core::C64;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {message}")]
    Content { path: PathBuf, message: String },
    #[error("{path}")]
    Json { path: PathBuf, source: serde_json::Error },
}

fn content(path: &Path, message: impl Into<String>) -> FormatError {
    FormatError::Content { path: path.into(), message: message.into() }
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Deserialize)]
struct NetworkRow {
    branch: usize,
    x: f64,
    re: f64,
    im: f64,
}

#[derive(Debug, Deserialize)]
struct SpectralRow {
    k: usize,
    lambda: f64,
    re: f64,
    im: f64,
}

/// Writes `f` as `branch,x,re,im` in file order of the branches.
pub fn write_network_csv(w: impl Write, net: &StarNetwork, f: &NetworkFunction) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["branch", "x", "re", "im"])?;
    for label in 0..net.len() {
        let k = net.internal_index(label).expect("label in range");
        for (i, v) in f.branch(k).iter().enumerate() {
            out.write_record([(label + 1).to_string(), fmt_f64(f.x(k, i)), fmt_f64(v.re), fmt_f64(v.im)])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a `branch,x,re,im` file that covers every sample of `grid` once.
pub fn read_network_csv(
    r: impl Read,
    path: &Path,
    net: &StarNetwork,
    grid: &NetworkGrid,
) -> Result<NetworkFunction, FormatError> {
    let mut values: Vec<Vec<Option<C64>>> = grid.branches().iter().map(|b| vec![None; b.count()]).collect();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    for row in reader.deserialize() {
        let row: NetworkRow = row.map_err(|source| FormatError::Csv { path: path.into(), source })?;
        let k = row
            .branch
            .checked_sub(1)
            .and_then(|l| net.internal_index(l))
            .ok_or_else(|| content(path, format!("branch {} out of range", row.branch)))?;
        let b = grid.branch(k);
        let i = (row.x / b.dx()).round();
        if !(i >= 0.0 && (i as usize) < b.count()) || (b.x(i as usize) - row.x).abs() > 1e-9 * row.x.abs().max(1.0) {
            return Err(content(path, format!("x = {} is not a grid point of branch {}", row.x, row.branch)));
        }
        let slot = &mut values[k][i as usize];
        if slot.is_some() {
            return Err(content(path, format!("duplicate sample at branch {}, x = {}", row.branch, row.x)));
        }
        *slot = Some(C64::new(row.re, row.im));
    }
    let values = values
        .into_iter()
        .map(|v| v.into_iter().collect::<Option<Vec<C64>>>())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| content(path, "missing samples"))?;
    NetworkFunction::from_branches(grid, values).map_err(|e| content(path, e.to_string()))
}

/// Writes `g` as `k,lambda,re,im`, each component at its nodes above `a_k`.
pub fn write_spectral_csv(
    w: impl Write,
    net: &StarNetwork,
    grid: &SpectralGrid,
    g: &SpectralFunction,
) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["k", "lambda", "re", "im"])?;
    for label in 0..net.len() {
        let k = net.internal_index(label).expect("label in range");
        let start = g.start(k);
        for (i, v) in g.component(k).iter().enumerate() {
            out.write_record([(label + 1).to_string(), fmt_f64(grid.nodes()[start + i]), fmt_f64(v.re), fmt_f64(v.im)])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a `k,lambda,re,im` file sampled on exactly the nodes of `grid`.
pub fn read_spectral_csv(
    r: impl Read,
    path: &Path,
    net: &StarNetwork,
    grid: &SpectralGrid,
) -> Result<SpectralFunction, FormatError> {
    let mut samples: HashMap<(usize, u64), C64> = HashMap::new();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    for row in reader.deserialize() {
        let row: SpectralRow = row.map_err(|source| FormatError::Csv { path: path.into(), source })?;
        let k = row
            .k
            .checked_sub(1)
            .and_then(|l| net.internal_index(l))
            .ok_or_else(|| content(path, format!("component {} out of range", row.k)))?;
        if samples.insert((k, row.lambda.to_bits()), C64::new(row.re, row.im)).is_some() {
            return Err(content(path, format!("duplicate sample k = {}, lambda = {}", row.k, row.lambda)));
        }
    }
    let expected: usize =
        (0..net.len()).map(|k| grid.nodes().iter().filter(|&&l| l > net.potentials()[k]).count()).sum();
    let g = SpectralFunction::from_fn(net, grid, |k, l| samples.get(&(k, l.to_bits())).copied().unwrap_or(C64::new(f64::NAN, 0.0)));
    let found = (0..net.len()).map(|k| g.component(k).iter().filter(|v| !v.re.is_nan()).count()).sum::<usize>();
    if found != expected || samples.len() != expected {
        return Err(content(path, "samples do not match the spectral grid; check cutoff and configuration"));
    }
    Ok(g)
}

pub fn create(path: &Path) -> Result<File, FormatError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| FormatError::Io { path: dir.into(), source })?;
    }
    File::create(path).map_err(|source| FormatError::Io { path: path.into(), source })
}

pub fn open(path: &Path) -> Result<File, FormatError> {
    File::open(path).map_err(|source| FormatError::Io { path: path.into(), source })
}

pub fn save_network_csv(path: &Path, net: &StarNetwork, f: &NetworkFunction) -> Result<(), FormatError> {
    write_network_csv(create(path)?, net, f).map_err(|source| FormatError::Csv { path: path.into(), source })
}

pub fn load_network_csv(path: &Path, net: &StarNetwork, grid: &NetworkGrid) -> Result<NetworkFunction, FormatError> {
    read_network_csv(open(path)?, path, net, grid)
}

pub fn save_spectral_csv(path: &Path, net: &StarNetwork, grid: &SpectralGrid, g: &SpectralFunction) -> Result<(), FormatError> {
    write_spectral_csv(create(path)?, net, grid, g).map_err(|source| FormatError::Csv { path: path.into(), source })
}

pub fn load_spectral_csv(path: &Path, net: &StarNetwork, grid: &SpectralGrid) -> Result<SpectralFunction, FormatError> {
    read_spectral_csv(open(path)?, path, net, grid)
}

/// Run description stored as `<output>.meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Option<crate::config::NetworkConfig>,
    pub config_path: Option<String>,
    /// Resolved parameters, in key order.
    pub parameters: std::collections::BTreeMap<String, serde_json::Value>,
    pub outputs: Vec<String>,
}

impl RunMetadata {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: None,
            config_path: None,
            parameters: Default::default(),
            outputs: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(key.into(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }
}

pub fn metadata_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn save_json(path: &Path, value: &impl Serialize) -> Result<(), FormatError> {
    let mut file = create(path)?;
    serde_json::to_writer_pretty(&mut file, value).map_err(|source| FormatError::Json { path: path.into(), source })?;
    file.write_all(b"\n").map_err(|source| FormatError::Io { path: path.into(), source })
}

pub fn load_metadata(path: &Path) -> Result<RunMetadata, FormatError> {
    serde_json::from_reader(open(path)?).map_err(|source| FormatError::Json { path: path.into(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use starwave_core::spectral::GridOptions;

    fn setup() -> (StarNetwork, NetworkGrid) {
        // File order (3, 0) is the reverse of the internal order.
        let net = StarNetwork::from_slices(&[1.0, 2.0], &[3.0, 0.0]).unwrap();
        (net, NetworkGrid::uniform(2, 0.1, 1.0).unwrap())
    }

    #[test]
    fn network_round_trip_is_exact() {
        let (net, grid) = setup();
        let f = NetworkFunction::from_fn(&grid, |k, x| C64::new((x + 0.1).ln() + k as f64, 1.0 / 3.0 * x));
        let f = NetworkFunction::from_branches(&grid, {
            let mut b = f.branches().to_vec();
            b[1][0] = b[0][0];
            b
        })
        .unwrap();
        let mut buf = Vec::new();
        write_network_csv(&mut buf, &net, &f).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("branch,x,re,im\n1,0.0000000000000000e0,"));
        let back = read_network_csv(buf.as_slice(), Path::new("mem"), &net, &grid).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn network_read_rejects_gaps_and_strays() {
        let (net, grid) = setup();
        let missing = "branch,x,re,im\n1,0,1,0\n";
        assert!(read_network_csv(missing.as_bytes(), Path::new("m"), &net, &grid).is_err());
        let stray = "branch,x,re,im\n1,0.05,1,0\n";
        assert!(read_network_csv(stray.as_bytes(), Path::new("m"), &net, &grid).is_err());
        let bad_branch = "branch,x,re,im\n3,0,1,0\n";
        assert!(read_network_csv(bad_branch.as_bytes(), Path::new("m"), &net, &grid).is_err());
    }

    #[test]
    fn spectral_round_trip_is_exact() {
        let (net, _) = setup();
        let grid = SpectralGrid::new(&net, 8.0, &GridOptions::new(1.0)).unwrap();
        let g = SpectralFunction::from_fn(&net, &grid, |k, l| C64::new(l.sqrt(), k as f64 - l));
        let mut buf = Vec::new();
        write_spectral_csv(&mut buf, &net, &grid, &g).unwrap();
        let back = read_spectral_csv(buf.as_slice(), Path::new("mem"), &net, &grid).unwrap();
        assert_eq!(back, g);
        let other = SpectralGrid::new(&net, 9.0, &GridOptions::new(1.0)).unwrap();
        assert!(read_spectral_csv(buf.as_slice(), Path::new("mem"), &net, &other).is_err());
    }

    #[test]
    fn metadata_sits_next_to_the_output() {
        assert_eq!(metadata_path(Path::new("out/u.csv")), PathBuf::from("out/u.csv.meta.json"));
    }
}
