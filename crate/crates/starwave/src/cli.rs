//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 when a validation or comparison fails, 2 on
//! usage, configuration or input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use starwave_core::eigen::{EigenParams, Sign};
use starwave_core::network::{BranchPoint, NetworkFunction, NetworkGrid, QuadratureRule, StarNetwork};
use starwave_core::resolvent::apply_resolvent;
use starwave_core::spectral::{choose_cutoff, GridOptions, SpectralGrid, SpectralTransform};
use starwave_core::{C64, KAPPA_DEFAULT};

use crate::compare::{oracle_compare, CompareOptions, InitialData};
use crate::config::{default_pulse, NetworkConfig};
use crate::formats::{self, metadata_path, RunMetadata};
use crate::validate;

/// Environment variable overriding `--threads`.
pub const THREADS_ENV: &str = "STARWAVE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "starwave", version, about = "Spectral and time-domain solvers for wave equations on star-shaped networks")]
pub struct Cli {
    /// Network configuration (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory for outputs with default or relative names.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Output file, relative to --out-dir unless absolute.
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Worker threads; STARWAVE_THREADS takes precedence.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a generalized eigenfunction on the grid.
    Eigen(EigenArgs),
    /// Apply the resolvent to a network function.
    Resolvent(ResolventArgs),
    /// Forward spectral transform.
    Transform(TransformArgs),
    /// Inverse spectral transform of a spectral CSV.
    Inverse(InverseArgs),
    /// Evolve initial data of the wave equation in time.
    Evolve(EvolveArgs),
    /// Spectral projection onto a band.
    Project(ProjectArgs),
    /// Run the validation suites and print a JSON report.
    Validate(ValidateArgs),
    /// Compare spectral evolution with the leapfrog solver.
    OracleCompare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    Auto,
    Value(f64),
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

fn parse_cutoff(s: &str) -> Result<Cutoff, String> {
    if s == "auto" {
        Ok(Cutoff::Auto)
    } else {
        parse_f64(s).map(Cutoff::Value)
    }
}

fn parse_kappa(s: &str) -> Result<f64, String> {
    match s {
        "1/pi" => Ok(KAPPA_DEFAULT),
        _ => parse_f64(s).and_then(|v| if v > 0.0 { Ok(v) } else { Err("kappa must be positive".into()) }),
    }
}

/// `re,im` or `re`.
fn parse_complex(s: &str) -> Result<C64, String> {
    match s.split_once(',') {
        Some((re, im)) => Ok(C64::new(parse_f64(re)?, parse_f64(im)?)),
        None => Ok(C64::new(parse_f64(s)?, 0.0)),
    }
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected a,b")?;
    let (a, b) = (parse_f64(a)?, parse_f64(b)?);
    if a < b {
        Ok((a, b))
    } else {
        Err(format!("empty band ({a}, {b})"))
    }
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "+" | "plus" => Ok(Sign::Plus),
        "-" | "minus" => Ok(Sign::Minus),
        _ => Err(format!("expected + or -, got {s:?}")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpectralArgs {
    /// Spectral cutoff: `auto` or a value above the highest potential.
    #[arg(long, default_value = "auto", value_parser = parse_cutoff)]
    pub cutoff: Cutoff,
    /// Normalization of the spectral weight: `1/pi`, `1` or a value.
    #[arg(long, default_value = "1/pi", value_parser = parse_kappa)]
    pub kappa: f64,
    /// Relative spectral tail mass allowed by the automatic cutoff.
    #[arg(long, default_value_t = 1e-3)]
    pub tail_tol: f64,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    /// Spectral parameter `re,im`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: C64,
    /// Branch carrying the incoming wave, numbered from 1 in file order.
    #[arg(long, default_value_t = 1)]
    pub j: usize,
    /// Sign of the eigenfunction family, `+` or `-`.
    #[arg(long, default_value = "-", value_parser = parse_sign, allow_hyphen_values = true)]
    pub sign: Sign,
}

#[derive(Debug, Args)]
pub struct ResolventArgs {
    /// Spectral parameter `re,im`; real values take the limit from below.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: C64,
    /// Input function (branch,x,re,im); defaults to a Gaussian pulse.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Input function (branch,x,re,im); defaults to a Gaussian pulse.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub spectral: SpectralArgs,
}

#[derive(Debug, Args)]
pub struct InverseArgs {
    /// Spectral function (k,lambda,re,im). With `--cutoff auto` its cutoff
    /// is read from the metadata file next to it.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub spectral: SpectralArgs,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Initial displacement; defaults to a Gaussian pulse.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Initial velocity; zero by default.
    #[arg(long)]
    pub velocity: Option<PathBuf>,
    /// Final time.
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[command(flatten)]
    pub spectral: SpectralArgs,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Input function (branch,x,re,im); defaults to a Gaussian pulse.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Spectral interval `a,b`.
    #[arg(long, value_parser = parse_band, allow_hyphen_values = true)]
    pub band: (f64, f64),
    #[command(flatten)]
    pub spectral: SpectralArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// `all`, a suite name or a comma-separated list; repeatable.
    #[arg(long, default_value = "all")]
    pub suite: Vec<String>,
    /// Seed of the trial generator.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Trials of each randomized suite instead of its default.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Comparison time.
    #[arg(long, default_value_t = 2.0)]
    pub t: f64,
    /// Band-limit the initial pulse to `a,b`.
    #[arg(long, value_parser = parse_band, allow_hyphen_values = true)]
    pub band: Option<(f64, f64)>,
    /// Initial displacement; defaults to a Gaussian pulse.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub spectral: SpectralArgs,
}

/// Parses `args` and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e:#}");
        return 2;
    }
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().with_context(|| format!("{THREADS_ENV}={v:?} is not a thread count"))?),
        Err(_) => flag,
    };
    if let Some(n) = threads {
        if n == 0 {
            bail!("thread count must be positive");
        }
        // A pool may already exist when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Loaded configuration with its derived objects.
struct Setup {
    path: PathBuf,
    config: NetworkConfig,
    net: StarNetwork,
    grid: NetworkGrid,
    rule: QuadratureRule,
}

impl Setup {
    fn load(path: Option<&Path>) -> Result<Self> {
        let path = path.ok_or_else(|| anyhow!("--config is required for this command"))?;
        let config = NetworkConfig::load(path)?;
        let net = config.network()?;
        let grid = config.grid()?;
        let rule = QuadratureRule::simpson(&grid);
        Ok(Self { path: path.into(), config, net, grid, rule })
    }

    fn spectral_options(&self) -> GridOptions {
        GridOptions::new(self.config.grid.length)
    }

    fn input(&self, path: Option<&Path>) -> Result<NetworkFunction> {
        match path {
            Some(p) => Ok(formats::load_network_csv(p, &self.net, &self.grid)?),
            None => Ok(default_pulse(&self.net, &self.grid)),
        }
    }

    fn metadata(&self, command: &str) -> RunMetadata {
        let mut m = RunMetadata::new(command);
        m.config = Some(self.config.clone());
        m.config_path = Some(self.path.display().to_string());
        m
    }

    fn cutoff(&self, args: &SpectralArgs, data: &[&NetworkFunction]) -> Result<f64> {
        Ok(match args.cutoff {
            Cutoff::Value(v) => v,
            Cutoff::Auto => {
                let mut cut = f64::NEG_INFINITY;
                for f in data {
                    cut = cut.max(choose_cutoff(&self.net, f, &self.rule, args.tail_tol, &self.spectral_options(), args.kappa)?);
                }
                cut
            }
        })
    }
}

fn output_path(cli: &Cli, default: &str) -> PathBuf {
    let name = cli.output.clone().unwrap_or_else(|| default.into());
    if name.is_absolute() {
        name
    } else {
        cli.out_dir.join(name)
    }
}

fn record_spectral(meta: &mut RunMetadata, args: &SpectralArgs, cutoff: f64, opts: &GridOptions) {
    meta.set("cutoff", cutoff)
        .set("cutoff_mode", if args.cutoff == Cutoff::Auto { "auto" } else { "fixed" })
        .set("kappa", args.kappa)
        .set("tail_tol", args.tail_tol)
        .set("quadrature_order", opts.order)
        .set("quadrature_extent", opts.extent)
        .set("nodes_per_oscillation", opts.nodes_per_oscillation)
        .set("min_subpanels", opts.min_subpanels);
}

fn finish(mut meta: RunMetadata, out: &Path) -> Result<()> {
    meta.outputs.push(out.display().to_string());
    formats::save_json(&metadata_path(out), &meta)?;
    Ok(())
}

/// Writes `value` as JSON to stdout, and to the output file when given.
fn emit_json(cli: &Cli, value: &impl Serialize, meta: RunMetadata) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{text}")?;
    if cli.output.is_some() {
        let out = output_path(cli, "report.json");
        formats::save_json(&out, value)?;
        finish(meta, &out)?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<bool> {
    let config = cli.config.as_deref();
    match &cli.command {
        Command::Eigen(a) => {
            let s = Setup::load(config)?;
            let j = label_to_index(&s.net, a.j)?;
            let params = EigenParams::new(&s.net, a.lambda, a.sign);
            let mut values = Vec::with_capacity(s.net.len());
            for k in 0..s.net.len() {
                let b = s.grid.branch(k);
                let v = (0..b.count())
                    .map(|i| params.eval(j, BranchPoint::new(&s.net, k, b.x(i))?))
                    .collect::<starwave_core::Result<Vec<_>>>()?;
                values.push(v);
            }
            let f = NetworkFunction::from_branches(&s.grid, values)?;
            let out = output_path(cli, "eigen.csv");
            formats::save_network_csv(&out, &s.net, &f)?;
            let mut meta = s.metadata("eigen");
            meta.set("lambda", [a.lambda.re, a.lambda.im])
                .set("j", a.j)
                .set("sign", if a.sign == Sign::Plus { "+" } else { "-" })
                .set("wronskian", [params.w().re, params.w().im]);
            finish(meta, &out)?;
        }
        Command::Resolvent(a) => {
            let s = Setup::load(config)?;
            let f = s.input(a.input.as_deref())?;
            let r = apply_resolvent(&s.net, &f, a.lambda, &s.rule)?;
            let out = output_path(cli, "resolvent.csv");
            formats::save_network_csv(&out, &s.net, &r)?;
            let mut meta = s.metadata("resolvent");
            meta.set("lambda", [a.lambda.re, a.lambda.im]).set("input", input_name(&a.input));
            finish(meta, &out)?;
        }
        Command::Transform(a) => {
            let s = Setup::load(config)?;
            let f = s.input(a.input.as_deref())?;
            let cut = s.cutoff(&a.spectral, &[&f])?;
            let opts = s.spectral_options();
            let t = SpectralTransform::new(&s.net, SpectralGrid::new(&s.net, cut, &opts)?, a.spectral.kappa)?;
            let g = t.forward(&f, &s.rule)?;
            let out = output_path(cli, "transform.csv");
            formats::save_spectral_csv(&out, &s.net, t.grid(), &g)?;
            let mut meta = s.metadata("transform");
            record_spectral(&mut meta, &a.spectral, cut, &opts);
            meta.set("input", input_name(&a.input));
            finish(meta, &out)?;
        }
        Command::Inverse(a) => {
            let s = Setup::load(config)?;
            let cut = match a.spectral.cutoff {
                Cutoff::Value(v) => v,
                Cutoff::Auto => {
                    let meta_path = metadata_path(&a.input);
                    let meta = formats::load_metadata(&meta_path)
                        .with_context(|| "--cutoff auto reads the cutoff from the input's metadata")?;
                    meta.parameters
                        .get("cutoff")
                        .and_then(|v| v.as_f64())
                        .ok_or_else(|| anyhow!("{} has no cutoff", meta_path.display()))?
                }
            };
            let opts = s.spectral_options();
            let t = SpectralTransform::new(&s.net, SpectralGrid::new(&s.net, cut, &opts)?, a.spectral.kappa)?;
            let g = formats::load_spectral_csv(&a.input, &s.net, t.grid())?;
            let f = t.inverse(&g, &s.grid)?;
            let out = output_path(cli, "inverse.csv");
            formats::save_network_csv(&out, &s.net, &f)?;
            let mut meta = s.metadata("inverse");
            record_spectral(&mut meta, &a.spectral, cut, &opts);
            meta.set("input", a.input.display().to_string());
            finish(meta, &out)?;
        }
        Command::Evolve(a) => {
            let s = Setup::load(config)?;
            let u0 = s.input(a.input.as_deref())?;
            let v0 = a.velocity.as_deref().map(|p| formats::load_network_csv(p, &s.net, &s.grid)).transpose()?;
            let mut data = vec![&u0];
            data.extend(v0.as_ref());
            let cut = s.cutoff(&a.spectral, &data)?;
            let opts = s.spectral_options();
            let t = SpectralTransform::new(&s.net, SpectralGrid::new(&s.net, cut, &opts)?, a.spectral.kappa)?;
            let u = t.evolve(&u0, v0.as_ref(), &s.rule, a.t, &s.grid)?;
            let out = output_path(cli, "evolve.csv");
            formats::save_network_csv(&out, &s.net, &u)?;
            let mut meta = s.metadata("evolve");
            record_spectral(&mut meta, &a.spectral, cut, &opts);
            meta.set("t", a.t).set("input", input_name(&a.input)).set("velocity", a.velocity.as_ref().map(|p| p.display().to_string()));
            finish(meta, &out)?;
        }
        Command::Project(a) => {
            let s = Setup::load(config)?;
            let f = s.input(a.input.as_deref())?;
            let cut = s.cutoff(&a.spectral, &[&f])?;
            let opts = s.spectral_options();
            let (lo, hi) = a.band;
            let t = SpectralTransform::new(&s.net, SpectralGrid::with_breakpoints(&s.net, cut, &[lo, hi], &opts)?, a.spectral.kappa)?;
            let u = t.project(&f, &s.rule, lo, hi, &s.grid)?;
            let out = output_path(cli, "project.csv");
            formats::save_network_csv(&out, &s.net, &u)?;
            let mut meta = s.metadata("project");
            record_spectral(&mut meta, &a.spectral, cut, &opts);
            meta.set("band", [lo, hi]).set("input", input_name(&a.input));
            finish(meta, &out)?;
        }
        Command::Validate(a) => {
            let suites = validate::resolve_suites(&a.suite)?;
            let report = validate::run(&suites, a.seed, a.trials)?;
            let mut meta = RunMetadata::new("validate");
            meta.set("suites", &suites).set("seed", a.seed).set("trials", a.trials);
            emit_json(cli, &report, meta)?;
            return Ok(report.passed);
        }
        Command::OracleCompare(a) => {
            let s = Setup::load(config)?;
            let f = s.input(a.input.as_deref())?;
            let data = match a.band {
                Some((lower, upper)) => InitialData::Band { source: f, lower, upper },
                None => InitialData::Samples(f),
            };
            let mut opts = CompareOptions::new(a.t);
            opts.kappa = a.spectral.kappa;
            opts.tail_tol = a.spectral.tail_tol;
            opts.cutoff = match a.spectral.cutoff {
                Cutoff::Auto => None,
                Cutoff::Value(v) => Some(v),
            };
            let report = oracle_compare(&s.net, &data, &opts)?;
            let mut meta = s.metadata("oracle-compare");
            meta.set("t", a.t)
                .set("band", a.band.map(|(l, u)| [l, u]))
                .set("kappa", a.spectral.kappa)
                .set("tail_tol", a.spectral.tail_tol)
                .set("courant", opts.courant)
                .set("sponge_strength", opts.sponge_strength)
                .set("input", input_name(&a.input));
            emit_json(cli, &report, meta)?;
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn label_to_index(net: &StarNetwork, label: usize) -> Result<usize> {
    label
        .checked_sub(1)
        .and_then(|l| net.internal_index(l))
        .ok_or_else(|| anyhow!("branch {label} out of range 1..={}", net.len()))
}

fn input_name(input: &Option<PathBuf>) -> String {
    input.as_ref().map_or_else(|| "default pulse".into(), |p| p.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_parsers() {
        assert_eq!(parse_complex("2,-0.5").unwrap(), C64::new(2.0, -0.5));
        assert_eq!(parse_complex("3").unwrap(), C64::new(3.0, 0.0));
        assert!(parse_complex("x,1").is_err());
        assert_eq!(parse_cutoff("auto").unwrap(), Cutoff::Auto);
        assert_eq!(parse_cutoff("40").unwrap(), Cutoff::Value(40.0));
        assert_eq!(parse_kappa("1/pi").unwrap(), KAPPA_DEFAULT);
        assert_eq!(parse_kappa("1").unwrap(), 1.0);
        assert!(parse_kappa("0").is_err());
        assert_eq!(parse_band("0,4").unwrap(), (0.0, 4.0));
        assert!(parse_band("4,0").is_err());
        assert_eq!(parse_sign("-").unwrap(), Sign::Minus);
    }

    #[test]
    fn hyphenated_values_parse() {
        let cli = Cli::try_parse_from(["starwave", "eigen", "--lambda", "-1,0", "--sign", "-"]).unwrap();
        match cli.command {
            Command::Eigen(a) => {
                assert_eq!(a.lambda, C64::new(-1.0, 0.0));
                assert_eq!(a.sign, Sign::Minus);
            }
            _ => panic!("wrong command"),
        }
    }

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(run(["starwave", "evolve", "--bogus"]), 2);
        assert_eq!(run(["starwave", "validate", "--suite", "nope"]), 2);
        assert_eq!(run(["starwave", "--help"]), 0);
    }
}
