//! Seeded validation suites with a JSON report.
//!
//! Every trial draws from its own ChaCha8 stream, derived from the seed,
//! the suite and the trial number, and trials are merged in index order.
//! The report therefore does not depend on how many threads run it.

mod dynamics;
mod pointwise;
mod transform;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dynamics::{reflection_amplitudes, Reflection};

/// Suite names in run order.
pub const SUITES: [&str; 13] = [
    "eigen",
    "wronskian",
    "resolvent",
    "lap",
    "imkernel",
    "symmetrization",
    "plancherel",
    "inversion",
    "diagonalization",
    "dalembert",
    "fdtd",
    "tunnel",
    "decay",
];

/// Failure messages kept per suite; the `failed` metric counts all.
const MAX_FAILURES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub trials: usize,
    /// Worst value of each quantity over the trials.
    pub metrics: BTreeMap<String, f64>,
    pub failures: Vec<String>,
    pub records: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

#[derive(Debug, thiserror::Error)]
#[error("unknown suite {0:?}; expected `all` or one of {list}", list = SUITES.join(", "))]
pub struct UnknownSuite(pub String);

/// Expands `all` and comma-separated lists into suite names.
pub fn resolve_suites(requested: &[String]) -> Result<Vec<&'static str>, UnknownSuite> {
    let mut out = Vec::new();
    for item in requested.iter().flat_map(|s| s.split(',')).map(str::trim) {
        if item == "all" {
            out.extend(SUITES);
        } else {
            out.push(*SUITES.iter().find(|&&s| s == item).ok_or_else(|| UnknownSuite(item.into()))?);
        }
    }
    let mut seen = Vec::new();
    out.retain(|s| !seen.contains(s) && {
        seen.push(*s);
        true
    });
    Ok(out)
}

/// Runs `suites` in the given order. `trials` overrides the default trial
/// count of the randomized suites.
pub fn run(suites: &[&str], seed: u64, trials: Option<usize>) -> Result<ValidationReport, UnknownSuite> {
    let mut reports = Vec::with_capacity(suites.len());
    for &name in suites {
        reports.push(run_suite(name, seed, trials)?);
    }
    let passed = reports.iter().all(|r| r.passed);
    Ok(ValidationReport { seed, suites: reports, passed })
}

pub fn run_suite(name: &str, seed: u64, trials: Option<usize>) -> Result<SuiteReport, UnknownSuite> {
    let ctx = Ctx { seed, stream: SUITES.iter().position(|&s| s == name).ok_or_else(|| UnknownSuite(name.into()))? };
    Ok(match name {
        "eigen" => pointwise::eigen(ctx, trials.unwrap_or(200)),
        "wronskian" => pointwise::wronskian(ctx, trials.unwrap_or(10_000)),
        "resolvent" => transform::resolvent(ctx),
        "lap" => pointwise::lap(ctx, trials.unwrap_or(1000)),
        "imkernel" => pointwise::imkernel(ctx, trials.unwrap_or(1000)),
        "symmetrization" => pointwise::symmetrization(ctx, trials.unwrap_or(50)),
        "plancherel" => transform::plancherel(ctx, trials.unwrap_or(20)),
        "inversion" => transform::inversion(ctx, trials.unwrap_or(20)),
        "diagonalization" => transform::diagonalization(ctx, trials.unwrap_or(4)),
        "dalembert" => transform::dalembert(ctx),
        "fdtd" => dynamics::fdtd(ctx),
        "tunnel" => dynamics::tunnel(ctx),
        "decay" => transform::decay(ctx, trials.unwrap_or(10)),
        _ => unreachable!("suite names are checked above"),
    })
}

/// Seed and stream of a suite.
#[derive(Debug, Clone, Copy)]
struct Ctx {
    seed: u64,
    stream: usize,
}

impl Ctx {
    /// Generator for trial `i` of this suite.
    fn rng(&self, i: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((self.stream as u64) << 40) | i as u64);
        rng
    }

    /// Same as [`Ctx::rng`] on the stream of another suite, for suites
    /// that share a corpus.
    fn rng_of(&self, suite: &str, i: usize) -> ChaCha8Rng {
        let stream = SUITES.iter().position(|&s| s == suite).expect("known suite");
        Ctx { seed: self.seed, stream }.rng(i)
    }
}

/// Result of one trial.
#[derive(Debug, Default)]
struct Outcome {
    worst: Vec<(String, f64, Worst)>,
    failures: Vec<String>,
    record: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Worst {
    Max,
    Min,
}

impl Outcome {
    fn max(&mut self, key: &str, value: f64) {
        self.worst.push((key.into(), value, Worst::Max));
    }

    fn min(&mut self, key: &str, value: f64) {
        self.worst.push((key.into(), value, Worst::Min));
    }

    /// Records a failure unless `ok`.
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn error(&mut self, context: &str, e: impl std::fmt::Display) {
        self.failures.push(format!("{context}: {e}"));
    }
}

/// Runs `trials` independent trials in parallel and merges them in order.
fn run_trials(name: &str, trials: usize, trial: impl Fn(usize) -> Outcome + Sync + Send) -> SuiteReport {
    let outcomes: Vec<Outcome> = (0..trials).into_par_iter().map(trial).collect();
    merge(name, trials, outcomes)
}

fn merge(name: &str, trials: usize, outcomes: Vec<Outcome>) -> SuiteReport {
    let mut metrics: BTreeMap<String, f64> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut failed = 0usize;
    let mut records = Vec::new();
    for o in outcomes {
        for (key, value, how) in o.worst {
            if value.is_nan() {
                failed += 1;
                if failures.len() < MAX_FAILURES {
                    failures.push(format!("{key} is NaN"));
                }
                continue;
            }
            metrics
                .entry(key)
                .and_modify(|m| {
                    *m = match how {
                        Worst::Max => m.max(value),
                        Worst::Min => m.min(value),
                    }
                })
                .or_insert(value);
        }
        failed += o.failures.len();
        for f in o.failures {
            if failures.len() < MAX_FAILURES {
                failures.push(f);
            }
        }
        records.extend(o.record);
    }
    metrics.insert("failed".into(), failed as f64);
    SuiteReport { suite: name.into(), passed: failed == 0, trials, metrics, failures, records }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_lists_expand_and_deduplicate() {
        let all = resolve_suites(&["all".into()]).unwrap();
        assert_eq!(all, SUITES.to_vec());
        let some = resolve_suites(&["eigen,lap".into(), "eigen".into()]).unwrap();
        assert_eq!(some, vec!["eigen", "lap"]);
        assert!(resolve_suites(&["nope".into()]).is_err());
    }

    #[test]
    fn trial_streams_are_distinct_and_reproducible() {
        use rand::Rng;
        let ctx = Ctx { seed: 7, stream: 0 };
        let a: u64 = ctx.rng(0).gen();
        assert_eq!(a, ctx.rng(0).gen::<u64>());
        assert_ne!(a, ctx.rng(1).gen::<u64>());
        assert_ne!(a, Ctx { seed: 7, stream: 1 }.rng(0).gen::<u64>());
    }

    #[test]
    fn merge_keeps_worst_values_and_counts_failures() {
        let mut a = Outcome::default();
        a.max("gap", 1.0);
        a.min("slack", 2.0);
        let mut b = Outcome::default();
        b.max("gap", 3.0);
        b.min("slack", -1.0);
        b.require(false, || "bad".into());
        let r = merge("x", 2, vec![a, b]);
        assert_eq!(r.metrics["gap"], 3.0);
        assert_eq!(r.metrics["slack"], -1.0);
        assert_eq!(r.metrics["failed"], 1.0);
        assert!(!r.passed);
    }
}
