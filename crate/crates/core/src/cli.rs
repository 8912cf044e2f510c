//! Command-line front end and report format.
//!
//! Every experiment command produces an [`ExperimentReport`] serialized as
//! JSON with sorted keys. `sample` writes permutations and `figure1` writes
//! CSV by default. The process exits 0 only when every pass flag is true.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::exact::{
    cov_bounds, enumerate_law, exact_moments, formula_mean_two_sided, formula_var_des, q_factorial,
    adjacency_pair_sum, type_sums, MallowsParams, EXACT_TOL,
};
use crate::limits::{self, TestFunction};
use crate::par;
use crate::perm;
use crate::regen::{estimate_rho_excursion, DEFAULT_MAX_LEN};
use crate::sample::{sample_finite, RngStream};
use crate::size_bias::{exact_coupling_check, tail_check, variance_term};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_REPS: u64 = 10_000;
/// Draws per q in `figure1` unless --reps is given.
pub const FIGURE1_REPS: u64 = 1000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("usage: {0}")]
    Usage(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HArg {
    Tanh,
    Cos,
}

impl From<HArg> for TestFunction {
    fn from(h: HArg) -> Self {
        match h {
            HArg::Tanh => TestFunction::Tanh,
            HArg::Cos => TestFunction::Cosine,
        }
    }
}

/// Descent statistics of Mallows permutations.
#[derive(Debug, Parser)]
#[command(name = "mallows", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Master seed; every draw is a function of (seed, command, rep).
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Monte Carlo repetitions (default 10000; 1000 for figure1).
    #[arg(long, global = true)]
    pub reps: Option<u64>,
    /// Worker threads; does not change results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Include wall-clock runtime in reports (makes them non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct NQ {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub q: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw Mallows permutations.
    Sample {
        #[command(flatten)]
        nq: NQ,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Mean and variance formulas, optionally checked by enumeration.
    Moments {
        #[command(flatten)]
        nq: NQ,
        #[arg(long)]
        exact: bool,
    },
    /// Exact covariance type sums of the variance term (n ≤ 7).
    Typesums {
        #[command(flatten)]
        nq: NQ,
    },
    /// Exact check of the size-bias coupling (n ≤ 6).
    Sbcheck {
        #[command(flatten)]
        nq: NQ,
    },
    /// Monte Carlo variance of E(X − X* | w).
    Vterm {
        #[command(flatten)]
        nq: NQ,
    },
    /// Empirical tails of X − E X against the concentration bounds.
    Tails {
        #[command(flatten)]
        nq: NQ,
        #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 20.0, 40.0])]
        xs: Vec<f64>,
    },
    /// Excursion estimate of the asymptotic correlation.
    Rho {
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 10_000)]
        excursions: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
        max_len: usize,
    },
    /// Normal approximation of the standardized statistic.
    Clt {
        #[command(flatten)]
        nq: NQ,
        #[arg(long, value_enum, default_value = "tanh")]
        h: HArg,
    },
    /// Correlation and projections of (des(w), des(w⁻¹)).
    Bivariate {
        #[command(flatten)]
        nq: NQ,
        #[arg(long, default_value_t = 10_000)]
        excursions: u64,
    },
    /// Total variation to twice a Poisson variable for small q.
    Poisson {
        #[command(flatten)]
        nq: NQ,
    },
    /// Finite-n and excursion correlation estimates over a grid of q.
    Figure1 {
        /// Comma-separated q values in (0, 1); default 100 evenly spaced.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        excursions: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample { .. } => "sample",
            Command::Moments { .. } => "moments",
            Command::Typesums { .. } => "typesums",
            Command::Sbcheck { .. } => "sbcheck",
            Command::Vterm { .. } => "vterm",
            Command::Tails { .. } => "tails",
            Command::Rho { .. } => "rho",
            Command::Clt { .. } => "clt",
            Command::Bivariate { .. } => "bivariate",
            Command::Poisson { .. } => "poisson",
            Command::Figure1 { .. } => "figure1",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub command: String,
    pub params: Value,
    pub seed: u64,
    pub results: Value,
    pub bounds: Value,
    pub pass: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.pass.values().all(|&p| p)
    }

    /// Pretty JSON with keys in sorted order.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report is serializable");
        let mut s = serde_json::to_string_pretty(&value).expect("value is serializable");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug)]
pub enum Output {
    Report(ExperimentReport),
    /// Raw bytes plus whether the run passed (always true for plain data).
    Data(Vec<u8>, bool),
}

impl Output {
    pub fn passed(&self) -> bool {
        match self {
            Output::Report(r) => r.all_pass(),
            Output::Data(_, pass) => *pass,
        }
    }

    pub fn bytes(&self) -> Vec<u8> {
        match self {
            Output::Report(r) => r.to_json().into_bytes(),
            Output::Data(d, _) => d.clone(),
        }
    }
}

fn params(nq: &NQ) -> Result<MallowsParams, CliError> {
    Ok(MallowsParams::new(nq.n, nq.q)?)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn report(
    config: &RunConfig,
    params: Value,
    results: Value,
    bounds: Value,
    pass: impl IntoIterator<Item = (&'static str, bool)>,
) -> ExperimentReport {
    ExperimentReport {
        command: config.command.name().to_string(),
        params,
        seed: config.seed,
        results,
        bounds,
        pass: pass.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        runtime_ms: None,
    }
}

fn require_format(config: &RunConfig, allowed: &[Format], default: Format) -> Result<Format, CliError> {
    let f = config.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(format!(
            "{} does not support --format {:?}",
            config.command.name(),
            f
        )))
    }
}

/// Runs the configured command with the requested worker count.
pub fn dispatch(config: &RunConfig) -> Result<Output, CliError> {
    if config.reps == Some(0) {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let start = Instant::now();
    let mut out = par::with_threads(config.threads, || run_command(config))?;
    if let (Output::Report(r), true) = (&mut out, config.timing) {
        r.runtime_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(out)
}

fn run_command(config: &RunConfig) -> Result<Output, CliError> {
    let stream = RngStream::new(config.seed, config.command.name());
    let reps = config.reps.unwrap_or(DEFAULT_REPS);
    let json_only = |c| require_format(c, &[Format::Json], Format::Json);
    match &config.command {
        Command::Sample { nq, count } => {
            let p = params(nq)?;
            let fmt = require_format(config, &[Format::Text, Format::Binary], Format::Text)?;
            let perms = par::map_indexed(*count, |k| sample_finite(p, &mut stream.at(k)));
            let mut buf = Vec::new();
            match fmt {
                Format::Binary => perm::write_binary(&mut buf, &perms)?,
                _ => perm::write_text(&mut buf, &perms)?,
            }
            Ok(Output::Data(buf, true))
        }
        Command::Moments { nq, exact } => {
            json_only(config)?;
            let p = params(nq)?;
            let mean = formula_mean_two_sided(p)?;
            let var = formula_var_des(p)?;
            let bounds = if p.q < 1.0 { to_value(&cov_bounds(p)?) } else { Value::Null };
            let mut results = json!({ "mean_two_sided": mean, "var_des": var });
            let mut pass = Vec::new();
            if *exact {
                let law = enumerate_law(p)?;
                let m = exact_moments(&law);
                let z = q_factorial(p.n as u32, p.q);
                results["exact"] = to_value(&m);
                results["exact"]["normalization"] = json!(law.normalization());
                results["q_factorial"] = json!(z);
                pass.push(("mean_matches", (m.mean_two_sided - mean).abs() <= EXACT_TOL));
                pass.push(("var_des_matches", (m.var_des - var).abs() <= EXACT_TOL));
                pass.push(("normalization_matches", (law.normalization() - z).abs() <= EXACT_TOL * z.max(1.0)));
                if p.q < 1.0 {
                    pass.push(("cov_within_bounds", cov_bounds(p)?.contains(m.cov_des_ides)));
                }
            }
            Ok(Output::Report(report(config, nq_value(nq), results, bounds, pass)))
        }
        Command::Typesums { nq } => {
            json_only(config)?;
            let p = params(nq)?;
            let law = enumerate_law(p)?;
            let sums = type_sums(&law)?;
            let mut results = json!({ "types": to_value(&sums) });
            let mut bounds = json!({});
            let mut pass: Vec<(&'static str, bool)> = Vec::new();
            const NAMES: [&str; 6] = ["type1", "type2", "type3", "type4", "type5", "type6"];
            for s in &sums {
                bounds[NAMES[s.t as usize - 1]] = json!(s.bound);
                if s.admissible {
                    pass.push((NAMES[s.t as usize - 1], s.within_bound));
                }
            }
            let n = p.n;
            if n >= 4 && p.q <= 1.0 && p.q >= 1.0 - 1.0 / ((n - 1) as f64).sqrt() {
                let adj = adjacency_pair_sum(&law)?;
                let limit = 111.0 * (n - 1) as f64;
                results["adjacency_pair_sum"] = json!(adj);
                bounds["adjacency_pair_sum"] = json!(limit);
                pass.push(("adjacency_pair_sum", adj <= limit));
            }
            Ok(Output::Report(report(config, nq_value(nq), results, bounds, pass)))
        }
        Command::Sbcheck { nq } => {
            json_only(config)?;
            let law = enumerate_law(params(nq)?)?;
            let c = exact_coupling_check(&law)?;
            let keyed = |m: &BTreeMap<usize, f64>| -> BTreeMap<String, f64> {
                m.iter().map(|(k, v)| (k.to_string(), *v)).collect()
            };
            let results = json!({
                "coupled_law": keyed(&c.coupled_law),
                "size_bias_law": keyed(&c.size_bias_law),
                "max_deviation": c.max_deviation,
            });
            Ok(Output::Report(report(
                config,
                nq_value(nq),
                results,
                json!({ "max_deviation": EXACT_TOL }),
                [("coupling_exact", c.max_deviation <= EXACT_TOL)],
            )))
        }
        Command::Vterm { nq } => {
            json_only(config)?;
            let v = variance_term(params(nq)?, reps, &stream)?;
            Ok(Output::Report(report(
                config,
                with_reps(nq_value(nq), reps),
                to_value(&v),
                json!({ "variance": v.bound }),
                [("variance_within_bound", v.pass)],
            )))
        }
        Command::Tails { nq, xs } => {
            json_only(config)?;
            let t = tail_check(params(nq)?, reps, &stream, xs)?;
            let mut p = with_reps(nq_value(nq), reps);
            p["xs"] = json!(xs);
            let bounds: Vec<Value> = t
                .points
                .iter()
                .map(|pt| json!({ "x": pt.x, "upper": pt.upper_bound, "lower": pt.lower_bound }))
                .collect();
            let pass = t.pass();
            Ok(Output::Report(report(config, p, to_value(&t), json!(bounds), [("tails_within_bounds", pass)])))
        }
        Command::Rho { q, excursions, max_len } => {
            json_only(config)?;
            let r = estimate_rho_excursion(*q, *excursions, &stream, *max_len)?;
            let p = json!({ "q": q, "excursions": excursions, "max_len": max_len });
            Ok(Output::Report(report(
                config,
                p,
                to_value(&r),
                json!({ "rho": [0.0, 1.0] }),
                [("rho_in_unit_interval", r.rho > 0.0 && r.rho < 1.0)],
            )))
        }
        Command::Clt { nq, h } => {
            json_only(config)?;
            let c = limits::clt_experiment(params(nq)?, reps, (*h).into(), &stream)?;
            let mut p = with_reps(nq_value(nq), reps);
            p["h"] = json!(TestFunction::from(*h).name());
            Ok(Output::Report(report(
                config,
                p,
                to_value(&c),
                json!({ "deviation": c.bound }),
                [("deviation_within_bound", c.pass)],
            )))
        }
        Command::Bivariate { nq, excursions } => {
            json_only(config)?;
            let b = limits::bivariate_experiment(params(nq)?, reps, *excursions, &stream)?;
            let mut p = with_reps(nq_value(nq), reps);
            p["excursions"] = json!(excursions);
            let in_unit = b.sample_correlation.abs() <= 1.0;
            Ok(Output::Report(report(
                config,
                p,
                to_value(&b),
                json!({ "rho_limit": b.rho_bounds }),
                [("correlation_in_range", in_unit)],
            )))
        }
        Command::Poisson { nq } => {
            json_only(config)?;
            let c = limits::poisson_experiment(params(nq)?, reps, &stream)?;
            Ok(Output::Report(report(
                config,
                with_reps(nq_value(nq), reps),
                to_value(&c),
                json!({ "total_variation": c.bound, "even_fraction": c.even_bound }),
                [("tv_within_bound", c.pass), ("even_fraction", c.even_pass)],
            )))
        }
        Command::Figure1 { grid, n, excursions } => {
            let fmt = require_format(config, &[Format::Csv, Format::Json], Format::Csv)?;
            let reps = config.reps.unwrap_or(FIGURE1_REPS);
            let grid = grid.clone().unwrap_or_else(|| limits::default_grid(100));
            let rows = limits::figure1(&grid, *n, reps, *excursions, &stream)?;
            match fmt {
                Format::Csv => Ok(Output::Data(limits::figure1_csv(&rows).into_bytes(), true)),
                _ => {
                    let p = json!({ "n": n, "reps": reps, "excursions": excursions, "grid": grid });
                    let complete = rows.iter().all(|r| r.error.is_none());
                    Ok(Output::Report(report(config, p, to_value(&rows), Value::Null, [("rows_complete", complete)])))
                }
            }
        }
    }
}

fn nq_value(nq: &NQ) -> Value {
    json!({ "n": nq.n, "q": nq.q })
}

fn with_reps(mut v: Value, reps: u64) -> Value {
    v["reps"] = json!(reps);
    v
}

/// Parses, runs and writes; returns the process exit status.
pub fn run(config: &RunConfig) -> i32 {
    match dispatch(config) {
        Ok(out) => {
            let bytes = out.bytes();
            let written = match &config.out {
                Some(path) => std::fs::write(path, &bytes),
                None => std::io::stdout().lock().write_all(&bytes),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return 2;
            }
            if out.passed() { 0 } else { 1 }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
