//! `nibm`: probabilities, identity checks, counting tables and appendix
//! quantities from the command line.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 usage or config
//! error, 3 a numerical guard tripped.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nibm::appendix::{
    asymptotic_table, conjecture_csv, conjecture_ratio_table, conjecture_report, hermite_p, tau_full_range, x_tail,
};
use nibm::counting::{census, kstar_csv};
use nibm::identities::{check_pq22_system, check_prop1, check_virasoro, hirota_all, lemma_all, ratios_all};
use nibm::montecarlo::{estimate_probability, sample};
use nibm::suite::{desk_suite, full_suite, SuiteResult, Tolerances};
use nibm::tau::probability_with;
use nibm::Precision;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) | CliError::Numerical(s) => f.write_str(s),
        }
    }
}

impl From<nibm::Error> for CliError {
    fn from(e: nibm::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PrecisionArg {
    Double,
    Dd,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Dd => Precision::Dd,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct Global {
    /// Config file, or inline JSON starting with '{'.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the tolerance of every check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Override the sampler seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "double")]
    precision: PrecisionArg,
    /// Worker threads (also read from NIBM_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Leave the timestamp out of JSON output.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Debug, Parser)]
#[command(name = "nibm", version, about = "Non-intersecting Brownian motions: probabilities and identity checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SuiteName {
    Desk,
    Full,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Cmd {
    /// Probability that every particle lies in E at time t.
    Prob,
    /// Virasoro constraints k = -1 and 0.
    Virasoro {
        /// Only this k.
        #[arg(long, allow_negative_numbers = true, value_parser = clap::value_parser!(i32).range(-1..=0))]
        k: Option<i32>,
    },
    /// Bilinear identities for every family pair.
    Hirota,
    /// Ratio identities for shifted tau functions.
    Ratios,
    /// Second time-derivatives at zero times.
    Lemma,
    /// The six equations for two starting and two ending points.
    Pq22,
    /// Three representations of the probability for N <= 3.
    Prop1,
    /// CSV of K* and the census at K* for each x.
    Kstar {
        /// A single x or an inclusive range a..b.
        #[arg(long)]
        x: String,
    },
    /// Equation and unknown counts.
    Census {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: u64,
    },
    /// Full-line tau, Hermite polynomials and the tail quantity X.
    #[command(subcommand)]
    Appendix(AppendixCmd),
    /// Metropolis estimate of the probability, compared with the determinant.
    Sample {
        /// Also write every `thin`-th state of every chain as CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        thin: usize,
    },
    /// Run a bundled suite of checks.
    VerifyAll {
        #[arg(long, value_enum, default_value = "desk")]
        suite: SuiteName,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum AppendixCmd {
    /// Coefficients of p_j.
    Hermite {
        #[arg(long)]
        j: usize,
    },
    /// Full-line tau by the moment, Hermite and Schur routes.
    Taur {
        #[arg(long)]
        m1: usize,
        #[arg(long)]
        m2: usize,
        #[arg(long, allow_negative_numbers = true)]
        at: f64,
        #[arg(long, allow_negative_numbers = true)]
        bt: f64,
    },
    /// log X for X = e^z minus the first m2 Taylor terms.
    X {
        #[arg(long)]
        z: f64,
        #[arg(long)]
        m2: u64,
    },
    /// Tail against its large-m2 expansion along the (A, B) scaling.
    Asymptotic {
        #[arg(long = "coef-a", allow_negative_numbers = true)]
        coef_a: f64,
        #[arg(long = "coef-b", allow_negative_numbers = true)]
        coef_b: f64,
        #[arg(long, value_delimiter = ',')]
        m2s: Vec<u64>,
    },
    /// Schur-complement structure report.
    Conjecture {
        #[arg(long)]
        m1: usize,
        #[arg(long)]
        m2: usize,
        #[arg(long, allow_negative_numbers = true)]
        at: f64,
        #[arg(long, allow_negative_numbers = true)]
        bt: f64,
    },
    /// CSV of exact log tau against both readings of the conjectured product.
    ConjectureTable {
        #[arg(long)]
        m1: usize,
        #[arg(long = "coef-a", allow_negative_numbers = true)]
        coef_a: f64,
        #[arg(long = "coef-b", allow_negative_numbers = true)]
        coef_b: f64,
        #[arg(long, value_delimiter = ',')]
        m2s: Vec<usize>,
    },
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a Cmd,
    config: Option<&'a RunConfig>,
    config_source: Option<&'a str>,
    out: Option<String>,
    tol: Option<f64>,
    seed: Option<u64>,
    precision: PrecisionArg,
    threads: Option<usize>,
    version: &'static str,
}

enum Output {
    Json { result: Value, ok: bool },
    Csv(String),
}

fn json_of<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Usage(format!("serialization: {e}")))
}

fn parse_range(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Usage(format!("--x expects N or A..B, got {s:?}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}

fn suite_output(s: SuiteResult) -> Result<Output, CliError> {
    let ok = s.all_passed();
    Ok(Output::Json { result: json_of(&s)?, ok })
}

fn need_config(cfg: &Option<(RunConfig, String)>) -> Result<&RunConfig, CliError> {
    cfg.as_ref().map(|c| &c.0).ok_or_else(|| CliError::Usage("this subcommand needs --config".into()))
}

fn dump_states(path: &PathBuf, states: &[Vec<Vec<f64>>]) -> Result<(), CliError> {
    let dim = states.first().and_then(|c| c.first()).map_or(0, Vec::len);
    let mut s = String::from("chain,index");
    for i in 0..dim {
        s.push_str(&format!(",x{i}"));
    }
    s.push('\n');
    for (c, chain) in states.iter().enumerate() {
        for (k, x) in chain.iter().enumerate() {
            s.push_str(&format!("{c},{k}"));
            for v in x {
                s.push_str(&format!(",{v:.17e}"));
            }
            s.push('\n');
        }
    }
    std::fs::write(path, s).map_err(|e| CliError::Usage(format!("writing {}: {e}", path.display())))
}

fn execute(cli: &Cli, cfg: &Option<(RunConfig, String)>) -> Result<Output, CliError> {
    let g = &cli.global;
    let precision: Precision = g.precision.into();
    let tol_or = |d: f64| g.tol.unwrap_or(d);
    let checks = |name: &str, reports| suite_output(SuiteResult::new(name, reports));
    match &cli.cmd {
        Cmd::Prob => {
            let c = need_config(cfg)?;
            let r = probability_with(&c.validated()?, &c.intervals, precision)?;
            Ok(Output::Json { result: json_of(&r)?, ok: true })
        }
        Cmd::Virasoro { k } => {
            let pr = need_config(cfg)?.problem(precision)?;
            let ks = k.map_or(vec![-1, 0], |k| vec![k]);
            let reports = ks.iter().map(|&k| check_virasoro(&pr, k, tol_or(1e-5))).collect::<Result<Vec<_>, _>>()?;
            checks("virasoro", reports)
        }
        Cmd::Hirota => checks("hirota", hirota_all(&need_config(cfg)?.problem(precision)?, tol_or(1e-5))?),
        Cmd::Ratios => checks("ratios", ratios_all(&need_config(cfg)?.problem(precision)?, tol_or(1e-4))?),
        Cmd::Lemma => checks("lemma", lemma_all(&need_config(cfg)?.problem(precision)?, tol_or(5e-5))?),
        Cmd::Pq22 => checks("pq22", check_pq22_system(&need_config(cfg)?.problem(precision)?, tol_or(1e-3))?),
        Cmd::Prop1 => {
            let pr = need_config(cfg)?.problem(precision)?;
            let d = if pr.n_particles() <= 2 { 1e-8 } else { 1e-7 };
            checks("prop1", check_prop1(&pr, tol_or(d))?)
        }
        Cmd::Kstar { x } => Ok(Output::Csv(kstar_csv(parse_range(x)?)?)),
        Cmd::Census { p, q, k } => Ok(Output::Json { result: json_of(&census(*p, *q, *k)?)?, ok: true }),
        Cmd::Appendix(a) => appendix(a),
        Cmd::Sample { dump, thin } => {
            let c = need_config(cfg)?;
            let spec = c.validated()?;
            let mut chain = c.chain.clone().unwrap_or_default();
            if let Some(s) = g.seed {
                chain.seed = s;
            }
            let det = probability_with(&spec, &c.intervals, precision)?.probability;
            let est = estimate_probability(&spec, &c.intervals, &chain)?;
            if let Some(path) = dump {
                dump_states(path, &sample(&spec, &chain, *thin)?.states)?;
            }
            let z = if est.std_error > 0.0 { (est.p_hat - det) / est.std_error } else { 0.0 };
            let ok = est.agrees_with(det, 3.0);
            let result = json!({ "chain": chain, "estimate": est, "determinant_probability": det, "z": z, "agrees": ok });
            Ok(Output::Json { result, ok })
        }
        Cmd::VerifyAll { suite } => {
            let tol = g.tol.map_or_else(Tolerances::default, Tolerances::uniform);
            match suite {
                SuiteName::Desk => suite_output(desk_suite(&tol)?),
                SuiteName::Full => suite_output(full_suite(&tol)?),
            }
        }
    }
}

fn appendix(a: &AppendixCmd) -> Result<Output, CliError> {
    let result = match a {
        AppendixCmd::Hermite { j } => json!({ "j": j, "p": hermite_p(*j) }),
        AppendixCmd::Taur { m1, m2, at, bt } => json_of(&tau_full_range(*m1, *m2, *at, *bt)?)?,
        AppendixCmd::X { z, m2 } => json!({ "z": z, "m2": m2, "log_x": x_tail(*z, *m2)? }),
        AppendixCmd::Asymptotic { coef_a, coef_b, m2s } => json_of(&asymptotic_table(*coef_a, *coef_b, m2s)?)?,
        AppendixCmd::Conjecture { m1, m2, at, bt } => json_of(&conjecture_report(*m1, *m2, *at, *bt)?)?,
        AppendixCmd::ConjectureTable { m1, coef_a, coef_b, m2s } => {
            return Ok(Output::Csv(conjecture_csv(&conjecture_ratio_table(*m1, *coef_a, *coef_b, m2s)?)));
        }
    };
    Ok(Output::Json { result, ok: true })
}

fn set_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("NIBM_THREADS") {
            Ok(v) => Some(v.parse().map_err(|_| CliError::Usage(format!("NIBM_THREADS={v:?} is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("writing {}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Usage(e.to_string())),
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    set_threads(cli.global.threads)?;
    let cfg = cli.global.config.as_deref().map(RunConfig::load).transpose()?;
    let output = execute(cli, &cfg)?;
    let (text, ok) = match output {
        Output::Csv(s) => (s, true),
        Output::Json { result, ok } => {
            let g = &cli.global;
            let manifest = Manifest {
                subcommand: &cli.cmd,
                config: cfg.as_ref().map(|c| &c.0),
                config_source: cfg.as_ref().map(|c| c.1.as_str()),
                out: g.out.as_ref().map(|p| p.display().to_string()),
                tol: g.tol,
                seed: g.seed,
                precision: g.precision,
                threads: g.threads,
                version: env!("CARGO_PKG_VERSION"),
            };
            let body = json!({ "manifest": manifest, "result": result });
            let bytes = serde_json::to_vec(&body).map_err(|e| CliError::Usage(e.to_string()))?;
            let hash: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
            let mut doc = body;
            doc["content_hash"] = Value::String(hash);
            doc["passed"] = Value::Bool(ok);
            if !g.no_timestamp {
                let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
                doc["timestamp_unix"] = json!(secs);
            }
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Usage(e.to_string()))?;
            s.push('\n');
            (s, ok)
        }
    };
    emit(&cli.global.out, &text)?;
    Ok(if ok { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("nibm: {e}");
            ExitCode::from(e.code())
        }
    }
}
