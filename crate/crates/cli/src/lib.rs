//! Experiment harness for the quadratic Goldreich–Levin library: instance
//! generation, runs with query accounting, oracles and a scaling sweep.
//!
//! Exit codes: 0 success, 2 invalid arguments, 3 oracle budget exceeded,
//! 1 anything else.

pub mod bench;
pub mod instance;
pub mod qglf;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qgl_core::funcspace::{QueryFn, TableFn, C64};
use qgl_core::oracle::{gowers_u3_exact, spec_exact, u3_exact, ORACLE_BUDGET};
use qgl_core::qgl::{decompose_with, pgi_eps, qgl_main_with, rm_self_correct_with, DecomposeConfig, QglConfig};
use qgl_core::stabilizer::Quadratic;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bench::{log_log_slope, mean_queries, to_csv, BenchConfig};
use crate::instance::{InstanceSpec, Kind};
use crate::qglf::FunctionFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// A problem with the arguments rather than with the run.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ArgError(pub String);

fn arg_err(e: impl std::fmt::Display) -> anyhow::Error {
    ArgError(e.to_string()).into()
}

#[derive(Parser, Debug)]
#[command(name = "qgl", version, about = "Quadratic Goldreich–Levin experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded instance to a function file.
    Gen(GenArgs),
    /// Find a quadratic phase correlating with the function.
    Run(RunArgs),
    /// Nearest quadratic to a Boolean function (Reed–Muller self-correction).
    Decode(RunArgs),
    /// Inverse theorem for U³: a quadratic correlating with a function of large U³ norm.
    Pgi(PgiArgs),
    /// Greedy decomposition into quadratic phases plus a U³-small residual.
    Decompose(RunArgs),
    /// Exact brute-force quantities at small n.
    Oracle(OracleArgs),
    /// Query-count sweep over planted instances, with the log-log slope.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 0.8)]
    lambda: f64,
    /// Flip rate of noisy-rm-codeword.
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Source file for kind from-file.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(short = 'o', long = "out")]
    out: PathBuf,
    /// Print the planted structure as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Clone)]
struct LearnerFlags {
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    phat: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    /// Cap on projections per round.
    #[arg(long)]
    tmax: Option<usize>,
    /// Fixed number of rounds.
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, default_value_t = 1.0 / 6.0)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    learner: LearnerFlags,
    /// Count each distinct point once.
    #[arg(long)]
    memo: bool,
    /// Add the exact best quadratic correlation (n <= 6).
    #[arg(long)]
    oracle: bool,
    /// Record wall-clock time; reports are then no longer reproducible.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    json: bool,
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PgiArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long = "c-exp", default_value_t = 10.0)]
    c_exp: f64,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// u3 (best quadratic correlation), U3 (Gowers norm) or spec (spectral set).
    #[arg(long)]
    what: String,
    #[arg(long)]
    json: bool,
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, default_value_t = 1.0 / 6.0)]
    delta: f64,
    #[arg(long, default_value_t = 0.8)]
    lambda: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![8, 12, 16, 20])]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    /// Projection cap; the learner's default when absent.
    #[arg(long)]
    tmax: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    phat: f64,
    #[arg(long)]
    rounds: Option<usize>,
    /// Allow exact whole-table estimates when they are no dearer than sampling.
    #[arg(long)]
    dense: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// CSV destination; stdout when absent.
    #[arg(long = "out")]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct QuadraticJson {
    pub qmat_rows: Vec<String>,
    pub lin: String,
    #[serde(rename = "const")]
    pub constant: u8,
}

impl From<&Quadratic> for QuadraticJson {
    fn from(q: &Quadratic) -> Self {
        Self { qmat_rows: q.qmat_hex_rows(), lin: format!("{:x}", q.lin()), constant: q.constant() as u8 }
    }
}

#[derive(Serialize, Debug, Clone, Copy, PartialEq)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexJson {
    fn from(c: C64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

/// Machine-readable outcome of one algorithm run.
#[derive(Serialize, Debug, Clone)]
pub struct Report {
    pub n: usize,
    pub algo: &'static str,
    pub params: BTreeMap<&'static str, Value>,
    pub seed: u64,
    pub queries: u64,
    /// Null unless timing was requested, so reports stay byte-identical.
    pub runtime_ms: Option<u64>,
    pub quadratic: QuadraticJson,
    pub est_correlation: ComplexJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_u3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub list_size: Option<usize>,
    #[serde(flatten)]
    pub extra: BTreeMap<&'static str, Value>,
}

impl Report {
    fn human(&self) -> String {
        let mut s = format!(
            "{} n={} seed={} queries={}\nquadratic rows=[{}] lin={} const={}\nest_correlation={:.6}{:+.6}i\n",
            self.algo,
            self.n,
            self.seed,
            self.queries,
            self.quadratic.qmat_rows.join(","),
            self.quadratic.lin,
            self.quadratic.constant,
            self.est_correlation.re,
            self.est_correlation.im
        );
        if let Some(l) = self.list_size {
            s.push_str(&format!("list_size={l}\n"));
        }
        if let Some(u) = self.oracle_u3 {
            s.push_str(&format!("oracle_u3={u:.6}\n"));
        }
        for (k, v) in &self.extra {
            s.push_str(&format!("{k}={v}\n"));
        }
        if let Some(ms) = self.runtime_ms {
            s.push_str(&format!("runtime_ms={ms}\n"));
        }
        s
    }
}

/// Parses argv (program name first), runs the command and returns the exit code.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if cause.is::<ArgError>() {
            return EXIT_INVALID;
        }
        if let Some(err) = cause.downcast_ref::<qgl_core::Error>() {
            return match err {
                qgl_core::Error::BudgetExceeded { .. } => EXIT_BUDGET,
                qgl_core::Error::Internal(_) => EXIT_FAILURE,
                _ => EXIT_INVALID,
            };
        }
    }
    EXIT_FAILURE
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a, Algo::Qgl),
        Command::Decode(a) => run(a, Algo::Decode),
        Command::Pgi(a) => {
            let c_exp = a.c_exp;
            run(a.run, Algo::Pgi(c_exp))
        }
        Command::Decompose(a) => run(a, Algo::Decompose),
        Command::Oracle(a) => oracle(a),
        Command::Bench(a) => bench_cmd(a),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let kind = Kind::parse(&a.kind, a.input.clone()).map_err(arg_err)?;
    let spec = InstanceSpec { n: a.n, kind, lambda: a.lambda, eta: a.eta, seed: a.seed };
    spec.validate().map_err(arg_err)?;
    let inst = spec.generate()?;
    inst.file.save(&a.out)?;
    if a.json {
        let v = json!({
            "kind": a.kind,
            "n": inst.file.dim(),
            "seed": a.seed,
            "lambda": a.lambda,
            "eta": a.eta,
            "planted": inst.planted.as_ref().map(QuadraticJson::from),
        });
        println!("{}", serde_json::to_string(&v)?);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Algo {
    Qgl,
    Decode,
    Pgi(f64),
    Decompose,
}

fn apply_learner_flags(cfg: &mut QglConfig, l: &LearnerFlags, params: &mut BTreeMap<&'static str, Value>) {
    let lp = &mut cfg.learner;
    if let Some(v) = l.tau {
        lp.tau = v;
    }
    if let Some(v) = l.gamma {
        lp.gamma = v;
    }
    if let Some(v) = l.phat {
        lp.p_hat = v;
    }
    if let Some(v) = l.xi {
        lp.xi = v;
    }
    if let Some(v) = l.tmax {
        lp.t_max = v;
    }
    lp.rounds = l.rounds.or(lp.rounds);
    lp.threads = l.threads.max(1);
    params.insert("tau", json!(lp.tau));
    params.insert("gamma", json!(lp.gamma));
    params.insert("phat", json!(lp.p_hat));
    params.insert("xi", json!(lp.xi));
    params.insert("tmax", json!(lp.t_max));
    params.insert("rounds", json!(lp.rounds()));
}

fn run(a: RunArgs, algo: Algo) -> Result<()> {
    let file = FunctionFile::load(&a.input).map_err(arg_err)?;
    let n = file.dim();
    let table = file.table();
    if table.sup_norm() > 1.0 + 1e-9 {
        return Err(arg_err(format!("function is not 1-bounded (sup {})", table.sup_norm())));
    }
    let oracle_u3 = if a.oracle { Some(u3_exact(&table)?.0) } else { None };
    let mut f = QueryFn::from_table(table.clone());
    if a.memo {
        f = f.memoized()?;
    }
    let mut params = BTreeMap::new();
    params.insert("eps", json!(a.eps));
    params.insert("delta", json!(a.delta));
    params.insert("memo", json!(a.memo));
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let start = Instant::now();
    let mut extra = BTreeMap::new();
    let (name, quadratic, est, list_size) = match algo {
        Algo::Qgl => {
            let mut cfg = QglConfig::practical(a.eps, a.delta)?;
            apply_learner_flags(&mut cfg, &a.learner, &mut params);
            let rep = qgl_main_with(&f, &cfg, &mut rng)?;
            extra.insert("candidates", json!(rep.candidates));
            extra.insert("energy", json!(rep.energy));
            ("qgl", rep.chosen, rep.est_correlation, Some(rep.list_size))
        }
        Algo::Decode => {
            let bits = file.bits().ok_or_else(|| arg_err("decode needs a Boolean function file"))?;
            let mut cfg = QglConfig::practical(a.eps / 4.0, a.delta)?;
            apply_learner_flags(&mut cfg, &a.learner, &mut params);
            let out = rm_self_correct_with(&f, a.eps, &cfg, &mut rng)?;
            let dist = bits.iter().enumerate().filter(|&(x, &b)| out.quadratic.eval_word(x as u32) != b).count()
                as f64
                / bits.len() as f64;
            extra.insert("distance", json!(dist));
            extra.insert("negated", json!(out.negated));
            (
                "rm_self_correct",
                out.quadratic,
                C64::new(out.sign_estimate.abs(), 0.0),
                Some(out.report.list_size),
            )
        }
        Algo::Pgi(c_exp) => {
            let gamma = a.learner.gamma.unwrap_or(0.5);
            let eps = pgi_eps(gamma, c_exp)?;
            params.insert("c_exp", json!(c_exp));
            params.insert("pgi_eps", json!(eps));
            let mut cfg = QglConfig::practical(eps, 1.0 / 3.0)?;
            let flags = LearnerFlags { gamma: None, ..a.learner.clone() };
            apply_learner_flags(&mut cfg, &flags, &mut params);
            params.insert("gamma", json!(gamma));
            let rep = qgl_main_with(&f, &cfg, &mut rng)?;
            extra.insert("found", json!(rep.list_size > 0));
            ("pgi", rep.chosen, rep.est_correlation, Some(rep.list_size))
        }
        Algo::Decompose => {
            let mut cfg = DecomposeConfig::practical(a.eps)?;
            apply_learner_flags(&mut cfg.qgl, &a.learner, &mut params);
            let d = decompose_with(&f, &cfg, &mut rng)?;
            let terms: Vec<Value> = d
                .terms
                .iter()
                .map(|(c, p)| json!({"coef": ComplexJson::from(*c), "quadratic": QuadraticJson::from(p)}))
                .collect();
            extra.insert("terms", Value::Array(terms));
            extra.insert("stop", json!(format!("{:?}", d.stop)));
            extra.insert("residual_u3_estimate", json!(d.residual_u3_estimate));
            extra.insert("residual_l1_estimate", json!(d.residual_l1_estimate));
            let structured = TableFn::from_fn(n, |x| d.structured_value(x));
            extra.insert("residual_l2sq", json!((&table - &structured).norm2sq()));
            let (c, p) = d.terms.first().cloned().unwrap_or((C64::new(0.0, 0.0), Quadratic::zero(n)));
            ("decompose", p, c, None)
        }
    };
    let runtime_ms = a.timing.then(|| start.elapsed().as_millis() as u64);
    let report = Report {
        n,
        algo: name,
        params,
        seed: a.seed,
        queries: f.queries(),
        runtime_ms,
        quadratic: QuadraticJson::from(&quadratic),
        est_correlation: est.into(),
        oracle_u3,
        list_size,
        extra,
    };
    let text = if a.json { serde_json::to_string_pretty(&report)? + "\n" } else { report.human() };
    emit(&text, a.out.as_deref())
}

fn oracle(a: OracleArgs) -> Result<()> {
    let t = FunctionFile::load(&a.input).map_err(arg_err)?.table();
    let n = t.dim();
    let v = match a.what.as_str() {
        "u3" => {
            let (value, q) = u3_exact(&t)?;
            json!({"n": n, "oracle": "u3", "value": value, "quadratic": QuadraticJson::from(&q)})
        }
        "U3" => json!({"n": n, "oracle": "U3", "value": gowers_u3_exact(&t)?}),
        "spec" => {
            let s = spec_exact(&t)?;
            let pts: Vec<Value> =
                s.iter().map(|p| json!({"a": format!("{:x}", p.a.bits()), "b": format!("{:x}", p.b.bits())})).collect();
            json!({"n": n, "oracle": "spec", "size": pts.len(), "points": pts})
        }
        other => {
            return Err(arg_err(format!(
                "unknown oracle {other:?}; expected u3, U3 or spec (limits: u3 n<={}, U3 n<={})",
                ORACLE_BUDGET.u3_exact, ORACLE_BUDGET.gowers_u3_exact
            )))
        }
    };
    let text = if a.json { serde_json::to_string_pretty(&v)? + "\n" } else { format!("{v}\n") };
    emit(&text, a.out.as_deref())
}

fn bench_cmd(a: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        eps: a.eps,
        delta: a.delta,
        lambda: a.lambda,
        ns: a.ns,
        seeds: a.seeds,
        t_max: a.tmax,
        p_hat: a.phat,
        rounds: a.rounds,
        dense_fallback: a.dense,
        threads: a.threads.max(1),
    };
    cfg.qgl_config()?;
    let rows = cfg.run()?;
    let means = mean_queries(&rows);
    let slope = log_log_slope(&means);
    let text = if a.json {
        let v = json!({
            "means": means.iter().map(|(n, m)| json!({"n": n, "mean_queries": m})).collect::<Vec<_>>(),
            "slope": slope,
            "recovered": rows.iter().filter(|r| r.recovered).count(),
            "runs": rows.len(),
        });
        serde_json::to_string_pretty(&v)? + "\n"
    } else {
        to_csv(&rows)
    };
    emit(&text, a.out.as_deref())?;
    for (n, m) in &means {
        eprintln!("n={n} mean_queries={m:.0}");
    }
    match slope {
        Some(s) => eprintln!("slope={s:.4}"),
        None => eprintln!("slope=n/a"),
    }
    Ok(())
}
