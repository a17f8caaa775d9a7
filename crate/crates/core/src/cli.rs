// Copyright 2026 The twobit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! The `twobit` command-line tool.
//!
//! Exit codes: 0 success, 1 property violation or replay mismatch, 2 usage,
//! configuration or input error. The output directory is `--out`, else
//! `$TWOBIT_OUT_DIR`, else `twobit-out`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::checker::{
    brute_force_linearize, check_atomicity, check_liveness, check_network, extract_ops, Code, Verdict, Violation,
    DEFAULT_BOUND,
};
use crate::metrics::{bench_configs, compare_table1};
use crate::sim::config::{Algorithm, DelayModel, SimConfig, WorkloadSpec, WriterReads};
use crate::sim::engine::run;
use crate::sim::fuzz::{child_config, standard_fuzz_config};
use crate::sim::replay::replay;
use crate::sim::time::Time;
use crate::sim::trace::Trace;
use crate::types::ProcessId;

pub const OUT_DIR_ENV: &str = "TWOBIT_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "twobit-out";

#[derive(Parser, Debug)]
#[command(
    name = "twobit",
    version,
    about = "Simulate, check and benchmark the two-bit atomic register"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one simulation and write its trace, metrics and verdict.
    Run(RunArgs),
    /// Run many adversarial schedules derived from one configuration.
    Fuzz(FuzzArgs),
    /// Check a recorded trace.
    Check(CheckArgs),
    /// Compare message counts, control bits and latencies with ABD.
    Bench(BenchArgs),
    /// Replay a trace against its configuration.
    Replay(ReplayArgs),
}

/// Flags that override keys of the configuration file.
#[derive(Args, Debug, Default, Clone)]
pub struct ConfigFlags {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub writer: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgoArg>,
    /// Fixed message delay Δ, e.g. `1` or `3/2`.
    #[arg(long)]
    pub delta: Option<Time>,
    /// Adversarial reordering with delays in (0, MAX].
    #[arg(long, conflicts_with = "delta")]
    pub adversarial: Option<Time>,
    #[arg(long)]
    pub writes: Option<u64>,
    #[arg(long)]
    pub reads_per_reader: Option<u64>,
    /// Comma-separated reader ids.
    #[arg(long, value_delimiter = ',')]
    pub readers: Option<Vec<u32>>,
    #[arg(long)]
    pub step_budget: Option<u64>,
    #[arg(long, value_enum)]
    pub writer_reads: Option<WriterReadsArg>,
    /// Disable the per-event invariant monitors.
    #[arg(long)]
    pub no_monitors: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Twobit,
    Abd,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Algorithm {
        match a {
            AlgoArg::Twobit => Algorithm::Twobit,
            AlgoArg::Abd => Algorithm::Abd,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WriterReadsArg {
    Fast,
    Protocol,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub cfg: ConfigFlags,
    /// Trace path; defaults to `<out>/trace.jsonl`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FuzzArgs {
    /// Without `--config` the standard n = 5, t = 2 crash setup is used.
    #[command(flatten)]
    pub cfg: ConfigFlags,
    #[arg(long, default_value_t = 1000)]
    pub count: u64,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub trace: PathBuf,
    /// Also run the exhaustive linearizability search.
    #[arg(long)]
    pub brute_force: bool,
    #[arg(long, default_value_t = DEFAULT_BOUND)]
    pub bound: usize,
    /// Configuration of the run, enabling the planned-operation check.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [3usize, 5, 7, 9])]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [AlgoArg::Twobit, AlgoArg::Abd])]
    pub algos: Vec<AlgoArg>,
    #[arg(long, default_value_t = 150)]
    pub writes: u64,
    #[arg(long, default_value_t = 10)]
    pub reads_per_reader: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [ReportFormat::Csv, ReportFormat::Json])]
    pub format: Vec<ReportFormat>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    pub trace: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigSource {
    Path(PathBuf),
    Inline(Box<SimConfig>),
}

/// Everything an experiment needs, resolved from flags and files.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentManifest {
    pub config_source: ConfigSource,
    pub config: SimConfig,
    pub out_dir: PathBuf,
    pub monitors: bool,
    pub fuzz_count: u64,
    pub brute_force_bound: usize,
    pub formats: Vec<ReportFormat>,
}

impl ExperimentManifest {
    pub fn validate(&self) -> Result<(), CliError> {
        if let ConfigSource::Path(p) = &self.config_source {
            if !p.exists() {
                return Err(CliError::Usage(format!("{} does not exist", p.display())));
            }
        }
        if self.fuzz_count == 0 {
            return Err(CliError::Usage("fuzz count must be >= 1".into()));
        }
        self.config.validate().map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Violation(_) => 1,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn out_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Builds the configuration: file (or `base`), then flags on top.
pub fn resolve_config(f: &ConfigFlags, base: Option<SimConfig>) -> Result<(ConfigSource, SimConfig), CliError> {
    let (source, mut c) = match (&f.config, base) {
        (Some(p), _) => (ConfigSource::Path(p.clone()), SimConfig::load(p).map_err(usage)?),
        (None, Some(b)) => (ConfigSource::Inline(Box::new(b.clone())), b),
        (None, None) => {
            let (Some(n), Some(t)) = (f.n, f.t) else {
                return Err(CliError::Usage("give --config or both --n and --t".into()));
            };
            let c = SimConfig::new(n, t);
            (ConfigSource::Inline(Box::new(c.clone())), c)
        }
    };
    if let Some(n) = f.n {
        c.n = n;
    }
    if let Some(t) = f.t {
        c.t = t;
    }
    if let Some(w) = f.writer {
        c.writer = ProcessId(w);
    }
    if let Some(s) = f.seed {
        c.seed = s;
    }
    if let Some(a) = f.algorithm {
        c.algorithm = a.into();
    }
    if let Some(d) = f.delta {
        c.delay = DelayModel::Fixed { delta: d };
    }
    if let Some(m) = f.adversarial {
        c.delay = DelayModel::AdversarialReorder { max: m };
    }
    if f.writes.is_some() || f.reads_per_reader.is_some() || f.readers.is_some() {
        let mut w: WorkloadSpec = c.effective_workload();
        if let Some(x) = f.writes {
            w.writes = x;
        }
        if let Some(x) = f.reads_per_reader {
            w.reads_per_reader = x;
        }
        if let Some(r) = &f.readers {
            w.readers = r.iter().copied().map(ProcessId).collect();
        }
        c.workload = Some(w);
    }
    if let Some(b) = f.step_budget {
        c.step_budget = b;
    }
    if let Some(w) = f.writer_reads {
        c.writer_reads = match w {
            WriterReadsArg::Fast => WriterReads::Fast,
            WriterReadsArg::Protocol => WriterReads::Protocol,
        };
    }
    if f.no_monitors {
        c.monitors = false;
    }
    c.validate().map_err(usage)?;
    let source = match source {
        ConfigSource::Inline(_) => ConfigSource::Inline(Box::new(c.clone())),
        p => p,
    };
    Ok((source, c))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_run(a: &RunArgs) -> Result<(), CliError> {
    let (source, config) = resolve_config(&a.cfg, None)?;
    let m = ExperimentManifest {
        monitors: config.monitors,
        config_source: source,
        config,
        out_dir: out_dir(a.out.as_deref()),
        fuzz_count: 1,
        brute_force_bound: DEFAULT_BOUND,
        formats: vec![ReportFormat::Json],
    };
    m.validate()?;
    let out = run(&m.config).map_err(usage)?;
    let trace_path = a.trace.clone().unwrap_or_else(|| m.out_dir.join("trace.jsonl"));
    write_file(&trace_path, &out.trace.to_jsonl())?;
    write_file(&m.out_dir.join("metrics.json"), &out.metrics.to_json_pretty())?;
    write_file(&m.out_dir.join("ops.csv"), &out.metrics.ops_to_csv().map_err(usage)?)?;
    write_file(
        &m.out_dir.join("verdict.json"),
        &serde_json::to_string_pretty(&out.verdict).expect("verdict serializes"),
    )?;
    write_file(&m.out_dir.join("config.json"), &m.config.to_json_pretty())?;
    println!(
        "{} run: n={} t={} seed={} steps={} ops={} messages={} -> {}",
        m.config.algorithm.name(),
        m.config.n,
        m.config.t,
        m.config.seed,
        out.steps,
        out.metrics.ops.len(),
        out.metrics.sends,
        out.verdict
    );
    if out.verdict.accepted {
        Ok(())
    } else {
        Err(CliError::Violation(format!(
            "{} violation(s)",
            out.verdict.violations.len()
        )))
    }
}

#[derive(Serialize)]
struct FuzzFailure {
    index: u64,
    seed: u64,
    codes: Vec<Code>,
    repro: PathBuf,
}

fn cmd_fuzz(a: &FuzzArgs) -> Result<(), CliError> {
    let base = a
        .cfg
        .config
        .is_none()
        .then(|| standard_fuzz_config(a.cfg.seed.unwrap_or(0)));
    let (source, config) = resolve_config(&a.cfg, base)?;
    let m = ExperimentManifest {
        monitors: config.monitors,
        config_source: source,
        config,
        out_dir: out_dir(a.out.as_deref()),
        fuzz_count: a.count,
        brute_force_bound: DEFAULT_BOUND,
        formats: vec![ReportFormat::Json],
    };
    m.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.workers.unwrap_or(0))
        .build()
        .map_err(usage)?;
    let master = &m.config;
    let results: Vec<(u64, SimConfig, Verdict)> = pool.install(|| {
        (0..m.fuzz_count)
            .into_par_iter()
            .map(|i| {
                let c = child_config(master, i);
                let v = run(&c).expect("child config is valid").verdict;
                (i, c, v)
            })
            .collect()
    });
    let mut failures = Vec::new();
    for (index, c, v) in &results {
        if !v.accepted {
            let repro = m.out_dir.join(format!("repro-{index}.json"));
            write_file(&repro, &c.to_json_pretty())?;
            failures.push(FuzzFailure {
                index: *index,
                seed: c.seed,
                codes: v.codes(),
                repro,
            });
        }
    }
    let min_seed = failures.iter().map(|f| f.seed).min();
    let summary = json!({
        "master": master,
        "count": m.fuzz_count,
        "failed": failures.len(),
        "min_failing_seed": min_seed,
        "failures": failures,
    });
    write_file(
        &m.out_dir.join("fuzz-summary.json"),
        &serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    println!("fuzz: {} runs, {} failed", m.fuzz_count, failures.len());
    match min_seed {
        None => Ok(()),
        Some(seed) => Err(CliError::Violation(format!(
            "minimal failing seed {seed} (repro configs in {})",
            m.out_dir.display()
        ))),
    }
}

fn cmd_check(a: &CheckArgs) -> Result<(), CliError> {
    let trace = Trace::load(&a.trace).map_err(usage)?;
    let cfg = match &a.config {
        Some(p) => SimConfig::load(p).map_err(usage)?,
        None => {
            let h = &trace.header;
            let mut c = SimConfig::new(h.n, h.t);
            c.writer = h.writer;
            c.v0 = h.v0.clone();
            c.value_mode = h.value_mode;
            c.workload = Some(WorkloadSpec::empty());
            c
        }
    };
    let ops = extract_ops(&trace);
    let mut verdict = check_atomicity(&ops, &trace.header.v0).map_err(usage)?;
    verdict.merge(check_liveness(&trace, &cfg));
    verdict.merge(check_network(&trace, true));
    let mut brute = serde_json::Value::Null;
    if a.brute_force {
        brute = match brute_force_linearize(&ops, &trace.header.v0, a.bound) {
            Ok(lin) => {
                let sn_ok = check_atomicity(&ops, &trace.header.v0).map_err(usage)?.accepted;
                if lin != sn_ok {
                    verdict.push(Violation::new(
                        Code::LIN,
                        format!("exhaustive search says {lin}, sequence-number check says {sn_ok}"),
                    ));
                } else if !lin {
                    verdict.push(Violation::new(Code::LIN, "no linearization exists"));
                }
                json!({"linearizable": lin})
            }
            Err(e) => json!({"refused": e.to_string()}),
        };
    }
    let out = json!({"ops": ops.len(), "verdict": verdict, "brute_force": brute});
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    if verdict.accepted {
        Ok(())
    } else {
        Err(CliError::Violation(format!("{:?}", verdict.codes())))
    }
}

fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let algos: Vec<Algorithm> = a.algos.iter().map(|&x| x.into()).collect();
    let cfgs = bench_configs(&a.n, &algos, a.writes, a.reads_per_reader, a.seed);
    let m = ExperimentManifest {
        config_source: ConfigSource::Inline(Box::new(cfgs.first().cloned().ok_or_else(|| usage("no --n given"))?)),
        config: cfgs[0].clone(),
        out_dir: out_dir(a.out.as_deref()),
        monitors: true,
        fuzz_count: 1,
        brute_force_bound: DEFAULT_BOUND,
        formats: a.format.clone(),
    };
    m.validate()?;
    for c in &cfgs {
        c.validate().map_err(usage)?;
    }
    let table = compare_table1(&cfgs).map_err(usage)?;
    let csv = table.to_csv().map_err(usage)?;
    if m.formats.contains(&ReportFormat::Csv) {
        write_file(&m.out_dir.join("table1.csv"), &csv)?;
    }
    if m.formats.contains(&ReportFormat::Json) {
        write_file(&m.out_dir.join("table1.json"), &table.to_json_pretty())?;
    }
    print!("{csv}");
    if table.all_conform() {
        Ok(())
    } else {
        Err(CliError::Violation("some rows do not meet the latency bounds".into()))
    }
}

fn cmd_replay(a: &ReplayArgs) -> Result<(), CliError> {
    let trace = Trace::load(&a.trace).map_err(usage)?;
    let cfg = SimConfig::load(&a.config).map_err(usage)?;
    let report = replay(&trace, &cfg).map_err(usage)?;
    match &report.mismatch {
        None => {
            println!(
                "replay matched: {} records, {} fingerprints",
                report.records,
                report.fingerprints.len()
            );
            Ok(())
        }
        Some(mm) => {
            let at = mm.record.map_or("header".to_string(), |i| format!("record {i}"));
            Err(CliError::Violation(format!("replay mismatch at {at}: {}", mm.reason)))
        }
    }
}

/// Parses `args` and runs the command, returning the exit code.
pub fn run_cli<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let res = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Fuzz(a) => cmd_fuzz(a),
        Command::Check(a) => cmd_check(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Replay(a) => cmd_replay(a),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("twobit: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(run_cli(std::env::args_os()))
}
