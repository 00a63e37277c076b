//! `pdsch-bench`: run `.app` graphs, conformance tests, sweeps and reports.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation or diagnostic
//! failure, 3 conformance failure.

mod config;
mod manifest;

use std::ffi::OsString;
use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use pdsch_bench::channel::Snr;
use pdsch_bench::harness::plot::{cost_by_mcs, fig3_svg, fig4a_svg, fig4b_svg};
use pdsch_bench::harness::{
    conformance_ber, conformance_bler, emit_cost_csv, emit_csv, read_cost_csv, read_csv, run_id, sweep,
    BlerPoint, LinkConfig, PointStatus, SweepSpec,
};
use pdsch_bench::lte::{install_tables, LteTables, MAX_MCS};
use pdsch_bench::pipeline::{parse_app, run_graph, write_cost_csv};

use config::{parse_throughput, throughput_name, Defaults};
use manifest::{Fixtures, RunManifest, MANIFEST_FILE};

/// Environment variable naming a directory with `mcs_table.csv` and
/// `tbs_6prb.csv` to use instead of the embedded tables.
const FIXTURES_ENV: &str = "PDSCH_BENCH_FIXTURES";

const RESULTS_FILE: &str = "results.csv";
const COST_FILE: &str = "cost.csv";

#[derive(Debug, Parser)]
#[command(name = "pdsch-bench", version, about = "LTE PDSCH link-level benchmark workbench")]
struct Cli {
    /// Defaults file (`key = value` lines); see pdsch-bench.conf.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a `.app` dataflow file for a number of iterations.
    Run(RunArgs),
    /// Uncoded BER or coded BLER conformance test.
    Conformance(ConformanceArgs),
    /// BLER, throughput and cost over a grid of operating points.
    Sweep(SweepArgs),
    /// Re-emit the CSV files and plots of a sweep directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    app: PathBuf,
    /// Iterations (subframes) to run.
    #[arg(long, default_value_t = 1)]
    iters: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the per-block cost CSV and a manifest here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("test").required(true).args(["ber", "bler"])))]
struct ConformanceArgs {
    /// Uncoded BER against the Gray-QAM closed form.
    #[arg(long)]
    ber: bool,
    /// Coded BLER at one operating point against the 10 % target.
    #[arg(long)]
    bler: bool,
    /// Modulation order for --ber (2, 4 or 6); all three when omitted.
    #[arg(long)]
    qm: Option<usize>,
    /// MCS for --bler.
    #[arg(long)]
    mcs: Option<u8>,
    /// Es/N0 list in dB for --ber, one SNR for --bler.
    #[arg(long, allow_hyphen_values = true)]
    snr: String,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    bits: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write a JSON report and manifest here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// MCS range `a..b` (inclusive) or comma list.
    #[arg(long, required_unless_present = "from_manifest")]
    mcs: Option<String>,
    /// Comma-separated SNRs in dB; `noiseless` is accepted.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "from_manifest")]
    snr: Option<String>,
    /// Comma-separated decoder iteration counts.
    #[arg(long)]
    iters: Option<String>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Early stop after this many block errors; 0 disables it.
    #[arg(long)]
    max_errors: Option<usize>,
    /// Run points in parallel; timing columns stay empty.
    #[arg(long)]
    parallel: bool,
    /// offered or goodput.
    #[arg(long)]
    throughput: Option<String>,
    /// Skip MCS whose code rate exceeds 0.93.
    #[arg(long)]
    enforce_rate_cap: bool,
    /// Repeat the sweep recorded in this manifest; other sweep flags are ignored.
    #[arg(long, conflicts_with_all = ["mcs", "snr"])]
    from_manifest: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Output directory; defaults to the input directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A malformed flag value; exits with the usage code.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

enum Status {
    Pass,
    ConformanceFail,
}

/// Sweep parameters as stored in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SweepParams {
    mcs: Vec<u8>,
    snr: Vec<String>,
    iterations: Vec<usize>,
    blocks: usize,
    max_block_errors: usize,
    seed: u64,
    parallel: bool,
    throughput: String,
    enforce_rate_cap: bool,
}

impl SweepParams {
    fn spec(&self) -> Result<SweepSpec> {
        let snr = self
            .snr
            .iter()
            .map(|s| Snr::parse(s).map_err(|e| UsageError(format!("snr `{s}`: {e}")).into()))
            .collect::<Result<Vec<_>>>()?;
        let mut spec = SweepSpec::new(self.mcs.clone(), snr, self.iterations.clone(), self.blocks, self.seed);
        spec.min_block_errors = (self.max_block_errors > 0).then_some(self.max_block_errors);
        spec.isolation = !self.parallel;
        spec.throughput = parse_throughput(&self.throughput)?;
        spec.enforce_rate_cap = self.enforce_rate_cap;
        Ok(spec)
    }
}

fn parse_mcs_list(s: &str) -> Result<Vec<u8>> {
    let num = |t: &str| -> Result<u8> {
        match t.trim().parse::<u8>() {
            Ok(v) if v <= MAX_MCS => Ok(v),
            _ => usage(format!("mcs `{t}` is not in 0..={MAX_MCS}")),
        }
    };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return usage(format!("empty mcs range `{s}`"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| match t.trim().parse() {
            Ok(v) => Ok(v),
            Err(_) => usage(format!("bad {what} `{t}`")),
        })
        .collect()
}

fn parse_snr_list(s: &str) -> Result<Vec<String>> {
    s.split(',')
        .map(|t| match Snr::parse(t) {
            Ok(snr) => Ok(snr_text(snr)),
            Err(_) => usage(format!("bad snr `{t}`")),
        })
        .collect()
}

/// Shortest text that parses back to the same SNR.
fn snr_text(s: Snr) -> String {
    match s {
        Snr::Db(v) => format!("{v}"),
        Snr::Noiseless => "noiseless".into(),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn fixtures_from_env() -> Result<Option<PathBuf>> {
    let Some(dir) = std::env::var_os(FIXTURES_ENV).map(PathBuf::from) else {
        return Ok(None);
    };
    let t = LteTables::from_dir(&dir).with_context(|| format!("{FIXTURES_ENV}={}", dir.display()))?;
    install_tables(t)?;
    Ok(Some(dir))
}

fn cmd_run(a: &RunArgs, d: &Defaults, fixtures: &Fixtures) -> Result<Status> {
    let text = std::fs::read_to_string(&a.app).with_context(|| format!("reading {}", a.app.display()))?;
    let g = parse_app(&text).map_err(|e| anyhow::anyhow!("{}:{e}", a.app.display()))?;
    let seed = a.seed.unwrap_or(d.seed);
    let res = run_graph(&g, a.iters, seed)?;
    for (name, payloads) in &res.sinks {
        println!("sink {name}: {} payloads, {} items", payloads.len(), res.sink_items(name));
    }
    println!("sink_hash {}", res.sink_hash());
    let cost = res.phy_cost_report().or_else(|_| res.cost_report())?;
    for b in &cost.blocks {
        println!("  {:<12} {:>6} calls {:>12} ns {:>6.2} %", b.block, b.calls, b.total_ns, 100.0 * b.share);
    }
    if let Some(out) = &a.out {
        create_dir(out)?;
        let mut f = File::create(out.join(COST_FILE))?;
        write_cost_csv(&mut f, "run", &cost, true)?;
        let params = json!({
            "app": a.app.display().to_string(),
            "app_sha256": sha256_hex(text.as_bytes()),
            "iters": a.iters,
            "sink_hash": res.sink_hash(),
        });
        RunManifest::new("run", params, seed, fixtures.clone()).write(&out.join(MANIFEST_FILE))?;
    }
    Ok(Status::Pass)
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

fn cmd_conformance(a: &ConformanceArgs, d: &Defaults, fixtures: &Fixtures) -> Result<Status> {
    let seed = a.seed.unwrap_or(d.seed);
    let (pass, report) = if a.ber {
        let qms = match a.qm {
            Some(q @ (2 | 4 | 6)) => vec![q],
            Some(q) => return usage(format!("qm must be 2, 4 or 6, got {q}")),
            None => vec![2, 4, 6],
        };
        let snr = parse_snr_list(&a.snr)?
            .iter()
            .map(|s| Snr::parse(s).expect("validated"))
            .collect::<Vec<_>>();
        let bits = a.bits.unwrap_or(d.ber_bits);
        let mut pass = true;
        let mut rows = Vec::new();
        for qm in qms {
            let r = conformance_ber(qm, &snr, bits, seed)?;
            for c in &r.checks {
                println!(
                    "qm {qm} Es/N0 {}: measured {:.4e} ({} / {}), theory {:.4e}, {:+.2} sigma: {}",
                    c.snr,
                    c.measured,
                    c.errors,
                    c.bits,
                    c.theory,
                    if c.sigma > 0.0 { (c.measured - c.theory) / c.sigma } else { 0.0 },
                    if c.pass { "pass" } else { "FAIL" }
                );
                rows.push(json!({
                    "qm": qm, "snr": snr_text(c.snr), "bits": c.bits, "errors": c.errors,
                    "measured": c.measured, "theory": c.theory, "pass": c.pass,
                }));
            }
            pass &= r.pass();
        }
        (pass, json!({ "test": "ber", "bits": bits, "points": rows }))
    } else {
        let Some(mcs) = a.mcs else {
            return usage("--bler needs --mcs");
        };
        if mcs > MAX_MCS {
            return usage(format!("mcs {mcs} is not in 0..={MAX_MCS}"));
        }
        let snr = match Snr::parse(&a.snr) {
            Ok(s) => s,
            Err(_) => return usage(format!("bad snr `{}`", a.snr)),
        };
        let iterations = a.iters.unwrap_or(d.iterations);
        let blocks = a.blocks.unwrap_or(d.blocks);
        let link = LinkConfig { mcs, snr, iterations };
        let c = conformance_bler(&link, blocks, seed)?;
        println!(
            "mcs {mcs} snr {} iterations {iterations}: bler {:.4} ({} / {}), 95% CI [{:.4}, {:.4}]: {}",
            snr,
            c.point.bler,
            c.point.block_errors,
            c.point.blocks,
            c.interval.0,
            c.interval.1,
            if c.pass { "pass" } else { "FAIL" }
        );
        (
            c.pass,
            json!({
                "test": "bler", "mcs": mcs, "snr": snr_text(snr), "iterations": iterations,
                "blocks": c.point.blocks, "block_errors": c.point.block_errors, "bler": c.point.bler,
                "interval": [c.interval.0, c.interval.1], "pass": c.pass,
            }),
        )
    };
    if let Some(out) = &a.out {
        create_dir(out)?;
        std::fs::write(out.join("conformance.json"), serde_json::to_string_pretty(&report)? + "\n")?;
        RunManifest::new("conformance", report, seed, fixtures.clone()).write(&out.join(MANIFEST_FILE))?;
    }
    Ok(if pass { Status::Pass } else { Status::ConformanceFail })
}

fn sweep_params(a: &SweepArgs, d: &Defaults, fixtures: &Fixtures) -> Result<SweepParams> {
    if let Some(path) = &a.from_manifest {
        let m = RunManifest::read(path)?;
        if m.command != "sweep" {
            bail!("{} records a `{}` run, not a sweep", path.display(), m.command);
        }
        if !m.fixtures.same_tables(fixtures) {
            bail!("{} was produced with different MCS/TBS fixtures", path.display());
        }
        return serde_json::from_value(m.params).with_context(|| format!("parameters in {}", path.display()));
    }
    let throughput = match &a.throughput {
        Some(t) => throughput_name(parse_throughput(t).map_err(|e| UsageError(e.to_string()))?),
        None => throughput_name(d.throughput),
    };
    Ok(SweepParams {
        mcs: parse_mcs_list(a.mcs.as_deref().expect("required by clap"))?,
        snr: parse_snr_list(a.snr.as_deref().expect("required by clap"))?,
        iterations: match &a.iters {
            Some(s) => parse_list(s, "iteration count")?,
            None => vec![d.iterations],
        },
        blocks: a.blocks.unwrap_or(d.blocks),
        max_block_errors: a.max_errors.unwrap_or(d.max_block_errors),
        seed: a.seed.unwrap_or(d.seed),
        parallel: a.parallel,
        throughput: throughput.into(),
        enforce_rate_cap: a.enforce_rate_cap,
    })
}

fn write_outputs(dir: &Path, points: &[BlerPoint]) -> Result<()> {
    create_dir(dir)?;
    emit_csv(File::create(dir.join(RESULTS_FILE))?, points)?;
    if points.iter().any(|p| p.cost.is_some()) {
        emit_cost_csv(File::create(dir.join(COST_FILE))?, points)?;
    }
    std::fs::write(dir.join("fig3.svg"), fig3_svg(points))?;
    std::fs::write(dir.join("fig4a.svg"), fig4a_svg(points))?;
    std::fs::write(dir.join("fig4b.svg"), fig4b_svg(&cost_by_mcs(points)))?;
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, d: &Defaults, fixtures: &Fixtures) -> Result<Status> {
    let params = sweep_params(a, d, fixtures)?;
    let spec = params.spec()?;
    let points = sweep(&spec)?;
    write_outputs(&a.out, &points)?;
    RunManifest::new("sweep", serde_json::to_value(&params)?, params.seed, fixtures.clone())
        .write(&a.out.join(MANIFEST_FILE))?;
    let mut failed = Vec::new();
    for p in &points {
        match &p.status {
            PointStatus::Done => println!(
                "mcs {:>2} snr {:>9} it {}: {:>5} blocks, bler {:.4}, ber {:.3e}",
                p.mcs, p.snr, p.iterations, p.blocks, p.bler, p.ber
            ),
            PointStatus::Skipped(why) => eprintln!("{}: skipped: {why}", run_id(p)),
            PointStatus::Failed(why) => failed.push(format!("{}: {why}", run_id(p))),
        }
    }
    if !failed.is_empty() {
        bail!("{} point(s) failed:\n{}", failed.len(), failed.join("\n"));
    }
    println!("wrote {}", a.out.display());
    Ok(Status::Pass)
}

fn cmd_report(a: &ReportArgs, fixtures: &Fixtures) -> Result<Status> {
    let results = a.input.join(RESULTS_FILE);
    let mut points = read_csv(File::open(&results).with_context(|| format!("opening {}", results.display()))?)?;
    let cost_path = a.input.join(COST_FILE);
    if cost_path.exists() {
        let costs = read_cost_csv(File::open(&cost_path)?)?;
        for p in &mut points {
            let id = run_id(p);
            p.cost = costs.iter().find(|(r, _)| *r == id).map(|(_, c)| c.clone());
        }
    }
    let out = a.out.clone().unwrap_or_else(|| a.input.clone());
    write_outputs(&out, &points)?;
    if out != a.input {
        let source = RunManifest::read(&a.input.join(MANIFEST_FILE)).ok();
        let seed = source.as_ref().map_or(0, |m| m.seed);
        let params = json!({ "in": a.input.display().to_string(), "source": source });
        RunManifest::new("report", params, seed, fixtures.clone()).write(&out.join(MANIFEST_FILE))?;
    }
    println!("{} points re-emitted to {}", points.len(), out.display());
    Ok(Status::Pass)
}

fn dispatch(cli: Cli) -> Result<Status> {
    let defaults = Defaults::load(cli.config.as_deref())?;
    let dir = fixtures_from_env()?;
    let fixtures = Fixtures::current(dir.as_deref());
    match &cli.command {
        Command::Run(a) => cmd_run(a, &defaults, &fixtures),
        Command::Conformance(a) => cmd_conformance(a, &defaults, &fixtures),
        Command::Sweep(a) => cmd_sweep(a, &defaults, &fixtures),
        Command::Report(a) => cmd_report(a, &fixtures),
    }
}

fn execute<I: IntoIterator<Item = OsString>>(argv: I) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(Status::Pass) => 0,
        Ok(Status::ConformanceFail) => 3,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                1
            } else {
                2
            }
        }
    }
}

fn main() {
    std::process::exit(execute(std::env::args_os()));
}
