//! Command implementations behind the `mvcstm` binary.

use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use mvcstm::engine::{EngineConfig, GcPolicy, VersionMode};
use mvcstm::harness::{replay_adversary, run_workload, AdversaryScript, HarnessError, Schedule, WorkloadConfig};
use mvcstm::membership::{
    check_co_opacity, check_mvc_local_opacity, check_mvc_opacity, check_mvc_opacity_bruteforce,
    check_opacity_bruteforce, join_ids, CheckOptions, Verdict,
};
use mvcstm::semantics::{is_legal, is_multiversioned, is_valid};
use mvcstm::trace::{parse_trace, serialize_trace, ParseError};
use mvcstm::{build_mvcg, export_dot, CheckError, History, HistoryError};

#[derive(Debug, Parser)]
#[command(name = "mvcstm", version, about = "Check STM histories and run the multi-version SGT engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report every class the history belongs to.
    Classify {
        file: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
        /// Largest transaction count handed to the brute-force checkers.
        #[arg(long, default_value_t = 8)]
        bound: usize,
    },
    /// Write the conflict graph in DOT format.
    Graph {
        file: PathBuf,
        /// Output path; `-` writes to stdout.
        #[arg(long)]
        dot: PathBuf,
        /// Leave out the initial transaction T0.
        #[arg(long)]
        ignore_t0: bool,
    },
    /// Compare the graph checker with the brute-force search.
    Oracle {
        file: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
        #[arg(long, default_value_t = 8)]
        bound: usize,
    },
    /// Run a workload through the engine and record the history.
    Simulate(SimulateArgs),
    /// Classify every choice and branch of an adversary script.
    Replay {
        file: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Exit with status 1 when the history is not mvc-opaque.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    /// `key: value` lines.
    Kv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Multi,
    Single,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 20)]
    pub txns: usize,
    #[arg(long, default_value_t = 4)]
    pub objects: usize,
    /// Operations per transaction, `N` or `MIN-MAX`.
    #[arg(long, default_value = "1-4", value_parser = parse_range)]
    pub ops: RangeInclusive<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub read_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Multi)]
    pub mode: Mode,
    /// Worker threads; 1 replays the generated interleaving exactly.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Transactions open at once while generating the workload.
    #[arg(long, default_value_t = 4)]
    pub concurrency: usize,
    /// Collect garbage after this many commits.
    #[arg(long)]
    pub gc_every: Option<usize>,
    /// Replay this trace or script instead of generating a workload.
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Write the recorded history here.
    #[arg(long)]
    pub emit: Option<PathBuf>,
    /// Check the recorded history and fail if it is not mvc-opaque.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let num = |p: &str| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}"));
    match s.split_once('-') {
        Some((lo, hi)) => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            if lo > hi {
                return Err(format!("empty range {s}"));
            }
            Ok(lo..=hi)
        }
        None => num(s).map(|n| n..=n),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Malformed { path: String, source: HistoryError },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Harness(#[from] HarnessError),
    #[error("graph checker and brute-force search disagree")]
    Disagreement,
    #[error("recorded history is not mvc-opaque: {0}")]
    Violation(String),
    #[error("{0}")]
    Negative(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Negative(_) | CliError::Violation(_) => 1,
            CliError::Parse { .. } | CliError::Malformed { .. } | CliError::Harness(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Disagreement => 4,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(io_error(path))
}

fn load_history(path: &Path) -> Result<History, CliError> {
    let text = read(path)?;
    let p = || path.display().to_string();
    let events = parse_trace(&text).map_err(|source| CliError::Parse { path: p(), source })?;
    History::build(events).map_err(|source| CliError::Malformed { path: p(), source })
}

fn write_out(path: &Path, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    if path == Path::new("-") {
        out.write_all(text.as_bytes()).map_err(io_error(path))
    } else {
        fs::write(path, text).map_err(io_error(path))
    }
}

/// Collects `key: value` pairs and renders them in either format.
struct Report<'a> {
    format: Format,
    out: &'a mut dyn Write,
}

impl Report<'_> {
    fn line(&mut self, key: &str, value: impl Display) -> Result<(), CliError> {
        let text = match self.format {
            Format::Kv => format!("{key}: {value}\n"),
            Format::Human => format!("{:<24} {value}\n", key.replace('_', " ")),
        };
        self.out.write_all(text.as_bytes()).map_err(io_error(Path::new("<stdout>")))
    }

    fn verdict(&mut self, prefix: &str, v: &Verdict) -> Result<(), CliError> {
        self.line(prefix, yes_no(v.member))?;
        if let Some(order) = v.witness_order() {
            self.line(&format!("{prefix}_witness"), join_ids(order))?;
        } else if let Some(cycle) = v.cycle() {
            self.line(&format!("{prefix}_cycle"), join_ids(cycle))?;
        } else if let Some(e) = &v.evidence {
            self.line(&format!("{prefix}_evidence"), e)?;
        }
        Ok(())
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn tri(r: Result<bool, HistoryError>) -> &'static str {
    match r {
        Ok(b) => yes_no(b),
        Err(_) => "n/a",
    }
}

fn classify(path: &Path, args: &ReportArgs, bound: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let h = load_history(path)?;
    let opts = CheckOptions { bound, ..CheckOptions::default() };
    let mut r = Report { format: args.format, out };
    r.line("transactions", h.txn_count())?;
    r.line("sequential", yes_no(h.is_sequential()))?;
    r.line("valid", yes_no(is_valid(&h)))?;
    r.line("legal", tri(is_legal(&h)))?;
    r.line("multiversioned", tri(is_multiversioned(&h)))?;
    match check_co_opacity(&h, &opts) {
        Ok(v) => r.line("co_opaque", yes_no(v.member))?,
        Err(CheckError::TooLarge { txns, bound }) => r.line("co_opaque", format!("skipped: {txns} > {bound}"))?,
        Err(e) => r.line("co_opaque", format!("error: {e}"))?,
    }
    let mvc = check_mvc_opacity(&h);
    r.verdict("mvc_opaque", &mvc)?;
    match check_opacity_bruteforce(&h, &opts) {
        Ok(v) => r.verdict("opaque", &v)?,
        Err(CheckError::TooLarge { txns, bound }) => r.line("opaque", format!("skipped: {txns} > {bound}"))?,
        Err(e) => r.line("opaque", format!("error: {e}"))?,
    }
    r.verdict("mvc_local_opaque", &check_mvc_local_opacity(&h))?;
    if args.strict && !mvc.member {
        return Err(CliError::Negative("not mvc-opaque".into()));
    }
    Ok(())
}

fn graph(path: &Path, dot: &Path, ignore_t0: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let h = load_history(path)?;
    let g = build_mvcg(&h).map_err(|e| CliError::Negative(format!("no graph: {e}")))?;
    let g = if ignore_t0 { g.without_init() } else { g };
    write_out(dot, &export_dot(&g), out)
}

fn oracle(path: &Path, args: &ReportArgs, bound: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let h = load_history(path)?;
    let opts = CheckOptions { bound, ..CheckOptions::default() };
    let mut r = Report { format: args.format, out };
    let graph = check_mvc_opacity(&h);
    r.line("graph", yes_no(graph.member))?;
    let brute = match check_mvc_opacity_bruteforce(&h, &opts) {
        Ok(v) => v,
        Err(CheckError::TooLarge { txns, bound }) => {
            return r.line("oracle", format!("skipped: {txns} transactions exceed bound {bound}"));
        }
        Err(e) => return r.line("oracle", format!("error: {e}")),
    };
    r.line("bruteforce", yes_no(brute.member))?;
    if graph.member != brute.member {
        r.line("result", "DISAGREE")?;
        return Err(CliError::Disagreement);
    }
    r.line("result", "AGREE")?;
    if args.strict && !graph.member {
        return Err(CliError::Negative("not mvc-opaque".into()));
    }
    Ok(())
}

fn load_script(path: &Path) -> Result<AdversaryScript, CliError> {
    let text = read(path)?;
    AdversaryScript::parse(&text).map_err(|source| CliError::Parse { path: path.display().to_string(), source })
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let script = match &a.script {
        Some(path) => load_script(path)?,
        None => mvcstm::harness::generate_workload(&WorkloadConfig {
            threads: a.concurrency,
            txns: a.txns,
            objects: a.objects,
            ops_per_txn: a.ops.clone(),
            read_fraction: a.read_frac,
            seed: a.seed,
        }),
    };
    let config = EngineConfig {
        mode: match a.mode {
            Mode::Multi => VersionMode::Multi,
            Mode::Single => VersionMode::Single,
        },
        gc: a.gc_every.map_or(GcPolicy::Manual, GcPolicy::EveryCommits),
        ..EngineConfig::default()
    };
    let schedule = if a.threads > 1 { Schedule::Threads(a.threads) } else { Schedule::Sequential };
    let (h, m) = run_workload(&script, config, schedule)?;
    if let Some(path) = &a.emit {
        write_out(path, &serialize_trace(h.events()), out)?;
    }
    let mut r = Report { format: a.format, out };
    r.line("commits", m.commits)?;
    r.line("aborts", m.aborts)?;
    r.line("read_fallback_aborts", m.read_fallback_aborts)?;
    r.line("versions_peak", m.versions_peak)?;
    r.line("versions_reclaimed", m.versions_reclaimed)?;
    if a.verify {
        let v = check_mvc_opacity(&h);
        r.line("verified", yes_no(v.member))?;
        if let Some(e) = v.evidence {
            return Err(CliError::Violation(e.to_string()));
        }
    }
    Ok(())
}

fn replay(path: &Path, args: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let script = load_script(path)?;
    let reports = replay_adversary(&script)?;
    let mut r = Report { format: args.format, out };
    let mut negative = false;
    for rep in &reports {
        let choices: Vec<String> = rep.choices.iter().map(|(t, x, v)| format!("r{}({x})={v}", t.0)).collect();
        let mut label = choices.join(",");
        if !rep.branch.is_empty() {
            if !label.is_empty() {
                label.push(' ');
            }
            label.push_str(&rep.branch);
        }
        let label = if label.is_empty() { "script".to_string() } else { label };
        let verdict = match (rep.verdict.witness_order(), rep.verdict.cycle()) {
            (Some(w), _) => format!("mvc-opaque witness {}", join_ids(w)),
            (None, Some(c)) => format!("not mvc-opaque cycle {}", join_ids(c)),
            _ => format!("not mvc-opaque {}", rep.verdict.evidence.as_ref().map_or(String::new(), ToString::to_string)),
        };
        let forced = if rep.must_abort.is_empty() {
            String::new()
        } else {
            format!("; must abort {}", join_ids(&rep.must_abort))
        };
        r.line(&label, format!("{verdict}{forced}"))?;
        negative |= !rep.verdict.member;
    }
    if args.strict && negative {
        return Err(CliError::Negative("some branch is not mvc-opaque".into()));
    }
    Ok(())
}

/// Runs one command, writing its report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Classify { file, report, bound } => classify(file, report, *bound, out),
        Command::Graph { file, dot, ignore_t0 } => graph(file, dot, *ignore_t0, out),
        Command::Oracle { file, report, bound } => oracle(file, report, *bound, out),
        Command::Simulate(args) => simulate(args, out),
        Command::Replay { file, report } => replay(file, report, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3").unwrap(), 3..=3);
        assert_eq!(parse_range("1-4").unwrap(), 1..=4);
        assert!(parse_range("4-1").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Disagreement.exit_code(), 4);
        assert_eq!(CliError::Negative(String::new()).exit_code(), 1);
        let io = CliError::Io { path: "p".into(), source: io::Error::other("boom") };
        assert_eq!(io.exit_code(), 3);
    }

    #[test]
    fn arguments_parse() {
        let cli =
            Cli::try_parse_from(["mvcstm", "simulate", "--ops", "2-3", "--mode", "single", "--gc-every", "5"]).unwrap();
        let Command::Simulate(a) = cli.command else { panic!("simulate") };
        assert_eq!((a.ops, a.mode, a.gc_every), (2..=3, Mode::Single, Some(5)));
        assert!(Cli::try_parse_from(["mvcstm", "classify", "f", "--format", "kv", "--strict"]).is_ok());
        assert!(Cli::try_parse_from(["mvcstm", "graph", "f"]).is_err());
    }
}
