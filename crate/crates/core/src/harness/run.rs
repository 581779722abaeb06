use std::collections::{BTreeMap, HashMap, HashSet};
use std::thread;

use super::script::{AdversaryScript, Step};
use super::workload::{generate_workload, WorkloadConfig};
use super::HarnessError;
use crate::engine::{Engine, EngineConfig, EngineStats, TxError, VersionMode};
use crate::history::History;
use crate::types::TxnId;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunMetrics {
    pub commits: usize,
    pub aborts: usize,
    pub read_fallback_aborts: usize,
    pub versions_peak: usize,
    pub versions_reclaimed: usize,
}

impl From<EngineStats> for RunMetrics {
    fn from(s: EngineStats) -> Self {
        RunMetrics {
            commits: s.commits,
            aborts: s.aborts,
            read_fallback_aborts: s.read_fallback_aborts,
            versions_peak: s.versions_peak,
            versions_reclaimed: s.versions_reclaimed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Steps run one at a time in script order.
    #[default]
    Sequential,
    /// Transactions are dealt round-robin to this many OS threads; each thread
    /// runs its transactions one after another.
    Threads(usize),
}

/// Applies one step as engine transaction `t`. `Ok(false)` means `t` was aborted.
fn apply(engine: &Engine, t: TxnId, step: &Step) -> Result<bool, HarnessError> {
    let outcome = match step {
        Step::Begin(_) => Ok(()),
        Step::Read { object, .. } | Step::Choice { object, .. } => engine.read(t, object).map(drop),
        Step::Write { object, value, .. } => engine.write(t, object, *value),
        Step::Commit(_) => engine.try_commit(t),
        Step::Abort(_) => engine.try_abort(t),
    };
    match outcome {
        Ok(()) => Ok(true),
        Err(TxError::Aborted(_)) => Ok(false),
        Err(TxError::Protocol(p)) => Err(HarnessError::Protocol(p)),
    }
}

/// Runs one transaction's steps; stops early when the engine aborts it.
fn run_transaction(engine: &Engine, steps: &[&Step]) -> Result<(), HarnessError> {
    let t = engine.begin();
    for step in steps {
        if !apply(engine, t, step)? {
            break;
        }
    }
    Ok(())
}

fn run_sequential(engine: &Engine, script: &AdversaryScript) -> Result<(), HarnessError> {
    let mut ids: HashMap<TxnId, TxnId> = HashMap::new();
    let mut dead: HashSet<TxnId> = HashSet::new();
    for step in &script.steps {
        let label = step.txn();
        if dead.contains(&label) {
            continue;
        }
        let t = *ids.entry(label).or_insert_with(|| engine.begin());
        if !apply(engine, t, step)? {
            dead.insert(label);
        }
    }
    Ok(())
}

fn run_threaded(engine: &Engine, script: &AdversaryScript, threads: usize) -> Result<(), HarnessError> {
    let mut txns: BTreeMap<TxnId, Vec<&Step>> = BTreeMap::new();
    for step in &script.steps {
        txns.entry(step.txn()).or_default().push(step);
    }
    let threads = threads.max(1);
    let mut lanes: Vec<Vec<Vec<&Step>>> = vec![Vec::new(); threads];
    for (i, (_, steps)) in txns.into_iter().enumerate() {
        lanes[i % threads].push(steps);
    }
    thread::scope(|scope| {
        let handles: Vec<_> = lanes
            .iter()
            .map(|lane| scope.spawn(move || lane.iter().try_for_each(|steps| run_transaction(engine, steps))))
            .collect();
        handles.into_iter().try_for_each(|h| h.join().expect("worker thread panicked"))
    })
}

/// Drives a fresh engine with the script and returns what it recorded.
pub fn run_workload(
    script: &AdversaryScript,
    config: EngineConfig,
    schedule: Schedule,
) -> Result<(History, RunMetrics), HarnessError> {
    let engine = Engine::new(config);
    match schedule {
        Schedule::Sequential => run_sequential(&engine, script)?,
        Schedule::Threads(n) => run_threaded(&engine, script, n)?,
    }
    Ok((engine.recorded_history(), engine.stats().into()))
}

/// The same generated script, run sequentially in multi- and single-version mode.
pub fn compare_modes(cfg: &WorkloadConfig) -> Result<(RunMetrics, RunMetrics), HarnessError> {
    let script = generate_workload(cfg);
    let run = |mode| run_workload(&script, EngineConfig { mode, ..EngineConfig::default() }, Schedule::Sequential);
    Ok((run(VersionMode::Multi)?.1, run(VersionMode::Single)?.1))
}
