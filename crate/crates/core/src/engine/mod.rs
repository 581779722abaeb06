//! Multi-version STM scheduled by serialization graph testing.
//!
//! Every operation runs under one engine-wide lock, so the recorded history is
//! a sequential linearization of what the engine served. Reads pick the newest
//! version that keeps the graph acyclic; updaters are refused at commit if
//! their conflict edges would close a cycle.

mod graph;
mod store;

use std::collections::{HashMap, HashSet};
use std::sync::{Mutex, MutexGuard, PoisonError};

use thiserror::Error;

use crate::history::History;
use crate::types::{Event, ObjectId, TxnId, Value};

pub use graph::SgtGraph;
pub use store::{ReadRecord, TxnRecord, TxnState, Version, VersionStore};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VersionMode {
    #[default]
    Multi,
    /// Only the latest version of each object is kept and offered to reads.
    Single,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GcPolicy {
    #[default]
    Manual,
    EveryCommits(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub mode: VersionMode,
    pub gc: GcPolicy,
    pub first_txn_id: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { mode: VersionMode::Multi, gc: GcPolicy::Manual, first_txn_id: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProtocolViolation {
    #[error("{0} was never started")]
    UnknownTxn(TxnId),
    #[error("{0} is no longer live")]
    NotLive(TxnId),
    #[error("{0} reads after writing")]
    ReadAfterWrite(TxnId),
    #[error("{txn} already read {object}")]
    DuplicateRead { txn: TxnId, object: ObjectId },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TxError {
    #[error("{0} aborted")]
    Aborted(TxnId),
    #[error("protocol violation: {0}")]
    Protocol(#[from] ProtocolViolation),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GcStats {
    pub vertices_pruned: usize,
    pub versions_reclaimed: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub commits: usize,
    pub aborts: usize,
    /// Reads that found no safe version.
    pub read_fallback_aborts: usize,
    pub versions_peak: usize,
    pub versions_reclaimed: usize,
    pub vertices_pruned: usize,
}

struct State {
    config: EngineConfig,
    next_id: u32,
    commit_seq: u64,
    store: VersionStore,
    graph: SgtGraph,
    txns: HashMap<TxnId, TxnRecord>,
    /// Committed writers still in the graph, by object, in commit order.
    writers: HashMap<ObjectId, Vec<(u64, TxnId)>>,
    /// Successful reads still in the graph, by object.
    readers: HashMap<ObjectId, Vec<TxnId>>,
    used_tags: HashMap<ObjectId, HashSet<i64>>,
    next_tag: i64,
    history: Vec<Event>,
    stats: EngineStats,
    commits_since_gc: usize,
}

pub struct Engine {
    state: Mutex<State>,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(EngineConfig::default())
    }
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        Engine {
            state: Mutex::new(State {
                config,
                next_id: config.first_txn_id.max(1),
                commit_seq: 0,
                store: VersionStore::default(),
                graph: SgtGraph::default(),
                txns: HashMap::new(),
                writers: HashMap::new(),
                readers: HashMap::new(),
                used_tags: HashMap::new(),
                next_tag: -1,
                history: Vec::new(),
                stats: EngineStats::default(),
                commits_since_gc: 0,
            }),
        }
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(PoisonError::into_inner)
    }

    pub fn begin(&self) -> TxnId {
        let mut s = self.lock();
        let t = TxnId(s.next_id);
        s.next_id += 1;
        let record = TxnRecord::new(t, s.commit_seq);
        s.txns.insert(t, record);
        let finished: Vec<TxnId> =
            s.graph.vertices().filter(|v| s.txns.get(v).is_some_and(|r| r.state != TxnState::Live)).collect();
        s.graph.add_vertex(t);
        for f in finished {
            s.graph.add_edge(f, t);
        }
        s.history.push(Event::inv_begin(t));
        s.history.push(Event::rsp_begin(t));
        t
    }

    /// Returns the value of the newest version of `x` that keeps the graph
    /// acyclic, or aborts `t` if there is none.
    pub fn read(&self, t: TxnId, x: &ObjectId) -> Result<i64, TxError> {
        let mut guard = self.lock();
        let s = &mut *guard;
        let record = s.live(t)?;
        if !record.write_buffer.is_empty() {
            return Err(ProtocolViolation::ReadAfterWrite(t).into());
        }
        if record.reads.contains_key(x) {
            return Err(ProtocolViolation::DuplicateRead { txn: t, object: x.clone() }.into());
        }
        let begin_seq = record.begin_seq;
        s.history.push(Event::inv_read(t, x.clone()));

        let versions = s.store.versions(x);
        let floor = versions.iter().rposition(|v| v.commit_seq <= begin_seq).unwrap_or(0);
        let candidates: Vec<Version> = match s.config.mode {
            VersionMode::Multi => versions[floor..].iter().rev().cloned().collect(),
            VersionMode::Single => versions.last().cloned().into_iter().collect(),
        };
        let writers = s.writers.get(x).map(Vec::as_slice).unwrap_or(&[]);
        let chosen = candidates.into_iter().find_map(|v| {
            let (into, out_of) = split_writers(writers, v.commit_seq, t);
            (!s.graph.closes_cycle(t, &into, &out_of)).then_some((v, into, out_of))
        });

        let Some((version, into, out_of)) = chosen else {
            s.history.push(Event::rsp_read(t, x.clone(), Value::Abort));
            s.stats.read_fallback_aborts += 1;
            s.abort(t);
            return Err(TxError::Aborted(t));
        };
        for u in into {
            s.graph.add_edge(u, t);
        }
        for w in out_of {
            s.graph.add_edge(t, w);
        }
        s.readers.entry(x.clone()).or_default().push(t);
        let record = s.txns.get_mut(&t).expect("live");
        record.reads.insert(x.clone(), ReadRecord { writer: version.writer, commit_seq: version.commit_seq });
        s.history.push(Event::rsp_read(t, x.clone(), Value::Int(version.tag)));
        debug_assert!(s.graph.is_acyclic());
        Ok(version.value)
    }

    /// Buffers a write; never fails for a live transaction.
    pub fn write(&self, t: TxnId, x: &ObjectId, value: i64) -> Result<(), TxError> {
        let mut guard = self.lock();
        let s = &mut *guard;
        s.live(t)?;
        let tag = s.fresh_tag(x, value);
        s.txns.get_mut(&t).expect("live").write_buffer.insert(x.clone(), (value, tag));
        s.history.push(Event::inv_write(t, x.clone(), tag));
        s.history.push(Event::rsp_write(t, Value::Ok));
        Ok(())
    }

    pub fn try_commit(&self, t: TxnId) -> Result<(), TxError> {
        let mut guard = self.lock();
        let s = &mut *guard;
        let record = s.live(t)?;
        let buffer: Vec<(ObjectId, (i64, i64))> = record.write_buffer.iter().map(|(x, v)| (x.clone(), *v)).collect();
        s.history.push(Event::inv_try_commit(t));

        let mut into = Vec::new();
        for (x, _) in &buffer {
            into.extend(s.writers.get(x).into_iter().flatten().map(|&(_, w)| w));
            into.extend(s.readers.get(x).into_iter().flatten().copied().filter(|&r| r != t));
        }
        if s.graph.closes_cycle(t, &into, &[]) {
            s.history.push(Event::rsp_try_commit(t, Value::Abort));
            s.abort(t);
            return Err(TxError::Aborted(t));
        }
        for u in into {
            s.graph.add_edge(u, t);
        }
        let seq = if buffer.is_empty() { None } else { Some(s.next_seq()) };
        if let Some(seq) = seq {
            for (x, (value, tag)) in &buffer {
                s.store.publish(x, Version { value: *value, tag: *tag, writer: t, commit_seq: seq });
                s.writers.entry(x.clone()).or_default().push((seq, t));
                if s.config.mode == VersionMode::Single {
                    s.stats.versions_reclaimed += s.store.keep_latest(x);
                }
            }
        }
        let record = s.txns.get_mut(&t).expect("live");
        record.state = TxnState::Committed;
        record.commit_seq = seq;
        record.write_buffer.clear();
        s.history.push(Event::rsp_try_commit(t, Value::Ok));
        s.stats.commits += 1;
        s.stats.versions_peak = s.stats.versions_peak.max(s.store.total());
        debug_assert!(s.graph.is_acyclic());

        s.commits_since_gc += 1;
        if let GcPolicy::EveryCommits(n) = s.config.gc {
            if s.commits_since_gc >= n.max(1) {
                s.collect_garbage();
            }
        }
        Ok(())
    }

    pub fn try_abort(&self, t: TxnId) -> Result<(), TxError> {
        let mut s = self.lock();
        s.live(t)?;
        s.history.push(Event::inv_try_abort(t));
        s.history.push(Event::rsp_try_abort(t));
        s.abort(t);
        Ok(())
    }

    pub fn collect_garbage(&self) -> GcStats {
        self.lock().collect_garbage()
    }

    pub fn recorded_events(&self) -> Vec<Event> {
        self.lock().history.clone()
    }

    pub fn recorded_history(&self) -> History {
        History::build(self.recorded_events()).expect("engine records well-formed histories")
    }

    pub fn stats(&self) -> EngineStats {
        self.lock().stats
    }

    pub fn status(&self, t: TxnId) -> Option<TxnState> {
        self.lock().txns.get(&t).map(|r| r.state)
    }

    /// Vertices currently held by the serialization graph.
    pub fn graph_size(&self) -> usize {
        self.lock().graph.len()
    }

    pub fn version_count(&self) -> usize {
        self.lock().store.total()
    }
}

/// Writers at or before `seq` come before a reader of that version; later
/// ones after it.
fn split_writers(writers: &[(u64, TxnId)], seq: u64, reader: TxnId) -> (Vec<TxnId>, Vec<TxnId>) {
    let (mut into, mut out_of) = (Vec::new(), Vec::new());
    for &(s, w) in writers.iter().filter(|(_, w)| *w != reader) {
        if s <= seq {
            into.push(w);
        } else {
            out_of.push(w);
        }
    }
    (into, out_of)
}

impl State {
    fn live(&self, t: TxnId) -> Result<&TxnRecord, ProtocolViolation> {
        match self.txns.get(&t) {
            None => Err(ProtocolViolation::UnknownTxn(t)),
            Some(r) if r.state != TxnState::Live => Err(ProtocolViolation::NotLive(t)),
            Some(r) => Ok(r),
        }
    }

    fn next_seq(&mut self) -> u64 {
        self.commit_seq += 1;
        self.commit_seq
    }

    /// The user value if it is free for `x`, else a fresh negative tag.
    /// Zero is reserved for the initial version.
    fn fresh_tag(&mut self, x: &ObjectId, value: i64) -> i64 {
        let used = self.used_tags.entry(x.clone()).or_default();
        let tag = if value != 0 && !used.contains(&value) {
            value
        } else {
            while used.contains(&self.next_tag) {
                self.next_tag -= 1;
            }
            self.next_tag
        };
        used.insert(tag);
        tag
    }

    /// Marks `t` aborted. Its vertex and read edges stay: reads of aborted
    /// transactions still constrain the history.
    fn abort(&mut self, t: TxnId) {
        let record = self.txns.get_mut(&t).expect("known");
        record.state = TxnState::Aborted;
        record.write_buffer.clear();
        self.stats.aborts += 1;
    }

    fn collect_garbage(&mut self) -> GcStats {
        self.commits_since_gc = 0;
        let live: Vec<&TxnRecord> = self.txns.values().filter(|r| r.state == TxnState::Live).collect();
        let oldest_live_begin = live.iter().map(|r| r.begin_seq).min();
        let live_sources: HashSet<TxnId> = live.iter().flat_map(|r| r.reads.values().map(|rr| rr.writer)).collect();
        let live_reads: HashSet<(ObjectId, u64)> =
            live.iter().flat_map(|r| r.reads.iter().map(|(x, rr)| (x.clone(), rr.commit_seq))).collect();

        let mut pruned = Vec::new();
        loop {
            let victims: Vec<TxnId> = self
                .graph
                .vertices()
                .filter(|&v| self.graph.is_source(v))
                .filter(|v| match self.txns.get(v) {
                    Some(r) if r.state == TxnState::Aborted => true,
                    Some(r) if r.state == TxnState::Committed => {
                        // Read-only transactions never gain incoming edges once committed.
                        let settled = r.commit_seq.is_none_or(|seq| oldest_live_begin.is_none_or(|b| b >= seq));
                        settled && !live_sources.contains(v)
                    }
                    _ => false,
                })
                .collect();
            if victims.is_empty() {
                break;
            }
            for v in victims {
                self.graph.remove_vertex(v);
                pruned.push(v);
            }
        }
        let gone: HashSet<TxnId> = pruned.iter().copied().collect();
        for list in self.writers.values_mut() {
            list.retain(|(_, w)| !gone.contains(w));
        }
        for list in self.readers.values_mut() {
            list.retain(|r| !gone.contains(r));
        }
        for t in &pruned {
            self.txns.remove(t);
        }

        let horizon = oldest_live_begin.unwrap_or(self.commit_seq);
        let reclaimed = self.store.reclaim(horizon, |x, v| live_reads.contains(&(x.clone(), v.commit_seq)));
        self.stats.vertices_pruned += pruned.len();
        self.stats.versions_reclaimed += reclaimed;
        GcStats { vertices_pruned: pruned.len(), versions_reclaimed: reclaimed }
    }
}
