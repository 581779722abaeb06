use std::collections::{BTreeMap, HashMap};

use crate::types::{ObjectId, TxnId};

/// A committed version of one object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Version {
    pub value: i64,
    /// The value recorded in the history; unique per object.
    pub tag: i64,
    pub writer: TxnId,
    /// 0 for the initial version.
    pub commit_seq: u64,
}

impl Version {
    fn initial() -> Self {
        Version { value: 0, tag: 0, writer: TxnId::INIT, commit_seq: 0 }
    }
}

/// Per-object committed versions, oldest first. Objects never written are
/// served by an implicit initial version.
#[derive(Clone, Debug, Default)]
pub struct VersionStore {
    versions: HashMap<ObjectId, Vec<Version>>,
}

impl VersionStore {
    pub fn versions(&mut self, x: &ObjectId) -> &[Version] {
        self.versions.entry(x.clone()).or_insert_with(|| vec![Version::initial()])
    }

    pub fn publish(&mut self, x: &ObjectId, version: Version) {
        self.versions.entry(x.clone()).or_insert_with(|| vec![Version::initial()]).push(version);
    }

    pub fn total(&self) -> usize {
        self.versions.values().map(Vec::len).sum()
    }

    /// Keeps the newest version with `commit_seq <= horizon`, everything newer,
    /// and anything `pinned` says to keep. Returns the number removed.
    pub fn reclaim(&mut self, horizon: u64, pinned: impl Fn(&ObjectId, &Version) -> bool) -> usize {
        let mut removed = 0;
        for (x, list) in &mut self.versions {
            let floor = list.iter().rposition(|v| v.commit_seq <= horizon).unwrap_or(0);
            let before = list.len();
            let mut i = 0;
            list.retain(|v| {
                let keep = i >= floor || pinned(x, v);
                i += 1;
                keep
            });
            removed += before - list.len();
        }
        removed
    }

    /// Drops all but the latest version of `x`.
    pub fn keep_latest(&mut self, x: &ObjectId) -> usize {
        let list = self.versions.entry(x.clone()).or_insert_with(|| vec![Version::initial()]);
        let excess = list.len() - 1;
        list.drain(..excess);
        excess
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TxnState {
    Live,
    Committed,
    Aborted,
}

/// What a read observed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReadRecord {
    pub writer: TxnId,
    pub commit_seq: u64,
}

#[derive(Clone, Debug)]
pub struct TxnRecord {
    pub id: TxnId,
    pub state: TxnState,
    pub reads: BTreeMap<ObjectId, ReadRecord>,
    /// Object to (user value, recorded tag).
    pub write_buffer: BTreeMap<ObjectId, (i64, i64)>,
    pub begin_seq: u64,
    pub commit_seq: Option<u64>,
}

impl TxnRecord {
    pub fn new(id: TxnId, begin_seq: u64) -> Self {
        TxnRecord {
            id,
            state: TxnState::Live,
            reads: BTreeMap::new(),
            write_buffer: BTreeMap::new(),
            begin_seq,
            commit_seq: None,
        }
    }
}
