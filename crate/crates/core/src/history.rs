//! Histories: well-formedness, real-time order, completions and projections.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::{HistoryError, Malformed};
use crate::types::{Event, ObjectId, OpKind, Phase, TxnId, Value};

/// An operation: an invocation paired with its response, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operation {
    pub txn: TxnId,
    pub kind: OpKind,
    pub object: Option<ObjectId>,
    /// Value carried by a write invocation.
    pub written: Option<i64>,
    /// Value carried by the response.
    pub result: Option<Value>,
    pub inv: usize,
    pub rsp: Option<usize>,
}

impl Operation {
    pub fn is_complete(&self) -> bool {
        self.rsp.is_some()
    }

    /// A completed operation that did not return `A`.
    pub fn is_successful(&self) -> bool {
        matches!(self.result, Some(v) if !v.is_abort())
    }

    /// The value returned by a successful read.
    pub fn read_value(&self) -> Option<i64> {
        match (self.kind, self.result) {
            (OpKind::Read, Some(Value::Int(v))) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TxnStatus {
    Committed,
    Aborted,
    Live,
}

/// Per-transaction index into a history (the `H|T_k` view).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TxnInfo {
    pub id: TxnId,
    pub status: TxnStatus,
    /// Indexes into [`History::ops`], in order.
    pub ops: Vec<usize>,
    pub first_event: usize,
    pub last_event: usize,
    pub read_set: BTreeSet<ObjectId>,
    pub write_set: BTreeSet<ObjectId>,
    /// Position of `rsp(tryC):ok`.
    pub commit_event: Option<usize>,
    /// Position of the response that returned `A`.
    pub abort_event: Option<usize>,
}

impl TxnInfo {
    pub fn is_t_complete(&self) -> bool {
        self.status != TxnStatus::Live
    }
}

/// A well-formed history. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct History {
    events: Vec<Event>,
    ops: Vec<Operation>,
    op_of_event: Vec<usize>,
    txns: BTreeMap<TxnId, TxnInfo>,
    objects: BTreeSet<ObjectId>,
}

#[derive(Default)]
struct ScanState {
    pending: Option<usize>,
    terminated: bool,
    has_written: bool,
}

impl History {
    /// The empty history (only the implicit initializing transaction).
    pub fn empty() -> Self {
        History {
            events: Vec::new(),
            ops: Vec::new(),
            op_of_event: Vec::new(),
            txns: BTreeMap::new(),
            objects: BTreeSet::new(),
        }
    }

    /// Validates `events` and indexes them.
    pub fn build(events: Vec<Event>) -> Result<Self, HistoryError> {
        let mut ops: Vec<Operation> = Vec::new();
        let mut op_of_event = Vec::with_capacity(events.len());
        let mut txns: BTreeMap<TxnId, TxnInfo> = BTreeMap::new();
        let mut scan: BTreeMap<TxnId, ScanState> = BTreeMap::new();
        let mut objects = BTreeSet::new();
        let mut written_values = HashSet::new();

        for (index, event) in events.iter().enumerate() {
            let bad = |reason| HistoryError::WellFormedness { index, reason };
            let t = event.txn;
            if t.is_init() {
                return Err(bad(Malformed::ReservedTxn));
            }
            let first_seen = !txns.contains_key(&t);
            let info = txns.entry(t).or_insert_with(|| TxnInfo {
                id: t,
                status: TxnStatus::Live,
                ops: Vec::new(),
                first_event: index,
                last_event: index,
                read_set: BTreeSet::new(),
                write_set: BTreeSet::new(),
                commit_event: None,
                abort_event: None,
            });
            let state = scan.entry(t).or_default();
            if state.terminated {
                return Err(bad(Malformed::EventAfterTermination(t)));
            }
            info.last_event = index;

            match event.phase {
                Phase::Inv => {
                    if state.pending.is_some() {
                        return Err(bad(Malformed::PendingOperation(t)));
                    }
                    let mut written = None;
                    match event.op {
                        OpKind::Begin if !first_seen => return Err(bad(Malformed::BeginNotFirst(t))),
                        OpKind::Begin => {}
                        OpKind::Read => {
                            let x = event.object.clone().ok_or(bad(Malformed::MissingField { txn: t }))?;
                            if state.has_written {
                                return Err(bad(Malformed::ReadAfterWrite(t)));
                            }
                            if !info.read_set.insert(x.clone()) {
                                return Err(bad(Malformed::DuplicateRead { txn: t, object: x }));
                            }
                            objects.insert(x);
                        }
                        OpKind::Write => {
                            let (Some(x), Some(Value::Int(v))) = (event.object.clone(), event.value) else {
                                return Err(bad(Malformed::MissingField { txn: t }));
                            };
                            if !written_values.insert((x.clone(), v)) {
                                return Err(bad(Malformed::DuplicateValue { object: x, value: v }));
                            }
                            state.has_written = true;
                            info.write_set.insert(x.clone());
                            objects.insert(x);
                            written = Some(v);
                        }
                        OpKind::TryCommit | OpKind::TryAbort => {}
                    }
                    let op_index = ops.len();
                    ops.push(Operation {
                        txn: t,
                        kind: event.op,
                        object: event.object.clone(),
                        written,
                        result: None,
                        inv: index,
                        rsp: None,
                    });
                    info.ops.push(op_index);
                    state.pending = Some(op_index);
                    op_of_event.push(op_index);
                }
                Phase::Rsp => {
                    let unmatched = Malformed::UnmatchedResponse { txn: t, op: event.op };
                    let Some(op_index) = state.pending else {
                        return Err(bad(unmatched));
                    };
                    let op = &mut ops[op_index];
                    if op.kind != event.op {
                        return Err(bad(unmatched));
                    }
                    if op.kind == OpKind::Read && event.object.is_some() && event.object != op.object {
                        return Err(bad(unmatched));
                    }
                    let allowed = matches!(
                        (event.op, event.value),
                        (OpKind::Begin, None)
                            | (OpKind::Read, Some(Value::Int(_) | Value::Abort))
                            | (OpKind::Write | OpKind::TryCommit, Some(Value::Ok | Value::Abort))
                            | (OpKind::TryAbort, Some(Value::Abort))
                    );
                    if !allowed {
                        return Err(bad(Malformed::BadResponseValue { txn: t, op: event.op }));
                    }
                    op.rsp = Some(index);
                    op.result = event.value;
                    state.pending = None;
                    if event.is_abort_rsp() {
                        state.terminated = true;
                        info.status = TxnStatus::Aborted;
                        info.abort_event = Some(index);
                    } else if event.is_commit_rsp() {
                        state.terminated = true;
                        info.status = TxnStatus::Committed;
                        info.commit_event = Some(index);
                    }
                    op_of_event.push(op_index);
                }
            }
        }

        Ok(History { events, ops, op_of_event, txns, objects })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    /// The operation an event belongs to.
    pub fn op_of_event(&self, index: usize) -> &Operation {
        &self.ops[self.op_of_event[index]]
    }

    pub fn txn(&self, id: TxnId) -> Option<&TxnInfo> {
        self.txns.get(&id)
    }

    /// Transactions appearing in the history, ascending by id. `T0` is not listed.
    pub fn txns(&self) -> impl Iterator<Item = &TxnInfo> {
        self.txns.values()
    }

    pub fn txn_ids(&self) -> Vec<TxnId> {
        self.txns.keys().copied().collect()
    }

    pub fn txn_count(&self) -> usize {
        self.txns.len()
    }

    pub fn objects(&self) -> &BTreeSet<ObjectId> {
        &self.objects
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn status(&self, id: TxnId) -> Option<TxnStatus> {
        if id.is_init() {
            return Some(TxnStatus::Committed);
        }
        self.txns.get(&id).map(|t| t.status)
    }

    /// Operations of one transaction, in order.
    pub fn txn_ops(&self, id: TxnId) -> impl Iterator<Item = &Operation> {
        self.txns.get(&id).into_iter().flat_map(move |t| t.ops.iter().map(move |&i| &self.ops[i]))
    }

    /// Whether `w_txn(object, value)` is among the transaction's events.
    /// `T0` writes 0 to every object.
    pub fn writes_value(&self, txn: TxnId, object: &ObjectId, value: i64) -> bool {
        if txn.is_init() {
            return value == 0;
        }
        self.txn_ops(txn)
            .any(|op| op.kind == OpKind::Write && op.object.as_ref() == Some(object) && op.written == Some(value))
    }

    pub fn writes_object(&self, txn: TxnId, object: &ObjectId) -> bool {
        txn.is_init() || self.txns.get(&txn).is_some_and(|t| t.write_set.contains(object))
    }

    /// Position of `c_txn`; `-1` for `T0`, `None` if not committed.
    pub fn commit_position(&self, txn: TxnId) -> Option<i64> {
        if txn.is_init() {
            return Some(-1);
        }
        self.txns.get(&txn)?.commit_event.map(|p| p as i64)
    }

    /// Committed writers of `object` (including `T0`) ordered by commit position.
    pub fn committed_writers(&self, object: &ObjectId) -> Vec<(i64, TxnId)> {
        let mut out = vec![(-1, TxnId::INIT)];
        for t in self.txns.values() {
            if let (Some(c), true) = (t.commit_event, t.write_set.contains(object)) {
                out.push((c as i64, t.id));
            }
        }
        out.sort_unstable();
        out
    }

    /// Every invocation is immediately followed by its matching response.
    pub fn is_sequential(&self) -> bool {
        self.ops.iter().all(|op| op.rsp == Some(op.inv + 1))
    }

    /// No two transactions overlap.
    pub fn is_t_sequential(&self) -> bool {
        let mut spans: Vec<_> = self.txns.values().map(|t| (t.first_event, t.last_event, t.status)).collect();
        spans.sort_unstable_by_key(|s| s.0);
        spans.windows(2).all(|w| w[0].2 != TxnStatus::Live && w[0].1 < w[1].0)
    }

    pub fn is_t_complete(&self) -> bool {
        self.txns.values().all(TxnInfo::is_t_complete)
    }

    pub fn real_time_order(&self) -> RealTimeOrder {
        let mut pairs = BTreeSet::new();
        for t in self.txns.values() {
            pairs.insert((TxnId::INIT, t.id));
            if !t.is_t_complete() {
                continue;
            }
            for u in self.txns.values() {
                if u.id != t.id && t.last_event < u.first_event {
                    pairs.insert((t.id, u.id));
                }
            }
        }
        RealTimeOrder { pairs }
    }

    fn complete_with(&self, commit_outcome: impl Fn(TxnId) -> Value) -> History {
        let mut out = Vec::with_capacity(self.events.len() + 2 * self.txns.len());
        let close = |out: &mut Vec<Event>, t: TxnId| {
            out.push(Event::inv_try_abort(t));
            out.push(Event::rsp_try_abort(t));
        };
        for (i, event) in self.events.iter().enumerate() {
            out.push(event.clone());
            let t = event.txn;
            let op = self.op_of_event(i);
            if event.is_inv() && !op.is_complete() {
                match op.kind {
                    OpKind::Read => {
                        let x = op.object.clone().expect("read has an object");
                        out.push(Event::rsp_read(t, x, Value::Abort));
                    }
                    OpKind::Write => out.push(Event::rsp_write(t, Value::Abort)),
                    OpKind::TryAbort => out.push(Event::rsp_try_abort(t)),
                    OpKind::TryCommit => out.push(Event::rsp_try_commit(t, commit_outcome(t))),
                    OpKind::Begin => {
                        out.push(Event::rsp_begin(t));
                        close(&mut out, t);
                    }
                }
                continue;
            }
            let info = &self.txns[&t];
            if info.last_event == i && info.status == TxnStatus::Live {
                close(&mut out, t);
            }
        }
        History::build(out).expect("completion of a well-formed history is well-formed")
    }

    /// The completion in which every incomplete transaction aborts,
    /// including those with a pending tryC.
    pub fn mvc_completion(&self) -> History {
        self.complete_with(|_| Value::Abort)
    }

    /// Transactions with an unanswered tryC invocation.
    pub fn pending_commits(&self) -> Vec<TxnId> {
        self.ops.iter().filter(|op| op.kind == OpKind::TryCommit && !op.is_complete()).map(|op| op.txn).collect()
    }

    /// All completions: one per ok/A choice for each pending tryC.
    /// The first element is the all-abort branch.
    pub fn opq_completions(&self) -> Vec<History> {
        let pending = self.pending_commits();
        (0u64..1 << pending.len())
            .map(|mask| {
                self.complete_with(|t| {
                    let bit = pending.iter().position(|&p| p == t).expect("pending tryC");
                    if mask >> bit & 1 == 1 {
                        Value::Ok
                    } else {
                        Value::Abort
                    }
                })
            })
            .collect()
    }

    fn restrict(&self, keep: impl Fn(TxnId) -> bool) -> History {
        let events = self.events.iter().filter(|e| keep(e.txn)).cloned().collect();
        History::build(events).expect("projection onto whole transactions stays well-formed")
    }

    /// Events of committed transactions only.
    pub fn committed_subhistory(&self) -> History {
        self.restrict(|t| self.txns[&t].status == TxnStatus::Committed)
    }

    /// Events of `aborted` and every transaction whose commit response precedes
    /// its abort response.
    pub fn subhistory_until_abort(&self, aborted: TxnId) -> Result<History, HistoryError> {
        let abort_at = self.txns.get(&aborted).and_then(|t| t.abort_event).ok_or(HistoryError::NotAborted(aborted))?;
        Ok(self.restrict(|t| t == aborted || self.txns[&t].commit_event.is_some_and(|c| c < abort_at)))
    }

    /// Same event multiset, order ignored.
    pub fn equivalent(&self, other: &History) -> bool {
        if self.events.len() != other.events.len() {
            return false;
        }
        let mut a: Vec<&Event> = self.events.iter().collect();
        let mut b: Vec<&Event> = other.events.iter().collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    /// The t-sequential history that runs the listed transactions back to back,
    /// each with its own events in their original order. `T0` entries are skipped;
    /// transactions not listed are dropped.
    pub fn serialize_in_order(&self, order: &[TxnId]) -> History {
        let mut events = Vec::with_capacity(self.events.len());
        for &t in order.iter().filter(|t| !t.is_init()) {
            events.extend(self.events.iter().filter(|e| e.txn == t).cloned());
        }
        History::build(events).expect("transaction-wise reordering stays well-formed")
    }
}

/// The real-time order `≺RT`: `(a, b)` when `a` is t-complete and its last
/// event precedes the first event of `b`. `T0` precedes everyone.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RealTimeOrder {
    pairs: BTreeSet<(TxnId, TxnId)>,
}

impl RealTimeOrder {
    pub fn precedes(&self, a: TxnId, b: TxnId) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn pairs(&self) -> &BTreeSet<(TxnId, TxnId)> {
        &self.pairs
    }

    pub fn is_subset(&self, other: &RealTimeOrder) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    /// Transactions that must come before `t`.
    pub fn predecessors(&self, t: TxnId) -> impl Iterator<Item = TxnId> + '_ {
        self.pairs.iter().filter(move |p| p.1 == t).map(|p| p.0)
    }
}

/// Inserts the missing `inv(tryC)` in front of any tryC response that has none,
/// so traces that only show commit responses can be indexed.
pub fn canonicalize(events: Vec<Event>) -> Vec<Event> {
    let mut pending: BTreeMap<TxnId, OpKind> = BTreeMap::new();
    let mut out = Vec::with_capacity(events.len());
    for e in events {
        match e.phase {
            Phase::Inv => {
                pending.insert(e.txn, e.op);
            }
            Phase::Rsp => {
                let matched = pending.remove(&e.txn);
                if e.op == OpKind::TryCommit && matched.is_none() {
                    out.push(Event::inv_try_commit(e.txn));
                }
            }
        }
        out.push(e);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::ops::*;

    pub(crate) fn seq(parts: &[[Event; 2]]) -> Vec<Event> {
        parts.iter().flat_map(|p| p.iter().cloned()).collect()
    }

    fn h_illus() -> History {
        History::build(seq(&[
            read(1, "x", 0),
            write(2, "x", 10),
            write(2, "y", 10),
            commit(2),
            read(1, "y", 0),
            commit(1),
        ]))
        .unwrap()
    }

    fn x() -> ObjectId {
        ObjectId::new("x")
    }

    fn h_nseq() -> History {
        let (t1, t2, t3) = (TxnId(1), TxnId(2), TxnId(3));
        History::build(canonicalize(vec![
            Event::inv_write(t1, x(), 5),
            Event::inv_write(t2, x(), 10),
            Event::rsp_write(t1, Value::Ok),
            Event::rsp_write(t2, Value::Ok),
            Event::inv_read(t3, x()),
            Event::rsp_try_commit(t1, Value::Ok),
            Event::rsp_try_commit(t2, Value::Ok),
            Event::rsp_read(t3, x(), Value::Int(5)),
        ]))
        .unwrap()
    }

    #[test]
    fn builds_sequential_history() {
        let h = h_illus();
        assert!(h.is_sequential());
        assert_eq!(h.status(TxnId(1)), Some(TxnStatus::Committed));
        assert_eq!(h.status(TxnId(2)), Some(TxnStatus::Committed));
        assert_eq!(h.txn_count(), 2);
        assert!(!h.is_t_sequential());
    }

    #[test]
    fn empty_history() {
        let h = History::build(vec![]).unwrap();
        assert!(h.is_empty());
        assert_eq!(h.status(TxnId::INIT), Some(TxnStatus::Committed));
        assert!(h.real_time_order().pairs().is_empty());
        assert!(h.is_sequential());
    }

    #[test]
    fn rejects_double_read() {
        let err = History::build(seq(&[read(1, "x", 0), read(1, "x", 0)])).unwrap_err();
        assert_eq!(
            err,
            HistoryError::WellFormedness { index: 2, reason: Malformed::DuplicateRead { txn: TxnId(1), object: x() } }
        );
    }

    #[test]
    fn rejects_other_malformations() {
        let reason = |events: Vec<Event>| match History::build(events) {
            Err(HistoryError::WellFormedness { reason, .. }) => reason,
            other => panic!("expected a well-formedness error, got {other:?}"),
        };
        assert_eq!(reason(seq(&[write(1, "x", 1), read(1, "y", 0)])), Malformed::ReadAfterWrite(TxnId(1)));
        assert_eq!(reason(seq(&[commit(1), read(1, "y", 0)])), Malformed::EventAfterTermination(TxnId(1)));
        assert_eq!(
            reason(seq(&[write(1, "x", 4), write(2, "x", 4)])),
            Malformed::DuplicateValue { object: x(), value: 4 }
        );
        assert_eq!(reason(seq(&[read(0, "x", 0)])), Malformed::ReservedTxn);
        assert_eq!(reason(seq(&[read(1, "x", 0), begin(1)])), Malformed::BeginNotFirst(TxnId(1)));
        assert_eq!(
            reason(vec![Event::rsp_read(TxnId(3), x(), Value::Int(5))]),
            Malformed::UnmatchedResponse { txn: TxnId(3), op: OpKind::Read }
        );
        assert_eq!(
            reason(vec![Event::inv_read(TxnId(1), x()), Event::inv_read(TxnId(1), ObjectId::new("y"))]),
            Malformed::PendingOperation(TxnId(1))
        );
        assert_eq!(
            reason(vec![Event::inv_read(TxnId(1), x()), Event::rsp_read(TxnId(1), x(), Value::Ok)]),
            Malformed::BadResponseValue { txn: TxnId(1), op: OpKind::Read }
        );
    }

    #[test]
    fn non_sequential_history() {
        let h = h_nseq();
        assert_eq!(h.events().len(), 10);
        assert!(!h.is_sequential());
        assert_eq!(h.status(TxnId(3)), Some(TxnStatus::Live));
        let single = History::build(seq(&[write(1, "x", 1)])).unwrap();
        assert!(single.is_sequential());
    }

    #[test]
    fn real_time_orders() {
        let t = |a, b| (TxnId(a), TxnId(b));
        let rt = h_illus().real_time_order();
        assert_eq!(rt.pairs().iter().copied().collect::<Vec<_>>(), vec![t(0, 1), t(0, 2)]);

        let serial = History::build(seq(&[read(1, "x", 0), commit(1), write(2, "x", 3), commit(2)])).unwrap();
        let rt = serial.real_time_order();
        assert_eq!(rt.pairs().iter().copied().collect::<Vec<_>>(), vec![t(0, 1), t(0, 2), t(1, 2)]);

        let rt = h_nseq().real_time_order();
        assert_eq!(rt.pairs().iter().copied().collect::<Vec<_>>(), vec![t(0, 1), t(0, 2), t(0, 3)]);
    }

    #[test]
    fn live_transactions_do_not_precede() {
        let h = History::build(seq(&[read(1, "x", 0), read(2, "x", 0)])).unwrap();
        assert!(!h.real_time_order().precedes(TxnId(1), TxnId(2)));
    }

    #[test]
    fn mvc_completion_closes_live_transactions() {
        let h = h_nseq();
        let m = h.mvc_completion();
        let mut expected = h.events().to_vec();
        expected.extend(abort(3));
        assert_eq!(m.events(), expected.as_slice());
        assert!(m.is_t_complete());
        assert_eq!(m.mvc_completion(), m);

        let done = h_illus();
        assert_eq!(done.mvc_completion(), done);
    }

    #[test]
    fn pending_write_gets_abort_right_after_its_invocation() {
        let t1 = TxnId(1);
        let h = History::build(vec![
            Event::inv_write(t1, x(), 5),
            Event::inv_read(TxnId(2), x()),
            Event::rsp_read(TxnId(2), x(), Value::Int(0)),
        ])
        .unwrap();
        let m = h.mvc_completion();
        assert_eq!(m.events()[1], Event::rsp_write(t1, Value::Abort));
        assert_eq!(m.status(t1), Some(TxnStatus::Aborted));
        assert_eq!(m.status(TxnId(2)), Some(TxnStatus::Aborted));
    }

    #[test]
    fn opq_completions_branch_on_pending_commit() {
        let mut events = seq(&[write(1, "x", 1)]);
        events.push(Event::inv_try_commit(TxnId(1)));
        let h = History::build(events).unwrap();
        let all = h.opq_completions();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].status(TxnId(1)), Some(TxnStatus::Aborted));
        assert_eq!(all[1].status(TxnId(1)), Some(TxnStatus::Committed));
        assert_eq!(all[0], h.mvc_completion());

        assert_eq!(h_nseq().opq_completions(), vec![h_nseq().mvc_completion()]);
        assert_eq!(h_illus().opq_completions(), vec![h_illus()]);
    }

    #[test]
    fn committed_projection() {
        let h = h_nseq();
        let c = h.committed_subhistory();
        assert_eq!(c.txn_ids(), vec![TxnId(1), TxnId(2)]);
        assert_eq!(h_illus().committed_subhistory(), h_illus());
        let aborted = History::build(seq(&[write(1, "x", 1), commit_abort(1)])).unwrap();
        assert!(aborted.committed_subhistory().is_empty());
    }

    #[test]
    fn projection_until_abort() {
        let h = History::build(seq(&[
            write(1, "x", 1),
            commit(1),
            read(2, "x", 1),
            write(3, "x", 3),
            commit(3),
            commit_abort(2),
        ]))
        .unwrap();
        let sub = h.subhistory_until_abort(TxnId(2)).unwrap();
        assert_eq!(sub, h);

        let early = History::build(seq(&[read(2, "x", 0), commit_abort(2), write(1, "x", 1), commit(1)])).unwrap();
        assert_eq!(early.subhistory_until_abort(TxnId(2)).unwrap().txn_ids(), vec![TxnId(2)]);
        assert_eq!(h.subhistory_until_abort(TxnId(1)), Err(HistoryError::NotAborted(TxnId(1))));
    }

    #[test]
    fn equivalence() {
        let h = h_illus();
        let serial = h.serialize_in_order(&[TxnId(1), TxnId(2)]);
        assert!(serial.is_t_sequential());
        assert!(h.equivalent(&serial));
        assert!(!h.equivalent(&h_nseq()));
        assert!(h.equivalent(&h));
    }
}
