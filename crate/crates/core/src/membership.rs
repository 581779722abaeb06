//! Membership verdicts for the correctness classes, and permissiveness and
//! OLS audits built on top of them.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::conflict::{
    acyclic_witness, conflict_order, graph_from, mvc_order, op_positions, satisfies, GraphOrder, OpRef,
};
use crate::error::CheckError;
use crate::history::{History, RealTimeOrder, TxnStatus};
use crate::semantics::{first_invalid_read, is_legal_unchecked};
use crate::types::{Event, ObjectId, OpKind, TxnId, Value};

/// Cooperative cancellation for the enumerating checkers.
#[derive(Clone, Debug, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Largest transaction count the enumerating checkers accept.
    pub bound: usize,
    pub cancel: CancelToken,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { bound: 8, cancel: CancelToken::new() }
    }
}

/// A t-sequential history that justifies membership.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// Transaction order, `T0` omitted.
    pub order: Vec<TxnId>,
    pub history: History,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    Invalid(OpRef),
    Cycle(Vec<TxnId>),
    NotSequential,
    /// No permutation of the transactions meets the requirements.
    NoSerialization,
    /// A projection failed; `None` names the committed projection.
    Subhistory {
        aborted: Option<TxnId>,
        cause: Box<Evidence>,
    },
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evidence::Invalid(r) => write!(f, "invalid read {r}"),
            Evidence::Cycle(c) => write!(f, "cycle {}", join_ids(c)),
            Evidence::NotSequential => f.write_str("not sequential"),
            Evidence::NoSerialization => f.write_str("no serialization"),
            Evidence::Subhistory { aborted: None, cause } => write!(f, "committed projection: {cause}"),
            Evidence::Subhistory { aborted: Some(t), cause } => write!(f, "projection up to abort of {t}: {cause}"),
        }
    }
}

/// Comma-separated ids, `T0` omitted.
pub fn join_ids(ids: &[TxnId]) -> String {
    ids.iter().filter(|t| !t.is_init()).map(ToString::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub member: bool,
    pub witness: Option<Witness>,
    pub evidence: Option<Evidence>,
}

impl Verdict {
    fn yes(witness: Option<Witness>) -> Self {
        Verdict { member: true, witness, evidence: None }
    }

    fn no(evidence: Evidence) -> Self {
        Verdict { member: false, witness: None, evidence: Some(evidence) }
    }

    pub fn witness_order(&self) -> Option<&[TxnId]> {
        self.witness.as_ref().map(|w| w.order.as_slice())
    }

    pub fn cycle(&self) -> Option<&[TxnId]> {
        match &self.evidence {
            Some(Evidence::Cycle(c)) => Some(c),
            _ => None,
        }
    }
}

fn witness(completion: &History, order: Vec<TxnId>) -> Witness {
    let order: Vec<TxnId> = order.into_iter().filter(|t| !t.is_init()).collect();
    Witness { history: completion.serialize_in_order(&order), order }
}

/// Graph-based decision: valid and the conflict graph is acyclic.
pub fn check_mvc_opacity(h: &History) -> Verdict {
    let order = match mvc_order(h) {
        Ok(o) => o,
        Err(CheckError::Invalid(r)) => return Verdict::no(Evidence::Invalid(r)),
        Err(e) => unreachable!("mvc_order only reports invalid reads: {e}"),
    };
    match acyclic_witness(&graph_from(h, &order)) {
        GraphOrder::Topological(ts) => Verdict::yes(Some(witness(order.completion(), ts))),
        GraphOrder::Cycle(c) => Verdict::no(Evidence::Cycle(c)),
    }
}

/// Depth-first search over transaction orders consistent with `rt`, smallest
/// id first. Returns the first order accepted by `accept`.
fn search_orders(
    txns: &[TxnId],
    rt: &RealTimeOrder,
    opts: &CheckOptions,
    mut accept: impl FnMut(&[TxnId]) -> bool,
) -> Result<Option<Vec<TxnId>>, CheckError> {
    if txns.len() > opts.bound {
        return Err(CheckError::TooLarge { txns: txns.len(), bound: opts.bound });
    }
    let preds: Vec<Vec<usize>> =
        txns.iter().map(|&t| (0..txns.len()).filter(|&i| rt.precedes(txns[i], t)).collect()).collect();
    let mut placed = vec![false; txns.len()];
    let mut prefix = Vec::with_capacity(txns.len());
    fn go(
        txns: &[TxnId],
        preds: &[Vec<usize>],
        placed: &mut [bool],
        prefix: &mut Vec<TxnId>,
        cancel: &CancelToken,
        accept: &mut dyn FnMut(&[TxnId]) -> bool,
    ) -> Result<bool, CheckError> {
        if prefix.len() == txns.len() {
            if cancel.is_cancelled() {
                return Err(CheckError::Cancelled);
            }
            return Ok(accept(prefix));
        }
        for i in 0..txns.len() {
            if placed[i] || preds[i].iter().any(|&p| !placed[p]) {
                continue;
            }
            placed[i] = true;
            prefix.push(txns[i]);
            if go(txns, preds, placed, prefix, cancel, accept)? {
                return Ok(true);
            }
            prefix.pop();
            placed[i] = false;
        }
        Ok(false)
    }
    let found = go(txns, &preds, &mut placed, &mut prefix, &opts.cancel, &mut accept)?;
    Ok(found.then_some(prefix))
}

/// Enumerates t-sequential orderings of the mvc-completion and looks for one
/// that respects real-time order and satisfies the multi-version order.
pub fn check_mvc_opacity_bruteforce(h: &History, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    if let Some(r) = first_invalid_read(h) {
        return Ok(Verdict::no(Evidence::Invalid(OpRef::read(r).expect("successful read"))));
    }
    let order = mvc_order(h)?;
    let completion = order.completion();
    let rt = h.real_time_order();
    let found = search_orders(&completion.txn_ids(), &rt, opts, |perm| {
        let s = completion.serialize_in_order(perm);
        rt.is_subset(&s.real_time_order()) && satisfies(&s, &order)
    })?;
    Ok(match found {
        Some(perm) => Verdict::yes(Some(witness(completion, perm))),
        None => Verdict::no(Evidence::NoSerialization),
    })
}

/// Looks for a legal t-sequential history equivalent to some completion and
/// respecting real-time order.
pub fn check_opacity_bruteforce(h: &History, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    if let Some(r) = first_invalid_read(h) {
        return Ok(Verdict::no(Evidence::Invalid(OpRef::read(r).expect("successful read"))));
    }
    let rt = h.real_time_order();
    for completion in h.opq_completions() {
        let found = search_orders(&completion.txn_ids(), &rt, opts, |perm| {
            let s = completion.serialize_in_order(perm);
            rt.is_subset(&s.real_time_order()) && is_legal_unchecked(&s)
        })?;
        if let Some(perm) = found {
            return Ok(Verdict::yes(Some(witness(&completion, perm))));
        }
    }
    Ok(Verdict::no(Evidence::NoSerialization))
}

/// Conflict opacity; defined for sequential histories only.
pub fn check_co_opacity(h: &History, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    let Ok(co) = conflict_order(h) else {
        return Ok(Verdict::no(Evidence::NotSequential));
    };
    if let Some(r) = first_invalid_read(h) {
        return Ok(Verdict::no(Evidence::Invalid(OpRef::read(r).expect("successful read"))));
    }
    let rt = h.real_time_order();
    let completion = h.mvc_completion();
    let found = search_orders(&completion.txn_ids(), &rt, opts, |perm| {
        let s = completion.serialize_in_order(perm);
        if !rt.is_subset(&s.real_time_order()) || !is_legal_unchecked(&s) {
            return false;
        }
        let pos = op_positions(&s);
        co.pairs.iter().all(|p| matches!((pos.get(&p.from), pos.get(&p.to)), (Some(a), Some(b)) if a < b))
    })?;
    Ok(match found {
        Some(perm) => Verdict::yes(Some(witness(&completion, perm))),
        None => Verdict::no(Evidence::NoSerialization),
    })
}

/// The committed projection and every projection up to an abort are mvc-opaque.
pub fn check_mvc_local_opacity(h: &History) -> Verdict {
    let committed = check_mvc_opacity(&h.committed_subhistory());
    if let Some(cause) = committed.evidence {
        return Verdict::no(Evidence::Subhistory { aborted: None, cause: Box::new(cause) });
    }
    for t in h.txns().filter(|t| t.status == TxnStatus::Aborted) {
        let sub = h.subhistory_until_abort(t.id).expect("aborted transaction");
        if let Some(cause) = check_mvc_opacity(&sub).evidence {
            return Verdict::no(Evidence::Subhistory { aborted: Some(t.id), cause: Box::new(cause) });
        }
    }
    Verdict::yes(committed.witness)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Criterion {
    Opacity,
    CoOpacity,
    MvcOpacity,
    MvcLocalOpacity,
}

impl Criterion {
    pub fn check(self, h: &History, opts: &CheckOptions) -> Result<Verdict, CheckError> {
        match self {
            Criterion::Opacity => check_opacity_bruteforce(h, opts),
            Criterion::CoOpacity => check_co_opacity(h, opts),
            Criterion::MvcOpacity => Ok(check_mvc_opacity(h)),
            Criterion::MvcLocalOpacity => Ok(check_mvc_local_opacity(h)),
        }
    }
}

/// Values a read of `object` could have returned: 0 and every value written
/// to it by a transaction committed before `before`.
fn committed_values(h: &History, object: &ObjectId, before: usize) -> BTreeSet<i64> {
    let mut out = BTreeSet::from([0]);
    for t in h.txns() {
        if t.commit_event.is_some_and(|c| c < before) {
            out.extend(
                h.txn_ops(t.id)
                    .filter(|op| op.kind == OpKind::Write && op.object.as_ref() == Some(object))
                    .filter_map(|op| op.written),
            );
        }
    }
    out
}

/// Histories in which the aborted transaction `t` instead commits. A forced
/// abort of a write or read is replaced by a successful response followed by
/// a commit; a read gets one variant per committed value.
fn commit_variants(events: &[Event], h: &History, t: TxnId) -> Vec<History> {
    let Some(at) = h.txn(t).and_then(|info| info.abort_event) else {
        return Vec::new();
    };
    let op = h.op_of_event(at);
    let rebuild = |replacement: Vec<Event>| {
        let mut out = events[..at].to_vec();
        if op.kind == OpKind::TryAbort {
            out[op.inv] = Event::inv_try_commit(t);
        }
        out.extend(replacement);
        out.extend_from_slice(&events[at + 1..]);
        History::build(out).ok()
    };
    let commit = [Event::inv_try_commit(t), Event::rsp_try_commit(t, Value::Ok)];
    match op.kind {
        OpKind::TryCommit | OpKind::TryAbort => {
            rebuild(vec![Event::rsp_try_commit(t, Value::Ok)]).into_iter().collect()
        }
        OpKind::Write => {
            let mut rep = vec![Event::rsp_write(t, Value::Ok)];
            rep.extend(commit);
            rebuild(rep).into_iter().collect()
        }
        OpKind::Read => {
            let x = op.object.clone().expect("read object");
            committed_values(h, &x, at)
                .into_iter()
                .filter_map(|v| {
                    let mut rep = vec![Event::rsp_read(t, x.clone(), Value::Int(v))];
                    rep.extend(commit.iter().cloned());
                    rebuild(rep)
                })
                .collect()
        }
        OpKind::Begin => Vec::new(),
    }
}

fn any_member(variants: Vec<History>, criterion: Criterion, opts: &CheckOptions) -> Result<bool, CheckError> {
    for v in variants {
        if criterion.check(&v, opts)?.member {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Transactions aborted by the system (an `A` response to read, write or
/// tryC) that could have committed without leaving the class.
pub fn audit_permissiveness(h: &History, criterion: Criterion, opts: &CheckOptions) -> Result<Vec<TxnId>, CheckError> {
    let mut out = Vec::new();
    for t in h.txns().filter(|t| t.status == TxnStatus::Aborted) {
        let at = t.abort_event.expect("aborted");
        if h.op_of_event(at).kind == OpKind::TryAbort {
            continue;
        }
        if any_member(commit_variants(h.events(), h, t.id), criterion, opts)? {
            out.push(t.id);
        }
    }
    Ok(out)
}

/// For a permissive history: aborts that a different value choice at an
/// earlier read would have avoided, as (aborted txn, read, alternative value).
pub fn audit_olsness(
    h: &History,
    criterion: Criterion,
    opts: &CheckOptions,
) -> Result<Vec<(TxnId, OpRef, i64)>, CheckError> {
    let unnecessary = audit_permissiveness(h, criterion, opts)?;
    if !unnecessary.is_empty() {
        return Err(CheckError::NotPermissive(unnecessary));
    }
    let mut out = Vec::new();
    for t in h.txns().filter(|t| t.status == TxnStatus::Aborted) {
        let abort_at = t.abort_event.expect("aborted");
        for read in h.ops().iter().filter(|op| op.rsp.is_some_and(|r| r < abort_at)) {
            let (Some(r), Some(x), Some(current)) = (OpRef::read(read), read.object.clone(), read.read_value()) else {
                continue;
            };
            let rsp = read.rsp.expect("complete");
            for u in committed_values(h, &x, rsp).into_iter().filter(|&u| u != current) {
                let mut events = h.events().to_vec();
                events[rsp] = Event::rsp_read(read.txn, x.clone(), Value::Int(u));
                let Ok(rewritten) = History::build(events.clone()) else { continue };
                if any_member(commit_variants(&events, &rewritten, t.id), criterion, opts)? {
                    out.push((t.id, r.clone(), u));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::canonicalize;
    use crate::semantics::is_legal;
    use crate::types::ops::*;

    fn build(parts: &[[Event; 2]]) -> History {
        History::build(parts.iter().flat_map(|p| p.iter().cloned()).collect()).unwrap()
    }

    fn ids(list: &[u32]) -> Vec<TxnId> {
        list.iter().map(|&t| TxnId(t)).collect()
    }

    fn h_illus() -> History {
        build(&[read(1, "x", 0), write(2, "x", 10), write(2, "y", 10), commit(2), read(1, "y", 0), commit(1)])
    }

    fn h_nseq() -> History {
        let x = ObjectId::new("x");
        let (t1, t2, t3) = (TxnId(1), TxnId(2), TxnId(3));
        History::build(canonicalize(vec![
            Event::inv_write(t1, x.clone(), 5),
            Event::inv_write(t2, x.clone(), 10),
            Event::rsp_write(t1, Value::Ok),
            Event::rsp_write(t2, Value::Ok),
            Event::inv_read(t3, x.clone()),
            Event::rsp_try_commit(t1, Value::Ok),
            Event::rsp_try_commit(t2, Value::Ok),
            Event::rsp_read(t3, x, Value::Int(5)),
        ]))
        .unwrap()
    }

    fn h_mvcsub() -> History {
        build(&[
            read(1, "x", 0),
            read(2, "z", 0),
            read(3, "z", 0),
            write(1, "x", 5),
            commit(1),
            read(2, "x", 5),
            write(2, "x", 10),
            write(2, "y", 15),
            commit(2),
            read(3, "x", 5),
            write(3, "y", 25),
            commit(3),
        ])
    }

    fn opts() -> CheckOptions {
        CheckOptions::default()
    }

    #[test]
    fn graph_verdicts() {
        let v = check_mvc_opacity(&h_illus());
        assert!(v.member);
        assert_eq!(v.witness_order(), Some(ids(&[1, 2]).as_slice()));
        let w = v.witness.unwrap().history;
        assert!(w.is_t_sequential());
        assert_eq!(is_legal(&w), Ok(true));

        let v = check_mvc_opacity(&h_nseq());
        assert_eq!(v.witness_order(), Some(ids(&[1, 3, 2]).as_slice()));

        let v = check_mvc_opacity(&h_mvcsub());
        assert!(!v.member);
        assert_eq!(v.cycle(), Some(ids(&[2, 3]).as_slice()));
    }

    #[test]
    fn invalid_history_is_rejected_everywhere() {
        let h = build(&[read(1, "x", 7), commit(1)]);
        assert!(!check_mvc_opacity(&h).member);
        assert!(!check_mvc_opacity_bruteforce(&h, &opts()).unwrap().member);
        assert!(!check_opacity_bruteforce(&h, &opts()).unwrap().member);
        assert!(!check_co_opacity(&h, &opts()).unwrap().member);
    }

    #[test]
    fn brute_force_mvc() {
        assert!(check_mvc_opacity_bruteforce(&h_illus(), &opts()).unwrap().member);
        assert!(!check_mvc_opacity_bruteforce(&h_mvcsub(), &opts()).unwrap().member);
        assert!(check_mvc_opacity_bruteforce(&build(&[write(1, "x", 1), commit(1)]), &opts()).unwrap().member);
        let tight = CheckOptions { bound: 2, ..opts() };
        assert_eq!(check_mvc_opacity_bruteforce(&h_mvcsub(), &tight), Err(CheckError::TooLarge { txns: 3, bound: 2 }));
    }

    #[test]
    fn brute_force_opacity() {
        let v = check_opacity_bruteforce(&h_mvcsub(), &opts()).unwrap();
        assert_eq!(v.witness_order(), Some(ids(&[1, 3, 2]).as_slice()));
        let v = check_opacity_bruteforce(&h_illus(), &opts()).unwrap();
        assert_eq!(v.witness_order(), Some(ids(&[1, 2]).as_slice()));
        let bad = build(&[read(1, "x", 0), write(2, "x", 5), write(2, "y", 5), commit(2), read(1, "y", 5), commit(1)]);
        assert!(!check_opacity_bruteforce(&bad, &opts()).unwrap().member);
    }

    #[test]
    fn pending_commit_is_not_a_valid_source() {
        let mut events: Vec<Event> = write(1, "x", 1).to_vec();
        events.push(Event::inv_try_commit(TxnId(1)));
        events.extend(read(2, "x", 0));
        let h = History::build(events.clone()).unwrap();
        assert!(check_opacity_bruteforce(&h, &opts()).unwrap().member);
        events.extend(read(3, "x", 1));
        let h = History::build(events).unwrap();
        assert!(!check_opacity_bruteforce(&h, &opts()).unwrap().member);
    }

    #[test]
    fn co_opacity() {
        assert_eq!(check_co_opacity(&h_nseq(), &opts()).unwrap().evidence, Some(Evidence::NotSequential));
        assert!(!check_co_opacity(&h_illus(), &opts()).unwrap().member);
        let serial = build(&[write(1, "x", 1), commit(1), read(2, "x", 1), commit(2)]);
        assert_eq!(check_co_opacity(&serial, &opts()).unwrap().witness_order(), Some(ids(&[1, 2]).as_slice()));
    }

    #[test]
    fn local_opacity() {
        assert!(check_mvc_local_opacity(&h_illus()).member);
        let mut parts = vec![
            read(1, "x", 0),
            read(2, "z", 0),
            read(3, "z", 0),
            write(1, "x", 5),
            commit(1),
            read(2, "x", 5),
            write(2, "x", 10),
            write(2, "y", 15),
            commit(2),
            read(3, "x", 5),
            write(3, "y", 25),
            commit(3),
        ];
        parts.push(read(4, "x", 10));
        parts.push(commit_abort(4));
        let v = check_mvc_local_opacity(&build(&parts));
        assert!(!v.member);
        assert!(matches!(v.evidence, Some(Evidence::Subhistory { aborted: None, .. })));
    }

    #[test]
    fn unnecessary_abort_is_reported() {
        let h = build(&[write(1, "x", 1), commit(1), write(2, "y", 2), commit_abort(2)]);
        assert_eq!(audit_permissiveness(&h, Criterion::MvcOpacity, &opts()), Ok(ids(&[2])));
        assert_eq!(audit_permissiveness(&h_illus(), Criterion::MvcOpacity, &opts()), Ok(vec![]));
        assert_eq!(audit_olsness(&h, Criterion::MvcOpacity, &opts()), Err(CheckError::NotPermissive(ids(&[2]))));
    }

    #[test]
    fn ols_audit_of_abort_free_history() {
        assert_eq!(audit_olsness(&h_illus(), Criterion::MvcOpacity, &opts()), Ok(vec![]));
    }

    #[test]
    fn cancellation() {
        let o = opts();
        o.cancel.cancel();
        assert_eq!(check_mvc_opacity_bruteforce(&h_illus(), &o), Err(CheckError::Cancelled));
    }
}
