//! Which write a read observed: validWrite, lastWrite, validity and legality.

use crate::error::HistoryError;
use crate::history::{History, Operation, TxnStatus};
use crate::types::{OpKind, TxnId};

/// Successful reads (value other than `A`) in history order.
pub fn successful_reads(h: &History) -> impl Iterator<Item = &Operation> {
    h.ops().iter().filter(|op| op.read_value().is_some())
}

fn try_commit_inv(h: &History, txn: TxnId) -> Option<usize> {
    h.txn_ops(txn).find(|op| op.kind == OpKind::TryCommit).map(|op| op.inv)
}

/// The committed transaction whose commit is `read`'s validWrite, if any.
/// `T0` stands for `c0`.
///
/// A read of 0 resolves to `T0` unless a committed transaction that explicitly
/// wrote 0 to the object qualifies.
pub fn valid_write_of(h: &History, read: &Operation) -> Option<TxnId> {
    let value = read.read_value()?;
    let object = read.object.as_ref()?;
    let read_rsp = read.rsp?;
    h.txns()
        .filter(|t| t.status == TxnStatus::Committed && t.id != read.txn)
        .find(|t| h.writes_value(t.id, object, value) && try_commit_inv(h, t.id).is_some_and(|inv| inv < read_rsp))
        .map(|t| t.id)
        .or((value == 0).then_some(TxnId::INIT))
}

/// The latest transaction committed before `read` that writes its object.
pub fn last_write_of(h: &History, read: &Operation) -> Result<TxnId, HistoryError> {
    if !h.is_sequential() {
        return Err(HistoryError::NotSequential);
    }
    Ok(last_write_unchecked(h, read))
}

fn last_write_unchecked(h: &History, read: &Operation) -> TxnId {
    let Some(object) = read.object.as_ref() else {
        return TxnId::INIT;
    };
    h.txns()
        .filter_map(|t| t.commit_event.filter(|&c| c < read.inv && t.write_set.contains(object)).map(|c| (c, t.id)))
        .max()
        .map_or(TxnId::INIT, |(_, id)| id)
}

/// The first successful read without a validWrite.
pub fn first_invalid_read(h: &History) -> Option<&Operation> {
    successful_reads(h).find(|r| valid_write_of(h, r).is_none())
}

pub fn is_valid(h: &History) -> bool {
    first_invalid_read(h).is_none()
}

pub fn is_legal(h: &History) -> Result<bool, HistoryError> {
    if !h.is_sequential() {
        return Err(HistoryError::NotSequential);
    }
    Ok(is_legal_unchecked(h))
}

/// Legality without the sequential precondition check; positions of read
/// invocations are used.
pub(crate) fn is_legal_unchecked(h: &History) -> bool {
    successful_reads(h).all(|r| {
        let (Some(x), Some(v)) = (r.object.as_ref(), r.read_value()) else {
            return true;
        };
        h.writes_value(last_write_unchecked(h, r), x, v)
    })
}

/// Valid but not legal.
pub fn is_multiversioned(h: &History) -> Result<bool, HistoryError> {
    Ok(is_valid(h) && !is_legal(h)?)
}

/// Both resolutions of one read.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadResolution {
    /// Index into [`History::ops`].
    pub read: usize,
    pub valid_write: Option<TxnId>,
    /// Present for sequential histories only.
    pub last_write: Option<TxnId>,
}

pub fn resolve_reads(h: &History) -> Vec<ReadResolution> {
    let sequential = h.is_sequential();
    h.ops()
        .iter()
        .enumerate()
        .filter(|(_, op)| op.read_value().is_some())
        .map(|(i, op)| ReadResolution {
            read: i,
            valid_write: valid_write_of(h, op),
            last_write: sequential.then(|| last_write_unchecked(h, op)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::canonicalize;
    use crate::types::ops::*;
    use crate::types::{Event, ObjectId, Value};

    fn build(parts: &[[Event; 2]]) -> History {
        History::build(parts.iter().flat_map(|p| p.iter().cloned()).collect()).unwrap()
    }

    fn h_illus() -> History {
        build(&[read(1, "x", 0), write(2, "x", 10), write(2, "y", 10), commit(2), read(1, "y", 0), commit(1)])
    }

    fn read_of<'a>(h: &'a History, txn: u32, object: &str) -> &'a Operation {
        h.txn_ops(TxnId(txn))
            .find(|op| op.kind == OpKind::Read && op.object.as_ref().unwrap().as_str() == object)
            .unwrap()
    }

    #[test]
    fn valid_writes() {
        let x = ObjectId::new("x");
        let (t1, t2, t3) = (TxnId(1), TxnId(2), TxnId(3));
        let nseq = History::build(canonicalize(vec![
            Event::inv_write(t1, x.clone(), 5),
            Event::inv_write(t2, x.clone(), 10),
            Event::rsp_write(t1, Value::Ok),
            Event::rsp_write(t2, Value::Ok),
            Event::inv_read(t3, x.clone()),
            Event::rsp_try_commit(t1, Value::Ok),
            Event::rsp_try_commit(t2, Value::Ok),
            Event::rsp_read(t3, x, Value::Int(5)),
        ]))
        .unwrap();
        assert_eq!(valid_write_of(&nseq, read_of(&nseq, 3, "x")), Some(t1));
        assert!(is_valid(&nseq));

        let h = h_illus();
        assert_eq!(valid_write_of(&h, read_of(&h, 1, "y")), Some(TxnId::INIT));

        let bogus = build(&[read(1, "x", 7)]);
        assert_eq!(valid_write_of(&bogus, read_of(&bogus, 1, "x")), None);
        assert!(!is_valid(&bogus));
        assert!(is_valid(&build(&[write(1, "x", 1), commit(1)])));
    }

    #[test]
    fn uncommitted_or_late_writer_is_not_valid() {
        let late = build(&[write(1, "x", 3), read(2, "x", 3), commit(1)]);
        assert!(!is_valid(&late));
        let aborted = build(&[write(1, "x", 3), commit_abort(1), read(2, "x", 3)]);
        assert!(!is_valid(&aborted));
    }

    #[test]
    fn last_writes() {
        let h = h_illus();
        assert_eq!(last_write_of(&h, read_of(&h, 1, "y")), Ok(TxnId(2)));
        assert_eq!(last_write_of(&h, read_of(&h, 1, "x")), Ok(TxnId::INIT));
        let early = build(&[read(1, "x", 0), write(2, "x", 1), commit(2)]);
        assert_eq!(last_write_of(&early, read_of(&early, 1, "x")), Ok(TxnId::INIT));
    }

    #[test]
    fn legality() {
        let h = h_illus();
        assert_eq!(is_legal(&h), Ok(false));
        assert_eq!(is_multiversioned(&h), Ok(true));
        let serial = h.serialize_in_order(&[TxnId(1), TxnId(2)]);
        assert_eq!(is_legal(&serial), Ok(true));
        assert_eq!(is_multiversioned(&serial), Ok(false));
        assert_eq!(is_legal(&build(&[write(1, "x", 1), commit(1)])), Ok(true));
        assert_eq!(is_multiversioned(&build(&[read(1, "x", 7)])), Ok(false));
    }

    #[test]
    fn legality_needs_sequential() {
        let t = TxnId(1);
        let h = History::build(vec![Event::inv_read(t, ObjectId::new("x"))]).unwrap();
        assert_eq!(is_legal(&h), Err(HistoryError::NotSequential));
    }

    #[test]
    fn resolutions() {
        let h = h_illus();
        let all = resolve_reads(&h);
        assert_eq!(all.len(), 2);
        assert_eq!(all[1].valid_write, Some(TxnId::INIT));
        assert_eq!(all[1].last_write, Some(TxnId(2)));
    }
}
