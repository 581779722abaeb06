use thiserror::Error;

use crate::conflict::OpRef;
use crate::types::{ObjectId, OpKind, TxnId};

/// Why an event list is not a well-formed history.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Malformed {
    #[error("transaction id 0 is reserved for the initializing transaction")]
    ReservedTxn,
    #[error("{0} issued an invocation while a previous operation is pending")]
    PendingOperation(TxnId),
    #[error("response of {txn} has no matching pending {op:?} invocation")]
    UnmatchedResponse { txn: TxnId, op: OpKind },
    #[error("{0} issued an event after its commit or abort")]
    EventAfterTermination(TxnId),
    #[error("{txn} reads {object} more than once")]
    DuplicateRead { txn: TxnId, object: ObjectId },
    #[error("{0} reads after it has written")]
    ReadAfterWrite(TxnId),
    #[error("begin of {0} is not its first event")]
    BeginNotFirst(TxnId),
    #[error("value {value} is written to {object} more than once")]
    DuplicateValue { object: ObjectId, value: i64 },
    #[error("{txn}: response value not allowed for {op:?}")]
    BadResponseValue { txn: TxnId, op: OpKind },
    #[error("{txn}: event is missing its object or value")]
    MissingField { txn: TxnId },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HistoryError {
    #[error("event {index}: {reason}")]
    WellFormedness { index: usize, reason: Malformed },
    #[error("history is not sequential")]
    NotSequential,
    #[error("{0} is not aborted")]
    NotAborted(TxnId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error("read {0} has no valid write")]
    Invalid(OpRef),
    #[error("{txns} transactions exceed the brute-force bound of {bound}")]
    TooLarge { txns: usize, bound: usize },
    #[error("check cancelled")]
    Cancelled,
    #[error("history is not permissive: {0:?} aborted unnecessarily")]
    NotPermissive(Vec<TxnId>),
}
