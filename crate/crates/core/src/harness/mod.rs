//! Workload generation, engine runs and adversarial replays.

mod adversary;
mod run;
mod script;
mod workload;

use thiserror::Error;

use crate::engine::ProtocolViolation;
use crate::error::HistoryError;
use crate::types::{ObjectId, TxnId};

pub use adversary::{replay_adversary, BranchReport};
pub use run::{compare_modes, run_workload, RunMetrics, Schedule};
pub use script::{AdversaryScript, Step};
pub use workload::{generate_workload, object_name, WorkloadConfig};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("engine rejected a scripted step: {0}")]
    Protocol(#[from] ProtocolViolation),
    #[error("{txn} cannot read {value} from {object}: no such committed version")]
    UnknownVersion { txn: TxnId, object: ObjectId, value: i64 },
    #[error("read of {object} by {txn} has no value to replay")]
    UnvaluedRead { txn: TxnId, object: ObjectId },
    #[error(transparent)]
    History(#[from] HistoryError),
}
