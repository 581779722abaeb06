//! Membership checking for transactional-memory histories under opacity and
//! its conflict-based subclasses, plus a multi-version SGT engine whose output
//! can be checked.

pub mod batch;
pub mod conflict;
pub mod engine;
pub mod error;
pub mod gen;
pub mod harness;
pub mod history;
pub mod membership;
pub mod semantics;
pub mod trace;
pub mod types;

pub use conflict::{
    acyclic_witness, build_mvcg, conflict_order, export_dot, mvc_order, satisfies, ConflictOrder, EdgeLabel,
    GraphOrder, MvcGraph, MvcOrder, OpRef, OrderedPair, PairKind,
};
pub use error::{CheckError, HistoryError, Malformed};
pub use history::{canonicalize, History, Operation, RealTimeOrder, TxnInfo, TxnStatus};
pub use types::{Event, ObjectId, OpKind, Phase, TxnId, Value};
