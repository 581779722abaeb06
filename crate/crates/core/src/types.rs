//! Identifiers, values and events: the vocabulary every other module speaks.

use std::fmt;
use std::sync::Arc;

/// Transaction identifier. `TxnId(0)` is the implicit initializing transaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TxnId(pub u32);

impl TxnId {
    /// The initializing transaction that writes 0 to every object.
    pub const INIT: TxnId = TxnId(0);

    pub fn is_init(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for TxnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.0)
    }
}

/// Name of a transactional object.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId(Arc<str>);

impl ObjectId {
    pub fn new(name: &str) -> Self {
        ObjectId(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Trace grammar for object names: `[a-z][a-z0-9_]*`.
    pub fn is_valid_name(name: &str) -> bool {
        let mut chars = name.chars();
        match chars.next() {
            Some(c) if c.is_ascii_lowercase() => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
    }
}

impl From<&str> for ObjectId {
    fn from(name: &str) -> Self {
        ObjectId::new(name)
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A value carried by an event: an integer, `ok`, or the abort marker `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Ok,
    Abort,
}

impl Value {
    pub fn is_abort(self) -> bool {
        matches!(self, Value::Abort)
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Ok => f.write_str("ok"),
            Value::Abort => f.write_str("A"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Begin,
    Read,
    Write,
    TryCommit,
    TryAbort,
}

impl OpKind {
    /// Token used by the trace format.
    pub fn token(self) -> &'static str {
        match self {
            OpKind::Begin => "b",
            OpKind::Read => "r",
            OpKind::Write => "w",
            OpKind::TryCommit => "tc",
            OpKind::TryAbort => "ta",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Inv,
    Rsp,
}

/// One invocation or response event.
///
/// `object` is present on read events and on write invocations. `value` is the
/// written value on a write invocation and the returned value on responses;
/// begin events and read/tryC/tryA invocations carry none.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    pub txn: TxnId,
    pub phase: Phase,
    pub op: OpKind,
    pub object: Option<ObjectId>,
    pub value: Option<Value>,
}

impl Event {
    fn new(txn: TxnId, phase: Phase, op: OpKind, object: Option<ObjectId>, value: Option<Value>) -> Self {
        Event { txn, phase, op, object, value }
    }

    pub fn inv_begin(txn: TxnId) -> Self {
        Self::new(txn, Phase::Inv, OpKind::Begin, None, None)
    }

    pub fn rsp_begin(txn: TxnId) -> Self {
        Self::new(txn, Phase::Rsp, OpKind::Begin, None, None)
    }

    pub fn inv_read(txn: TxnId, object: ObjectId) -> Self {
        Self::new(txn, Phase::Inv, OpKind::Read, Some(object), None)
    }

    pub fn rsp_read(txn: TxnId, object: ObjectId, value: Value) -> Self {
        Self::new(txn, Phase::Rsp, OpKind::Read, Some(object), Some(value))
    }

    pub fn inv_write(txn: TxnId, object: ObjectId, value: i64) -> Self {
        Self::new(txn, Phase::Inv, OpKind::Write, Some(object), Some(Value::Int(value)))
    }

    pub fn rsp_write(txn: TxnId, value: Value) -> Self {
        Self::new(txn, Phase::Rsp, OpKind::Write, None, Some(value))
    }

    pub fn inv_try_commit(txn: TxnId) -> Self {
        Self::new(txn, Phase::Inv, OpKind::TryCommit, None, None)
    }

    pub fn rsp_try_commit(txn: TxnId, value: Value) -> Self {
        Self::new(txn, Phase::Rsp, OpKind::TryCommit, None, Some(value))
    }

    pub fn inv_try_abort(txn: TxnId) -> Self {
        Self::new(txn, Phase::Inv, OpKind::TryAbort, None, None)
    }

    pub fn rsp_try_abort(txn: TxnId) -> Self {
        Self::new(txn, Phase::Rsp, OpKind::TryAbort, None, Some(Value::Abort))
    }

    pub fn is_inv(&self) -> bool {
        self.phase == Phase::Inv
    }

    pub fn is_rsp(&self) -> bool {
        self.phase == Phase::Rsp
    }

    /// True for any response carrying the abort marker.
    pub fn is_abort_rsp(&self) -> bool {
        self.is_rsp() && self.value == Some(Value::Abort)
    }

    /// True for `rsp(tryC):ok`, written `c_k`.
    pub fn is_commit_rsp(&self) -> bool {
        self.is_rsp() && self.op == OpKind::TryCommit && self.value == Some(Value::Ok)
    }
}

/// Atomic shorthand helpers used by tests, fixtures and the harness.
pub mod ops {
    use super::*;

    pub fn read(txn: u32, object: &str, value: i64) -> [Event; 2] {
        let (t, x) = (TxnId(txn), ObjectId::new(object));
        [Event::inv_read(t, x.clone()), Event::rsp_read(t, x, Value::Int(value))]
    }

    pub fn read_abort(txn: u32, object: &str) -> [Event; 2] {
        let (t, x) = (TxnId(txn), ObjectId::new(object));
        [Event::inv_read(t, x.clone()), Event::rsp_read(t, x, Value::Abort)]
    }

    pub fn write(txn: u32, object: &str, value: i64) -> [Event; 2] {
        let t = TxnId(txn);
        [Event::inv_write(t, ObjectId::new(object), value), Event::rsp_write(t, Value::Ok)]
    }

    pub fn commit(txn: u32) -> [Event; 2] {
        let t = TxnId(txn);
        [Event::inv_try_commit(t), Event::rsp_try_commit(t, Value::Ok)]
    }

    pub fn commit_abort(txn: u32) -> [Event; 2] {
        let t = TxnId(txn);
        [Event::inv_try_commit(t), Event::rsp_try_commit(t, Value::Abort)]
    }

    pub fn abort(txn: u32) -> [Event; 2] {
        let t = TxnId(txn);
        [Event::inv_try_abort(t), Event::rsp_try_abort(t)]
    }

    pub fn begin(txn: u32) -> [Event; 2] {
        let t = TxnId(txn);
        [Event::inv_begin(t), Event::rsp_begin(t)]
    }
}
