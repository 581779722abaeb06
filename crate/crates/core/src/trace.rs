//! Line-oriented trace format.
//!
//! Atomic shorthand: `r 1 x 0`, `w 1 x 5`, `c 1`, `tc 1 A`, `ta 1`, `b 1`.
//! Split events: `inv r 1 x`, `rsp r 1 x 5`, `inv w 1 x 5`, `rsp w 1 ok`,
//! `inv tc 1`, `rsp tc 1 ok`, `inv ta 1`, `rsp ta 1`, `inv b 1`, `rsp b 1`.
//! `#` starts a comment.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::types::{Event, ObjectId, OpKind, Phase, TxnId, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

fn err<T>(line: usize, reason: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, reason: reason.into() })
}

pub(crate) fn parse_txn(token: &str, line: usize) -> Result<TxnId, ParseError> {
    match token.parse::<u32>() {
        Ok(0) => err(line, "transaction 0 is implicit and cannot appear in a trace"),
        Ok(n) => Ok(TxnId(n)),
        Err(_) => err(line, format!("bad transaction id `{token}`")),
    }
}

pub(crate) fn parse_object(token: &str, line: usize) -> Result<ObjectId, ParseError> {
    if ObjectId::is_valid_name(token) {
        Ok(ObjectId::new(token))
    } else {
        err(line, format!("bad object name `{token}`"))
    }
}

pub(crate) fn parse_int(token: &str, line: usize) -> Result<i64, ParseError> {
    token.parse().or_else(|_| err(line, format!("bad integer `{token}`")))
}

fn parse_read_value(token: &str, line: usize) -> Result<Value, ParseError> {
    if token == "A" {
        Ok(Value::Abort)
    } else {
        parse_int(token, line).map(Value::Int)
    }
}

fn parse_outcome(token: &str, line: usize) -> Result<Value, ParseError> {
    match token {
        "ok" => Ok(Value::Ok),
        "A" => Ok(Value::Abort),
        _ => err(line, format!("expected `ok` or `A`, found `{token}`")),
    }
}

fn parse_kind(token: &str, line: usize) -> Result<OpKind, ParseError> {
    Ok(match token {
        "b" => OpKind::Begin,
        "r" => OpKind::Read,
        "w" => OpKind::Write,
        "tc" => OpKind::TryCommit,
        "ta" => OpKind::TryAbort,
        _ => return err(line, format!("unknown operation `{token}`")),
    })
}

fn arity(fields: &[&str], n: usize, line: usize) -> Result<(), ParseError> {
    if fields.len() == n {
        Ok(())
    } else {
        err(line, format!("expected {n} fields, found {}", fields.len()))
    }
}

/// Parses one atomic shorthand line into its invocation and response.
pub(crate) fn parse_atomic(fields: &[&str], line: usize) -> Result<Option<[Event; 2]>, ParseError> {
    let pair = match fields[0] {
        "r" => {
            arity(fields, 4, line)?;
            let (t, x) = (parse_txn(fields[1], line)?, parse_object(fields[2], line)?);
            [Event::inv_read(t, x.clone()), Event::rsp_read(t, x, parse_read_value(fields[3], line)?)]
        }
        "w" => {
            arity(fields, 4, line)?;
            let t = parse_txn(fields[1], line)?;
            let x = parse_object(fields[2], line)?;
            [Event::inv_write(t, x, parse_int(fields[3], line)?), Event::rsp_write(t, Value::Ok)]
        }
        "c" => {
            arity(fields, 2, line)?;
            let t = parse_txn(fields[1], line)?;
            [Event::inv_try_commit(t), Event::rsp_try_commit(t, Value::Ok)]
        }
        "tc" => {
            arity(fields, 3, line)?;
            let t = parse_txn(fields[1], line)?;
            [Event::inv_try_commit(t), Event::rsp_try_commit(t, parse_outcome(fields[2], line)?)]
        }
        "ta" => {
            arity(fields, 2, line)?;
            let t = parse_txn(fields[1], line)?;
            [Event::inv_try_abort(t), Event::rsp_try_abort(t)]
        }
        "b" => {
            arity(fields, 2, line)?;
            let t = parse_txn(fields[1], line)?;
            [Event::inv_begin(t), Event::rsp_begin(t)]
        }
        _ => return Ok(None),
    };
    Ok(Some(pair))
}

fn parse_split(fields: &[&str], line: usize) -> Result<Event, ParseError> {
    let phase = if fields[0] == "inv" { Phase::Inv } else { Phase::Rsp };
    if fields.len() < 3 {
        return err(line, "missing operation or transaction");
    }
    let kind = parse_kind(fields[1], line)?;
    let t = parse_txn(fields[2], line)?;
    let rest = &fields[1..];
    Ok(match (phase, kind) {
        (Phase::Inv, OpKind::Read) => {
            arity(rest, 3, line)?;
            Event::inv_read(t, parse_object(fields[3], line)?)
        }
        (Phase::Rsp, OpKind::Read) => {
            arity(rest, 4, line)?;
            Event::rsp_read(t, parse_object(fields[3], line)?, parse_read_value(fields[4], line)?)
        }
        (Phase::Inv, OpKind::Write) => {
            arity(rest, 4, line)?;
            Event::inv_write(t, parse_object(fields[3], line)?, parse_int(fields[4], line)?)
        }
        (Phase::Rsp, OpKind::Write) => {
            arity(rest, 3, line)?;
            Event::rsp_write(t, parse_outcome(fields[3], line)?)
        }
        (Phase::Rsp, OpKind::TryCommit) => {
            arity(rest, 3, line)?;
            Event::rsp_try_commit(t, parse_outcome(fields[3], line)?)
        }
        (phase, kind) => {
            arity(rest, 2, line)?;
            match (phase, kind) {
                (Phase::Inv, OpKind::TryCommit) => Event::inv_try_commit(t),
                (Phase::Inv, OpKind::TryAbort) => Event::inv_try_abort(t),
                (Phase::Rsp, OpKind::TryAbort) => Event::rsp_try_abort(t),
                (Phase::Inv, OpKind::Begin) => Event::inv_begin(t),
                _ => Event::rsp_begin(t),
            }
        }
    })
}

/// Splits a line into fields, dropping comments. Empty for blank lines.
pub(crate) fn fields(raw: &str) -> Vec<&str> {
    raw.split('#').next().unwrap_or("").split_whitespace().collect()
}

pub fn parse_trace(text: &str) -> Result<Vec<Event>, ParseError> {
    let mut events = Vec::new();
    let mut pending: HashMap<TxnId, OpKind> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fs = fields(raw);
        if fs.is_empty() {
            continue;
        }
        if let Some(pair) = parse_atomic(&fs, line)? {
            if let Some(kind) = pending.get(&pair[0].txn) {
                return err(line, format!("{} has a pending {} invocation", pair[0].txn, kind.token()));
            }
            events.extend(pair);
            continue;
        }
        if fs[0] != "inv" && fs[0] != "rsp" {
            return err(line, format!("unknown line kind `{}`", fs[0]));
        }
        let event = parse_split(&fs, line)?;
        match event.phase {
            Phase::Inv => {
                if let Some(kind) = pending.insert(event.txn, event.op) {
                    return err(line, format!("{} has a pending {} invocation", event.txn, kind.token()));
                }
            }
            Phase::Rsp => match pending.remove(&event.txn) {
                Some(kind) if kind == event.op => {}
                None if event.op == OpKind::TryCommit => events.push(Event::inv_try_commit(event.txn)),
                _ => return err(line, format!("response without matching invocation for {}", event.txn)),
            },
        }
        events.push(event);
    }
    Ok(events)
}

fn write_split(out: &mut String, e: &Event) {
    let phase = if e.is_inv() { "inv" } else { "rsp" };
    let _ = write!(out, "{phase} {} {}", e.op.token(), e.txn.0);
    if let Some(x) = &e.object {
        let _ = write!(out, " {x}");
    }
    match (e.op, e.value) {
        (OpKind::TryAbort, _) | (_, None) => {}
        (_, Some(v)) => {
            let _ = write!(out, " {v}");
        }
    }
    out.push('\n');
}

/// Renders events, using the atomic shorthand wherever an invocation is
/// immediately followed by its response.
pub fn serialize_trace(events: &[Event]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < events.len() {
        let e = &events[i];
        let next = events.get(i + 1).filter(|n| e.is_inv() && n.is_rsp() && n.txn == e.txn && n.op == e.op);
        let shorthand = next.and_then(|rsp| {
            let t = e.txn.0;
            match (e.op, rsp.value) {
                (OpKind::Read, Some(v)) => Some(format!("r {t} {} {v}", e.object.as_ref()?)),
                (OpKind::Write, Some(Value::Ok)) => Some(format!("w {t} {} {}", e.object.as_ref()?, e.value?)),
                (OpKind::TryCommit, Some(Value::Ok)) => Some(format!("c {t}")),
                (OpKind::TryCommit, Some(Value::Abort)) => Some(format!("tc {t} A")),
                (OpKind::TryAbort, _) => Some(format!("ta {t}")),
                (OpKind::Begin, None) => Some(format!("b {t}")),
                _ => None,
            }
        });
        match shorthand {
            Some(s) => {
                out.push_str(&s);
                out.push('\n');
                i += 2;
            }
            None => {
                write_split(&mut out, e);
                i += 1;
            }
        }
    }
    out
}
