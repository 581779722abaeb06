use std::fmt::Write as _;

use crate::trace::{fields, parse_atomic, parse_int, parse_object, parse_txn, ParseError};
use crate::types::{Event, ObjectId, OpKind, TxnId, Value};

/// One operation request in a script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Begin(TxnId),
    /// `value` is what the read returns when the script is replayed against
    /// the checker; engines ignore it.
    Read {
        txn: TxnId,
        object: ObjectId,
        value: Option<i64>,
    },
    /// A read whose value is left open among `values`.
    Choice {
        txn: TxnId,
        object: ObjectId,
        values: Vec<i64>,
    },
    Write {
        txn: TxnId,
        object: ObjectId,
        value: i64,
    },
    Commit(TxnId),
    Abort(TxnId),
}

impl Step {
    pub fn txn(&self) -> TxnId {
        match self {
            Step::Begin(t) | Step::Commit(t) | Step::Abort(t) => *t,
            Step::Read { txn, .. } | Step::Choice { txn, .. } | Step::Write { txn, .. } => *txn,
        }
    }
}

/// Operation requests plus named continuations that follow them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdversaryScript {
    pub steps: Vec<Step>,
    pub branches: Vec<(String, Vec<Step>)>,
}

impl AdversaryScript {
    pub fn new(steps: Vec<Step>) -> Self {
        AdversaryScript { steps, branches: Vec::new() }
    }

    /// Builds a script that requests exactly the operations of a trace,
    /// with reads carrying their recorded values.
    pub fn from_events(events: &[Event]) -> Self {
        let mut steps = Vec::new();
        for e in events.iter().filter(|e| e.is_inv()) {
            let t = e.txn;
            steps.push(match e.op {
                OpKind::Begin => Step::Begin(t),
                OpKind::Read => {
                    let object = e.object.clone().expect("read object");
                    let value = events
                        .iter()
                        .find(|r| {
                            r.is_rsp() && r.txn == t && r.op == OpKind::Read && r.object.as_ref() == Some(&object)
                        })
                        .and_then(|r| r.value.and_then(Value::as_int));
                    Step::Read { txn: t, object, value }
                }
                OpKind::Write => Step::Write {
                    txn: t,
                    object: e.object.clone().expect("write object"),
                    value: e.value.and_then(Value::as_int).expect("write value"),
                },
                OpKind::TryCommit => Step::Commit(t),
                OpKind::TryAbort => Step::Abort(t),
            });
        }
        AdversaryScript::new(steps)
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut script = AdversaryScript::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let fs = fields(raw);
            if fs.is_empty() {
                continue;
            }
            let step = match fs[0] {
                "branch" if fs.len() == 2 => {
                    script.branches.push((fs[1].to_string(), Vec::new()));
                    continue;
                }
                "r" if fs.len() == 3 => {
                    Step::Read { txn: parse_txn(fs[1], line)?, object: parse_object(fs[2], line)?, value: None }
                }
                "r?" if fs.len() == 4 => {
                    let values = fs[3].split('|').map(|v| parse_int(v, line)).collect::<Result<Vec<_>, _>>()?;
                    if values.len() < 2 {
                        return Err(ParseError { line, reason: "a choice needs at least two values".into() });
                    }
                    Step::Choice { txn: parse_txn(fs[1], line)?, object: parse_object(fs[2], line)?, values }
                }
                _ => {
                    let Some([inv, rsp]) = parse_atomic(&fs, line)? else {
                        return Err(ParseError { line, reason: format!("unknown script line `{}`", fs[0]) });
                    };
                    step_of(inv, rsp, line)?
                }
            };
            match script.branches.last_mut() {
                Some((_, steps)) => steps.push(step),
                None => script.steps.push(step),
            }
        }
        Ok(script)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        write_steps(&mut out, &self.steps);
        for (name, steps) in &self.branches {
            let _ = writeln!(out, "branch {name}");
            write_steps(&mut out, steps);
        }
        out
    }
}

fn step_of(inv: Event, rsp: Event, line: usize) -> Result<Step, ParseError> {
    let t = inv.txn;
    Ok(match inv.op {
        OpKind::Begin => Step::Begin(t),
        OpKind::Read => match rsp.value {
            Some(Value::Int(v)) => Step::Read { txn: t, object: inv.object.expect("object"), value: Some(v) },
            _ => return Err(ParseError { line, reason: "scripts cannot request an aborted read".into() }),
        },
        OpKind::Write => Step::Write {
            txn: t,
            object: inv.object.expect("object"),
            value: inv.value.and_then(Value::as_int).expect("value"),
        },
        OpKind::TryCommit if rsp.value == Some(Value::Ok) => Step::Commit(t),
        OpKind::TryCommit => {
            return Err(ParseError { line, reason: "scripts request commits with `c`".into() });
        }
        OpKind::TryAbort => Step::Abort(t),
    })
}

fn write_steps(out: &mut String, steps: &[Step]) {
    for step in steps {
        let _ = match step {
            Step::Begin(t) => writeln!(out, "b {}", t.0),
            Step::Read { txn, object, value: Some(v) } => writeln!(out, "r {} {object} {v}", txn.0),
            Step::Read { txn, object, value: None } => writeln!(out, "r {} {object}", txn.0),
            Step::Choice { txn, object, values } => {
                let vs: Vec<String> = values.iter().map(ToString::to_string).collect();
                writeln!(out, "r? {} {object} {}", txn.0, vs.join("|"))
            }
            Step::Write { txn, object, value } => writeln!(out, "w {} {object} {value}", txn.0),
            Step::Commit(t) => writeln!(out, "c {}", t.0),
            Step::Abort(t) => writeln!(out, "ta {}", t.0),
        };
    }
}
