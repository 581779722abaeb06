use std::collections::BTreeSet;

use super::script::{AdversaryScript, Step};
use super::HarnessError;
use crate::history::History;
use crate::membership::{check_mvc_opacity, Verdict};
use crate::types::{Event, ObjectId, TxnId, Value};

/// Outcome of one (choice, continuation) combination.
#[derive(Clone, Debug)]
pub struct BranchReport {
    /// Value picked at each choice point, in script order.
    pub choices: Vec<(TxnId, ObjectId, i64)>,
    pub branch: String,
    pub history: History,
    pub verdict: Verdict,
    /// Transactions a permissive scheduler has to abort when the branch is
    /// played out operation by operation.
    pub must_abort: Vec<TxnId>,
}

fn events_of(step: &Step, choice: Option<i64>) -> Result<[Event; 2], HarnessError> {
    let t = step.txn();
    Ok(match step {
        Step::Begin(_) => [Event::inv_begin(t), Event::rsp_begin(t)],
        Step::Read { object, value, .. } => {
            let v = choice.or(*value).ok_or_else(|| HarnessError::UnvaluedRead { txn: t, object: object.clone() })?;
            [Event::inv_read(t, object.clone()), Event::rsp_read(t, object.clone(), Value::Int(v))]
        }
        Step::Choice { object, .. } => {
            let v = choice.expect("choice value supplied");
            [Event::inv_read(t, object.clone()), Event::rsp_read(t, object.clone(), Value::Int(v))]
        }
        Step::Write { object, value, .. } => {
            [Event::inv_write(t, object.clone(), *value), Event::rsp_write(t, Value::Ok)]
        }
        Step::Commit(_) => [Event::inv_try_commit(t), Event::rsp_try_commit(t, Value::Ok)],
        Step::Abort(_) => [Event::inv_try_abort(t), Event::rsp_try_abort(t)],
    })
}

/// Values readable at a choice point: 0 and values written to the object by
/// transactions that committed earlier in the steps.
fn available(prior: &[Step], object: &ObjectId) -> BTreeSet<i64> {
    let mut out = BTreeSet::from([0]);
    for (i, step) in prior.iter().enumerate() {
        if let Step::Commit(t) = step {
            out.extend(prior[..i].iter().filter_map(|s| match s {
                Step::Write { txn, object: o, value } if txn == t && o == object => Some(*value),
                _ => None,
            }));
        }
    }
    out
}

/// Plays steps one at a time; a read or commit that would leave the class is
/// answered with `A` instead, as a permissive scheduler would.
fn permissive_run(steps: &[(Step, Option<i64>)]) -> Result<Vec<TxnId>, HarnessError> {
    let mut events: Vec<Event> = Vec::new();
    let mut aborted = Vec::new();
    for (step, choice) in steps {
        let t = step.txn();
        if aborted.contains(&t) {
            continue;
        }
        let [inv, rsp] = events_of(step, *choice)?;
        let checked = matches!(step, Step::Read { .. } | Step::Choice { .. } | Step::Commit(_));
        events.push(inv);
        events.push(rsp);
        if !checked {
            continue;
        }
        let member = History::build(events.clone()).map(|h| check_mvc_opacity(&h).member).unwrap_or(false);
        if !member {
            let last = events.last_mut().expect("just pushed");
            last.value = Some(Value::Abort);
            aborted.push(t);
        }
    }
    Ok(aborted)
}

/// Classifies every combination of choice values and continuation branches.
pub fn replay_adversary(script: &AdversaryScript) -> Result<Vec<BranchReport>, HarnessError> {
    let mut combos: Vec<Vec<i64>> = vec![Vec::new()];
    for (i, step) in script.steps.iter().enumerate() {
        let Step::Choice { txn, object, values } = step else { continue };
        let readable = available(&script.steps[..i], object);
        if let Some(&bad) = values.iter().find(|v| !readable.contains(v)) {
            return Err(HarnessError::UnknownVersion { txn: *txn, object: object.clone(), value: bad });
        }
        combos = combos.into_iter().flat_map(|c| values.iter().map(move |&v| [c.clone(), vec![v]].concat())).collect();
    }
    let branches: Vec<(String, Vec<Step>)> =
        if script.branches.is_empty() { vec![(String::new(), Vec::new())] } else { script.branches.clone() };

    let mut reports = Vec::new();
    for combo in &combos {
        let mut picks = combo.iter();
        let mut prefix: Vec<(Step, Option<i64>)> = Vec::new();
        let mut choices = Vec::new();
        for step in &script.steps {
            let pick = match step {
                Step::Choice { txn, object, .. } => {
                    let v = *picks.next().expect("one value per choice point");
                    choices.push((*txn, object.clone(), v));
                    Some(v)
                }
                _ => None,
            };
            prefix.push((step.clone(), pick));
        }
        for (name, continuation) in &branches {
            let mut steps = prefix.clone();
            steps.extend(continuation.iter().map(|s| (s.clone(), None)));
            let mut events = Vec::with_capacity(steps.len() * 2);
            for (step, pick) in &steps {
                events.extend(events_of(step, *pick)?);
            }
            let history = History::build(events)?;
            let verdict = check_mvc_opacity(&history);
            reports.push(BranchReport {
                choices: choices.clone(),
                branch: name.clone(),
                history,
                verdict,
                must_abort: permissive_run(&steps)?,
            });
        }
    }
    Ok(reports)
}
