//! History generators: a bounded exhaustive enumerator of sequential histories
//! and a seeded random generator of (possibly) non-sequential ones.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::history::History;
use crate::types::{Event, ObjectId, TxnId, Value};

/// How a transaction ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Commit,
    /// tryC answered with `A`.
    CommitAborted,
    TryAbort,
    /// No terminal operation.
    Live,
}

/// Bounds of the exhaustive enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumBounds {
    pub max_txns: usize,
    pub objects: usize,
    pub max_reads: usize,
    pub max_writes: usize,
    pub outcomes: Vec<Outcome>,
}

impl Default for EnumBounds {
    fn default() -> Self {
        EnumBounds {
            max_txns: 3,
            objects: 2,
            max_reads: 2,
            max_writes: 2,
            outcomes: vec![Outcome::Commit, Outcome::CommitAborted],
        }
    }
}

/// One transaction's shape: ordered distinct reads, a set of written objects
/// and an outcome. The writes and the outcome form one contiguous block.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Shape {
    reads: Vec<usize>,
    writes: Vec<usize>,
    outcome: Outcome,
}

impl Shape {
    fn units(&self) -> usize {
        self.reads.len() + usize::from(!self.writes.is_empty() || self.outcome != Outcome::Live)
    }
}

fn ordered_subsets(objects: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max.min(objects) {
        let mut next = Vec::new();
        for prefix in &frontier {
            for o in 0..objects {
                if !prefix.contains(&o) {
                    let mut p: Vec<usize> = prefix.clone();
                    p.push(o);
                    next.push(p);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn subsets(objects: usize, max: usize) -> Vec<Vec<usize>> {
    (0u32..1 << objects)
        .filter(|m| m.count_ones() as usize <= max)
        .map(|m| (0..objects).filter(|o| m >> o & 1 == 1).collect())
        .collect()
}

fn shapes(b: &EnumBounds) -> Vec<Shape> {
    let mut out = Vec::new();
    for reads in ordered_subsets(b.objects, b.max_reads) {
        for writes in subsets(b.objects, b.max_writes) {
            for &outcome in &b.outcomes {
                let s = Shape { reads: reads.clone(), writes: writes.clone(), outcome };
                if s.units() > 0 {
                    out.push(s);
                }
            }
        }
    }
    out
}

/// Enumeration object names `x`, `y`, `z`, then `o3`, ...
pub fn enum_object(i: usize) -> ObjectId {
    match i {
        0 => ObjectId::new("x"),
        1 => ObjectId::new("y"),
        2 => ObjectId::new("z"),
        _ => ObjectId::new(&format!("o{i}")),
    }
}

struct Walk<'a, F> {
    shapes: Vec<&'a Shape>,
    progress: Vec<usize>,
    events: Vec<Event>,
    /// (object, value, writer) for every write emitted so far.
    written: Vec<(usize, i64, usize)>,
    next_value: i64,
    /// Objects first appear in index order, so renamings are visited once.
    objects_seen: usize,
    visit: &'a mut F,
}

impl<F: FnMut(History)> Walk<'_, F> {
    fn go(&mut self) {
        let n = self.shapes.len();
        if (0..n).all(|i| self.progress[i] == self.shapes[i].units()) {
            let h = History::build(self.events.clone()).expect("enumerated histories are well-formed");
            (self.visit)(h);
            return;
        }
        for i in 0..n {
            let shape = self.shapes[i];
            let step = self.progress[i];
            if step == shape.units() || (step == 0 && i > 0 && self.progress[i - 1] == 0) {
                continue;
            }
            let t = TxnId(i as u32 + 1);
            let touched: &[usize] = if step < shape.reads.len() { &shape.reads[step..=step] } else { &shape.writes };
            let mut seen = self.objects_seen;
            if touched.iter().any(|&o| {
                seen += usize::from(o == seen);
                o >= seen
            }) {
                continue;
            }
            let mark = (self.events.len(), self.written.len(), self.next_value, self.objects_seen);
            self.objects_seen = seen;
            self.progress[i] += 1;
            if step < shape.reads.len() {
                let o = shape.reads[step];
                let mut values = vec![0];
                values.extend(self.written.iter().filter(|w| w.0 == o && w.2 != i).map(|w| w.1));
                for v in values {
                    let x = enum_object(o);
                    self.events.push(Event::inv_read(t, x.clone()));
                    self.events.push(Event::rsp_read(t, x, Value::Int(v)));
                    self.go();
                    self.events.truncate(mark.0);
                }
            } else {
                for &o in &shape.writes {
                    let v = self.next_value;
                    self.next_value += 1;
                    self.written.push((o, v, i));
                    self.events.push(Event::inv_write(t, enum_object(o), v));
                    self.events.push(Event::rsp_write(t, Value::Ok));
                }
                match shape.outcome {
                    Outcome::Commit => {
                        self.events.push(Event::inv_try_commit(t));
                        self.events.push(Event::rsp_try_commit(t, Value::Ok));
                    }
                    Outcome::CommitAborted => {
                        self.events.push(Event::inv_try_commit(t));
                        self.events.push(Event::rsp_try_commit(t, Value::Abort));
                    }
                    Outcome::TryAbort => {
                        self.events.push(Event::inv_try_abort(t));
                        self.events.push(Event::rsp_try_abort(t));
                    }
                    Outcome::Live => {}
                }
                self.go();
                self.events.truncate(mark.0);
                self.written.truncate(mark.1);
                self.next_value = mark.2;
            }
            self.progress[i] -= 1;
            self.objects_seen = mark.3;
        }
    }
}

/// Visits every sequential history within `bounds`, up to renaming of
/// transactions, objects (both follow first appearance) and written values.
///
/// A read of object `x` returns 0 or any value some other transaction wrote to
/// `x` earlier, committed or not, so invalid histories are included.
pub fn enumerate_sequential(bounds: &EnumBounds, mut visit: impl FnMut(History)) {
    let all = shapes(bounds);
    for n in 1..=bounds.max_txns {
        let mut idx = vec![0usize; n];
        loop {
            let picked: Vec<&Shape> = idx.iter().map(|&i| &all[i]).collect();
            let mut walk = Walk {
                progress: vec![0; n],
                shapes: picked,
                events: Vec::new(),
                written: Vec::new(),
                next_value: 1,
                objects_seen: 0,
                visit: &mut visit,
            };
            walk.go();
            let mut k = 0;
            while k < n {
                idx[k] += 1;
                if idx[k] < all.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomConfig {
    pub max_txns: usize,
    pub objects: usize,
    pub max_reads: usize,
    pub max_writes: usize,
    /// Probability that a read picks a value whose writer has already invoked
    /// tryC, rather than any written value or 0.
    pub plausible_reads: f64,
    pub sequential: bool,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig { max_txns: 5, objects: 3, max_reads: 2, max_writes: 2, plausible_reads: 0.8, sequential: false }
    }
}

enum Planned {
    Read(ObjectId),
    Write(ObjectId, i64),
    TryCommit(Value),
    TryAbort,
}

/// A random well-formed history. Transactions may be left live, have a
/// pending operation, or end with a pending tryC.
pub fn random_history(rng: &mut impl Rng, cfg: &RandomConfig) -> History {
    let n = rng.gen_range(1..=cfg.max_txns.max(1));
    let mut next_value = 1;
    let mut plans: Vec<(Vec<Planned>, bool)> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut objs: Vec<usize> = (0..cfg.objects).collect();
        objs.shuffle(rng);
        let reads = rng.gen_range(0..=cfg.max_reads.min(cfg.objects));
        let writes = rng.gen_range(0..=cfg.max_writes);
        let mut plan: Vec<Planned> = objs[..reads].iter().map(|&o| Planned::Read(enum_object(o))).collect();
        for _ in 0..writes {
            plan.push(Planned::Write(enum_object(rng.gen_range(0..cfg.objects)), next_value));
            next_value += 1;
        }
        let mut pending_last = false;
        match rng.gen_range(0..10) {
            0..=5 => plan.push(Planned::TryCommit(Value::Ok)),
            6 => plan.push(Planned::TryCommit(Value::Abort)),
            7 => plan.push(Planned::TryAbort),
            8 => {
                plan.push(Planned::TryCommit(Value::Ok));
                pending_last = true;
            }
            _ => pending_last = rng.gen_bool(0.5) && !plan.is_empty(),
        }
        if plan.is_empty() {
            plan.push(Planned::TryCommit(Value::Ok));
        }
        plans.push((plan, pending_last));
    }

    // Expand to events; each transaction yields inv/rsp in order.
    let mut cursors: Vec<(usize, bool)> = vec![(0, false); n];
    let mut events: Vec<Event> = Vec::new();
    let mut committing: Vec<(ObjectId, i64)> = Vec::new();
    let mut all_writes: Vec<(ObjectId, i64)> = Vec::new();
    loop {
        let ready: Vec<usize> = (0..n)
            .filter(|&i| {
                let (op, in_rsp) = cursors[i];
                let (plan, pending_last) = &plans[i];
                op < plan.len() && !(in_rsp && *pending_last && op + 1 == plan.len())
            })
            .collect();
        let Some(&i) = ready.choose(rng) else { break };
        let i = if cfg.sequential { cursors.iter().position(|c| c.1).unwrap_or(i) } else { i };
        let t = TxnId(i as u32 + 1);
        let (op, in_rsp) = cursors[i];
        let planned = &plans[i].0[op];
        let mut aborted = false;
        if !in_rsp {
            events.push(match planned {
                Planned::Read(x) => Event::inv_read(t, x.clone()),
                Planned::Write(x, v) => {
                    all_writes.push((x.clone(), *v));
                    Event::inv_write(t, x.clone(), *v)
                }
                Planned::TryCommit(_) => {
                    for p in &plans[i].0 {
                        if let Planned::Write(x, v) = p {
                            committing.push((x.clone(), *v));
                        }
                    }
                    Event::inv_try_commit(t)
                }
                Planned::TryAbort => Event::inv_try_abort(t),
            });
            cursors[i].1 = true;
            continue;
        }
        events.push(match planned {
            Planned::Read(x) => {
                let pool: Vec<i64> = if rng.gen_bool(cfg.plausible_reads) {
                    committing.iter().filter(|w| &w.0 == x).map(|w| w.1).collect()
                } else {
                    all_writes.iter().filter(|w| &w.0 == x).map(|w| w.1).collect()
                };
                let v = if pool.is_empty() || rng.gen_bool(0.25) { 0 } else { *pool.choose(rng).expect("nonempty") };
                if rng.gen_bool(0.05) {
                    aborted = true;
                    Event::rsp_read(t, x.clone(), Value::Abort)
                } else {
                    Event::rsp_read(t, x.clone(), Value::Int(v))
                }
            }
            Planned::Write(..) => Event::rsp_write(t, Value::Ok),
            Planned::TryCommit(v) => Event::rsp_try_commit(t, *v),
            Planned::TryAbort => Event::rsp_try_abort(t),
        });
        cursors[i] = if aborted { (plans[i].0.len(), false) } else { (op + 1, false) };
    }
    History::build(events).expect("generated histories are well-formed")
}
