//! Conflict orders and the multi-version conflict graph.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use crate::error::{CheckError, HistoryError};
use crate::history::{History, Operation};
use crate::semantics::{successful_reads, valid_write_of};
use crate::types::{ObjectId, OpKind, TxnId};

/// A successful operation that can take part in a conflict: a commit `c_k`
/// or a read `r_k(x,v)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpRef {
    Commit(TxnId),
    Read { txn: TxnId, object: ObjectId, value: i64 },
}

impl OpRef {
    pub fn txn(&self) -> TxnId {
        match self {
            OpRef::Commit(t) => *t,
            OpRef::Read { txn, .. } => *txn,
        }
    }

    /// `None` unless `op` is a successful read.
    pub fn read(op: &Operation) -> Option<OpRef> {
        Some(OpRef::Read { txn: op.txn, object: op.object.clone()?, value: op.read_value()? })
    }
}

impl fmt::Display for OpRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpRef::Commit(t) => write!(f, "c{}", t.0),
            OpRef::Read { txn, object, value } => write!(f, "r{}({object},{value})", txn.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairKind {
    Cc,
    Cr,
    Rc,
    Rw,
}

impl PairKind {
    pub fn label(self) -> &'static str {
        match self {
            PairKind::Cc => "cc",
            PairKind::Cr => "cr",
            PairKind::Rc => "rc",
            PairKind::Rw => "rw",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedPair {
    pub kind: PairKind,
    pub from: OpRef,
    pub to: OpRef,
}

impl OrderedPair {
    pub fn new(kind: PairKind, from: OpRef, to: OpRef) -> Self {
        OrderedPair { kind, from, to }
    }
}

impl fmt::Display for OrderedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:({}, {})", self.kind.label(), self.from, self.to)
    }
}

/// Response positions of commits and successful reads. `c0` sits at -1.
pub fn op_positions(h: &History) -> HashMap<OpRef, i64> {
    let mut out = HashMap::with_capacity(h.ops().len() + 1);
    out.insert(OpRef::Commit(TxnId::INIT), -1);
    for op in h.ops() {
        let Some(rsp) = op.rsp else { continue };
        if let Some(r) = OpRef::read(op) {
            out.insert(r, rsp as i64);
        } else if op.kind == OpKind::TryCommit && op.is_successful() {
            out.insert(OpRef::Commit(op.txn), rsp as i64);
        }
    }
    out
}

/// Conflict order of a sequential history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictOrder {
    pub pairs: BTreeSet<OrderedPair>,
}

pub fn conflict_order(h: &History) -> Result<ConflictOrder, HistoryError> {
    if !h.is_sequential() {
        return Err(HistoryError::NotSequential);
    }
    let mut pairs = BTreeSet::new();
    for x in h.objects() {
        let writers = h.committed_writers(x);
        for (i, &(_, a)) in writers.iter().enumerate() {
            for &(_, b) in &writers[i + 1..] {
                pairs.insert(OrderedPair::new(PairKind::Cc, OpRef::Commit(a), OpRef::Commit(b)));
            }
        }
    }
    for op in successful_reads(h) {
        let (Some(r), Some(x), Some(pos)) = (OpRef::read(op), op.object.as_ref(), op.rsp) else {
            continue;
        };
        for (c, w) in h.committed_writers(x) {
            if w == op.txn {
                continue;
            }
            if c < pos as i64 {
                pairs.insert(OrderedPair::new(PairKind::Cr, OpRef::Commit(w), r.clone()));
            } else {
                pairs.insert(OrderedPair::new(PairKind::Rw, r.clone(), OpRef::Commit(w)));
            }
        }
    }
    Ok(ConflictOrder { pairs })
}

/// The multi-version conflict order, computed over the mvc-completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MvcOrder {
    pairs: BTreeSet<OrderedPair>,
    completion: History,
    valid_writes: BTreeMap<OpRef, TxnId>,
}

impl MvcOrder {
    pub fn pairs(&self) -> &BTreeSet<OrderedPair> {
        &self.pairs
    }

    pub fn completion(&self) -> &History {
        &self.completion
    }

    /// validWrite of every successful read.
    pub fn valid_writes(&self) -> &BTreeMap<OpRef, TxnId> {
        &self.valid_writes
    }

    /// Pairs with `c0` as an endpoint, and pairs of reads that observed `c0`,
    /// left out; this is how conflicts are usually presented.
    pub fn without_init(&self) -> BTreeSet<OrderedPair> {
        let from_init = |op: &OpRef| match op {
            OpRef::Commit(t) => t.is_init(),
            read => self.valid_writes.get(read).is_some_and(|w| w.is_init()),
        };
        self.pairs.iter().filter(|p| !from_init(&p.from) && !from_init(&p.to)).cloned().collect()
    }
}

pub fn mvc_order(h: &History) -> Result<MvcOrder, CheckError> {
    let completion = h.mvc_completion();
    let mut pairs = BTreeSet::new();
    let mut valid_writes = BTreeMap::new();
    let mut writers: BTreeMap<&ObjectId, Vec<(i64, TxnId)>> = BTreeMap::new();
    for x in completion.objects() {
        let ws = completion.committed_writers(x);
        for (i, &(_, a)) in ws.iter().enumerate() {
            for &(_, b) in &ws[i + 1..] {
                pairs.insert(OrderedPair::new(PairKind::Cc, OpRef::Commit(a), OpRef::Commit(b)));
            }
        }
        writers.insert(x, ws);
    }
    for op in successful_reads(&completion) {
        let (Some(r), Some(x)) = (OpRef::read(op), op.object.as_ref()) else { continue };
        let Some(k) = valid_write_of(&completion, op) else {
            return Err(CheckError::Invalid(r));
        };
        valid_writes.insert(r.clone(), k);
        let ck = completion.commit_position(k).expect("validWrite is committed");
        for &(cj, j) in &writers[x] {
            if j == op.txn {
                continue;
            }
            if cj <= ck {
                pairs.insert(OrderedPair::new(PairKind::Cr, OpRef::Commit(j), r.clone()));
            } else {
                pairs.insert(OrderedPair::new(PairKind::Rc, r.clone(), OpRef::Commit(j)));
            }
        }
    }
    Ok(MvcOrder { pairs, completion, valid_writes })
}

/// `s` is equivalent to the completion `m` was computed over and orders the
/// responses of every pair in `m` the same way.
pub fn satisfies(s: &History, m: &MvcOrder) -> bool {
    if !s.equivalent(&m.completion) {
        return false;
    }
    let pos = op_positions(s);
    m.pairs.iter().all(|p| match (pos.get(&p.from), pos.get(&p.to)) {
        (Some(a), Some(b)) => a < b,
        _ => false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    Rt,
    Cc,
    Cr,
    Rc,
}

impl EdgeLabel {
    pub fn label(self) -> &'static str {
        match self {
            EdgeLabel::Rt => "rt",
            EdgeLabel::Cc => "cc",
            EdgeLabel::Cr => "cr",
            EdgeLabel::Rc => "rc",
        }
    }
}

impl From<PairKind> for EdgeLabel {
    fn from(kind: PairKind) -> Self {
        match kind {
            PairKind::Cc => EdgeLabel::Cc,
            PairKind::Cr => EdgeLabel::Cr,
            PairKind::Rc | PairKind::Rw => EdgeLabel::Rc,
        }
    }
}

/// Transactions as vertices; real-time and conflict edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MvcGraph {
    vertices: BTreeSet<TxnId>,
    edges: BTreeSet<(TxnId, TxnId, EdgeLabel)>,
}

impl Default for MvcGraph {
    fn default() -> Self {
        MvcGraph { vertices: BTreeSet::from([TxnId::INIT]), edges: BTreeSet::new() }
    }
}

impl MvcGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, t: TxnId) {
        self.vertices.insert(t);
    }

    pub fn add_edge(&mut self, from: TxnId, to: TxnId, label: EdgeLabel) {
        self.vertices.insert(from);
        self.vertices.insert(to);
        self.edges.insert((from, to, label));
    }

    pub fn vertices(&self) -> &BTreeSet<TxnId> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(TxnId, TxnId, EdgeLabel)> {
        &self.edges
    }

    pub fn has_edge(&self, from: TxnId, to: TxnId) -> bool {
        self.edges.iter().any(|&(a, b, _)| a == from && b == to)
    }

    /// The graph with `T0` and its edges removed.
    pub fn without_init(&self) -> MvcGraph {
        MvcGraph {
            vertices: self.vertices.iter().copied().filter(|t| !t.is_init()).collect(),
            edges: self.edges.iter().copied().filter(|e| !e.0.is_init() && !e.1.is_init()).collect(),
        }
    }
}

pub fn build_mvcg(h: &History) -> Result<MvcGraph, CheckError> {
    let order = mvc_order(h)?;
    Ok(graph_from(h, &order))
}

/// Graph from a precomputed order; `h` supplies the real-time order.
pub fn graph_from(h: &History, order: &MvcOrder) -> MvcGraph {
    let mut g = MvcGraph::new();
    for t in h.txn_ids() {
        g.add_vertex(t);
    }
    for &(a, b) in h.real_time_order().pairs() {
        g.add_edge(a, b, EdgeLabel::Rt);
    }
    for p in &order.pairs {
        g.add_edge(p.from.txn(), p.to.txn(), p.kind.into());
    }
    g
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphOrder {
    /// Every vertex, smallest id first among those ready.
    Topological(Vec<TxnId>),
    /// Vertices of one cycle, rotated to start at the smallest id.
    Cycle(Vec<TxnId>),
}

pub fn acyclic_witness(g: &MvcGraph) -> GraphOrder {
    let mut preds: BTreeMap<TxnId, BTreeSet<TxnId>> = g.vertices.iter().map(|&v| (v, BTreeSet::new())).collect();
    let mut succs: BTreeMap<TxnId, BTreeSet<TxnId>> = preds.clone();
    for &(a, b, _) in &g.edges {
        if a != b {
            preds.get_mut(&b).expect("vertex").insert(a);
            succs.get_mut(&a).expect("vertex").insert(b);
        } else {
            return GraphOrder::Cycle(vec![a]);
        }
    }
    let mut indegree: BTreeMap<TxnId, usize> = preds.iter().map(|(&v, p)| (v, p.len())).collect();
    let mut ready: BTreeSet<TxnId> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&v, _)| v).collect();
    let mut order = Vec::with_capacity(g.vertices.len());
    while let Some(v) = ready.pop_first() {
        order.push(v);
        indegree.remove(&v);
        for s in &succs[&v] {
            let d = indegree.get_mut(s).expect("unvisited successor");
            *d -= 1;
            if *d == 0 {
                ready.insert(*s);
            }
        }
    }
    if indegree.is_empty() {
        return GraphOrder::Topological(order);
    }
    // Every remaining vertex has a remaining predecessor; walk backwards until a repeat.
    let mut path = Vec::new();
    let mut seen = BTreeMap::new();
    let mut v = *indegree.keys().next().expect("nonempty");
    while !seen.contains_key(&v) {
        seen.insert(v, path.len());
        path.push(v);
        v = *preds[&v].iter().find(|p| indegree.contains_key(p)).expect("remaining predecessor");
    }
    let mut cycle: Vec<TxnId> = path[seen[&v]..].iter().rev().copied().collect();
    let smallest = cycle.iter().enumerate().min_by_key(|(_, t)| **t).map(|(i, _)| i).unwrap_or(0);
    cycle.rotate_left(smallest);
    GraphOrder::Cycle(cycle)
}

pub fn export_dot(g: &MvcGraph) -> String {
    let mut out = String::from("digraph mvcg {\n");
    for v in &g.vertices {
        let _ = writeln!(out, "  {v};");
    }
    for (a, b, label) in &g.edges {
        let _ = writeln!(out, "  {a} -> {b} [label=\"{}\"];", label.label());
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::canonicalize;
    use crate::types::ops::*;
    use crate::types::{Event, Value};

    fn build(parts: &[[Event; 2]]) -> History {
        History::build(parts.iter().flat_map(|p| p.iter().cloned()).collect()).unwrap()
    }

    fn c(t: u32) -> OpRef {
        OpRef::Commit(TxnId(t))
    }

    fn r(t: u32, x: &str, v: i64) -> OpRef {
        OpRef::Read { txn: TxnId(t), object: ObjectId::new(x), value: v }
    }

    fn pairs(list: &[(PairKind, OpRef, OpRef)]) -> BTreeSet<OrderedPair> {
        list.iter().map(|(k, a, b)| OrderedPair::new(*k, a.clone(), b.clone())).collect()
    }

    use PairKind::*;

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

    #[test]
    fn conflict_order_clauses() {
        let co = conflict_order(&h_illus()).unwrap();
        assert_eq!(
            co.pairs,
            pairs(&[
                (Cc, c(0), c(2)),
                (Cr, c(0), r(1, "x", 0)),
                (Cr, c(0), r(1, "y", 0)),
                (Cr, c(2), r(1, "y", 0)),
                (Rw, r(1, "x", 0), c(2)),
            ])
        );
        let read_only = build(&[read(1, "x", 0), commit(1), read(2, "y", 0)]);
        assert!(conflict_order(&read_only).unwrap().pairs.iter().all(|p| p.kind == Cr && p.from == c(0)));
        let disjoint = build(&[write(1, "x", 1), commit(1), write(2, "y", 2), commit(2)]);
        assert!(!conflict_order(&disjoint).unwrap().pairs.iter().any(|p| p.from == c(1) && p.to == c(2)));
        assert_eq!(conflict_order(&h_nseq()), Err(HistoryError::NotSequential));
    }

    #[test]
    fn mvc_order_of_nseq() {
        let m = mvc_order(&h_nseq()).unwrap();
        assert_eq!(
            *m.pairs(),
            pairs(&[
                (Cr, c(0), r(3, "x", 5)),
                (Cr, c(1), r(3, "x", 5)),
                (Rc, r(3, "x", 5), c(2)),
                (Cc, c(0), c(1)),
                (Cc, c(0), c(2)),
                (Cc, c(1), c(2)),
            ])
        );
    }

    #[test]
    fn mvc_order_of_illus() {
        let m = mvc_order(&h_illus()).unwrap();
        assert_eq!(
            *m.pairs(),
            pairs(&[
                (Cr, c(0), r(1, "x", 0)),
                (Cr, c(0), r(1, "y", 0)),
                (Rc, r(1, "x", 0), c(2)),
                (Rc, r(1, "y", 0), c(2)),
                (Cc, c(0), c(2)),
            ])
        );
    }

    #[test]
    fn mvc_order_of_mvcsub() {
        let m = mvc_order(&h_mvcsub()).unwrap();
        assert_eq!(
            m.without_init(),
            pairs(&[
                (Cr, c(1), r(2, "x", 5)),
                (Cr, c(1), r(3, "x", 5)),
                (Rc, r(3, "x", 5), c(2)),
                (Cc, c(1), c(2)),
                (Cc, c(2), c(3)),
            ])
        );
        assert!(m.pairs().contains(&OrderedPair::new(Rc, r(1, "x", 0), c(2))));
        assert!(!m.pairs().contains(&OrderedPair::new(Rc, r(2, "x", 5), c(2))));
    }

    #[test]
    fn invalid_history_has_no_order() {
        assert_eq!(mvc_order(&build(&[read(1, "x", 7)])), Err(CheckError::Invalid(r(1, "x", 7))));
    }

    #[test]
    fn satisfaction() {
        let h = h_illus();
        let m = mvc_order(&h).unwrap();
        assert!(satisfies(&h.serialize_in_order(&[TxnId(1), TxnId(2)]), &m));
        assert!(!satisfies(&h, &m));
        assert!(!satisfies(&h_mvcsub(), &m));
    }

    #[test]
    fn graphs() {
        let g = build_mvcg(&h_mvcsub()).unwrap();
        assert!(g.has_edge(TxnId(3), TxnId(2)) && g.has_edge(TxnId(2), TxnId(3)));
        assert_eq!(acyclic_witness(&g), GraphOrder::Cycle(vec![TxnId(2), TxnId(3)]));

        let g = build_mvcg(&h_illus()).unwrap().without_init();
        let edges: BTreeSet<_> = g.edges().iter().map(|e| (e.0, e.1)).collect();
        assert_eq!(edges, BTreeSet::from([(TxnId(1), TxnId(2))]));

        let g = build_mvcg(&h_nseq()).unwrap();
        assert_eq!(acyclic_witness(&g), GraphOrder::Topological(vec![TxnId(0), TxnId(1), TxnId(3), TxnId(2)]));

        let single = build_mvcg(&build(&[write(1, "x", 1), commit(1)])).unwrap();
        assert!(single.edges().iter().all(|e| e.0.is_init()));
        assert_eq!(acyclic_witness(&MvcGraph::new()), GraphOrder::Topological(vec![TxnId(0)]));
    }

    #[test]
    fn dot_output() {
        let mut g = MvcGraph::new();
        g.add_edge(TxnId(1), TxnId(2), EdgeLabel::Cr);
        assert!(export_dot(&g).contains("T1 -> T2 [label=\"cr\"]"));
        assert_eq!(export_dot(&MvcGraph::new()), "digraph mvcg {\n  T0;\n}\n");
        let dot = export_dot(&build_mvcg(&h_mvcsub()).unwrap());
        assert!(dot.contains("T2 -> T3") && dot.contains("T3 -> T2"));
        assert_eq!(dot, export_dot(&build_mvcg(&h_mvcsub()).unwrap()));
    }
}
