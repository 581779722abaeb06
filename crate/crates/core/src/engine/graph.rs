use std::collections::{BTreeSet, HashMap};

use crate::types::TxnId;

#[derive(Clone, Debug, Default)]
struct Node {
    preds: BTreeSet<TxnId>,
    succs: BTreeSet<TxnId>,
}

/// Serialization graph over live and retained transactions. Kept acyclic:
/// callers test with [`SgtGraph::closes_cycle`] before adding edges.
#[derive(Clone, Debug, Default)]
pub struct SgtGraph {
    nodes: HashMap<TxnId, Node>,
}

impl SgtGraph {
    pub fn add_vertex(&mut self, t: TxnId) {
        self.nodes.entry(t).or_default();
    }

    pub fn contains(&self, t: TxnId) -> bool {
        self.nodes.contains_key(&t)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = TxnId> + '_ {
        self.nodes.keys().copied()
    }

    /// Adds `from -> to`; ignored if either endpoint is absent or they coincide.
    pub fn add_edge(&mut self, from: TxnId, to: TxnId) {
        if from == to || !self.contains(from) || !self.contains(to) {
            return;
        }
        self.nodes.get_mut(&from).expect("present").succs.insert(to);
        self.nodes.get_mut(&to).expect("present").preds.insert(from);
    }

    pub fn has_edge(&self, from: TxnId, to: TxnId) -> bool {
        self.nodes.get(&from).is_some_and(|n| n.succs.contains(&to))
    }

    pub fn is_source(&self, t: TxnId) -> bool {
        self.nodes.get(&t).is_some_and(|n| n.preds.is_empty())
    }

    pub fn remove_vertex(&mut self, t: TxnId) {
        let Some(node) = self.nodes.remove(&t) else { return };
        for s in node.succs {
            if let Some(n) = self.nodes.get_mut(&s) {
                n.preds.remove(&t);
            }
        }
        for p in node.preds {
            if let Some(n) = self.nodes.get_mut(&p) {
                n.succs.remove(&t);
            }
        }
    }

    /// Whether adding `u -> t` for each `u` in `into` and `t -> w` for each
    /// `w` in `out_of` would create a cycle.
    pub fn closes_cycle(&self, t: TxnId, into: &[TxnId], out_of: &[TxnId]) -> bool {
        let sources: BTreeSet<TxnId> = into.iter().copied().filter(|u| *u != t && self.contains(*u)).collect();
        if sources.is_empty() {
            return false;
        }
        let mut seen = BTreeSet::new();
        let mut stack: Vec<TxnId> = out_of.iter().copied().filter(|w| self.contains(*w)).collect();
        if let Some(n) = self.nodes.get(&t) {
            stack.extend(n.succs.iter().copied());
        }
        while let Some(v) = stack.pop() {
            if sources.contains(&v) || v == t {
                return true;
            }
            if seen.insert(v) {
                stack.extend(self.nodes[&v].succs.iter().copied());
            }
        }
        false
    }

    /// Full acyclicity check; used by tests and debug assertions.
    pub fn is_acyclic(&self) -> bool {
        let mut indegree: HashMap<TxnId, usize> = self.nodes.iter().map(|(&t, n)| (t, n.preds.len())).collect();
        let mut ready: Vec<TxnId> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&t, _)| t).collect();
        let mut visited = 0;
        while let Some(v) = ready.pop() {
            visited += 1;
            for s in &self.nodes[&v].succs {
                let d = indegree.get_mut(s).expect("present");
                *d -= 1;
                if *d == 0 {
                    ready.push(*s);
                }
            }
        }
        visited == self.nodes.len()
    }
}
