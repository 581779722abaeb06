use std::collections::VecDeque;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::script::{AdversaryScript, Step};
use crate::types::{ObjectId, TxnId};

#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadConfig {
    /// Transactions open at the same time.
    pub threads: usize,
    pub txns: usize,
    pub objects: usize,
    pub ops_per_txn: RangeInclusive<usize>,
    pub read_fraction: f64,
    pub seed: u64,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig { threads: 4, txns: 20, objects: 4, ops_per_txn: 1..=4, read_fraction: 0.5, seed: 0 }
    }
}

/// Object names `o0`, `o1`, ...
pub fn object_name(i: usize) -> ObjectId {
    ObjectId::new(&format!("o{i}"))
}

fn transaction(cfg: &WorkloadConfig, rng: &mut ChaCha8Rng, t: TxnId, next_value: &mut i64) -> VecDeque<Step> {
    let lo = *cfg.ops_per_txn.start();
    let hi = (*cfg.ops_per_txn.end()).max(lo);
    let ops = rng.gen_range(lo..=hi);
    let reads = (0..ops).filter(|_| rng.gen_bool(cfg.read_fraction.clamp(0.0, 1.0))).count().min(cfg.objects);
    let writes = ops - reads.min(ops);
    let mut objects: Vec<usize> = (0..cfg.objects).collect();
    objects.shuffle(rng);

    let mut steps = VecDeque::with_capacity(ops + 2);
    steps.push_back(Step::Begin(t));
    for &o in &objects[..reads] {
        steps.push_back(Step::Read { txn: t, object: object_name(o), value: None });
    }
    for _ in 0..writes {
        let object = object_name(rng.gen_range(0..cfg.objects));
        steps.push_back(Step::Write { txn: t, object, value: *next_value });
        *next_value += 1;
    }
    steps.push_back(Step::Commit(t));
    steps
}

/// A seeded random workload: transactions are read prefixes followed by
/// writes and a commit, interleaved with up to `threads` open at once.
pub fn generate_workload(cfg: &WorkloadConfig) -> AdversaryScript {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut next_value = 1;
    let mut started = 0;
    let mut open: Vec<VecDeque<Step>> = Vec::new();
    let mut steps = Vec::new();
    if cfg.objects == 0 {
        return AdversaryScript::default();
    }
    loop {
        while open.len() < cfg.threads.max(1) && started < cfg.txns {
            started += 1;
            let t = TxnId(started as u32);
            open.push(transaction(cfg, &mut rng, t, &mut next_value));
        }
        if open.is_empty() {
            break;
        }
        let i = rng.gen_range(0..open.len());
        steps.push(open[i].pop_front().expect("open transactions have steps"));
        if open[i].is_empty() {
            open.swap_remove(i);
        }
    }
    AdversaryScript::new(steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let cfg = WorkloadConfig { seed: 7, ..WorkloadConfig::default() };
        assert_eq!(generate_workload(&cfg), generate_workload(&cfg));
        let other = WorkloadConfig { seed: 8, ..cfg.clone() };
        assert_ne!(generate_workload(&cfg), generate_workload(&other));
    }

    #[test]
    fn read_only_when_fraction_is_one() {
        let cfg = WorkloadConfig { read_fraction: 1.0, seed: 3, ..WorkloadConfig::default() };
        assert!(generate_workload(&cfg).steps.iter().all(|s| !matches!(s, Step::Write { .. })));
    }

    #[test]
    fn empty_when_no_transactions() {
        let cfg = WorkloadConfig { txns: 0, ..WorkloadConfig::default() };
        assert!(generate_workload(&cfg).steps.is_empty());
    }

    #[test]
    fn reads_precede_writes() {
        let cfg = WorkloadConfig { txns: 50, seed: 11, ..WorkloadConfig::default() };
        let script = generate_workload(&cfg);
        for t in 1..=50 {
            let mine: Vec<&Step> = script.steps.iter().filter(|s| s.txn() == TxnId(t)).collect();
            assert!(matches!(mine.first(), Some(Step::Begin(_))));
            assert!(matches!(mine.last(), Some(Step::Commit(_))));
            let first_write = mine.iter().position(|s| matches!(s, Step::Write { .. })).unwrap_or(mine.len());
            assert!(mine[first_write..].iter().all(|s| !matches!(s, Step::Read { .. })));
        }
    }
}
