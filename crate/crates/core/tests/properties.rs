use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mvcstm::gen::{random_history, RandomConfig};
use mvcstm::membership::{check_co_opacity, check_mvc_opacity, CheckOptions};
use mvcstm::semantics::{is_legal, is_multiversioned, is_valid};
use mvcstm::trace::{parse_trace, serialize_trace};
use mvcstm::{conflict_order, mvc_order, satisfies, History, TxnId};

fn history(seed: u64, sequential: bool) -> History {
    let cfg = RandomConfig { sequential, ..RandomConfig::default() };
    random_history(&mut ChaCha8Rng::seed_from_u64(seed), &cfg)
}

fn permutations(ids: &[TxnId]) -> Vec<Vec<TxnId>> {
    if ids.len() <= 1 {
        return vec![ids.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..ids.len() {
        let mut rest = ids.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn real_time_is_a_strict_partial_order(seed in any::<u64>()) {
        let h = history(seed, false);
        let rt = h.real_time_order();
        let ids = h.txn_ids();
        for &a in &ids {
            prop_assert!(!rt.precedes(a, a));
            for &b in &ids {
                if rt.precedes(a, b) {
                    prop_assert!(!rt.precedes(b, a));
                    for &c in &ids {
                        if rt.precedes(b, c) {
                            prop_assert!(rt.precedes(a, c));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn completion_is_idempotent(seed in any::<u64>()) {
        let once = history(seed, false).mvc_completion();
        prop_assert!(once.is_t_complete());
        prop_assert_eq!(once.mvc_completion(), once);
    }

    #[test]
    fn traces_round_trip(seed in any::<u64>(), sequential in any::<bool>()) {
        let h = history(seed, sequential);
        let text = serialize_trace(h.events());
        prop_assert_eq!(parse_trace(&text).unwrap(), h.events().to_vec());
    }

    #[test]
    fn multi_versioned_histories_are_not_co_opaque(seed in any::<u64>()) {
        let h = history(seed, true);
        if is_multiversioned(&h) == Ok(true) {
            prop_assert!(!check_co_opacity(&h, &CheckOptions::default()).unwrap().member);
        }
    }

    #[test]
    fn legal_histories_satisfy_their_own_order(seed in any::<u64>()) {
        let h = history(seed, true).mvc_completion();
        if is_legal(&h) == Ok(true) {
            prop_assert!(satisfies(&h, &mvc_order(&h).unwrap()));
        }
    }

    #[test]
    fn witnesses_are_legal_and_keep_the_order(seed in any::<u64>()) {
        let h = history(seed, false);
        let v = check_mvc_opacity(&h);
        if let Some(w) = v.witness {
            prop_assert_eq!(is_legal(&w.history), Ok(true));
            prop_assert!(w.history.is_t_sequential());
            let mine = mvc_order(&h).unwrap();
            prop_assert!(mine.pairs().is_subset(mvc_order(&w.history).unwrap().pairs()));
        }
    }

    #[test]
    fn legal_t_sequential_histories_have_acyclic_graphs(seed in any::<u64>()) {
        let h = history(seed, true).mvc_completion();
        for order in permutations(&h.txn_ids()) {
            let s = h.serialize_in_order(&order);
            if is_legal(&s) == Ok(true) {
                prop_assert!(check_mvc_opacity(&s).member);
            }
        }
    }

    #[test]
    fn conflict_pairs_are_order_pairs_when_legal(seed in any::<u64>()) {
        let h = history(seed, true).mvc_completion();
        if is_legal(&h) == Ok(true) {
            let mvc = mvc_order(&h).unwrap();
            for p in conflict_order(&h).unwrap().pairs {
                let same = mvc.pairs().iter().any(|q| q.from == p.from && q.to == p.to);
                prop_assert!(same || p.from.txn() == p.to.txn(), "{} missing", p);
            }
        }
    }

    #[test]
    fn respecting_conflicts_means_equal_conflicts(seed in any::<u64>()) {
        let h = history(seed, true).mvc_completion();
        let co = conflict_order(&h).unwrap().pairs;
        for order in permutations(&h.txn_ids()) {
            let s = h.serialize_in_order(&order);
            let other = conflict_order(&s).unwrap().pairs;
            if other.is_subset(&co) {
                prop_assert_eq!(&other, &co);
            }
        }
    }

    #[test]
    fn satisfying_the_order_preserves_it(seed in any::<u64>()) {
        let h = history(seed, true).mvc_completion();
        if !is_valid(&h) {
            return Ok(());
        }
        let mvc = mvc_order(&h).unwrap();
        for order in permutations(&h.txn_ids()) {
            let s = h.serialize_in_order(&order);
            if satisfies(&s, &mvc) {
                prop_assert!(is_valid(&s));
                let theirs = mvc_order(&s).unwrap();
                prop_assert_eq!(theirs.pairs(), mvc.pairs());
                prop_assert!(satisfies(&s, &theirs));
            }
        }
    }
}
