use std::fs;
use std::path::PathBuf;

use mvcstm::membership::{audit_olsness, audit_permissiveness, check_mvc_opacity, CheckOptions, Criterion};
use mvcstm::trace::parse_trace;
use mvcstm::{CheckError, History, ObjectId, OpRef, TxnId};

fn fixture(name: &str) -> History {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    History::build(parse_trace(&fs::read_to_string(path).unwrap()).unwrap()).unwrap()
}

#[test]
fn forced_abort_is_permissive_but_not_ols() {
    let h = fixture("h_ext1_x2.trace");
    let opts = CheckOptions::default();
    assert!(check_mvc_opacity(&h).member);
    assert_eq!(audit_permissiveness(&h, Criterion::MvcOpacity, &opts).unwrap(), vec![]);
    let read = OpRef::Read { txn: TxnId(3), object: ObjectId::new("x"), value: 2 };
    assert_eq!(audit_olsness(&h, Criterion::MvcOpacity, &opts).unwrap(), vec![(TxnId(4), read, 1)]);
}

// Opacity only needs some legal serialization, so T4 could have committed
// here (as T1 T5 T4 T2 T3); the abort is forced only by the stricter class.
#[test]
fn opacity_would_have_kept_the_transaction() {
    let h = fixture("h_ext1_x2.trace");
    let opts = CheckOptions::default();
    assert_eq!(audit_permissiveness(&h, Criterion::Opacity, &opts).unwrap(), vec![TxnId(4)]);
    assert!(matches!(audit_olsness(&h, Criterion::Opacity, &opts), Err(CheckError::NotPermissive(_))));
}
