//! Pinned outputs of the seeded generator and the document format.

use elicit_core::document::{InstanceDocument, RuleName};
use elicit_core::oracle::{random_instance, Dims, InstanceGenerator};
use elicit_core::rational::{int, ratio};

fn dims() -> Dims {
    Dims { m: 3, n: 2, l: 1, k: 2 }
}

#[test]
fn seed_one_instance_is_pinned() {
    let (inst, op) = random_instance(1, dims()).unwrap();
    assert_eq!(inst.c(), &[vec![int(0), ratio(-1, 2), ratio(1, 4)]]);
    assert_eq!(
        inst.alpha(),
        &[vec![ratio(2, 3), int(0), ratio(1, 2)], vec![int(1), int(1), int(0)]]
    );
    let inputs: Vec<_> = op.inputs().iter().map(|x| x.entries().to_vec()).collect();
    assert_eq!(
        inputs,
        vec![vec![int(0), ratio(1, 3), ratio(2, 3)], vec![int(0), ratio(4, 3), int(0)]]
    );
    assert_eq!(op.aggregate().entries(), &[int(0), ratio(1, 3), int(0)]);
}

#[test]
fn generation_is_deterministic() {
    for seed in [0, 7, 42, 1_000_003] {
        let a = random_instance(seed, dims()).unwrap();
        let b = random_instance(seed, dims()).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }
    let mut g = InstanceGenerator::new(9, Dims { m: 4, n: 3, l: 2, k: 3 }).unwrap();
    let mut h = InstanceGenerator::new(9, Dims { m: 4, n: 3, l: 2, k: 3 }).unwrap();
    for _ in 0..5 {
        let (a, b) = (g.next_case().unwrap(), h.next_case().unwrap());
        assert_eq!(a.instance, b.instance);
        assert_eq!(a.operation, b.operation);
    }
}

#[test]
fn seed_one_document_round_trips() {
    let (inst, op) = random_instance(1, dims()).unwrap();
    let doc = InstanceDocument::from_instance(&inst).with_operation(&op, Some(RuleName::Intersection), None);
    let text = doc.to_json();
    assert!(text.contains(r#""-1/2""#));
    let back = InstanceDocument::parse(&text).unwrap();
    assert_eq!(back, doc);
    let inst2 = back.instance().unwrap();
    assert_eq!(inst2, inst);
    assert_eq!(back.operation(&inst2).unwrap(), op);
}
