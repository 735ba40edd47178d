use proptest::prelude::*;
use qevo_core::evolution::random_circuit;
use qevo_core::rewrite::optimize_with;
use qevo_core::rng::stream;
use qevo_core::{fidelity_pure, optimize, simulate, Circuit, GateId, Operation, DEFAULT_RULES};
use rand::Rng;

#[test]
fn thousand_random_circuits_keep_their_state() {
    let mut rng = stream(21);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=5);
        let before = random_circuit(n, 0, 15, &mut rng);
        let after = optimize(&before);
        let f = fidelity_pure(&simulate(&before).unwrap(), &simulate(&after).unwrap()).unwrap();
        assert!((f - 1.0).abs() <= 1e-9, "{before:?} -> {after:?} has fidelity {f}");
        assert!(after.depth() <= before.depth());
        assert!(after.t_count() <= before.t_count());
    }
}

#[test]
fn rewritten_state_is_exactly_equal_not_just_up_to_phase() {
    let mut rng = stream(22);
    for _ in 0..300 {
        let before = random_circuit(3, 0, 15, &mut rng);
        let after = optimize(&before);
        let (a, b) = (simulate(&before).unwrap(), simulate(&after).unwrap());
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm_sqr() <= 1e-20);
        }
    }
}

#[test]
fn t_pair_fixture() {
    let c = Circuit::new(
        2,
        vec![Operation::single(GateId::T, 0), Operation::single(GateId::T, 0)],
    )
    .unwrap();
    assert_eq!(c.t_count(), 2);
    let out = optimize(&c);
    assert_eq!(out.t_count(), 0);
    assert_eq!(out.ops(), &[Operation::single(GateId::S, 0)]);
}

proptest! {
    #[test]
    fn optimize_is_idempotent(n in 1usize..=5, len in 0usize..=25, seed in any::<u64>()) {
        let c = random_circuit(n, len, len, &mut stream(seed));
        let once = optimize_with(&c, &DEFAULT_RULES, 50);
        prop_assert!(!once.limit_hit);
        prop_assert_eq!(optimize(&once.circuit), once.circuit.clone());
        prop_assert!(once.passes <= c.len() + 1);
    }
}
