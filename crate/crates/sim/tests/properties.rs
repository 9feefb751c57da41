use proptest::prelude::*;
use twocons_model::{pm1, two_lane};
use twocons_sim::{decode, encode, simulate, LatticeState, ScalingPlan};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn totals_invariant(spins in proptest::collection::vec(0u8..4, 8..40), seed in any::<u64>(), t in 0.0f64..0.5) {
        let m = two_lane(1.5).unwrap();
        let plan = ScalingPlan::eulerian(spins.len()).unwrap().with_l(1).unwrap();
        let st = LatticeState::from_spins(&m, spins, seed, 0);
        let t0 = st.totals();
        let end = simulate(st, &m, &plan, t, &[], &mut |_| {}).unwrap();
        prop_assert_eq!(end.totals(), t0);
    }

    #[test]
    fn same_seed_same_trajectory(spins in proptest::collection::vec(0u8..3, 8..30), seed in any::<u64>()) {
        let m = pm1();
        let plan = ScalingPlan::eulerian(spins.len()).unwrap().with_l(1).unwrap();
        let a = simulate(LatticeState::from_spins(&m, spins.clone(), seed, 4), &m, &plan, 0.3, &[], &mut |_| {}).unwrap();
        let b = simulate(LatticeState::from_spins(&m, spins, seed, 4), &m, &plan, 0.3, &[], &mut |_| {}).unwrap();
        prop_assert_eq!(a.event_hash(), b.event_hash());
        prop_assert_eq!(a.spins, b.spins);
    }

    #[test]
    fn encoding_round_trips(x in 0usize..4096) {
        prop_assert_eq!(encode(&decode(x, 4, 6), 4), x);
    }
}
