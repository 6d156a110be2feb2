use levine_core::game::{self, BiasedMeasure};
use levine_core::io;
use levine_core::rat::{self, rat, Rat};
use levine_core::recursive;
use levine_core::search::{GridState, Mutation, Player};
use levine_core::HStrategy;
use proptest::prelude::*;

fn strategy(h: u32) -> impl Strategy<Value = HStrategy> {
    proptest::collection::vec(1..=h as u8, 1usize << h)
        .prop_map(move |t| HStrategy::new(h, t).unwrap())
}

fn pair(h: u32) -> impl Strategy<Value = (HStrategy, HStrategy)> {
    (strategy(h), strategy(h))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swapping_players_keeps_the_value((k1, k2) in pair(4)) {
        prop_assert_eq!(game::win_prob(&k1, &k2).unwrap(), game::win_prob(&k2, &k1).unwrap());
    }

    #[test]
    fn unbiased_measure_is_uniform((k1, k2) in pair(3)) {
        let biased = game::win_prob_biased(&k1, &k2, &BiasedMeasure::new(rat(1, 2)).unwrap()).unwrap();
        prop_assert_eq!(biased, game::win_prob(&k1, &k2).unwrap());
    }

    #[test]
    fn joint_polynomial_matches_biased_value((k1, k2) in pair(3), num in 1i64..10) {
        let p = rat(num, 10);
        let poly = game::win_prob_joint_poly(&k1, &k2).unwrap();
        let direct = game::win_prob_biased(&k1, &k2, &BiasedMeasure::new(p.clone()).unwrap()).unwrap();
        prop_assert_eq!(poly.eval(&p), direct);
    }

    #[test]
    fn incremental_updates_track_full_evaluation(
        (k1, k2) in pair(5),
        moves in proptest::collection::vec((any::<bool>(), 0usize..32, 1u8..=5), 1..40),
    ) {
        let mut state = GridState::new(k1, k2).unwrap();
        for (a, pos, value) in moves {
            let player = if a { Player::A } else { Player::B };
            let m = Mutation { player, pos, value };
            let before = state.value();
            let delta = state.incremental_eval(&m);
            let undo = state.apply(&m).unwrap();
            let (k1, k2) = state.pair();
            let after = game::win_prob(k1, k2).unwrap();
            prop_assert_eq!(&after - &before, delta.clone());
            prop_assert_eq!(state.value(), after);
            prop_assert_eq!(state.incremental_eval(&undo), -delta);
        }
    }

    #[test]
    fn strategy_files_round_trip((k1, k2) in pair(4)) {
        let text = io::strategy_json(&k1, &k2);
        prop_assert_eq!(io::parse_strategy_json(&text).unwrap(), (k1, k2));
    }

    #[test]
    fn values_are_multiples_of_four_pow((k1, k2) in pair(4)) {
        let v = game::win_prob(&k1, &k2).unwrap();
        prop_assert!(rat::is_multiple_of_four_pow(&v, 4));
        prop_assert!(recursive::gap_lemma_check(&v, 4).unwrap());
    }

    #[test]
    fn propagation_is_monotone_and_capped(
        extra in proptest::collection::btree_map(2u32..9, 0i64..=350, 0..5),
    ) {
        let mut base = std::collections::BTreeMap::from([(1, rat(1, 4))]);
        base.extend(extra.into_iter().map(|(h, n)| (h, rat(n, 1000))));
        let table = recursive::propagate_lower_bounds(&base, &recursive::standard_recurrences(), 14).unwrap();
        let mut prev = Rat::from_integer(0.into());
        for e in table.values() {
            prop_assert!(e.value >= prev);
            prop_assert!(e.value <= rat(7, 20));
            prev = e.value.clone();
        }
    }
}
