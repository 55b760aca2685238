use mtdist::mergetree::{parse_tree, serialize_tree};
use mtdist::synth::{random_tree, TreeParams};
use mtdist::{delta, EngineOptions, MergeTree};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tree(seed: u64, nodes: usize) -> MergeTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tree(
        &mut rng,
        &TreeParams {
            nodes,
            ..TreeParams::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetric_and_zero_on_self(s1 in any::<u64>(), s2 in any::<u64>(), n1 in 2usize..14, n2 in 2usize..14, h in 0usize..4) {
        let (a, b) = (tree(s1, n1), tree(s2, n2));
        let o = EngineOptions::with_lookahead(h);
        let ab = delta(&a, &b, &o).unwrap();
        let ba = delta(&b, &a, &o).unwrap();
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert_eq!(delta(&a, &a, &o).unwrap(), 0.0);
    }

    #[test]
    fn bounded_by_weights(s1 in any::<u64>(), s2 in any::<u64>(), n1 in 2usize..14, n2 in 2usize..14, h in 0usize..4) {
        let (a, b) = (tree(s1, n1), tree(s2, n2));
        let d = delta(&a, &b, &EngineOptions::with_lookahead(h)).unwrap();
        prop_assert!(d >= (a.total_weight() - b.total_weight()).abs() - 1e-9);
        prop_assert!(d <= a.total_weight() + b.total_weight() + 1e-9);
    }

    #[test]
    fn json_round_trip(s in any::<u64>(), n in 2usize..20) {
        let t = tree(s, n);
        let back = parse_tree(&serialize_tree(&t)).unwrap();
        prop_assert_eq!(serialize_tree(&back), serialize_tree(&t));
        prop_assert_eq!(delta(&t, &back, &EngineOptions::with_lookahead(2)).unwrap(), 0.0);
    }

    #[test]
    fn newick_round_trip(s in any::<u64>(), n in 2usize..20) {
        let t = tree(s, n);
        let back = MergeTree::from_newick(&t.to_newick()).unwrap();
        prop_assert!(delta(&t, &back, &EngineOptions::default()).unwrap() < 1e-9);
    }
}
