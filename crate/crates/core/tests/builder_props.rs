use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scrambler_core::builder::{
    ball_size_exact, build_tree, good_candidates, greedy_two_children, hamming_count, hamming_distance, make_schedule,
    separation_count, BuildConfig, Kappa,
};
use scrambler_core::shift::Block;
use scrambler_core::ShiftMeasure;

fn block(len: usize, l: usize) -> impl Strategy<Value = Block> {
    prop::collection::vec(0..l as u8, len).prop_map(move |s| Block::new(s, l).unwrap())
}

proptest! {
    #[test]
    fn hamming_is_a_metric((a, b, c) in (0usize..40, 2usize..5).prop_flat_map(|(n, l)| (block(n, l), block(n, l), block(n, l)))) {
        let ab = hamming_count(&a, &b).unwrap();
        prop_assert_eq!(ab, hamming_count(&b, &a).unwrap());
        prop_assert_eq!(hamming_count(&a, &a).unwrap(), 0);
        prop_assert!(ab <= hamming_count(&a, &c).unwrap() + hamming_count(&c, &b).unwrap());
        let naive = a.symbols().iter().zip(b.symbols()).filter(|(x, y)| x != y).count();
        prop_assert_eq!(ab, naive);
        let d = hamming_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn greedy_respects_budget(n in 6usize..=12, delta in 0.0f64..0.12, parents in 0usize..3, seed in any::<u64>()) {
        let m = ShiftMeasure::uniform(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cands = good_candidates(&m, n, 0.1, 0, &mut rng).unwrap();
        let keys = Kappa::all_of_length(parents);
        let families: BTreeMap<Kappa, Vec<Block>> = keys.iter().map(|k| (k.clone(), cands.clone())).collect();
        let radius = separation_count(n, delta);
        match greedy_two_children(&families, delta, n) {
            Ok(out) => {
                let picks: Vec<&Block> = out.children.values().flatten().collect();
                for i in 0..picks.len() {
                    for j in i + 1..picks.len() {
                        prop_assert!(hamming_count(picks[i], picks[j]).unwrap() >= radius);
                    }
                }
                // 2^{k+1} balls at most, with 2^k parents at this level
                let budget = (1u128 << (parents + 1)) * ball_size_exact(n, radius, 2).unwrap();
                for &e in out.eliminated.values() {
                    prop_assert!((e as u128) <= budget);
                }
            }
            Err(e) => {
                // exhaustion is only possible once the balls can cover the family
                let cover = (1u128 << (parents + 1)) * ball_size_exact(n, radius - 1, 2).unwrap();
                prop_assert!(cover >= cands.len() as u128, "{e}");
            }
        }
    }
}

#[test]
fn tree_separation_soundness() {
    for seed in 0..4 {
        let mut c = BuildConfig::new(
            ShiftMeasure::uniform(2).unwrap(),
            0.05,
            0.9,
            make_schedule(16, 2, 2).unwrap(),
            2,
        );
        c.seed = seed;
        let t = build_tree(&c).unwrap();
        let leaves = t.leaves();
        for (i, a) in leaves.iter().enumerate() {
            for b in &leaves[i + 1..] {
                let i0 = a.first_difference(b).unwrap();
                for level in i0 + 1..=t.levels() {
                    let (x, y) = (t.node(&a.prefix(level)).unwrap(), t.node(&b.prefix(level)).unwrap());
                    assert!(hamming_distance(x, y).unwrap() >= 3.0 * 0.05);
                }
            }
        }
        assert!(t.audit().passed());
    }
}

#[test]
fn identical_config_gives_identical_tree() {
    let mut c = BuildConfig::new(ShiftMeasure::bernoulli(vec![0.4, 0.6]).unwrap(), 0.04, 0.8, make_schedule(12, 2, 2).unwrap(), 2);
    c.seed = 11;
    assert_eq!(build_tree(&c).unwrap(), build_tree(&c).unwrap());
    c.seed = 12;
    let other = build_tree(&c).unwrap();
    c.seed = 11;
    assert_ne!(build_tree(&c).unwrap(), other);
}
