use proptest::prelude::*;
use scrambler_core::entropy::{
    ball_size_bound, beta_constant, conditional_entropy, is_delta_independent, is_roughly_equal,
    log2_ball_size_bound, mutual_information, shannon_entropy, RoughEqualParams,
};
use scrambler_core::builder::ball_size_exact;
use scrambler_core::measure::{JointDistribution, ProbVector};

fn joint() -> impl Strategy<Value = JointDistribution> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop_oneof![Just(0.0), 0.001f64..1.0], r * c)
            .prop_filter("nonzero", |w| w.iter().any(|&x| x > 0.0))
            .prop_map(move |w| JointDistribution::from_weights(r, c, w).unwrap())
    })
}

proptest! {
    #[test]
    fn conditioning_reduces_entropy(j in joint()) {
        let (p, _) = j.marginals();
        prop_assert!(conditional_entropy(&j) <= shannon_entropy(&p) + 1e-9);
        prop_assert!(conditional_entropy(&j) >= -1e-9);
        prop_assert!(mutual_information(&j) >= -1e-9);
    }

    #[test]
    fn delta_independence_is_symmetric(j in joint(), delta in 0.0f64..2.0) {
        prop_assert_eq!(is_delta_independent(&j, delta), is_delta_independent(&j.transpose(), delta));
    }

    #[test]
    fn delta_independence_is_monotone(j in joint(), d1 in 0.0f64..2.0, d2 in 0.0f64..2.0) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        if is_delta_independent(&j, lo) {
            prop_assert!(is_delta_independent(&j, hi));
        }
    }

    #[test]
    fn good_mass_grows_with_epsilon(
        w in prop::collection::vec(0.001f64..1.0, 1..32),
        n in 1usize..20,
        h in 0.05f64..3.0,
        e1 in 0.01f64..1.0,
        e2 in 0.01f64..1.0,
    ) {
        let p = ProbVector::from_weights(w).unwrap();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = is_roughly_equal(&p, RoughEqualParams::new(lo, n, h).unwrap());
        let b = is_roughly_equal(&p, RoughEqualParams::new(hi, n, h).unwrap());
        prop_assert!(a.good_mass <= b.good_mass + 1e-12);
        for i in &a.good_indices {
            prop_assert!(b.good_indices.contains(i));
        }
    }

    #[test]
    fn ball_bound_dominates_exact(n in 1usize..=60, l in 2usize..=5, num in 0usize..=60) {
        let r = num.min(n / 2);
        let delta = r as f64 / n as f64;
        let exact = ball_size_exact(n, r, l).unwrap() as f64;
        let bound = ball_size_bound(n, delta, l).unwrap();
        prop_assert!(exact <= bound * (1.0 + 1e-12), "n={n} r={r} l={l}: {exact} > {bound}");
    }

    #[test]
    fn beta_is_ball_exponent(delta in 0.0f64..=0.1666, l in 2usize..8, n in 1usize..100) {
        let b = beta_constant(delta, l).unwrap();
        let lg = log2_ball_size_bound(n, 3.0 * delta, l).unwrap();
        prop_assert!((n as f64 * b - lg).abs() < 1e-9 * (1.0 + lg.abs()));
    }
}

#[test]
fn markov_example_values() {
    // H(P|Q) = Σ_q Q(q) H(P | q), checked against a direct sum
    let j = JointDistribution::new(vec![vec![0.3, 0.1], vec![0.2, 0.4]]).unwrap();
    let direct = 0.5 * (-(0.6f64).log2() * 0.6 - (0.4f64).log2() * 0.4)
        + 0.5 * (-(0.2f64).log2() * 0.2 - (0.8f64).log2() * 0.8);
    assert!((conditional_entropy(&j) - direct).abs() < 1e-12);
}
