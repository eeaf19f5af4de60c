//! Algebraic properties of weighted automata that hold for any parameters.

mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wa_distill::fixtures::two_state_pfa;
use wa_distill::{Alphabet, WeightedAutomaton, Word};

fn arb_wa() -> impl Strategy<Value = WeightedAutomaton> {
    (1usize..5, 1usize..4).prop_flat_map(|(n, k)| {
        let entries = n * n * k + 2 * n;
        proptest::collection::vec(-1.0f64..1.0, entries).prop_map(move |v| {
            let alpha0 = v[..n].to_vec();
            let alpha_inf = v[n..2 * n].to_vec();
            let matrices = v[2 * n..]
                .chunks(n * n)
                .map(|c| DMatrix::from_row_slice(n, n, c).scale(0.5))
                .collect();
            WeightedAutomaton::new(Alphabet::new(k).unwrap(), alpha0.into(), matrices, alpha_inf.into()).unwrap()
        })
    })
}

fn arb_word(k: usize, max: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..k, 0..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn evaluation_composes(wa in arb_wa(), u in arb_word(3, 5), v in arb_word(3, 5)) {
        let k = wa.alphabet().size();
        let u: Vec<_> = u.into_iter().map(|s| s % k).collect();
        let v: Vec<_> = v.into_iter().map(|s| s % k).collect();
        // f(uv) = (alpha0^T M_u) (M_v alpha_inf)
        let left = wa.state_vector(&u).unwrap();
        let mut right = wa.alpha_inf().clone();
        for &s in v.iter().rev() {
            right = wa.transition(s) * right;
        }
        let uv = Word::concat(&[&u, &v]);
        let direct = wa.evaluate(&uv).unwrap();
        prop_assert!((left.dot(&right) - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
    }

    #[test]
    fn similarity_transform_preserves_function(
        wa in arb_wa(),
        w in arb_word(3, 6),
        seed in any::<u64>(),
    ) {
        let n = wa.num_states();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = DMatrix::from_fn(n, n, |i, j| {
            use rand::Rng;
            rng.gen_range(-0.5..0.5) + if i == j { 2.0 } else { 0.0 }
        });
        let other = wa.change_basis(&q).unwrap();
        let w: Vec<_> = w.into_iter().map(|s| s % wa.alphabet().size()).collect();
        let (a, b) = (wa.evaluate(&w).unwrap(), other.evaluate(&w).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn stochastic_mass_is_bounded_and_grows(states in 1usize..6, k in 1usize..4, seed in any::<u64>()) {
        let wa = common::random_target(states, k, seed);
        let mut total = 0.0;
        for len in 0..=5 {
            let layer: f64 = wa
                .alphabet()
                .words_up_to(len)
                .iter()
                .filter(|w| w.len() == len)
                .map(|w| wa.evaluate(w).unwrap())
                .sum();
            prop_assert!(layer >= 0.0);
            total += layer;
            prop_assert!(total <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn next_symbol_chain_reproduces_probability(states in 1usize..6, k in 1usize..4, seed in any::<u64>(), len in 0usize..8) {
        // f(w) = prod of conditionals along w, times the end probability.
        let wa = common::random_target(states, k, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let w: Vec<usize> = (0..len).map(|_| rand::Rng::gen_range(&mut rng, 0..k)).collect();
        let dists = wa.prefix_distributions(&w).unwrap();
        let mut chained = 1.0;
        for (d, &s) in dists.iter().zip(&w) {
            prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            chained *= d.get(s);
        }
        chained *= dists.last().unwrap().end();
        let direct = wa.evaluate(&w).unwrap();
        prop_assert!((chained - direct).abs() <= 1e-12 + 1e-9 * direct);
    }
}

#[test]
fn sampled_first_symbol_frequency_matches_distribution() {
    let wa = two_state_pfa();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 100_000;
    let first_a = (0..n)
        .filter(|_| wa.sample(&mut rng, 50).unwrap().first() == Some(&0))
        .count();
    let freq = first_a as f64 / n as f64;
    assert!((freq - 2.0 / 3.0).abs() <= 0.01, "{freq}");
}
