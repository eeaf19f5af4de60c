//! Distill a bigram language model into a weighted automaton and score it.
//!
//! A random automaton generates a training corpus, a bigram model is fitted
//! on it and plays the black box, and extracted automata of growing rank are
//! compared with the bigram on strings the bigram itself samples.
//!
//! Run with `cargo run --release --example ngram_proxy`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wa_distill::data::random_stochastic_wa;
use wa_distill::metrics::{EvalRole, EvalSet, PreparedReference};
use wa_distill::oracle::{ngram_train, wa_oracle, BlackBox};
use wa_distill::spectral::{prepare, ExtractionConfig};
use wa_distill::{Alphabet, Result};

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let alphabet = Alphabet::new(4)?;
    let source = wa_oracle(random_stochastic_wa(8, &alphabet, &mut rng)?);
    let corpus = (0..5000)
        .map(|_| source.sample(&mut rng, 60))
        .collect::<Result<Vec<_>>>()?;

    let bigram = ngram_train(&corpus, 2, 0.01, alphabet)?;
    let eval_strings = (0..1000)
        .map(|_| bigram.sample(&mut rng, 60))
        .collect::<Result<Vec<_>>>()?;
    let reference = PreparedReference::new(&bigram, &EvalSet::new(eval_strings, EvalRole::Sampled)?)?;

    // One basis and SVD serve every rank.
    let prepared = prepare(&bigram, &ExtractionConfig::new(200, 200, 1, 8, 3))?;
    println!("{} distinct queries", prepared.queries);
    println!(
        "{:>4} {:>10} {:>12} {:>8} {:>8}",
        "rank", "ratio", "kld_bits", "ndcg5", "wer"
    );
    for rank in [1, 2, 3, 5, 8] {
        let (wa, _) = prepared.extract(rank)?;
        let m = reference.evaluate(&wa_oracle(wa), None)?;
        println!(
            "{rank:>4} {:>10.6} {:>12.3e} {:>8.4} {:>8.4}",
            m.perplexity_ratio,
            m.kld,
            m.ndcg5.unwrap_or(f64::NAN),
            m.wer.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
