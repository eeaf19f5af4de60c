//! How extraction quality depends on the truncation rank.
//!
//! The Hankel block of a 12-state random automaton is filled once; every
//! rank reuses the same SVD. The singular value spectrum shows where the
//! target's rank ends.
//!
//! Run with `cargo run --release --example rank_sweep`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wa_distill::data::random_stochastic_wa;
use wa_distill::metrics::{EvalRole, EvalSet, PreparedReference};
use wa_distill::oracle::{wa_oracle, BlackBox};
use wa_distill::spectral::{prepare, ExtractionConfig};
use wa_distill::{Alphabet, Result};

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let target = wa_oracle(random_stochastic_wa(12, &Alphabet::new(3)?, &mut rng)?);
    let strings = (0..1000)
        .map(|_| target.sample(&mut rng, 200))
        .collect::<Result<Vec<_>>>()?;
    let reference = PreparedReference::new(&target, &EvalSet::new(strings, EvalRole::Sampled)?)?;

    let prepared = prepare(&target, &ExtractionConfig::new(150, 150, 1, 6, 9))?;
    let sv = prepared.svd.singular_values();
    println!("leading singular values:");
    for (i, s) in sv.iter().take(15).enumerate() {
        println!("  {:>2}: {s:.3e}", i + 1);
    }

    println!("\n{:>4} {:>5} {:>12} {:>8}", "rank", "eff", "kld_bits", "ndcg5");
    for rank in 1..=14 {
        let (wa, report) = prepared.extract(rank)?;
        let m = reference.evaluate(&wa_oracle(wa), None)?;
        println!(
            "{rank:>4} {:>5} {:>12.3e} {:>8.5}",
            report.effective_rank,
            m.kld,
            m.ndcg5.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
