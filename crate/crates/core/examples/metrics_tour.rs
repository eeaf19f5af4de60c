//! The evaluation metrics on hand-written numbers.
//!
//! Run with `cargo run --example metrics_tour`.

use wa_distill::metrics::{kl_divergence, ndcg_at, perplexity, perplexity_ratio, ranking, top1_mismatch};
use wa_distill::Result;

fn main() -> Result<()> {
    // Probabilities of four test strings under the reference, and raw scores
    // from two candidates. Candidate scores are renormalized over the set;
    // the nonpositive score is clamped to a tiny epsilon first.
    let reference = [0.4, 0.3, 0.2, 0.1];
    let close = [0.35, 0.32, 0.22, 0.11];
    let broken = [0.5, 0.5, -0.01, 0.0];

    for (name, cand) in [("close", &close[..]), ("broken", &broken[..])] {
        let p = perplexity(&reference, cand)?;
        println!(
            "{name:>7}: perplexity {:.4}  ratio {:.4}  kld {:.4} bits  zeros {}%",
            p.perplexity,
            perplexity_ratio(&reference, &reference, cand)?,
            kl_divergence(&reference, cand)?,
            p.zeros_pct
        );
    }

    // Next-symbol predictions after one prefix: symbols 0..2 then the end
    // marker. Rankings break ties by index.
    let truth = [0.5, 0.2, 0.2, 0.1];
    let guess = [0.3, 0.4, 0.2, 0.1];
    println!(
        "\nreference ranking {:?}, candidate ranking {:?}",
        ranking(&truth),
        ranking(&guess)
    );
    for n in [1, 2, 4] {
        println!("NDCG@{n} = {:.4}", ndcg_at(&truth, &guess, n).unwrap_or(f64::NAN));
    }
    println!("top-1 mismatch: {}", top1_mismatch(&truth, &guess));
    Ok(())
}
