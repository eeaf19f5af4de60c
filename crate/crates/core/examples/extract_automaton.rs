//! Recover a small probabilistic automaton from its string probabilities.
//!
//! Run with `cargo run --example extract_automaton`.

use wa_distill::fixtures::two_state_pfa;
use wa_distill::oracle::wa_oracle;
use wa_distill::spectral::{extract, ExtractionConfig};
use wa_distill::Result;

fn main() -> Result<()> {
    let target = two_state_pfa();
    let alphabet = target.alphabet().clone();

    // 50 prefixes and suffixes of length at most 6, truncated to rank 2.
    let config = ExtractionConfig::new(50, 50, 2, 6, 7);
    let (wa, report) = extract(&wa_oracle(target.clone()), &config)?;
    print!("{}", report.to_text());

    println!("\n{:>8} {:>14} {:>14}", "word", "target", "extracted");
    for w in alphabet.words_up_to(3) {
        let label: String = w.iter().map(|&s| alphabet.label(s)).collect();
        let label = if label.is_empty() { "λ".to_string() } else { label };
        println!("{label:>8} {:>14.10} {:>14.10}", target.evaluate(&w)?, wa.evaluate(&w)?);
    }

    // The extracted automaton is only defined up to a change of basis, but
    // its next-symbol predictions match the target's.
    let dist = wa.next_symbol_distribution(&[0])?;
    println!(
        "\nafter \"a\": a {:.4}  b {:.4}  end {:.4}",
        dist.get(0),
        dist.get(1),
        dist.end()
    );
    Ok(())
}
