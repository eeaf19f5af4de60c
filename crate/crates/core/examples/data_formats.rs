//! Reading and writing the on-disk formats: automata, string files,
//! probability tables, basis dumps and Graphviz output.
//!
//! Run with `cargo run --example data_formats`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wa_distill::data::{load_wa, parse_solution, parse_strings, save_wa, strings_to_text, SolutionTable};
use wa_distill::dot::{to_dot, DEFAULT_DOT_THRESHOLD};
use wa_distill::fixtures::two_state_pfa;
use wa_distill::oracle::{wa_oracle, BlackBox};
use wa_distill::spectral::{generate_basis, Basis, BasisSource};
use wa_distill::Result;

fn main() -> Result<()> {
    let wa = two_state_pfa();
    let json = save_wa(&wa);
    println!("automaton file:\n{json}");
    assert_eq!(load_wa(&json)?.evaluate(&[0, 1])?, wa.evaluate(&[0, 1])?);

    let oracle = wa_oracle(wa.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let strings = (0..4)
        .map(|_| oracle.sample(&mut rng, 20))
        .collect::<Result<Vec<_>>>()?;
    let text = strings_to_text(&strings, 2);
    println!("string file:\n{text}");
    let back = parse_strings(&text, "inline")?;
    assert_eq!(back.strings, strings);

    let probabilities = strings.iter().map(|w| wa.evaluate(w)).collect::<Result<Vec<_>>>()?;
    let table = SolutionTable { probabilities }.to_text();
    println!("solution file:\n{table}");
    assert_eq!(parse_solution(&table)?.probabilities.len(), strings.len());

    let basis = generate_basis(&BasisSource::Uniform(wa.alphabet()), 6, 6, 3, &mut rng)?;
    let dump = basis.dump();
    println!("basis dump:\n{dump}");
    assert_eq!(Basis::parse_dump(&dump)?, basis);

    println!(
        "graphviz, weights under {DEFAULT_DOT_THRESHOLD} hidden:\n{}",
        to_dot(&wa, DEFAULT_DOT_THRESHOLD)
    );
    Ok(())
}
