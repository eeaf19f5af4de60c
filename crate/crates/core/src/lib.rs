//! Extraction of weighted automata from black-box sequence scorers.
//!
//! Given anything that assigns a real value to strings (a trained sequence
//! model, an n-gram model, another automaton, a remote process), the
//! [`spectral`] module samples a prefix/suffix basis, fills Hankel
//! sub-blocks by querying the black box, and turns a truncated SVD of those
//! blocks into a [`WeightedAutomaton`]. The [`metrics`] module measures how
//! faithful the result is: perplexity and KL divergence over string
//! probabilities, NDCG and word error rate over next-symbol predictions.
//!
//! ```
//! use wa_distill::fixtures::two_state_pfa;
//! use wa_distill::oracle::wa_oracle;
//! use wa_distill::spectral::{extract, ExtractionConfig};
//!
//! let target = two_state_pfa();
//! let config = ExtractionConfig::new(50, 50, 2, 6, 7);
//! let (wa, report) = extract(&wa_oracle(target.clone()), &config).unwrap();
//! assert_eq!(report.effective_rank, 2);
//! assert!((wa.evaluate(&[0, 1]).unwrap() - 5.0 / 96.0).abs() < 1e-10);
//! ```
//!
//! Runnable walkthroughs in `examples/`:
//!
//! - `extract_automaton`: recover a two-state automaton from its scores
//! - `ngram_proxy`: distill a bigram language model and score the result
//! - `rank_sweep`: singular value spectrum and quality against rank
//! - `metrics_tour`: perplexity, KL divergence, NDCG and WER on small inputs
//! - `seqbox_loopback`: extraction through the SEQBOX/1 line protocol
//! - `data_formats`: automaton, string, solution, basis and DOT files
//!
//! The `wa-distill` binary wraps the same functionality for batch jobs.

// `!(x > 0.0)` is used on purpose so that NaN fails positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod automaton;
pub mod cli;
pub mod data;
pub mod dot;
pub mod error;
pub mod fixtures;
pub mod metrics;
pub mod oracle;
pub mod spectral;
pub mod word;

pub use automaton::{NextSymbolDistribution, WeightedAutomaton};
pub use error::{Error, Result};
pub use oracle::BlackBox;
pub use word::{Alphabet, Symbol, Word};

/// Shortest round-trip rendering, in scientific notation for very small or
/// very large magnitudes.
pub(crate) fn format_float(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}
