//! Black boxes that assign real values to strings.
//!
//! Extraction only needs [`BlackBox::score`]. Metrics and generative basis
//! sampling additionally use next-symbol distributions and sampling, which
//! an oracle advertises through [`Capabilities`].

mod cache;
mod external;
mod ngram;
pub mod server;

use std::sync::Arc;

use rand::RngCore;

use crate::automaton::{NextSymbolDistribution, WeightedAutomaton};
use crate::error::{Error, Result};
use crate::word::{Alphabet, Symbol, Word};

pub use cache::{CacheStats, CachedOracle};
pub use external::{Endpoint, ExternalOracle, DEFAULT_TIMEOUT};
pub use ngram::{ngram_train, NGramModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Capabilities {
    pub dist: bool,
    pub sample: bool,
}

impl Capabilities {
    pub const SCORE_ONLY: Capabilities = Capabilities {
        dist: false,
        sample: false,
    };
    pub const ALL: Capabilities = Capabilities {
        dist: true,
        sample: true,
    };
}

/// Anything that maps a string to a finite real score.
///
/// `score` must be a pure function of its input for the oracle's lifetime.
pub trait BlackBox: Send + Sync {
    fn alphabet(&self) -> &Alphabet;

    fn score(&self, word: &[Symbol]) -> Result<f64>;

    fn capabilities(&self) -> Capabilities {
        Capabilities::SCORE_ONLY
    }

    fn next_dist(&self, _prefix: &[Symbol]) -> Result<NextSymbolDistribution> {
        Err(Error::CapabilityMissing("dist"))
    }

    /// Next-symbol distributions after every prefix of `word`, from λ to the
    /// full word.
    fn prefix_dists(&self, word: &[Symbol]) -> Result<Vec<NextSymbolDistribution>> {
        (0..=word.len()).map(|i| self.next_dist(&word[..i])).collect()
    }

    fn sample(&self, _rng: &mut dyn RngCore, _max_len: usize) -> Result<Word> {
        Err(Error::CapabilityMissing("sample"))
    }
}

macro_rules! forward_black_box {
    ($($ptr:ty),*) => {$(
        impl<T: BlackBox + ?Sized> BlackBox for $ptr {
            fn alphabet(&self) -> &Alphabet {
                (**self).alphabet()
            }
            fn score(&self, word: &[Symbol]) -> Result<f64> {
                (**self).score(word)
            }
            fn capabilities(&self) -> Capabilities {
                (**self).capabilities()
            }
            fn next_dist(&self, prefix: &[Symbol]) -> Result<NextSymbolDistribution> {
                (**self).next_dist(prefix)
            }
            fn prefix_dists(&self, word: &[Symbol]) -> Result<Vec<NextSymbolDistribution>> {
                (**self).prefix_dists(word)
            }
            fn sample(&self, rng: &mut dyn RngCore, max_len: usize) -> Result<Word> {
                (**self).sample(rng, max_len)
            }
        }
    )*};
}

forward_black_box!(&T, Box<T>, Arc<T>);

/// A weighted automaton used as an oracle.
#[derive(Clone, Debug)]
pub struct WaOracle {
    wa: Arc<WeightedAutomaton>,
}

pub fn wa_oracle(wa: WeightedAutomaton) -> WaOracle {
    WaOracle { wa: Arc::new(wa) }
}

impl WaOracle {
    pub fn automaton(&self) -> &WeightedAutomaton {
        &self.wa
    }
}

impl BlackBox for WaOracle {
    fn alphabet(&self) -> &Alphabet {
        self.wa.alphabet()
    }

    fn score(&self, word: &[Symbol]) -> Result<f64> {
        self.wa.evaluate(word)
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::ALL
    }

    fn next_dist(&self, prefix: &[Symbol]) -> Result<NextSymbolDistribution> {
        self.wa.next_symbol_distribution(prefix)
    }

    fn prefix_dists(&self, word: &[Symbol]) -> Result<Vec<NextSymbolDistribution>> {
        self.wa.prefix_distributions(word)
    }

    fn sample(&self, rng: &mut dyn RngCore, max_len: usize) -> Result<Word> {
        self.wa.sample(rng, max_len)
    }
}

/// Connects to a SEQBOX/1 endpoint with the default 30 s reply timeout.
pub fn external_oracle(endpoint: &Endpoint, alphabet: Option<Alphabet>) -> Result<ExternalOracle> {
    ExternalOracle::connect(endpoint, alphabet, DEFAULT_TIMEOUT)
}

/// Shorthand for [`CachedOracle::new`].
pub fn cached<O: BlackBox>(inner: O) -> CachedOracle<O> {
    CachedOracle::new(inner)
}
