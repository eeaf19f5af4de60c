use std::sync::atomic::{AtomicU64, Ordering};

use dashmap::DashMap;
use rand::RngCore;

use super::{BlackBox, Capabilities};
use crate::automaton::NextSymbolDistribution;
use crate::error::Result;
use crate::word::{Alphabet, Symbol, Word};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    /// Queries forwarded to the inner oracle, including failed ones.
    pub misses: u64,
    pub entries: usize,
}

/// Memoizes `score` by exact symbol sequence. Failed queries are not cached.
///
/// Concurrent callers may both miss on the same key and query the inner
/// oracle twice; both store the same value.
pub struct CachedOracle<O> {
    inner: O,
    memo: DashMap<Word, f64>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<O: BlackBox> CachedOracle<O> {
    pub fn new(inner: O) -> Self {
        CachedOracle {
            inner,
            memo: DashMap::new(),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            entries: self.memo.len(),
        }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: BlackBox> BlackBox for CachedOracle<O> {
    fn alphabet(&self) -> &Alphabet {
        self.inner.alphabet()
    }

    fn score(&self, word: &[Symbol]) -> Result<f64> {
        if let Some(v) = self.memo.get(word) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(*v);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let v = self.inner.score(word)?;
        self.memo.insert(Word::from(word), v);
        Ok(v)
    }

    fn capabilities(&self) -> Capabilities {
        self.inner.capabilities()
    }

    fn next_dist(&self, prefix: &[Symbol]) -> Result<NextSymbolDistribution> {
        self.inner.next_dist(prefix)
    }

    fn prefix_dists(&self, word: &[Symbol]) -> Result<Vec<NextSymbolDistribution>> {
        self.inner.prefix_dists(word)
    }

    fn sample(&self, rng: &mut dyn RngCore, max_len: usize) -> Result<Word> {
        self.inner.sample(rng, max_len)
    }
}
