use std::collections::HashMap;

use rand::RngCore;

use super::{BlackBox, Capabilities};
use crate::automaton::{draw_clamped, NextSymbolDistribution};
use crate::error::{Error, Result};
use crate::word::{Alphabet, Symbol, Word};

/// Context of at most `order - 1` symbols; `None` is the start marker.
type Context = Vec<Option<Symbol>>;

/// Add-δ smoothed n-gram model over symbols plus an end event.
///
/// Stands in for a trained sequence model: its string probability is the
/// chain `P(s1 | start) ... P(sm | ...) P(end | ...)`.
#[derive(Clone, Debug)]
pub struct NGramModel {
    alphabet: Alphabet,
    order: usize,
    delta: f64,
    counts: HashMap<Context, Vec<u64>>,
}

impl NGramModel {
    pub fn train(data: &[Word], order: usize, delta: f64, alphabet: Alphabet) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("n-gram training data is empty"));
        }
        if order == 0 {
            return Err(Error::invalid("n-gram order must be at least 1"));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid("smoothing delta must be positive and finite"));
        }
        let outcomes = alphabet.size() + 1;
        let mut model = NGramModel {
            alphabet,
            order,
            delta,
            counts: HashMap::new(),
        };
        for w in data {
            model.alphabet.check(w)?;
            for i in 0..=w.len() {
                let outcome = w.get(i).copied().unwrap_or(outcomes - 1);
                let ctx = model.context(&w[..i]);
                model.counts.entry(ctx).or_insert_with(|| vec![0; outcomes])[outcome] += 1;
            }
        }
        Ok(model)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn context(&self, prefix: &[Symbol]) -> Context {
        let width = self.order - 1;
        let pad = width.saturating_sub(prefix.len());
        let start = prefix.len().saturating_sub(width);
        std::iter::repeat_n(None, pad)
            .chain(prefix[start..].iter().map(|&s| Some(s)))
            .collect()
    }

    /// Smoothed conditional distribution after `prefix`; end entry last.
    pub fn conditional(&self, prefix: &[Symbol]) -> Vec<f64> {
        let outcomes = self.alphabet.size() + 1;
        let ctx = self.context(prefix);
        match self.counts.get(&ctx) {
            Some(c) => {
                let total: u64 = c.iter().sum();
                let denom = total as f64 + outcomes as f64 * self.delta;
                c.iter().map(|&k| (k as f64 + self.delta) / denom).collect()
            }
            None => vec![1.0 / outcomes as f64; outcomes],
        }
    }

    pub fn probability(&self, word: &[Symbol]) -> Result<f64> {
        self.alphabet.check(word)?;
        let end = self.alphabet.size();
        let mut p = 1.0;
        for i in 0..word.len() {
            p *= self.conditional(&word[..i])[word[i]];
        }
        Ok(p * self.conditional(word)[end])
    }
}

pub fn ngram_train(data: &[Word], order: usize, delta: f64, alphabet: Alphabet) -> Result<NGramModel> {
    NGramModel::train(data, order, delta, alphabet)
}

impl BlackBox for NGramModel {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn score(&self, word: &[Symbol]) -> Result<f64> {
        self.probability(word)
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::ALL
    }

    fn next_dist(&self, prefix: &[Symbol]) -> Result<NextSymbolDistribution> {
        self.alphabet.check(prefix)?;
        NextSymbolDistribution::new(self.conditional(prefix))
    }

    fn sample(&self, rng: &mut dyn RngCore, max_len: usize) -> Result<Word> {
        let end = self.alphabet.size();
        let mut word = Vec::new();
        while word.len() < max_len {
            let choice = draw_clamped(&self.conditional(&word), rng).expect("smoothed conditionals are positive");
            if choice == end {
                break;
            }
            word.push(choice);
        }
        Ok(Word::from(word))
    }
}
