use std::fmt::Write as _;

use indexmap::IndexSet;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::oracle::BlackBox;
use crate::word::{Alphabet, Word};

/// Number of fruitless draws, per requested element, before basis
/// sampling gives up.
const STALE_DRAWS_PER_ELEMENT: usize = 10;

/// Prefix and suffix sets indexing the rows and columns of Hankel blocks.
///
/// Prefixes are closed under taking prefixes, both sets contain λ, and
/// neither holds duplicates. Iteration order is insertion order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    prefixes: IndexSet<Word>,
    suffixes: IndexSet<Word>,
}

impl Basis {
    /// Builds a basis from explicit lists, checking its invariants.
    pub fn new(prefixes: Vec<Word>, suffixes: Vec<Word>) -> Result<Self> {
        let n_p = prefixes.len();
        let n_s = suffixes.len();
        let prefixes: IndexSet<Word> = prefixes.into_iter().collect();
        let suffixes: IndexSet<Word> = suffixes.into_iter().collect();
        if prefixes.len() != n_p || suffixes.len() != n_s {
            return Err(Error::invalid("basis contains duplicate strings"));
        }
        let basis = Basis { prefixes, suffixes };
        if !basis.prefixes.contains(&Word::empty()) || !basis.suffixes.contains(&Word::empty()) {
            return Err(Error::invalid("basis must contain the empty string on both sides"));
        }
        if !basis.is_prefix_closed() {
            return Err(Error::invalid("prefix set is not prefix-closed"));
        }
        Ok(basis)
    }

    /// Every string of length at most `max_len`, as both prefixes and suffixes.
    pub fn all_words(alphabet: &Alphabet, max_len: usize) -> Self {
        let words = alphabet.words_up_to(max_len);
        Basis {
            prefixes: words.iter().cloned().collect(),
            suffixes: words.into_iter().collect(),
        }
    }

    pub fn prefixes(&self) -> &IndexSet<Word> {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &IndexSet<Word> {
        &self.suffixes
    }

    pub fn prefix_index(&self, w: &[usize]) -> Option<usize> {
        self.prefixes.get_index_of(w)
    }

    pub fn suffix_index(&self, w: &[usize]) -> Option<usize> {
        self.suffixes.get_index_of(w)
    }

    pub fn is_prefix_closed(&self) -> bool {
        self.prefixes
            .iter()
            .all(|w| w.prefixes().all(|p| self.prefixes.contains(p)))
    }

    /// Text dump: a `<|P|> <|S|>` header, then one `<len> <s1> ... <sk>` line
    /// per prefix followed by one per suffix.
    pub fn dump(&self) -> String {
        let mut out = format!("{} {}\n", self.prefixes.len(), self.suffixes.len());
        for w in self.prefixes.iter().chain(&self.suffixes) {
            let _ = write!(out, "{}", w.len());
            for s in w.iter() {
                let _ = write!(out, " {s}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty basis dump"))?;
        let counts: Vec<usize> = header
            .split(' ')
            .map(|t| t.parse().map_err(|_| Error::parse(1, "bad basis header")))
            .collect::<Result<_>>()?;
        let [n_p, n_s] = counts[..] else {
            return Err(Error::parse(1, "basis header needs two counts"));
        };
        let mut words = Vec::with_capacity(n_p + n_s);
        for _ in 0..n_p + n_s {
            let (i, line) = lines
                .next()
                .ok_or_else(|| Error::parse(words.len() + 2, "missing basis line"))?;
            words.push(crate::data::parse_word_line(line, i + 1, None)?);
        }
        let suffixes = words.split_off(n_p);
        Basis::new(words, suffixes).map_err(|e| Error::parse(1, e.to_string()))
    }
}

/// Where basis strings come from.
pub enum BasisSource<'a> {
    /// Length uniform on `[0, max_len]`, then each symbol uniform.
    Uniform(&'a Alphabet),
    /// Chain sampling from the black box itself.
    Generative(&'a dyn BlackBox),
    /// Uniform draws from a list of strings.
    Dataset(&'a [Word]),
}

impl BasisSource<'_> {
    pub fn draw(&self, rng: &mut dyn RngCore, max_len: usize) -> Result<Word> {
        match self {
            BasisSource::Uniform(alphabet) => {
                let len = rng.gen_range(0..=max_len);
                Ok((0..len).map(|_| rng.gen_range(0..alphabet.size())).collect())
            }
            BasisSource::Generative(oracle) => oracle.sample(rng, max_len),
            BasisSource::Dataset(words) => {
                if words.is_empty() {
                    return Err(Error::invalid("dataset for basis sampling is empty"));
                }
                Ok(words[rng.gen_range(0..words.len())].clone())
            }
        }
    }
}

/// Samples strings until at least `p` prefixes are collected (adding every
/// prefix and suffix of each draw), then keeps sampling, adding suffixes
/// only, until at least `s` suffixes are collected.
pub fn generate_basis(
    source: &BasisSource<'_>,
    p: usize,
    s: usize,
    max_len: usize,
    rng: &mut dyn RngCore,
) -> Result<Basis> {
    let mut prefixes = IndexSet::new();
    let mut suffixes = IndexSet::new();
    prefixes.insert(Word::empty());
    suffixes.insert(Word::empty());

    let mut stale = 0;
    while prefixes.len() < p {
        let w = source.draw(rng, max_len)?;
        let before = prefixes.len();
        for pre in w.prefixes() {
            if !prefixes.contains(pre) {
                prefixes.insert(Word::from(pre));
            }
        }
        for suf in w.suffixes() {
            if !suffixes.contains(suf) {
                suffixes.insert(Word::from(suf));
            }
        }
        stale = if prefixes.len() > before { 0 } else { stale + 1 };
        if stale >= STALE_DRAWS_PER_ELEMENT * p {
            return Err(Error::BasisExhausted {
                draws: stale,
                size: prefixes.len(),
                target: p,
            });
        }
    }

    stale = 0;
    while suffixes.len() < s {
        let w = source.draw(rng, max_len)?;
        let before = suffixes.len();
        for suf in w.suffixes() {
            if !suffixes.contains(suf) {
                suffixes.insert(Word::from(suf));
            }
        }
        stale = if suffixes.len() > before { 0 } else { stale + 1 };
        if stale >= STALE_DRAWS_PER_ELEMENT * s {
            return Err(Error::BasisExhausted {
                draws: stale,
                size: suffixes.len(),
                target: s,
            });
        }
    }
    Ok(Basis { prefixes, suffixes })
}
